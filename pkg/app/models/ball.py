"""
Произведения открытых шаров по грубым блокам и предикаты вложения/непересечения.
Касание снаружи считается непересечением, касание изнутри - вложением.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

from app.exceptions import BlockMismatchError, InvariantError
from app.models.blocks import BlockStructure
from app.models.dilation import DilationMap
from app.models.linalg import Vector, norm2, vec_sub
from app.models.numeric import Numeric, Scalar


@dataclass(frozen=True)
class ProductBall:
    blocks: BlockStructure
    center: Vector
    radii: Tuple[Scalar, ...]

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(self.center))
        object.__setattr__(self, "radii", tuple(self.radii))
        if len(self.center) != self.blocks.dimension:
            raise InvariantError(f"центр должен иметь длину {self.blocks.dimension}")
        if len(self.radii) != self.blocks.block_count:
            raise InvariantError("нужен ровно один радиус на грубый блок")
        if any(r <= 0 for r in self.radii):
            raise InvariantError("радиусы должны быть строго положительными")

    @classmethod
    def centered(cls, blocks: BlockStructure, radius, num: Numeric) -> "ProductBall":
        """B(0; ε) с одинаковым радиусом либо кортежем радиусов по блокам."""
        if isinstance(radius, (tuple, list)):
            radii = tuple(num.coerce(r) for r in radius)
        else:
            radii = (num.coerce(radius),) * blocks.block_count
        return cls(blocks, (num.zero,) * blocks.dimension, radii)

    def block_center(self, j: int) -> Vector:
        return tuple(self.center[a] for a in self.blocks.coarse[j])

    @property
    def is_origin_centered(self) -> bool:
        return all(c == 0 for c in self.center)

    def scaled(self, factor: Scalar) -> "ProductBall":
        """λB: радиусы умножаются на λ, центр сохраняется (для B с центром в нуле это λ·B)."""
        return ProductBall(self.blocks, self.center, tuple(r * factor for r in self.radii))

    def project(self, side: int) -> "ProductBall":
        axes = self.blocks.factor_axes(side)
        return ProductBall(
            self.blocks.factors[side],
            tuple(self.center[a] for a in axes),
            tuple(self.radii[j] for j in self.blocks.factor_blocks(side)),
        )

    def product(self, other: "ProductBall") -> "ProductBall":
        return ProductBall(BlockStructure.product(self.blocks, other.blocks),
                           self.center + other.center, self.radii + other.radii)


@dataclass(frozen=True)
class BallRelation:
    contains: bool
    disjoint: bool
    intersects: bool


def map_image(f: DilationMap, ball: ProductBall) -> ProductBall:
    """f(B): центр f(c), радиус блока π(j) равен s_j·r_j."""
    if f.blocks != ball.blocks:
        raise BlockMismatchError("отображение и шар заданы над разными блочными структурами")
    perm = f.coarse_permutation()
    radii = [None] * len(ball.radii)
    for j, r in enumerate(ball.radii):
        radii[perm[j]] = f.scales[j] * r
    return ProductBall(ball.blocks, f.apply(ball.center), tuple(radii))


def block_distance2(a: ProductBall, b: ProductBall, j: int) -> Scalar:
    return norm2(vec_sub(a.block_center(j), b.block_center(j)))


def contains(a: ProductBall, b: ProductBall, num: Numeric) -> bool:
    """A ⊆ B: в каждом блоке r_A ≤ r_B и |c_A − c_B|² ≤ (r_B − r_A)²."""
    for j in range(a.blocks.block_count):
        ra, rb = a.radii[j], b.radii[j]
        if not num.le(ra, rb):
            return False
        if not num.le(block_distance2(a, b, j), (rb - ra) ** 2):
            return False
    return True


def disjoint(a: ProductBall, b: ProductBall, num: Numeric) -> bool:
    """A ∩ B = ∅: хотя бы в одном блоке |c_A − c_B|² ≥ (r_A + r_B)²."""
    return any(
        num.ge(block_distance2(a, b, j), (a.radii[j] + b.radii[j]) ** 2)
        for j in range(a.blocks.block_count)
    )


def ball_relations(a: ProductBall, b: ProductBall, num: Numeric) -> BallRelation:
    if a.blocks != b.blocks:
        raise BlockMismatchError("шары заданы над разными блочными структурами")
    apart = disjoint(a, b, num)
    return BallRelation(contains=contains(a, b, num), disjoint=apart, intersects=not apart)


def contains_point(ball: ProductBall, point: Sequence[Scalar], num: Numeric, strict: bool = True) -> bool:
    """Точка лежит в открытом (strict) или замкнутом произведении шаров."""
    for j, block in enumerate(ball.blocks.coarse):
        d2 = sum((point[a] - ball.center[a]) ** 2 for a in block)
        r2 = ball.radii[j] ** 2
        inside = num.lt(d2, r2) if strict else num.le(d2, r2)
        if not inside:
            return False
    return True
