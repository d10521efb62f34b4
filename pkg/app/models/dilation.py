"""
Аффинные отображения растяжения f(v) = O·D·v + t:
O - ортогональная матрица, блочно-диагональная по тонким блокам,
D - положительный масштаб на каждом грубом блоке, t - сдвиг.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple, Union

from app.exceptions import BlockMismatchError, InvariantError
from app.models.blocks import BlockStructure, check_fine_block_diagonal, coarse_permutation
from app.models.linalg import (
    Matrix,
    Vector,
    block_diag,
    identity_matrix,
    mat_mul,
    mat_vec,
    sub_matrix,
    transpose,
    vec_add,
)
from app.models.numeric import Numeric, Scalar


@dataclass(frozen=True)
class DilationMap:
    blocks: BlockStructure
    ortho: Matrix
    scales: Tuple[Scalar, ...]
    translation: Vector

    def __post_init__(self):
        d = self.blocks.dimension
        object.__setattr__(self, "ortho", tuple(tuple(row) for row in self.ortho))
        object.__setattr__(self, "scales", tuple(self.scales))
        object.__setattr__(self, "translation", tuple(self.translation))
        if len(self.ortho) != d or any(len(row) != d for row in self.ortho):
            raise InvariantError(f"ортогональная часть должна быть матрицей {d}×{d}")
        if len(self.scales) != self.blocks.block_count:
            raise InvariantError("нужен ровно один масштаб на грубый блок")
        if len(self.translation) != d:
            raise InvariantError(f"сдвиг должен иметь длину {d}")
        if any(s <= 0 for s in self.scales):
            raise InvariantError("все масштабы должны быть строго положительными")

    # ----- конструкторы -----

    @classmethod
    def identity(cls, blocks: BlockStructure, num: Numeric) -> "DilationMap":
        return cls(blocks, identity_matrix(blocks.dimension, num.one, num.zero),
                   (num.one,) * blocks.block_count, (num.zero,) * blocks.dimension)

    @classmethod
    def scaling(cls, blocks: BlockStructure, factor: Union[Scalar, Sequence[Scalar]], num: Numeric) -> "DilationMap":
        """λ·id: одинаковый масштаб на всех грубых блоках или кортеж масштабов по блокам."""
        if isinstance(factor, (tuple, list)):
            scales = tuple(num.coerce(s) for s in factor)
        else:
            scales = (num.coerce(factor),) * blocks.block_count
        return cls(blocks, identity_matrix(blocks.dimension, num.one, num.zero),
                   scales, (num.zero,) * blocks.dimension)

    @classmethod
    def dilation(cls, blocks: BlockStructure, scale: Union[Scalar, Sequence[Scalar]],
                 translation: Sequence, num: Numeric) -> "DilationMap":
        base = cls.scaling(blocks, scale, num)
        return cls(blocks, base.ortho, base.scales, tuple(num.coerce(t) for t in translation))

    # ----- геометрия -----

    def coarse_permutation(self, tolerance: float = 0.0) -> Tuple[int, ...]:
        return coarse_permutation(self.ortho, self.blocks, tolerance)

    def _diag_apply(self, v: Sequence[Scalar]) -> Vector:
        owner = self.blocks.coarse_of_axis
        return tuple(self.scales[owner[axis]] * x for axis, x in enumerate(v))

    def apply(self, v: Sequence[Scalar]) -> Vector:
        return vec_add(mat_vec(self.ortho, self._diag_apply(v)), self.translation)

    def __call__(self, v: Sequence[Scalar]) -> Vector:
        return self.apply(v)

    def then_scaled(self, factor: Scalar) -> "DilationMap":
        """f∘(λ·id): масштабы умножаются на λ, сдвиг не меняется."""
        return DilationMap(self.blocks, self.ortho, tuple(s * factor for s in self.scales), self.translation)

    def block_scaled(self, factors: Sequence[Scalar]) -> "DilationMap":
        """f∘diag(λ_j): покомпонентное умножение масштабов по грубым блокам."""
        return DilationMap(self.blocks, self.ortho, tuple(s * f for s, f in zip(self.scales, factors)), self.translation)

    def project(self, side: int) -> "DilationMap":
        """Проекция отображения произведения V×W на сомножитель."""
        axes = self.blocks.factor_axes(side)
        coarse = self.blocks.factor_blocks(side)
        return DilationMap(
            self.blocks.factors[side],
            sub_matrix(self.ortho, axes, axes),
            tuple(self.scales[j] for j in coarse),
            tuple(self.translation[a] for a in axes),
        )

    def product(self, other: "DilationMap") -> "DilationMap":
        """f × g на V×W."""
        zero = self.translation[0] * 0 if self.translation else 0
        return DilationMap(
            BlockStructure.product(self.blocks, other.blocks),
            block_diag(self.ortho, other.ortho, zero),
            self.scales + other.scales,
            self.translation + other.translation,
        )

    def close_to(self, other: "DilationMap", num: Numeric) -> bool:
        if self.blocks != other.blocks:
            return False
        if num.exact:
            return self == other
        pairs = [
            *zip((x for row in self.ortho for x in row), (y for row in other.ortho for y in row)),
            *zip(self.scales, other.scales),
            *zip(self.translation, other.translation),
        ]
        return all(num.eq(a, b) for a, b in pairs)


def validate_map(f: DilationMap, num: Numeric) -> None:
    """Проверяет ортогональность и блочную диагональность; бросает InvariantError."""
    d = f.blocks.dimension
    tol = 0.0 if num.exact else num.tolerance
    if num.exact:
        for row in f.ortho:
            if not all(isinstance(x, (int, Fraction)) for x in row):
                raise InvariantError("в режиме Exact ортогональная часть должна быть рациональной")
            if sorted(abs(x) for x in row) != [0] * (d - 1) + [1]:
                raise InvariantError("в режиме Exact ортогональная часть должна быть знаковой перестановкой")
    gram = mat_mul(transpose(f.ortho), f.ortho)
    for i in range(d):
        for j in range(d):
            expected = 1 if i == j else 0
            if abs(gram[i][j] - expected) > tol:
                raise InvariantError(f"матрица не ортогональна: (OᵀO)[{i}][{j}] = {gram[i][j]}")
    if not check_fine_block_diagonal(f.ortho, f.blocks, tol):
        raise InvariantError("ортогональная часть имеет ненулевые элементы между тонкими блоками")


def map_compose(f: DilationMap, g: DilationMap) -> DilationMap:
    """f∘g. Масштаб блока j композиции равен s_f[π_g(j)]·s_g[j]."""
    if f.blocks != g.blocks:
        raise BlockMismatchError("композиция отображений над разными блочными структурами")
    perm = g.coarse_permutation()
    scales = tuple(f.scales[perm[j]] * g.scales[j] for j in range(len(g.scales)))
    return DilationMap(f.blocks, mat_mul(f.ortho, g.ortho), scales, f.apply(g.translation))


def map_invert(f: DilationMap) -> DilationMap:
    """f⁻¹(w) = D⁻¹·Oᵀ·(w − t), записанное снова в виде O'·D'·w + t'."""
    perm = f.coarse_permutation()
    scales = [None] * len(f.scales)
    for j, s in enumerate(f.scales):
        scales[perm[j]] = 1 / s
    ortho_t = transpose(f.ortho)
    partial = DilationMap(f.blocks, ortho_t, tuple(scales), tuple(0 * x for x in f.translation))
    shift = partial.apply(f.translation)
    return DilationMap(f.blocks, ortho_t, tuple(scales), tuple(-x for x in shift))
