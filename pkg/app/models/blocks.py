"""
Блочная структура пространства: грубое разбиение осей (по нему действуют масштабы)
и тонкое разбиение, измельчающее грубое (по нему блочно-диагональна ортогональная часть).
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Sequence, Tuple

from app.exceptions import BlockMismatchError, InvariantError

Partition = Tuple[Tuple[int, ...], ...]


def _check_partition(blocks: Partition, dimension: int, name: str) -> None:
    seen = [axis for block in blocks for axis in block]
    if any(len(block) == 0 for block in blocks):
        raise InvariantError(f"{name}: пустой блок")
    if sorted(seen) != list(range(dimension)):
        raise InvariantError(f"{name}: блоки должны разбивать оси 0..{dimension - 1} без пересечений")


@dataclass(frozen=True)
class BlockStructure:
    """Размерность d, грубые блоки V'_• и тонкие блоки V_•; factors задаёт разложение V×W."""
    dimension: int
    coarse: Partition
    fine: Partition
    factors: Tuple["BlockStructure", ...] = field(default=(), compare=True)

    def __post_init__(self):
        if self.dimension < 1:
            raise InvariantError("размерность должна быть положительной")
        object.__setattr__(self, "coarse", tuple(tuple(b) for b in self.coarse))
        object.__setattr__(self, "fine", tuple(tuple(b) for b in self.fine))
        _check_partition(self.coarse, self.dimension, "coarse")
        _check_partition(self.fine, self.dimension, "fine")
        owner = self.coarse_of_axis
        for block in self.fine:
            if len({owner[a] for a in block}) != 1:
                raise InvariantError(f"тонкий блок {list(block)} не лежит в одном грубом блоке")

    @classmethod
    def trivial(cls, dimension: int) -> "BlockStructure":
        axes = tuple(range(dimension))
        return cls(dimension, (axes,), (axes,))

    @classmethod
    def product(cls, left: "BlockStructure", right: "BlockStructure") -> "BlockStructure":
        shift = left.dimension
        coarse = left.coarse + tuple(tuple(a + shift for a in b) for b in right.coarse)
        fine = left.fine + tuple(tuple(a + shift for a in b) for b in right.fine)
        return cls(left.dimension + right.dimension, coarse, fine, (left, right))

    @property
    def block_count(self) -> int:
        return len(self.coarse)

    @cached_property
    def coarse_of_axis(self) -> Dict[int, int]:
        return {axis: j for j, block in enumerate(self.coarse) for axis in block}

    @cached_property
    def fine_of_axis(self) -> Dict[int, int]:
        return {axis: j for j, block in enumerate(self.fine) for axis in block}

    @property
    def is_product(self) -> bool:
        return len(self.factors) == 2

    def factor_axes(self, side: int) -> Tuple[int, ...]:
        """Оси левого (side=0) или правого (side=1) сомножителя."""
        if not self.is_product:
            raise BlockMismatchError("структура не является произведением V×W")
        left = self.factors[0].dimension
        if side == 0:
            return tuple(range(left))
        return tuple(range(left, self.dimension))

    def factor_blocks(self, side: int) -> Tuple[int, ...]:
        """Номера грубых блоков левого или правого сомножителя."""
        if not self.is_product:
            raise BlockMismatchError("структура не является произведением V×W")
        k = self.factors[0].block_count
        if side == 0:
            return tuple(range(k))
        return tuple(range(k, self.block_count))

    def require_same(self, other: "BlockStructure", what: str = "объекты") -> None:
        if self != other:
            raise BlockMismatchError(f"{what} заданы над разными блочными структурами")


def coarse_permutation(matrix: Sequence[Sequence], blocks: BlockStructure, tolerance: float = 0.0) -> Tuple[int, ...]:
    """
    Перестановка грубых блоков, которую индуцирует матрица: блок j переходит в блок π[j].
    Матрица должна переводить каждый грубый блок целиком в грубый блок той же размерности.
    """
    owner = blocks.coarse_of_axis
    perm = []
    for j, block in enumerate(blocks.coarse):
        targets = {
            owner[row]
            for row in range(blocks.dimension)
            for col in block
            if abs(matrix[row][col]) > tolerance
        }
        if len(targets) != 1:
            raise InvariantError(f"матрица не переводит грубый блок {j} в один грубый блок")
        (k,) = targets
        if len(blocks.coarse[k]) != len(block):
            raise InvariantError(f"грубые блоки {j} и {k} разной размерности")
        perm.append(k)
    if sorted(perm) != list(range(blocks.block_count)):
        raise InvariantError("индуцированное отображение грубых блоков не биективно")
    return tuple(perm)


def check_fine_block_diagonal(matrix: Sequence[Sequence], blocks: BlockStructure, tolerance: float = 0.0) -> bool:
    owner = blocks.fine_of_axis
    d = blocks.dimension
    return all(
        abs(matrix[r][c]) <= tolerance
        for r in range(d)
        for c in range(d)
        if owner[r] != owner[c]
    )
