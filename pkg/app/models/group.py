"""
Конечные группы с ортогональными представлениями, согласованными с блочной структурой.
Элементы адресуются индексами, таблица умножения хранится целиком.
"""
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Dict, List, Sequence, Tuple

from app.exceptions import InvariantError
from app.models.blocks import BlockStructure, check_fine_block_diagonal, coarse_permutation
from app.models.dilation import DilationMap
from app.models.linalg import Matrix, block_diag, identity_matrix, mat_mul, mat_vec, transpose
from app.models.numeric import Numeric


@dataclass(frozen=True)
class GroupRep:
    blocks: BlockStructure
    elements: Tuple[str, ...]
    table: Tuple[Tuple[int, ...], ...]
    matrices: Tuple[Matrix, ...]
    identity: int = 0
    factors: Tuple["GroupRep", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "table", tuple(tuple(row) for row in self.table))
        object.__setattr__(self, "matrices", tuple(tuple(tuple(r) for r in m) for m in self.matrices))
        n = len(self.elements)
        if n == 0:
            raise InvariantError("группа не может быть пустой")
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise InvariantError(f"таблица умножения должна быть {n}×{n}")
        if len(self.matrices) != n:
            raise InvariantError("нужна ровно одна матрица на элемент группы")
        if not 0 <= self.identity < n:
            raise InvariantError("индекс единицы вне диапазона")

    # ----- конструкторы -----

    @classmethod
    def trivial(cls, blocks: BlockStructure, num: Numeric) -> "GroupRep":
        return cls(blocks, ("e",), ((0,),), (identity_matrix(blocks.dimension, num.one, num.zero),), 0)

    @classmethod
    def from_generators(cls, blocks: BlockStructure, generators: Dict[str, Matrix], num: Numeric,
                        limit: int = 1024) -> "GroupRep":
        """
        Замыкание множества образующих матриц поиском в ширину.
        Элементы называются словами в образующих, единица - "e".
        """
        one = identity_matrix(blocks.dimension, num.one, num.zero)
        names = ["e"]
        found: List[Matrix] = [one]
        queue = deque([0])
        gens = [(name, tuple(tuple(num.coerce(x) for x in row) for row in m)) for name, m in generators.items()]
        while queue:
            current = queue.popleft()
            for name, g in gens:
                candidate = mat_mul(found[current], g)
                index = _find_matrix(found, candidate, num)
                if index is None:
                    if len(found) >= limit:
                        raise InvariantError(f"группа, порождённая образующими, больше {limit} элементов")
                    word = name if names[current] == "e" else f"{names[current]}{name}"
                    names.append(word)
                    found.append(candidate)
                    queue.append(len(found) - 1)
        table = tuple(
            tuple(_find_matrix(found, mat_mul(a, b), num) for b in found)
            for a in found
        )
        return cls(blocks, tuple(names), table, tuple(found), 0)

    @classmethod
    def product(cls, left: "GroupRep", right: "GroupRep") -> "GroupRep":
        """Прямое произведение G×H с блочно-диагональными матрицами на V×W."""
        pairs = list(product(range(len(left.elements)), range(len(right.elements))))
        index = {p: k for k, p in enumerate(pairs)}
        if len(pairs) == 1:
            names = ("e",)
        else:
            names = tuple(f"({left.elements[a]},{right.elements[b]})" for a, b in pairs)
        table = tuple(
            tuple(index[(left.table[a][c], right.table[b][d])] for c, d in pairs)
            for a, b in pairs
        )
        zero = left.matrices[0][0][0] * 0
        matrices = tuple(block_diag(left.matrices[a], right.matrices[b], zero) for a, b in pairs)
        return cls(BlockStructure.product(left.blocks, right.blocks), names, table, matrices,
                   index[(left.identity, right.identity)], (left, right))

    # ----- групповые операции -----

    @property
    def order(self) -> int:
        return len(self.elements)

    def multiply(self, g: int, h: int) -> int:
        return self.table[g][h]

    @cached_property
    def _inverses(self) -> Tuple[int, ...]:
        result = []
        for g in range(self.order):
            inv = [h for h in range(self.order) if self.table[g][h] == self.identity]
            if len(inv) != 1:
                raise InvariantError(f"элемент {self.elements[g]} не имеет единственного обратного")
            result.append(inv[0])
        return tuple(result)

    def inverse(self, g: int) -> int:
        return self._inverses[g]

    def index_of(self, label: str) -> int:
        try:
            return self.elements.index(label)
        except ValueError:
            raise InvariantError(f"элемент {label!r} не принадлежит группе") from None

    def coarse_permutation(self, g: int) -> Tuple[int, ...]:
        return coarse_permutation(self.matrices[g], self.blocks)

    def is_subgroup(self, subset: Sequence[int]) -> bool:
        members = set(subset)
        if self.identity not in members:
            return False
        return all(self.table[a][b] in members for a in members for b in members)

    def right_cosets(self, subgroup: Sequence[int]) -> List[Tuple[int, ...]]:
        """
        Правые смежные классы Hg. Представитель - элемент с наименьшим индексом,
        классы упорядочены по представителям.
        """
        if not self.is_subgroup(subgroup):
            raise InvariantError("множество не является подгруппой")
        remaining = set(range(self.order))
        cosets = []
        for g in range(self.order):
            if g not in remaining:
                continue
            coset = tuple(sorted({self.table[h][g] for h in subgroup}))
            remaining.difference_update(coset)
            cosets.append(coset)
        return cosets

    def coset_representatives(self, subgroup: Sequence[int]) -> List[int]:
        return [coset[0] for coset in self.right_cosets(subgroup)]

    def project(self, side: int) -> "GroupRep":
        if len(self.factors) != 2:
            raise InvariantError("представление не является произведением")
        return self.factors[side]


def _find_matrix(found: Sequence[Matrix], candidate: Matrix, num: Numeric):
    for k, m in enumerate(found):
        if num.exact:
            if m == candidate:
                return k
        elif all(num.eq(a, b) for ra, rb in zip(m, candidate) for a, b in zip(ra, rb)):
            return k
    return None


def validate_group(rep: GroupRep, num: Numeric) -> None:
    """Проверяет аксиомы группы, гомоморфность и согласованность с блоками; бросает InvariantError."""
    n = rep.order
    if any(not 0 <= x < n for row in rep.table for x in row):
        raise InvariantError("таблица умножения не замкнута")
    e = rep.identity
    if any(rep.table[e][g] != g or rep.table[g][e] != g for g in range(n)):
        raise InvariantError("единица таблицы не является нейтральным элементом")
    for a, b, c in product(range(n), repeat=3):
        if rep.table[rep.table[a][b]][c] != rep.table[a][rep.table[b][c]]:
            raise InvariantError(f"нарушена ассоциативность на ({rep.elements[a]}, {rep.elements[b]}, {rep.elements[c]})")
    rep.inverse(0)  # проверка существования обратных
    tol = 0.0 if num.exact else num.tolerance
    d = rep.blocks.dimension
    for g, m in enumerate(rep.matrices):
        gram = mat_mul(transpose(m), m)
        if any(abs(gram[i][j] - (1 if i == j else 0)) > tol for i in range(d) for j in range(d)):
            raise InvariantError(f"матрица элемента {rep.elements[g]} не ортогональна")
        if not _maps_fine_blocks(m, rep.blocks, tol):
            raise InvariantError(f"матрица элемента {rep.elements[g]} не сохраняет тонкие блоки")
        coarse_permutation(m, rep.blocks, tol)
    for a, b in product(range(n), repeat=2):
        lhs = rep.matrices[rep.table[a][b]]
        rhs = mat_mul(rep.matrices[a], rep.matrices[b])
        if any(abs(x - y) > tol for ra, rb in zip(lhs, rhs) for x, y in zip(ra, rb)):
            raise InvariantError(f"M({rep.elements[a]}·{rep.elements[b]}) ≠ M({rep.elements[a]})·M({rep.elements[b]})")


def _maps_fine_blocks(m: Matrix, blocks: BlockStructure, tol: float) -> bool:
    owner = blocks.fine_of_axis
    for block in blocks.fine:
        targets = {owner[r] for r in range(blocks.dimension) for c in block if abs(m[r][c]) > tol}
        if len(targets) != 1:
            return False
    return True


def conjugate(g: int, f: DilationMap, rep: GroupRep) -> DilationMap:
    """M(g)·f·M(g)⁻¹: ортогональная часть сопрягается, масштабы переставляются, сдвиг поворачивается."""
    if g == rep.identity:
        return f
    m = rep.matrices[g]
    mt = transpose(m)
    perm = rep.coarse_permutation(g)
    scales = [None] * len(f.scales)
    for j, s in enumerate(f.scales):
        scales[perm[j]] = s
    return DilationMap(f.blocks, mat_mul(mat_mul(m, f.ortho), mt), tuple(scales), mat_vec(m, f.translation))


def matrix_fixes_ball(rep: GroupRep, g: int, center, radii, num: Numeric) -> bool:
    """M(g)(S) = S для произведения шаров S."""
    moved = mat_vec(rep.matrices[g], center)
    if not all(num.eq(a, b) for a, b in zip(moved, center)):
        return False
    perm = rep.coarse_permutation(g)
    return all(num.eq(radii[perm[j]], radii[j]) for j in range(len(radii)))
