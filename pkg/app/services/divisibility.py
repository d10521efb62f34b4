"""
Делимость элементов операда: соответствия пересечений, геометрический тест делимости
с построением частных, вариант со смежными классами подгруппы и левое сокращение.
"""
from dataclasses import dataclass
from itertools import product
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from app.exceptions import ArityError, BlockMismatchError, DivisionError, HypothesisError, InvariantError
from app.models.ball import ProductBall, contains, disjoint, map_image
from app.models.dilation import map_compose, map_invert
from app.models.group import conjugate, matrix_fixes_ball
from app.models.numeric import Scalar
from app.models.operad import (
    Config,
    MembershipLevel,
    StructureMap,
    configs_equal,
    membership_level,
    operad_compose,
    validate,
)
from app.utils.logger import get_logger

logger = get_logger()

Partition = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class IntersectionData:
    """relation[i][j] ⇔ x_i(S) ∩ y_j(S) ≠ ∅."""
    relation: Tuple[Tuple[bool, ...], ...]
    self_partition: Partition

    def image(self, indices: Iterable[int]) -> Tuple[int, ...]:
        """c_{x,y}(I)."""
        found = {j for i in indices for j, hit in enumerate(self.relation[i]) if hit}
        return tuple(sorted(found))

    def preimage(self, indices: Iterable[int]) -> Tuple[int, ...]:
        """c_{y,x}(J)."""
        wanted = set(indices)
        return tuple(i for i, row in enumerate(self.relation) if any(row[j] for j in wanted))

    def pairs(self) -> List[Tuple[int, int]]:
        return [(i, j) for i, row in enumerate(self.relation) for j, hit in enumerate(row) if hit]


@dataclass(frozen=True)
class Division:
    """y = x∘_α(q^j); q^j нульарно вне образа α."""
    alpha: StructureMap
    quotients: Tuple[Config, ...]

    def recompose(self, x: Config) -> Config:
        return operad_compose(x, self.alpha, self.quotients)


def require_same_domain(x: Config, y: Config) -> None:
    if x.domain != y.domain:
        raise BlockMismatchError("конфигурации заданы над разными областями")


def intersection_matrix(left: Sequence[ProductBall], right: Sequence[ProductBall], num) -> Tuple[Tuple[bool, ...], ...]:
    return tuple(tuple(not disjoint(a, b, num) for b in right) for a in left)


def graph_partition(adjacency: Sequence[Sequence[bool]]) -> Partition:
    """Компоненты связности графа; блоки упорядочены по наименьшему элементу."""
    n = len(adjacency)
    if n == 0:
        return ()
    graph = csr_matrix(np.array(adjacency, dtype=bool).astype(np.int8))
    _, labels = connected_components(graph, directed=False)
    blocks = {}
    for k, label in enumerate(labels):
        blocks.setdefault(int(label), []).append(k)
    return tuple(sorted((tuple(b) for b in blocks.values()), key=lambda b: b[0]))


def intersection_partition(x: Config) -> Partition:
    """Разбиение ar(x) на компоненты связности отношения ∩_x."""
    images = x.images()
    return graph_partition(intersection_matrix(images, images, x.numeric))


def intersection_data(x: Config, y: Config) -> IntersectionData:
    require_same_domain(x, y)
    relation = intersection_matrix(x.images(), y.images(), x.numeric)
    return IntersectionData(relation, intersection_partition(x))


# ========== Делимость ==========

def _coset_representatives(x: Config, subgroup: Optional[Sequence[int]]) -> List[int]:
    rep = x.group
    if subgroup is None:
        return [rep.identity]
    for h in subgroup:
        if not matrix_fixes_ball(rep, h, x.domain.center, x.domain.radii, x.numeric):
            raise HypothesisError(f"область не инвариантна относительно элемента {rep.elements[h]} подгруппы H")
    return rep.coset_representatives(subgroup)


def _slot_contains(x: Config, y: Config, i: int, j: int, representatives: Sequence[int]) -> bool:
    """(g_k·y_i)(S) ⊆ (g_k·x_j)(S) для всех представителей g_k."""
    for g in representatives:
        inner = map_image(conjugate(g, y.maps[i], y.group), y.domain)
        outer = map_image(conjugate(g, x.maps[j], x.group), x.domain)
        if not contains(inner, outer, x.numeric):
            return False
    return True


def candidate_quotients(x: Config, y: Config, alpha: StructureMap) -> Tuple[Config, ...]:
    """Единственно возможные частные: q^j_r = x_j⁻¹∘y_i для r-го элемента i слоя α⁻¹(j)."""
    if alpha.source != y.arity or alpha.target != x.arity:
        raise ArityError(f"α должно вести из ar(y) = {y.arity} в ar(x) = {x.arity}")
    quotients = []
    for j in range(x.arity):
        inverse = map_invert(x.maps[j])
        quotients.append(x.with_maps(map_compose(inverse, y.maps[i]) for i in alpha.fiber(j)))
    return tuple(quotients)


def divides(x: Config, y: Config, subgroup: Optional[Sequence[int]] = None) -> Optional[Division]:
    """
    Геометрический тест делимости. Для каждого i ∈ ar(y) берётся наименьшее j с
    y_i(S) ⊆ x_j(S) (при заданной подгруппе H - для всех представителей смежных классов Hg).
    Возвращает None, если для какого-то i такого j нет.
    """
    require_same_domain(x, y)
    representatives = _coset_representatives(x, subgroup)
    assignment = []
    for i in range(y.arity):
        slot = next((j for j in range(x.arity) if _slot_contains(x, y, i, j, representatives)), None)
        if slot is None:
            logger.debug("Компонента не помещается ни в один диск делителя", context={"component": i + 1})
            return None
        assignment.append(slot)
    alpha = StructureMap(y.arity, x.arity, tuple(assignment))
    division = Division(alpha, candidate_quotients(x, y, alpha))

    for j, q in enumerate(division.quotients):
        report = validate(q, MembershipLevel.AMBIENT)
        if not report.valid:
            raise InvariantError(f"частное q^{j + 1} не принадлежит уровню ambient")
    if validate(y, MembershipLevel.STAR).valid:
        for j, q in enumerate(division.quotients):
            if not validate(q, MembershipLevel.STAR).valid:
                raise InvariantError(f"частное q^{j + 1} не наследует уровень star от y")
    if not configs_equal(division.recompose(x), y):
        raise InvariantError("композиция x∘_α(q) не воспроизводит y")
    return division


def brute_force_divides(x: Config, y: Config) -> Optional[Division]:
    """Перебор всех α: ar(y) → ar(x) в лексикографическом порядке; первое α с допустимыми частными."""
    require_same_domain(x, y)
    for assignment in product(range(x.arity), repeat=y.arity):
        alpha = StructureMap(y.arity, x.arity, assignment)
        quotients = candidate_quotients(x, y, alpha)
        if not all(validate(q, MembershipLevel.AMBIENT).valid for q in quotients):
            continue
        if configs_equal(operad_compose(x, alpha, quotients), y):
            return Division(alpha, quotients)
    return None


def left_cancel(x: Config, y: Config, alpha: StructureMap,
                separation_constant: Optional[Scalar] = None) -> Tuple[Config, ...]:
    """
    Частные вдоль фиксированного α. Они определены однозначно обратимостью компонент;
    бросает DivisionError, если x не делит y вдоль α.
    """
    require_same_domain(x, y)
    quotients = candidate_quotients(x, y, alpha)
    if not configs_equal(operad_compose(x, alpha, quotients), y):
        raise DivisionError("x не делит y вдоль заданного α")
    level = membership_level(y, separation_constant)
    if level is not None:
        # частные наследуют не выше star: растяжение до x_j⁻¹ не сохраняет разделённость
        if level is MembershipLevel.SEPARATED:
            level = MembershipLevel.STAR
        for j, q in enumerate(quotients):
            if not validate(q, level).valid:
                raise DivisionError(f"частное q^{j + 1} не принадлежит уровню {level.value}")
    return quotients
