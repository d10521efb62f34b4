"""
Аддитивное ядро: критические элементы операда произведения, их разделители,
нормальные формы ядра и общее критическое измельчение семейства конфигураций.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from app.exceptions import CoreFormError, DivisionError, HypothesisError, InvariantError
from app.models.ball import ProductBall, contains
from app.models.dilation import DilationMap, map_compose, map_invert
from app.models.numeric import Scalar
from app.models.operad import (
    Config,
    MembershipLevel,
    StructureMap,
    act,
    compose_blocks,
    configs_equal,
    require_level,
    validate,
)
from app.models.product import project
from app.services.divisibility import (
    Partition,
    graph_partition,
    intersection_matrix,
    intersection_partition,
    left_cancel,
    require_same_domain,
)
from app.services.enclosing import common_point, enclosing_ball
from app.services.separation import radius
from app.services.tensor import Leaf, SuperTree, Vertex, tree_evaluate, unary_iso
from app.utils.logger import get_logger

logger = get_logger()


def resolve_shrink_factor(factor: Optional[Scalar], x: Config) -> Scalar:
    if factor is None:
        from app import config
        factor = config.SHRINK_FACTOR
    return x.numeric.coerce(factor)


def shrunk_membership(w: Config, factor: Optional[Scalar] = None) -> bool:
    """w = x∘(factor·id) для некоторого star-элемента x, то есть w∘(1/factor·id) лежит в star."""
    factor = resolve_shrink_factor(factor, w)
    return validate(w.then_scaled(1 / factor), MembershipLevel.STAR).valid


# ========== Критические элементы ==========

@dataclass(frozen=True)
class CriticalWitness:
    partition_p: Partition
    partition_q: Partition
    a: Config
    b: Config

    def row_of(self, k: int) -> int:
        return next(i for i, block in enumerate(self.partition_p) if k in block)

    def column_of(self, k: int) -> int:
        return next(j for j, block in enumerate(self.partition_q) if k in block)


@dataclass(frozen=True)
class CriticalityResult:
    witness: Optional[CriticalWitness]
    reason: Optional[str] = None

    @property
    def critical(self) -> bool:
        return self.witness is not None


def _separator_map(domain: ProductBall, enclosure: ProductBall, num) -> DilationMap:
    """Растяжение без поворота, переводящее область в объемлющий шар."""
    scales = tuple(r / e for r, e in zip(enclosure.radii, domain.radii))
    base = DilationMap.scaling(domain.blocks, scales, num)
    shift = base.apply(domain.center)
    translation = tuple(c - s for c, s in zip(enclosure.center, shift))
    return DilationMap(domain.blocks, base.ortho, scales, translation)


def _separator(projected: Config, partition: Partition, side: str,
               constant: Optional[Scalar]) -> Tuple[Optional[Config], Optional[str]]:
    num = projected.numeric
    images = projected.images()
    maps = []
    for i, block in enumerate(partition):
        balls = [images[k] for k in block]
        if len(balls) > 1 and common_point(balls, num) is None:
            return None, f"пустое общее пересечение в блоке {side}_{i + 1}"
        enclosure = enclosing_ball(balls, num)
        maps.append(_separator_map(projected.domain, enclosure, num))
    separator = projected.with_maps(maps)
    if not validate(separator, MembershipLevel.SEPARATED, constant).valid:
        return None, f"объемлющие шары блоков {side} не образуют разделённую конфигурацию"
    return separator, None


def criticality(w: Config, separation_constant: Optional[Scalar] = None) -> CriticalityResult:
    """
    Разбиения P и Q - компоненты связности пересечений проекций pr_V(w) и pr_W(w).
    Внутри блока общая точка ищется явно; разделитель a_i строится по объемлющему
    шару блока и должен быть разделённым. Метод корректен, но не полон: отказ
    означает лишь, что свидетель не найден.
    """
    pv, pw = project(w, 0), project(w, 1)
    partition_p = intersection_partition(pv)
    partition_q = intersection_partition(pw)
    a, reason = _separator(pv, partition_p, "P", separation_constant)
    if a is None:
        return CriticalityResult(None, reason)
    b, reason = _separator(pw, partition_q, "Q", separation_constant)
    if b is None:
        return CriticalityResult(None, reason)
    return CriticalityResult(CriticalWitness(partition_p, partition_q, a, b))


# ========== Нормальные формы ядра ==========

Cell = Tuple[Config, Config]


@dataclass(frozen=True)
class CoreForm:
    """
    σ·((a⊗b)∘(c^{(i,j)}⊗d^{(i,j)})): cells[i][j] - пара арности 0 или 1,
    sigma[r] - номер компоненты w для r-й унарной ячейки в порядке строк.
    """
    sigma: Tuple[int, ...]
    a: Config
    b: Config
    cells: Tuple[Tuple[Cell, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(self.sigma))
        object.__setattr__(self, "cells", tuple(tuple(row) for row in self.cells))

    def occupied(self) -> List[Tuple[int, int]]:
        return [(i, j) for i, row in enumerate(self.cells) for j, (c, _) in enumerate(row) if c.arity == 1]

    def check(self) -> None:
        if len(self.cells) != self.a.arity or any(len(row) != self.b.arity for row in self.cells):
            raise CoreFormError(f"сетка ячеек должна иметь размер {self.a.arity}×{self.b.arity}")
        for i, row in enumerate(self.cells):
            for j, (c, d) in enumerate(row):
                if c.arity != d.arity or c.arity > 1:
                    raise CoreFormError(f"ячейка ({i + 1},{j + 1}): c и d должны быть одновременно нульарны или унарны")
        occupied = self.occupied()
        for i in range(self.a.arity):
            if not any(r == i for r, _ in occupied):
                raise CoreFormError(f"строка {i + 1} не содержит унарной ячейки")
        for j in range(self.b.arity):
            if not any(col == j for _, col in occupied):
                raise CoreFormError(f"столбец {j + 1} не содержит унарной ячейки")
        if sorted(self.sigma) != list(range(len(occupied))):
            raise CoreFormError("σ не является перестановкой унарных ячеек")

    def to_tree(self) -> SuperTree:
        """Дерево ядра высоты не больше 2; сетка 1×1 сводится к унарному изоморфизму."""
        self.check()
        if self.a.arity == 1 and self.b.arity == 1:
            c, d = self.cells[0][0]
            return unary_iso(compose_blocks(self.a, [c]), compose_blocks(self.b, [d]))
        vertices = [None]
        inputs, xi = [], []
        r = 0
        for i, row in enumerate(self.cells):
            for j, (c, d) in enumerate(row):
                if c.arity == 1:
                    leaves = (Leaf(self.sigma[r]),)
                    r += 1
                else:
                    leaves = ()
                inputs.append(len(vertices))
                xi.append((i, j))
                vertices.append(Vertex(c, d, leaves, ((0, 0),) if leaves else ()))
        vertices[0] = Vertex(self.a, self.b, tuple(inputs), tuple(xi))
        return SuperTree(tuple(vertices))

    def evaluate(self) -> Config:
        return tree_evaluate(self.to_tree())


def core_normal_form(w: Config, witness: CriticalWitness) -> CoreForm:
    """
    Ячейка компоненты w_k - пара (блок P, блок Q), содержащая её проекции;
    c = a_i⁻¹∘pr_V(w_k), d = b_j⁻¹∘pr_W(w_k) находятся левым сокращением.
    Результат перепроверяется вычислением дерева.
    """
    pv, pw = project(w, 0), project(w, 1)
    a, b = witness.a, witness.b
    rows, cols = a.arity, b.arity
    a_images, b_images = a.images(), b.images()
    pv_images, pw_images = pv.images(), pw.images()
    occupant: Dict[Tuple[int, int], int] = {}
    for k in range(w.arity):
        i, j = witness.row_of(k), witness.column_of(k)
        if not contains(pv_images[k], a_images[i], w.numeric) or not contains(pw_images[k], b_images[j], w.numeric):
            raise CoreFormError(f"проекции компоненты {k + 1} не лежат в ячейке ({i + 1},{j + 1}) разделителя")
        if (i, j) in occupant:
            raise CoreFormError(
                f"компоненты {occupant[(i, j)] + 1} и {k + 1} занимают одну ячейку ({i + 1},{j + 1}): w не лежит в star"
            )
        occupant[(i, j)] = k

    unary = StructureMap.identity(1)
    cells, sigma = [], []
    for i in range(rows):
        row = []
        for j in range(cols):
            k = occupant.get((i, j))
            if k is None:
                row.append((Config.nullary(pv.domain, pv.group, pv.numeric),
                            Config.nullary(pw.domain, pw.group, pw.numeric)))
                continue
            try:
                (c,) = left_cancel(a.component(i), pv.component(k), unary)
                (d,) = left_cancel(b.component(j), pw.component(k), unary)
            except DivisionError as exc:
                raise CoreFormError(f"ячейка ({i + 1},{j + 1}): {exc}") from exc
            row.append((c, d))
            sigma.append(k)
        cells.append(tuple(row))
    form = CoreForm(tuple(sigma), a, b, tuple(cells))
    form.check()
    if not configs_equal(form.evaluate(), w):
        raise InvariantError("нормальная форма ядра не воспроизводит w")
    return form


def canonical_core_form(form: CoreForm) -> CoreForm:
    """Строки и столбцы упорядочиваются по наименьшему номеру компоненты w в них."""
    form.check()
    occupied = form.occupied()
    label = dict(zip(occupied, form.sigma))
    row_order = sorted(range(form.a.arity), key=lambda i: min(label[c] for c in occupied if c[0] == i))
    col_order = sorted(range(form.b.arity), key=lambda j: min(label[c] for c in occupied if c[1] == j))
    cells = tuple(tuple(form.cells[i][j] for j in col_order) for i in row_order)
    sigma = tuple(label[(i, j)] for i in row_order for j in col_order if (i, j) in label)
    a = form.a.with_maps(form.a.maps[i] for i in row_order)
    b = form.b.with_maps(form.b.maps[j] for j in col_order)
    return CoreForm(sigma, a, b, cells)


def same_core_element(first: CoreForm, second: CoreForm) -> bool:
    """
    Равенство элементов ядра: совпадают σ и занятость канонических сеток, а в каждой
    занятой ячейке - композиции a_i∘c и b_j∘d. Разделитель может отличаться.
    """
    first, second = canonical_core_form(first), canonical_core_form(second)
    if first.sigma != second.sigma or first.occupied() != second.occupied():
        return False
    num = first.a.numeric
    for i, j in first.occupied():
        c1, d1 = first.cells[i][j]
        c2, d2 = second.cells[i][j]
        if not map_compose(first.a.maps[i], c1.maps[0]).close_to(map_compose(second.a.maps[i], c2.maps[0]), num):
            return False
        if not map_compose(first.b.maps[j], d1.maps[0]).close_to(map_compose(second.b.maps[j], d2.maps[0]), num):
            return False
    return True


# ========== Общее критическое измельчение ==========

def _flatten(configs: Sequence[Config]) -> Tuple[List[Tuple[int, int]], List[ProductBall]]:
    keys, images = [], []
    for n, x in enumerate(configs):
        for k, image in enumerate(x.images()):
            keys.append((n, k))
            images.append(image)
    return keys, images


def has_transitive_intersections(configs: Sequence[Config]) -> bool:
    """Каждая компонента связности графа пересечений всех дисков семейства - клика."""
    if not configs:
        return True
    _, images = _flatten(configs)
    relation = intersection_matrix(images, images, configs[0].numeric)
    for block in graph_partition(relation):
        if any(not relation[u][v] for u in block for v in block):
            return False
    return True


@dataclass(frozen=True)
class Refinement:
    """e^i = (σ_i·e)∘(e^{i,k}); factors нульарны вне первых |ar(e^i)| мест."""
    sigma: Tuple[int, ...]
    factors: Tuple[Config, ...]


@dataclass(frozen=True)
class CommonRefinement:
    e: Config
    classes: Tuple[Tuple[Tuple[int, int], ...], ...]
    per_config: Tuple[Refinement, ...]


def common_refinement(configs: Sequence[Config], factor: Optional[Scalar] = None,
                      constant: Optional[Scalar] = None) -> CommonRefinement:
    """
    Классы эквивалентности всех дисков семейства по пересечению; представитель класса -
    диск наибольшего радиуса (первый при равенстве), e_l = e^l∘(C·id).
    """
    if not configs:
        raise HypothesisError("нужна хотя бы одна конфигурация")
    first = configs[0]
    for n, x in enumerate(configs):
        require_same_domain(first, x)
        if not shrunk_membership(x, factor):
            raise HypothesisError(f"конфигурация {n + 1} не лежит в классе сжатых конфигураций")
    if not has_transitive_intersections(configs):
        raise HypothesisError("семейство дисков не имеет транзитивных пересечений")
    if constant is None:
        from app import config
        constant = config.SEPARATION_CONSTANT
    constant = first.numeric.coerce(constant)

    keys, images = _flatten(configs)
    partition = graph_partition(intersection_matrix(images, images, first.numeric))
    classes = tuple(tuple(keys[u] for u in block) for block in partition)
    class_of = {key: l for l, members in enumerate(classes) for key in members}
    representatives = []
    for members in classes:
        radii = [radius(configs[n].maps[k], configs[n]) for n, k in members]
        best = max(range(len(members)), key=lambda u: (radii[u], -u))
        n, k = members[best]
        representatives.append(configs[n].maps[k].then_scaled(constant))
    e = first.with_maps(representatives)
    require_level(e, MembershipLevel.SEPARATED, "общее измельчение e", constant)

    per_config = []
    for n, x in enumerate(configs):
        own = [class_of[(n, k)] for k in range(x.arity)]
        rest = [l for l in range(len(classes)) if l not in own]
        sigma = [0] * len(classes)
        for position, l in enumerate(own + rest):
            sigma[l] = position
        factors = [
            x.with_maps((map_compose(map_invert(representatives[l]), x.maps[k]),))
            for k, l in enumerate(own)
        ] + [Config.nullary(x.domain, x.group, x.numeric) for _ in rest]
        arranged = act(sigma, x.group.identity, e)
        if not configs_equal(compose_blocks(arranged, factors), x):
            raise InvariantError(f"измельчение не воспроизводит конфигурацию {n + 1}")
        per_config.append(Refinement(tuple(sigma), tuple(factors)))

    logger.debug("Общее измельчение построено", context={"classes": len(classes), "configs": len(configs)})
    return CommonRefinement(e, classes, tuple(per_config))
