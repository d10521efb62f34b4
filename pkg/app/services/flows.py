"""
Потоки сжатия операда и времена входа в целевые подоперады.

ShrinkLeft:          H(x, t) = s(1−t)∘x
ShrinkRight:         H(x, t) = x∘s(1−t)
ShrinkRightProduct:  H(x, t) = x∘((1−t)id_V ⊗ (1−t)id_W)

Все ограничения линейны по (1−t), поэтому времена входа считаются в замкнутой форме;
бисекция остаётся только как независимая проверка.
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from app.exceptions import FlowError, HypothesisError, InvariantError
from app.models.ball import ProductBall, contains, map_image
from app.models.dilation import DilationMap, map_compose
from app.models.group import conjugate
from app.models.linalg import norm2, vec_sub
from app.models.numeric import Scalar, sqrt_lower, sqrt_upper
from app.models.operad import Config, MembershipLevel, scaled_unit, validate
from app.services.core import CriticalWitness, resolve_shrink_factor, criticality, shrunk_membership
from app.services.tensor import Leaf, SuperTree, Vertex, tree_evaluate
from app.utils.logger import get_logger

logger = get_logger()

__all__ = [
    "FlowKind", "FlowTarget", "Binding", "Bracket", "EntryTimeReport", "flow_apply", "entry_time",
    "in_target", "bisect_entry_time", "spherical_rescale", "spherical_homotopy", "deform",
    "shrunk_membership", "core_entry_time", "flow_tree",
]


class FlowKind(str, Enum):
    SHRINK_LEFT = "shrink-left"
    SHRINK_RIGHT = "shrink-right"
    SHRINK_RIGHT_PRODUCT = "shrink-right-product"


@dataclass(frozen=True)
class FlowTarget:
    """Пара вложенных шаров B ⊆ B' с центром в нуле."""
    inner: ProductBall
    outer: ProductBall


@dataclass(frozen=True)
class Binding:
    kind: FlowKind
    indices: Tuple[int, ...]
    group_element: str
    predicate: str


@dataclass(frozen=True)
class EntryTimeReport:
    t: Scalar
    binding: Optional[Binding]
    exact: bool = True


def _check_time(t: Scalar, closed: bool = False) -> None:
    upper_ok = t <= 1 if closed else t < 1
    if not (0 <= t and upper_ok):
        interval = "[0, 1]" if closed else "[0, 1)"
        raise FlowError(f"параметр потока t = {t} вне {interval}")


def flow_apply(x: Config, kind: FlowKind, t: Scalar) -> Config:
    kind = FlowKind(kind)
    t = x.numeric.coerce(t)
    _check_time(t)
    factor = 1 - t
    if kind is FlowKind.SHRINK_LEFT:
        shrink = DilationMap.scaling(x.blocks, factor, x.numeric)
        return x.with_maps(map_compose(shrink, f) for f in x.maps)
    if kind is FlowKind.SHRINK_RIGHT_PRODUCT and not x.blocks.is_product:
        raise FlowError("поток ShrinkRightProduct определён только над произведением V×W")
    return x.then_scaled(factor)


# ========== Времена входа ==========

def _over(x: Config, ball: ProductBall) -> Config:
    return Config(x.maps, ball, x.group, x.numeric)


def _target_domain(kind: FlowKind, target: FlowTarget) -> ProductBall:
    return target.inner if kind is FlowKind.SHRINK_LEFT else target.outer


def _source_domain(kind: FlowKind, target: FlowTarget) -> ProductBall:
    return target.outer if kind is FlowKind.SHRINK_LEFT else target.inner


def in_target(x: Config, kind: FlowKind, target: FlowTarget, t: Scalar) -> bool:
    return validate(_over(flow_apply(x, kind, t), _target_domain(kind, target)), MembershipLevel.STAR).valid


class _Distances:
    """Длины в режиме Exact: точные для квадратов, иначе рациональные оценки сверху или снизу."""

    def __init__(self, num):
        self.num = num
        self.exact = True

    def upper(self, squared: Scalar) -> Scalar:
        return self._root(squared, sqrt_upper)

    def lower(self, squared: Scalar) -> Scalar:
        return self._root(squared, sqrt_lower)

    def _root(self, squared, bound):
        value, exact = self.num.sqrt(squared)
        if exact:
            return value
        self.exact = False
        return bound(squared)


def _shrink_left_constraints(x: Config, target: FlowTarget, dist: _Distances) -> List[Tuple[Scalar, Binding]]:
    inner = target.inner
    found = []
    for g in range(x.group.order):
        label = x.group.elements[g]
        for i, f in enumerate(x.maps):
            image = map_image(conjugate(g, f, x.group), inner)
            for j in range(x.blocks.block_count):
                reach = dist.upper(norm2(image.block_center(j))) + image.radii[j]
                found.append((1 - inner.radii[j] / reach,
                              Binding(FlowKind.SHRINK_LEFT, (i,), label, f"contained (блок {j + 1})")))
    return found


def _shrink_right_constraints(x: Config, kind: FlowKind, target: FlowTarget,
                              dist: _Distances) -> List[Tuple[Scalar, Binding]]:
    outer = target.outer
    found = []
    for g in range(x.group.order):
        label = x.group.elements[g]
        images = [map_image(conjugate(g, f, x.group), outer) for f in x.maps]
        for i, image in enumerate(images):
            for j in range(x.blocks.block_count):
                room = outer.radii[j] - dist.upper(norm2(image.block_center(j)))
                found.append((1 - room / image.radii[j],
                              Binding(kind, (i,), label, f"contained (блок {j + 1})")))
        for i in range(len(images)):
            for k in range(i + 1, len(images)):
                # пара разведена, как только разведён хотя бы один грубый блок
                per_block = [
                    1 - dist.lower(norm2(vec_sub(images[i].block_center(j), images[k].block_center(j))))
                    / (images[i].radii[j] + images[k].radii[j])
                    for j in range(x.blocks.block_count)
                ]
                found.append((min(per_block), Binding(kind, (i, k), label, "disjoint")))
    return found


def _require_target(x: Config, kind: FlowKind, target: FlowTarget) -> None:
    if not (target.inner.is_origin_centered and target.outer.is_origin_centered):
        raise HypothesisError("шары цели должны иметь центр в нуле")
    if not contains(target.inner, target.outer, x.numeric):
        raise HypothesisError("внутренний шар цели не содержится во внешнем")
    source = _source_domain(kind, target)
    report = validate(_over(x, source), MembershipLevel.STAR)
    if not report.valid:
        raise HypothesisError(f"конфигурация не лежит в star над исходным шаром: {report.violations[0].describe()}")


def entry_time(x: Config, kind: FlowKind, target: FlowTarget) -> EntryTimeReport:
    """
    Наименьшее t ∈ [0, 1), при котором поток попадает в star над целевым шаром.
    В режиме Exact с иррациональными расстояниями t - рациональная оценка сверху
    и отчёт помечается неточным.
    """
    kind = FlowKind(kind)
    _require_target(x, kind, target)
    num = x.numeric
    dist = _Distances(num)
    if kind is FlowKind.SHRINK_LEFT:
        constraints = _shrink_left_constraints(x, target, dist)
    else:
        if kind is FlowKind.SHRINK_RIGHT_PRODUCT and not x.blocks.is_product:
            raise FlowError("поток ShrinkRightProduct определён только над произведением V×W")
        constraints = _shrink_right_constraints(x, kind, target, dist)

    t, binding = num.zero, None
    for value, reason in constraints:
        if value > t:
            t, binding = value, reason
    if t >= 1:
        raise InvariantError("ограничения потока несовместны: t ≥ 1")
    for probe in (t, (t + 1) / 2):
        if not in_target(x, kind, target, probe):
            raise InvariantError(f"поток не лежит в цели при t = {probe}")
    return EntryTimeReport(t, binding, dist.exact)


@dataclass(frozen=True)
class Bracket:
    lower: Scalar
    upper: Scalar


def bisect_entry_time(x: Config, kind: FlowKind, target: FlowTarget, iterations: int = 60) -> Bracket:
    """Бисекция по предикату принадлежности: lower вне цели (или 0), upper в цели."""
    kind = FlowKind(kind)
    _require_target(x, kind, target)
    num = x.numeric
    if in_target(x, kind, target, num.zero):
        return Bracket(num.zero, num.zero)
    lower, gap = num.zero, num.one / 2
    for _ in range(200):
        if in_target(x, kind, target, 1 - gap):
            break
        lower, gap = 1 - gap, gap / 2
    else:
        raise FlowError("бисекция не нашла точку внутри цели")
    upper = 1 - gap
    for _ in range(iterations):
        middle = (lower + upper) / 2
        if in_target(x, kind, target, middle):
            upper = middle
        else:
            lower = middle
    return Bracket(lower, upper)


def deform(x: Config, kind: FlowKind, target: FlowTarget, s: Scalar) -> Config:
    """Деформационная ретракция: s = 0 даёт x, s = 1 - точку входа в цель."""
    s = x.numeric.coerce(s)
    _check_time(s, closed=True)
    return flow_apply(x, kind, entry_time(x, kind, target).t * s)


# ========== Сферическая ретракция ==========

@dataclass(frozen=True)
class SphericalRescale:
    factors: Tuple[Tuple[Scalar, ...], ...]
    retracted: Config


def _lambda(f: DilationMap) -> Tuple[Scalar, ...]:
    smallest = min(f.scales)
    return tuple(smallest / s for s in f.scales)


def spherical_rescale(x: Config) -> SphericalRescale:
    """λ_i = min_j s_j / s_i по грубым блокам; после правого умножения все масштабы равны."""
    factors = tuple(_lambda(f) for f in x.maps)
    retracted = x.with_maps(f.block_scaled(lam) for f, lam in zip(x.maps, factors))
    return SphericalRescale(factors, retracted)


def spherical_homotopy(x: Config, t: Scalar) -> Config:
    t = x.numeric.coerce(t)
    _check_time(t, closed=True)
    return x.with_maps(
        f.block_scaled(tuple((1 - t) + t * lam for lam in _lambda(f))) for f in x.maps
    )


# ========== Потоки деревьев ==========

def flow_tree(tree: SuperTree, t: Scalar) -> SuperTree:
    """Прививает унарную корону ((1−t)id_V, (1−t)id_W) на каждый вход дерева."""
    root = tree.vertices[tree.root]
    t = root.p.numeric.coerce(t)
    _check_time(t)
    unit_v = scaled_unit(Config.unit(root.p.domain, root.p.group, root.p.numeric), 1 - t)
    unit_w = scaled_unit(Config.unit(root.q.domain, root.q.group, root.q.numeric), 1 - t)
    vertices = list(tree.vertices)
    for v, vertex in enumerate(tree.vertices):
        inputs = []
        for edge in vertex.inputs:
            if isinstance(edge, Leaf):
                inputs.append(len(vertices))
                vertices.append(Vertex(unit_v, unit_w, (edge,), ((0, 0),)))
            else:
                inputs.append(edge)
        vertices[v] = Vertex(vertex.p, vertex.q, tuple(inputs), vertex.xi)
    return SuperTree(tuple(vertices), tree.root)


@dataclass(frozen=True)
class CoreEntryTime:
    t: Scalar
    witness: CriticalWitness
    steps: int


def core_entry_time(tree: SuperTree, factor: Optional[Scalar] = None, cap: Optional[int] = None,
                    separation_constant: Optional[Scalar] = None) -> CoreEntryTime:
    """
    Перебирает t_k = 1 − factor/2^k, пока поток ShrinkRightProduct не даёт элемент
    сжатого класса, допускающий критического свидетеля.
    """
    w = tree_evaluate(tree)
    if not validate(w, MembershipLevel.STAR).valid:
        raise HypothesisError("значение дерева не лежит в star")
    factor = resolve_shrink_factor(factor, w)
    if cap is None:
        from app import config
        cap = config.CORE_STEP_CAP
    reason = "лимит шагов равен нулю"
    for step in range(cap):
        t = 1 - factor / 2 ** step
        flowed = flow_apply(w, FlowKind.SHRINK_RIGHT_PRODUCT, t)
        if not shrunk_membership(flowed, factor):
            reason = "поток вне класса сжатых конфигураций"
            continue
        result = criticality(flowed, separation_constant)
        if result.critical:
            return CoreEntryTime(t, result.witness, step + 1)
        reason = result.reason
    logger.warning("⚠️ Время входа в ядро не найдено", context={"cap": cap, "reason": reason})
    raise FlowError(f"за {cap} шагов критический элемент не найден: {reason}")
