"""
Геометрия разделённых конфигураций: оценки критических радиусов, разбиения L/R
индексов пары конфигураций и треугольные элементы x▷y, x◁y, x▽y.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from app.exceptions import HypothesisError, InvariantError
from app.models.ball import contains, map_image
from app.models.dilation import DilationMap
from app.models.numeric import Scalar
from app.models.operad import (
    Config,
    MembershipLevel,
    StructureMap,
    act,
    compose_blocks,
    configs_equal,
    invert_permutation,
    validate,
)
from app.services.divisibility import IntersectionData, intersection_data, left_cancel
from app.utils.logger import get_logger

logger = get_logger()


def _separation_constant(constant: Optional[Scalar], x: Config) -> Scalar:
    if constant is None:
        from app import config
        constant = config.SEPARATION_CONSTANT
    return x.numeric.coerce(constant)


# ========== Оценки радиусов ==========

@dataclass(frozen=True)
class DiskBounds:
    lower_bound: Scalar
    mu_threshold: Scalar


def disk_bounds(lam: Scalar, rad_y1: Scalar, rad_y2: Scalar) -> DiskBounds:
    """
    Если x(B) пересекает y₁(B) и y₂(B), а y₁(λB) ∩ y₂(λB) = ∅, то
    Rad(x) > (λ−1)/2·(Rad y₁ + Rad y₂) и y_i(λB) ⊆ x(μB) при μ ≥ 4/(λ−1) + 3.
    """
    if lam <= 1:
        raise HypothesisError(f"λ должно быть больше 1, получено {lam}")
    if rad_y1 <= 0 or rad_y2 <= 0:
        raise HypothesisError("радиусы должны быть положительными")
    return DiskBounds((lam - 1) / 2 * (rad_y1 + rad_y2), 4 / (lam - 1) + 3)


def radius(f: DilationMap, x: Config) -> Scalar:
    """rad(f): наибольший радиус образа области по грубым блокам."""
    return max(map_image(f, x.domain).radii)


def is_separated(x: Config, constant: Optional[Scalar] = None) -> bool:
    return validate(x, MembershipLevel.SEPARATED, constant).valid


# ========== Разбиения L¹, R¹, L², R² ==========

@dataclass(frozen=True)
class SeparationPartition:
    l1: Tuple[int, ...]
    r1: Tuple[int, ...]
    l2: Tuple[int, ...]
    r2: Tuple[int, ...]


def separation_partition(x: Config, y: Config, data: Optional[IntersectionData] = None) -> SeparationPartition:
    """
    i ∈ L¹ ⇔ rad(x_i) ≤ rad(y_j) для всех j, пересекающихся с i;
    j ∈ L² ⇔ rad(x_i) > rad(y_j) для всех i, пересекающихся с j.
    Индексы без пересечений попадают в L¹ и L².
    """
    data = data or intersection_data(x, y)
    rx = [radius(f, x) for f in x.maps]
    ry = [radius(f, y) for f in y.maps]
    le = x.numeric.le
    l1 = tuple(i for i in range(x.arity) if all(le(rx[i], ry[j]) for j in data.image((i,))))
    l2 = tuple(j for j in range(y.arity) if all(not le(rx[i], ry[j]) for i in data.preimage((j,))))
    return SeparationPartition(
        l1, tuple(i for i in range(x.arity) if i not in l1),
        l2, tuple(j for j in range(y.arity) if j not in l2),
    )


def _require_correspondence(x: Config, y: Config, data: IntersectionData) -> None:
    for i in range(x.arity):
        if not data.image((i,)):
            raise HypothesisError(f"x_{i + 1} не пересекается ни с одним диском y")
    for j in range(y.arity):
        if not data.preimage((j,)):
            raise HypothesisError(f"y_{j + 1} не пересекается ни с одним диском x")


@dataclass(frozen=True)
class CorrespondenceReport:
    holds: bool
    problems: Tuple[str, ...] = ()


def correspondence_check(x: Config, y: Config, constant: Optional[Scalar] = None) -> CorrespondenceReport:
    """
    Следствия леммы о соответствии для разделённых x, y: c(L¹) = R², c(R¹) = L²,
    а при |c(i)| > 1 - i ∈ R¹, c(i) ⊆ L², rad(x_i) > 2·rad(y_j), c_{y,x}(j) = {i}
    и y_j(C·B) ⊆ x_i(C·B).
    """
    if not (is_separated(x, constant) and is_separated(y, constant)):
        raise HypothesisError("обе конфигурации должны быть разделёнными")
    data = intersection_data(x, y)
    _require_correspondence(x, y, data)
    part = separation_partition(x, y, data)
    c = _separation_constant(constant, x)
    problems: List[str] = []
    if data.image(part.l1) != part.r2:
        problems.append(f"c(L¹) = {_one_based(data.image(part.l1))}, ожидалось R² = {_one_based(part.r2)}")
    if data.image(part.r1) != part.l2:
        problems.append(f"c(R¹) = {_one_based(data.image(part.r1))}, ожидалось L² = {_one_based(part.l2)}")
    for i in range(x.arity):
        image = data.image((i,))
        if len(image) <= 1:
            continue
        if i not in part.r1:
            problems.append(f"|c({i + 1})| > 1, но {i + 1} ∉ R¹")
        big = map_image(x.maps[i].then_scaled(c), x.domain)
        for j in image:
            if j not in part.l2:
                problems.append(f"{j + 1} ∈ c({i + 1}) не лежит в L²")
            if not x.numeric.gt(radius(x.maps[i], x), 2 * radius(y.maps[j], y)):
                problems.append(f"rad(x_{i + 1}) ≤ 2·rad(y_{j + 1})")
            if data.preimage((j,)) != (i,):
                problems.append(f"c_(y,x)({j + 1}) ≠ {{{i + 1}}}")
            if not contains(map_image(y.maps[j].then_scaled(c), y.domain), big, x.numeric):
                problems.append(f"y_{j + 1}(C·B) ⊄ x_{i + 1}(C·B)")
    return CorrespondenceReport(not problems, tuple(problems))


def _one_based(indices: Sequence[int]) -> List[int]:
    return [i + 1 for i in indices]


# ========== Треугольные элементы ==========

@dataclass(frozen=True)
class TriangleDecomposition:
    right: Config
    left: Config
    down: Config
    mu: Tuple[Config, ...]
    mu_bar: Tuple[Config, ...]
    nu: Tuple[Config, ...]
    nu_bar: Tuple[Config, ...]
    sigma_x: Tuple[int, ...]
    sigma_y: Tuple[int, ...]
    partition: SeparationPartition


def _unary(x: Config, factor: Scalar) -> Config:
    return x.with_maps((DilationMap.scaling(x.blocks, factor, x.numeric),))


def _half(
    own: Config,
    enlarged: Sequence[int],
    fibers: Sequence[Tuple[int, ...]],
    down_position: dict,
    down: Config,
    c: Scalar,
):
    """Одна сторона: вершина треугольника, μ̄, μ и σ для own ∈ {x, y}."""
    num = own.numeric
    top = own.with_maps(f.then_scaled(c) if k in enlarged else f for k, f in enumerate(own.maps))
    bar = tuple(_unary(own, 1 / c if k in enlarged else num.one) for k in range(own.arity))
    order = [down_position[key] for fiber in fibers for key in fiber]
    sigma = tuple(order)
    arranged = act(invert_permutation(sigma), own.group.identity, down)
    alpha = StructureMap.lexicographic([len(fiber) for fiber in fibers])
    quotients = left_cancel(top, arranged, alpha, c)
    return top, bar, quotients, sigma


def triangle_decomposition(x: Config, y: Config, constant: Optional[Scalar] = None) -> TriangleDecomposition:
    """
    x▷y увеличивает в C раз диски x из R¹, x◁y - диски y из R²,
    x▽y состоит из дисков x из L¹ (в порядке x), затем дисков y из L² (в порядке y).
    Все уравнения разложения проверяются перед возвратом.
    """
    if not (is_separated(x, constant) and is_separated(y, constant)):
        raise HypothesisError("обе конфигурации должны быть разделёнными")
    data = intersection_data(x, y)
    _require_correspondence(x, y, data)
    part = separation_partition(x, y, data)
    c = _separation_constant(constant, x)

    down_keys = [("x", i) for i in part.l1] + [("y", j) for j in part.l2]
    down_position = {key: k for k, key in enumerate(down_keys)}
    down = x.with_maps([x.maps[i] for i in part.l1] + [y.maps[j] for j in part.l2])

    x_fibers = [
        (("x", i),) if i in part.l1 else tuple(("y", j) for j in data.image((i,)))
        for i in range(x.arity)
    ]
    y_fibers = [
        (("y", j),) if j in part.l2 else tuple(("x", i) for i in data.preimage((j,)))
        for j in range(y.arity)
    ]
    for side, fibers in (("x", x_fibers), ("y", y_fibers)):
        keys = [key for fiber in fibers for key in fiber]
        if any(key not in down_position for key in keys) or \
                sorted(down_position[key] for key in keys) != list(range(len(down_keys))):
            raise InvariantError(f"слои стороны {side} не покрывают x▽y ровно один раз")

    right, mu_bar, mu, sigma_x = _half(x, part.r1, x_fibers, down_position, down, c)
    left, nu_bar, nu, sigma_y = _half(y, part.r2, y_fibers, down_position, down, c)

    equations = [
        ("x = (x▷y)∘(μ̄)", compose_blocks(right, mu_bar), x),
        ("y = (x◁y)∘(ν̄)", compose_blocks(left, nu_bar), y),
        ("x▽y = σ_x·((x▷y)∘(μ))", act(sigma_x, x.group.identity, compose_blocks(right, mu)), down),
        ("x▽y = σ_y·((x◁y)∘(ν))", act(sigma_y, y.group.identity, compose_blocks(left, nu)), down),
    ]
    equations.append((
        "σ_x·((x▷y)∘(μ)) = σ_y·((x◁y)∘(ν))", equations[2][1], equations[3][1],
    ))
    for name, lhs, rhs in equations:
        if not configs_equal(lhs, rhs):
            raise InvariantError(f"нарушено уравнение {name}")
    for name, element in (("x▷y", right), ("x◁y", left), ("x▽y", down)):
        if not validate(element, MembershipLevel.STAR).valid:
            raise InvariantError(f"{name} не принадлежит уровню star")

    logger.debug("Треугольное разложение построено", context={
        "l1": _one_based(part.l1), "r1": _one_based(part.r1),
        "l2": _one_based(part.l2), "r2": _one_based(part.r2),
    })
    return TriangleDecomposition(right, left, down, mu, mu_bar, nu, nu_bar, sigma_x, sigma_y, part)


def zigzag_holds(decomposition: TriangleDecomposition, x: Config, y: Config) -> bool:
    """Каждый диск x и x▽y лежит в некотором диске x▷y; каждый диск y и x▽y - в некотором диске x◁y."""
    num = x.numeric

    def covered(inner: Config, outer: Config) -> bool:
        outer_images = outer.images()
        return all(any(contains(ball, big, num) for big in outer_images) for ball in inner.images())

    return (
        covered(x, decomposition.right) and covered(decomposition.down, decomposition.right)
        and covered(y, decomposition.left) and covered(decomposition.down, decomposition.left)
    )
