"""
Рандомизированная проверка лемм. Каждый набор - функция одной попытки, которая
возвращает None при успехе или описание нарушения. Попытки детерминированы:
генератор попытки засевается тройкой (seed, номер набора, номер попытки).

Наборы выполняются параллельно в пуле потоков; единственная точка соединения -
сборка отчёта.
"""
import asyncio
import time
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from app import config
from app.exceptions import DiskopError, HypothesisError, StarvationError
from app.models.ball import ProductBall, contains, disjoint, map_image
from app.models.blocks import BlockStructure
from app.models.dilation import DilationMap, map_compose
from app.models.numeric import EXACT, Numeric, Scalar, parse_scalar
from app.models.operad import (
    Config,
    MembershipLevel,
    act,
    block_permutation,
    block_sum,
    compose_blocks,
    configs_equal,
    invert_permutation,
)
from app.models.product import product_config
from app.schemas import LemmaReport, VerifyReport
from app.services.core import criticality, core_normal_form, same_core_element
from app.services.divisibility import brute_force_divides, divides, intersection_data, left_cancel
from app.services.flows import (
    Bracket,
    EntryTimeReport,
    FlowKind,
    FlowTarget,
    bisect_entry_time,
    entry_time,
    flow_apply,
    in_target,
    spherical_homotopy,
    spherical_rescale,
)
from app.services.sampling import (
    Sampler,
    composite_pair,
    random_blocks,
    random_config,
    random_core_form,
    random_disks,
    random_group,
    random_tree,
    unit_domain,
)
from app.services.scene_io import SceneBuilder, build_scene, scene_fragment
from app.services.separation import (
    correspondence_check,
    disk_bounds,
    is_separated,
    radius,
    separation_partition,
    triangle_decomposition,
    zigzag_holds,
)
from app.services.tensor import (
    BLACK_FIRST,
    WHITE_FIRST,
    interchange_move,
    relabel,
    tree_evaluate,
    unary_iso,
    unary_iso_inverse,
)
from app.utils.logger import get_logger

logger = get_logger()

Check = Callable[[Sampler], Optional[str]]


def _vector(num: Numeric, values: Iterable) -> List[Scalar]:
    return [num.coerce(v) for v in values]


# ========== Законы операда ==========

def _check_operad_laws(s: Sampler) -> Optional[str]:
    num = s.num
    blocks = random_blocks(s)
    domain = unit_domain(blocks, num)
    group = random_group(s, blocks)
    x = s.keep("x", random_config(s, domain, s.integer(1, 3), group))
    ys = [s.keep(f"y{j + 1}", random_config(s, domain, s.integer(0, 2), group)) for j in range(x.arity)]
    xy = compose_blocks(x, ys)
    zs = [random_config(s, domain, s.integer(0, 1), group) for _ in range(xy.arity)]

    nested, offset = [], 0
    for y in ys:
        nested.append(compose_blocks(y, zs[offset:offset + y.arity]))
        offset += y.arity
    if not configs_equal(compose_blocks(xy, zs), compose_blocks(x, nested)):
        return "нарушена ассоциативность (x∘y)∘z = x∘(y∘z)"

    unit = Config.unit(domain, group, num)
    if not configs_equal(compose_blocks(unit, [x]), x):
        return "нарушена левая единица id∘x = x"
    if not configs_equal(compose_blocks(x, [unit] * x.arity), x):
        return "нарушена правая единица x∘(id) = x"

    sigma = s.permutation(x.arity)
    inverse = invert_permutation(sigma)
    g = s.integer(0, group.order - 1)
    sizes = [ys[inverse[k]].arity for k in range(x.arity)]
    lhs = act(block_permutation(sigma, sizes), g, xy)
    rhs = compose_blocks(act(sigma, g, x), [act(range(ys[inverse[k]].arity), g, ys[inverse[k]])
                                           for k in range(x.arity)])
    if not configs_equal(lhs, rhs):
        return f"нарушена эквивариантность относительно (σ, g) = ({list(sigma)}, {group.elements[g]})"

    taus = [s.permutation(y.arity) for y in ys]
    lhs = compose_blocks(x, [act(tau, group.identity, y) for tau, y in zip(taus, ys)])
    if not configs_equal(lhs, act(block_sum(taus), group.identity, xy)):
        return "нарушена эквивариантность x∘(τ·y) = (⊕τ)·(x∘y)"

    h = s.integer(0, group.order - 1)
    identity = range(x.arity)
    if not configs_equal(act(identity, g, act(identity, h, x)), act(identity, group.multiply(g, h), x)):
        return "действие группы не является гомоморфизмом"
    return None


# ========== Делимость ==========

def _divisibility_pair(s: Sampler):
    blocks = random_blocks(s, max_dimension=3)
    domain = unit_domain(blocks, s.num)
    x = s.keep("x", random_config(s, domain, s.integer(1, 3), level=MembershipLevel.STAR))
    return domain, x


def _check_divisibility_oracle(s: Sampler) -> Optional[str]:
    domain, x = _divisibility_pair(s)
    if s.coin():
        y, _, _ = composite_pair(s, x, max_fiber=1)
    else:
        y = random_config(s, domain, s.integer(0, 3), level=MembershipLevel.STAR)
    s.keep("y", y)
    fast, slow = divides(x, y), brute_force_divides(x, y)
    if (fast is None) != (slow is None):
        return f"divides = {fast is not None}, полный перебор = {slow is not None}"
    if fast is None:
        return None
    if fast.alpha != slow.alpha:
        return f"α различаются: {list(fast.alpha.assignment)} и {list(slow.alpha.assignment)}"
    if not all(configs_equal(a, b) for a, b in zip(fast.quotients, slow.quotients)):
        return "частные различаются"
    return None


def _check_left_cancel(s: Sampler) -> Optional[str]:
    _, x = _divisibility_pair(s)
    y, alpha, quotients = composite_pair(s, x)
    s.keep("y", y)
    recovered = left_cancel(x, y, alpha)
    if not all(configs_equal(a, b) for a, b in zip(recovered, quotients)):
        return f"частные вдоль α = {[a + 1 for a in alpha.assignment]} не совпали с исходными"
    return None


# ========== Разделённая геометрия ==========

def _check_disk_bounds(s: Sampler) -> Optional[str]:
    num = s.num
    d = s.integer(1, 3)
    blocks = BlockStructure.trivial(d)
    domain = unit_domain(blocks, num)
    lam = s.rational("11/10", 8)
    r1, r2 = s.rational("1/32", "1/2"), s.rational("1/32", "1/2")
    direction = _vector(num, s.sphere_point(d))
    c1 = s.point_in_ball([num.zero] * d, 1, d)
    gap = lam * (r1 + r2) * (1 + s.rational(0, "1/2"))
    w = s.rational(0, 1)
    c2 = [a + gap * u for a, u in zip(c1, direction)]
    cx = [a + w * gap * u for a, u in zip(c1, direction)]
    rx = max(w * gap - r1, (1 - w) * gap - r2) + s.rational("1/64", "1/4")

    x = s.keep("x", Config.of((DilationMap.dilation(blocks, rx, cx, num),), domain, numeric=num))
    y = s.keep("y", Config.of((DilationMap.dilation(blocks, r1, c1, num),
                               DilationMap.dilation(blocks, r2, c2, num)), domain, numeric=num))
    big = [map_image(f.then_scaled(lam), domain) for f in y.maps]
    if not disjoint(big[0], big[1], num):
        return "генератор нарушил условие y₁(λB) ∩ y₂(λB) = ∅"
    x_image = map_image(x.maps[0], domain)
    if any(disjoint(x_image, image, num) for image in y.images()):
        return "генератор нарушил условие x(B) ∩ y_i(B) ≠ ∅"

    bounds = disk_bounds(lam, radius(y.maps[0], y), radius(y.maps[1], y))
    if not num.gt(radius(x.maps[0], x), bounds.lower_bound):
        return f"rad(x) = {radius(x.maps[0], x)} не больше {bounds.lower_bound} при λ = {lam}"
    enlarged = map_image(x.maps[0].then_scaled(bounds.mu_threshold), domain)
    for k, ball in enumerate(big):
        if not contains(ball, enlarged, num):
            return f"y_{k + 1}(λB) ⊄ x(μB) при λ = {lam}, μ = {bounds.mu_threshold}"
    return None


def _bubble_pieces(s: Sampler, x: Config) -> List[DilationMap]:
    num = s.num
    pieces = []
    for f in x.maps:
        shape = s.integer(0, 2)
        if shape == 0:
            pieces.append(f.then_scaled(s.rational(1, 2)))
        elif shape == 1:
            pieces.append(f.then_scaled(s.rational("1/2", 1)))
        else:
            for sign in (1, -1):
                offset = [num.zero] * x.blocks.dimension
                offset[0] = num.coerce(Fraction(3 * sign, 5))
                pieces.append(map_compose(f, DilationMap.dilation(x.blocks, Fraction(1, 12), offset, num)))
    order = s.permutation(len(pieces))
    return [pieces[k] for k in order]


def _check_bubble_transfer(s: Sampler) -> Optional[str]:
    domain = unit_domain(BlockStructure.trivial(s.integer(1, 2)), s.num)

    def build():
        x = random_disks(s, domain, s.integer(1, 3), 1 / 64, 1 / 8, MembershipLevel.SEPARATED)
        return x, x.with_maps(_bubble_pieces(s, x))

    x, y = s.until(build, lambda pair: is_separated(pair[1]))
    s.keep("x", x)
    s.keep("y", y)
    decomposition = triangle_decomposition(x, y)
    if not zigzag_holds(decomposition, x, y):
        return "диски x, y и x▽y не покрыты дисками x▷y и x◁y"
    report = correspondence_check(x, y)
    if not report.holds:
        return "; ".join(report.problems)
    return None


FIGURE_X = (("-3/2", "0", "1"), ("1", "1", "1"), ("4/5", "-9/5", "7/10"))
FIGURE_Y = (("-1/2", "1", "1"), ("3/2", "-1", "1/2"))


def figure_configs(num: Numeric):
    """Пять дисков в B(0, 4): три диска x и два диска y."""
    blocks = BlockStructure.trivial(2)
    domain = ProductBall.centered(blocks, 4, num)

    def disks(rows):
        maps = [
            DilationMap.dilation(blocks, Fraction(r) / 4, (Fraction(cx), Fraction(cy)), num)
            for cx, cy, r in rows
        ]
        return Config.of(maps, domain, numeric=num)

    return disks(FIGURE_X), disks(FIGURE_Y)


def _check_figure(s: Sampler) -> Optional[str]:
    x, y = figure_configs(s.num)
    s.keep("x", x)
    s.keep("y", y)
    data = intersection_data(x, y)
    if data.pairs() != [(0, 0), (1, 0), (2, 1)]:
        return f"соответствие {[(i + 1, j + 1) for i, j in data.pairs()]}"
    part = separation_partition(x, y, data)
    expected = ((0, 1), (2,), (1,), (0,))
    if (part.l1, part.r1, part.l2, part.r2) != expected:
        return f"разбиения L¹={part.l1}, R¹={part.r1}, L²={part.l2}, R²={part.r2} (с нуля)"
    return None


# ========== Ядро и деревья ==========

def _check_core_embedding(s: Sampler) -> Optional[str]:
    constant = s.num.coerce(config.SEPARATION_CONSTANT)
    form = random_core_form(s, constant)
    w = s.keep("w", form.evaluate())
    result = criticality(w, constant)
    if not result.critical:
        return f"значение формы ядра не критично: {result.reason}"
    recovered = core_normal_form(w, result.witness)
    if not same_core_element(form, recovered):
        return "нормальная форма не совпала с исходной формой ядра"
    return None


def _tree_domains(s: Sampler):
    v_domain = unit_domain(BlockStructure.trivial(s.integer(1, 2)), s.num)
    w_domain = unit_domain(BlockStructure.trivial(s.integer(1, 2)), s.num)
    return v_domain, w_domain


def _check_interchange(s: Sampler) -> Optional[str]:
    tree = s.keep("t", random_tree(s, *_tree_domains(s)))
    value = tree_evaluate(tree)
    v = s.integer(0, len(tree.vertices) - 1)
    for order in (WHITE_FIRST, BLACK_FIRST):
        if not configs_equal(tree_evaluate(interchange_move(tree, v, order)), value):
            return f"перестройка вершины {v + 1} ({order}) изменила значение дерева"

    vertex_perm = s.permutation(len(tree.vertices))
    white = [s.permutation(vertex.p.arity) for vertex in tree.vertices]
    black = [s.permutation(vertex.q.arity) for vertex in tree.vertices]
    leaf_perm = s.permutation(tree.arity)
    moved = relabel(tree, vertex_perm, white, black, leaf_perm)
    if not configs_equal(tree_evaluate(moved), act(leaf_perm, value.group.identity, value)):
        return "изоморфизм деревьев изменил значение не только перестановкой входов"
    return None


def _check_unary_iso(s: Sampler) -> Optional[str]:
    v_domain, w_domain = _tree_domains(s)
    p = s.keep("p", random_config(s, v_domain, 1))
    q = s.keep("q", random_config(s, w_domain, 1))
    tree = unary_iso(p, q)
    if not configs_equal(tree_evaluate(tree), product_config(p, q)):
        return "значение унарного дерева отличается от p×q"
    p2, q2 = unary_iso_inverse(tree)
    if not (configs_equal(p, p2) and configs_equal(q, q2)):
        return "обратное отображение не восстановило пару"
    return None


# ========== Потоки ==========

ORACLE_TOLERANCE = 1e-12


def _entry_slack(num: Numeric, report: EntryTimeReport) -> Scalar:
    if not num.exact:
        return ORACLE_TOLERANCE
    # рациональные оценки корней сдвигают t не более чем на 2^-50
    return num.zero if report.exact else Fraction(1, 2 ** 50)


def exact_twin(x: Config) -> Config:
    """Копия конфигурации режима Float в режиме Exact; значения переводятся в дроби по десятичной записи."""
    builder = SceneBuilder(x.numeric).add_config("x", x)
    return build_scene(builder.document, EXACT).config("x")


def _exact_ball(ball: ProductBall) -> ProductBall:
    return ProductBall(ball.blocks, tuple(parse_scalar(c) for c in ball.center),
                       tuple(parse_scalar(r) for r in ball.radii))


def _oracle_bracket(x: Config, kind: FlowKind, target: FlowTarget) -> Bracket:
    """Бисекция без допуска: в режиме Float она идёт по точной копии экземпляра."""
    if x.numeric.exact:
        return bisect_entry_time(x, kind, target)
    exact_target = FlowTarget(_exact_ball(target.inner), _exact_ball(target.outer))
    return bisect_entry_time(exact_twin(x), kind, exact_target)


def _check_flows(s: Sampler) -> Optional[str]:
    num = s.num
    kind = s.choice(list(FlowKind))
    if kind is FlowKind.SHRINK_RIGHT_PRODUCT:
        blocks = BlockStructure.product(BlockStructure.trivial(s.integer(1, 2)),
                                        BlockStructure.trivial(s.integer(1, 2)))
    else:
        blocks = random_blocks(s, max_dimension=3)
    inner = unit_domain(blocks, num)
    outer = ProductBall.centered(blocks, s.rational(1, 2, 16), num)
    source = outer if kind is FlowKind.SHRINK_LEFT else inner
    x = s.keep("x", random_config(s, source, s.integer(1, 3), level=MembershipLevel.STAR))
    target = FlowTarget(inner, outer)

    report = entry_time(x, kind, target)
    try:
        bracket = _oracle_bracket(x, kind, target)
    except HypothesisError:
        # star в режиме Float лишь с точностью до допуска: точная копия вне star
        s.rejections += 1
        return None
    slack = _entry_slack(num, report)
    t = Fraction(report.t)
    if not (bracket.lower - slack <= t <= bracket.upper + slack):
        return f"{kind.value}: t = {report.t} вне [{bracket.lower}, {bracket.upper}]"
    for fraction in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        later = report.t + (1 - report.t) * num.coerce(fraction)
        if not in_target(x, kind, target, later):
            return f"{kind.value}: поток покинул цель при t = {later}"

    a, b = s.rational(0, "1/2"), s.rational(0, "1/2")
    twice = flow_apply(flow_apply(x, kind, a), kind, b)
    if not configs_equal(twice, flow_apply(x, kind, 1 - (1 - a) * (1 - b))):
        return f"{kind.value}: нарушен закон полугруппы для a = {a}, b = {b}"

    retracted = spherical_rescale(x).retracted
    for k, f in enumerate(retracted.maps):
        if not all(num.eq(scale, f.scales[0]) for scale in f.scales):
            return f"сферическая ретракция оставила разные масштабы у компоненты {k + 1}"
    if not configs_equal(spherical_homotopy(x, 1), retracted):
        return "гомотопия при t = 1 не совпала с ретракцией"
    return None


SUITES: Dict[str, Check] = {
    "operad-laws": _check_operad_laws,
    "divisibility-oracle": _check_divisibility_oracle,
    "left-cancel": _check_left_cancel,
    "disk-bounds": _check_disk_bounds,
    "bubble-transfer": _check_bubble_transfer,
    "figure-regression": _check_figure,
    "core-embedding": _check_core_embedding,
    "interchange": _check_interchange,
    "unary-iso": _check_unary_iso,
    "flows": _check_flows,
}


def resolve_suites(selection: Sequence[str]) -> List[str]:
    """"all" раскрывается в полный список; неизвестные имена - ошибка использования."""
    if not selection or "all" in selection:
        return list(SUITES)
    unknown = [name for name in selection if name not in SUITES]
    if unknown:
        raise ValueError(f"неизвестные наборы: {', '.join(unknown)}")
    return [name for name in SUITES if name in selection]


def run_suite(name: str, seed: int, trials: int, num: Numeric, limit: int,
              timings: bool = False) -> LemmaReport:
    """Прогоняет попытки одного набора последовательно."""
    check = SUITES[name]
    index = list(SUITES).index(name)
    started = time.perf_counter()
    failures = rejections = 0
    starved = False
    counterexample, detail = None, None
    for trial in range(trials):
        sampler = Sampler(np.random.default_rng([seed, index, trial]), num, limit)
        try:
            problem = check(sampler)
        except StarvationError as exc:
            starved, detail = True, str(exc)
            rejections += sampler.rejections
            logger.warning(f"⚠️ Набор {name}: генератор исчерпал лимит",
                           deduplicate=False, context={"trial": trial})
            break
        except DiskopError as exc:
            problem = f"{type(exc).__name__}: {exc}"
        rejections += sampler.rejections
        if problem is None:
            continue
        failures += 1
        if counterexample is None:
            counterexample = scene_fragment(sampler.configs, sampler.trees, num)
            detail = f"попытка {trial}: {problem}"
            logger.error(f"❌ Набор {name}: {problem}", deduplicate=False, context={"trial": trial})

    elapsed = time.perf_counter() - started
    logger.log_suite(name, trials, failures, elapsed)
    return LemmaReport(
        name=name, trials=trials, failures=failures, rejections=rejections, starved=starved,
        first_counterexample=counterexample, detail=detail,
        elapsed=round(elapsed, 3) if timings else None,
    )


async def verify_async(seed: int, trials: int, suites: Sequence[str] = ("all",),
                       numeric: Optional[Numeric] = None, timings: bool = False,
                       workers: Optional[int] = None) -> VerifyReport:
    if trials < 1:
        raise ValueError("число попыток должно быть не меньше 1")
    num = numeric or Numeric.from_settings()
    names = resolve_suites(suites)
    semaphore = asyncio.Semaphore(workers or config.VERIFY_WORKERS)

    async def run_with_semaphore(name: str) -> LemmaReport:
        async with semaphore:
            return await asyncio.to_thread(run_suite, name, seed, trials, num, config.STARVATION_LIMIT, timings)

    logger.verify("🔎 Запуск проверки", context={"seed": seed, "trials": trials, "suites": names})
    reports = await asyncio.gather(*(run_with_semaphore(name) for name in names))
    return VerifyReport(seed=seed, trials=trials, numeric_mode=num.mode.value, suites=list(reports))


def verify_suite(seed: int, trials: int, suites: Sequence[str] = ("all",),
                 numeric: Optional[Numeric] = None, timings: bool = False) -> VerifyReport:
    """Синхронная обёртка для CLI и тестов."""
    return asyncio.run(verify_async(seed, trials, suites, numeric, timings))
