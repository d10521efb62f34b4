"""
Обработчики подкоманд CLI. Каждая подкоманда загружает сцену, вызывает сервис и
печатает результат таблицей или JSON (--json). Коды выхода: 0 - успех,
1 - ошибка предметной области, 2 - ошибка использования.
"""
import argparse
import json
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.exceptions import DiskopError
from app.models.numeric import Numeric, format_scalar
from app.models.operad import MembershipLevel, StructureMap, operad_compose, validate
from app.schemas import DivisionOut, EntryTimeOut, PartitionOut, ValidateOut, ViolationOut
from app.services.core import canonical_core_form, core_normal_form
from app.services.divisibility import divides, intersection_data
from app.services.flows import (
    FlowKind,
    FlowTarget,
    bisect_entry_time,
    core_entry_time,
    entry_time,
    flow_apply,
)
from app.services.render import render_svg
from app.services.scene_io import Scene, SceneBuilder, load_scene, one_based, scene_fragment
from app.services.separation import separation_partition, triangle_decomposition, zigzag_holds
from app.services.tensor import tree_evaluate, tree_validate
from app.services.verify import SUITES, verify_suite
from app.utils.logger import get_logger

logger = get_logger()

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Некорректные аргументы, обнаруженные после разбора."""


# ========== Типы аргументов ==========

def one_based_list(text: str) -> Tuple[int, ...]:
    """"1,1,2" → (0, 0, 1)."""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидается список номеров через запятую: {text!r}") from None
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("номера начинаются с 1")
    return tuple(v - 1 for v in values)


def axes_pair(text: str) -> Tuple[int, int]:
    try:
        a, b = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидается пара осей вида 0,1: {text!r}") from None
    return a, b


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидается целое число: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("значение должно быть не меньше 1")
    return value


# ========== Вывод ==========

def _dump(data) -> str:
    return json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2)


def _emit(args, data, lines: Callable[[], List[str]]) -> None:
    if hasattr(data, "model_dump"):
        data = data.model_dump(mode="json", exclude_none=True)
    if args.json:
        print(_dump(data))
    else:
        print("\n".join(lines()))


def _numeric(args) -> Optional[Numeric]:
    if args.mode is None and args.tolerance is None:
        return None
    return Numeric.from_settings(args.mode, args.tolerance)


def _scene(args) -> Scene:
    if not args.scene:
        raise UsageError("нужен параметр --scene")
    return load_scene(args.scene, _numeric(args))


def _fmt(values: Sequence[int]) -> str:
    return "{" + ", ".join(str(v) for v in values) + "}"


# ========== Подкоманды ==========

def cmd_validate(args) -> int:
    scene = _scene(args)
    x = scene.config(args.config)
    report = validate(x, MembershipLevel(args.level), scene.separation_constant)
    out = ValidateOut(
        config=args.config, level=report.level.value, valid=report.valid,
        violations=[ViolationOut(group_element=v.group_element, i=v.i + 1,
                                 j=None if v.j is None else v.j + 1, predicate=v.predicate)
                    for v in report.violations],
    )
    _emit(args, out, lambda: [f"{args.config}: уровень {out.level} - {'да' if out.valid else 'нет'}"]
          + [f"  {v.describe()}" for v in report.violations])
    return EXIT_OK


def cmd_compose(args) -> int:
    scene = _scene(args)
    x = scene.config(args.x)
    quotients = [scene.config(name) for name in args.quotients]
    if args.alpha is None:
        alpha = StructureMap.lexicographic([q.arity for q in quotients])
    else:
        alpha = StructureMap(len(args.alpha), x.arity, args.alpha)
    result = operad_compose(x, alpha, quotients)
    fragment = scene_fragment({args.name: result}, numeric=scene.numeric)
    _emit(args, fragment, lambda: [_dump(fragment)])
    return EXIT_OK


def cmd_divide(args) -> int:
    scene = _scene(args)
    x, y = scene.config(args.x), scene.config(args.y)
    subgroup = None if args.subgroup is None else [x.group.index_of(label) for label in args.subgroup.split(",")]
    division = divides(x, y, subgroup)
    if division is None:
        out = DivisionOut(divides=False)
    else:
        builder = SceneBuilder(scene.numeric)
        out = DivisionOut(divides=True, alpha=one_based(division.alpha.assignment),
                          quotients=[builder.config_spec(q) for q in division.quotients])

    def lines() -> List[str]:
        if not out.divides:
            return [f"{args.x} не делит {args.y}"]
        return [f"{args.x} делит {args.y}", f"α = {out.alpha}"] + [
            f"q{j + 1}: арность {len(q.maps)}" for j, q in enumerate(out.quotients)
        ]

    _emit(args, out, lines)
    return EXIT_OK


def cmd_partition(args) -> int:
    scene = _scene(args)
    x, y = scene.config(args.x), scene.config(args.y)
    data = intersection_data(x, y)
    part = separation_partition(x, y, data)
    out = PartitionOut(
        relation=[(i + 1, j + 1) for i, j in data.pairs()],
        l1=one_based(part.l1), r1=one_based(part.r1), l2=one_based(part.l2), r2=one_based(part.r2),
    )
    _emit(args, out, lambda: [
        f"∩ = {[tuple(p) for p in out.relation]}",
        f"L¹ = {_fmt(out.l1)}  R¹ = {_fmt(out.r1)}",
        f"L² = {_fmt(out.l2)}  R² = {_fmt(out.r2)}",
    ])
    return EXIT_OK


def cmd_triangles(args) -> int:
    scene = _scene(args)
    x, y = scene.config(args.x), scene.config(args.y)
    decomposition = triangle_decomposition(x, y, scene.separation_constant)
    fragment = scene_fragment({"right": decomposition.right, "left": decomposition.left,
                               "down": decomposition.down}, numeric=scene.numeric)
    data = {
        "scene": fragment,
        "sigma_x": one_based(decomposition.sigma_x),
        "sigma_y": one_based(decomposition.sigma_y),
        "zigzag": zigzag_holds(decomposition, x, y),
    }
    _emit(args, data, lambda: [
        f"x▷y: арность {decomposition.right.arity}",
        f"x◁y: арность {decomposition.left.arity}",
        f"x▽y: арность {decomposition.down.arity}",
        f"σ_x = {data['sigma_x']}  σ_y = {data['sigma_y']}",
        f"зигзаг: {'да' if data['zigzag'] else 'нет'}",
    ])
    return EXIT_OK


def cmd_tree_eval(args) -> int:
    scene = _scene(args)
    tree = scene.tree(args.tree)
    report = tree_validate(tree)
    value = tree_evaluate(tree)
    data = {
        "report": {"well_formed": report.well_formed, "reduced": report.reduced, "proper": report.proper,
                   "core": report.core, "height": report.height},
        "value": scene_fragment({args.tree: value}, numeric=scene.numeric),
    }
    _emit(args, data, lambda: [
        f"{args.tree}: высота {report.height}, арность {value.arity}",
        f"редуцированное: {report.reduced}, правильное: {report.proper}, ядро: {report.core}",
    ])
    return EXIT_OK


def cmd_core_normalize(args) -> int:
    scene = _scene(args)
    tree = scene.tree(args.tree)
    entry = core_entry_time(tree, scene.shrink_factor, args.cap, scene.separation_constant)
    w = flow_apply(tree_evaluate(tree), FlowKind.SHRINK_RIGHT_PRODUCT, entry.t)
    form = canonical_core_form(core_normal_form(w, entry.witness))
    builder = SceneBuilder(scene.numeric)
    cells = [
        [None if c.arity == 0 else {"c": builder.config_spec(c).model_dump(mode="json", exclude_none=True),
                                     "d": builder.config_spec(d).model_dump(mode="json", exclude_none=True)}
         for c, d in row]
        for row in form.cells
    ]
    data = {
        "t": format_scalar(entry.t),
        "steps": entry.steps,
        "sigma": one_based(form.sigma),
        "a": builder.config_spec(form.a).model_dump(mode="json", exclude_none=True),
        "b": builder.config_spec(form.b).model_dump(mode="json", exclude_none=True),
        "cells": cells,
        "scene": builder.fragment(),
    }
    _emit(args, data, lambda: [
        f"t = {data['t']} (шагов: {entry.steps})",
        f"сетка {form.a.arity}×{form.b.arity}, σ = {data['sigma']}",
    ] + ["  " + " ".join("·" if cell is None else "■" for cell in row) for row in cells])
    return EXIT_OK


def cmd_flow(args) -> int:
    scene = _scene(args)
    x = scene.config(args.config)
    result = flow_apply(x, FlowKind(args.kind), scene.numeric.coerce(args.t))
    fragment = scene_fragment({args.name or f"{args.config}_flowed": result}, numeric=scene.numeric)
    _emit(args, fragment, lambda: [_dump(fragment)])
    return EXIT_OK


def cmd_entry_time(args) -> int:
    scene = _scene(args)
    x = scene.config(args.config)
    if args.inner not in scene.domains or args.outer not in scene.domains:
        raise UsageError("области --inner и --outer должны быть объявлены в сцене")
    kind = FlowKind(args.kind)
    target = FlowTarget(scene.domains[args.inner], scene.domains[args.outer])
    report = entry_time(x, kind, target)
    binding = None
    if report.binding is not None:
        b = report.binding
        binding = f"g={b.group_element} {one_based(b.indices)}: {b.predicate}"
    bracket = None
    if args.bisect:
        found = bisect_entry_time(x, kind, target)
        bracket = (format_scalar(found.lower), format_scalar(found.upper))
    out = EntryTimeOut(t=format_scalar(report.t), exact=report.exact, binding=binding, bracket=bracket)
    _emit(args, out, lambda: [f"t = {out.t}{'' if out.exact else ' (оценка сверху)'}"]
          + ([f"ограничение: {binding}"] if binding else [])
          + ([f"бисекция: [{bracket[0]}, {bracket[1]}]"] if bracket else []))
    return EXIT_OK


def cmd_render(args) -> int:
    scene = _scene(args)
    svg = render_svg(scene, args.config, args.axes, args.enlarged, args.domain)
    if args.output:
        with open(args.output, "wb") as handle:
            handle.write(svg)
        logger.info(f"✅ SVG сохранён: {args.output}", context={"bytes": len(svg)})
    else:
        sys.stdout.buffer.write(svg)
        sys.stdout.flush()
    return EXIT_OK


def cmd_verify(args) -> int:
    numeric = _numeric(args)
    try:
        report = verify_suite(args.seed, args.trials, args.suite, numeric, args.timings)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.json:
        print(_dump(report.model_dump(mode="json", exclude_none=True)))
    else:
        print(f"{'набор':<22}{'попыток':>9}{'ошибок':>8}{'отказов':>10}")
        for suite in report.suites:
            flag = " (генератор исчерпан)" if suite.starved else ""
            print(f"{suite.name:<22}{suite.trials:>9}{suite.failures:>8}{suite.rejections:>10}{flag}")
            if suite.detail and suite.failures:
                print(f"    {suite.detail}")
    return EXIT_DOMAIN if report.failures else EXIT_OK


# ========== Разбор аргументов ==========

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scene", help="файл сцены JSON")
    common.add_argument("--json", action="store_true", help="машиночитаемый вывод")
    common.add_argument("--mode", choices=["exact", "float"], help="числовой режим")
    common.add_argument("--tolerance", type=float, help="допуск сравнения в режиме float")

    parser = argparse.ArgumentParser(prog="diskop", description="Операды малых дисков: проверки и построения")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="проверка уровня принадлежности")
    p.add_argument("--config", required=True)
    p.add_argument("--level", choices=[level.value for level in MembershipLevel], default="star")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("compose", parents=[common], help="композиция x∘_α(q)")
    p.add_argument("--x", required=True)
    p.add_argument("--quotients", nargs="*", default=[])
    p.add_argument("--alpha", type=one_based_list, help="α как список номеров, например 1,1,2")
    p.add_argument("--name", default="composite")
    p.set_defaults(handler=cmd_compose)

    p = sub.add_parser("divide", parents=[common], help="геометрический тест делимости")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--subgroup", help="элементы подгруппы H через запятую")
    p.set_defaults(handler=cmd_divide)

    for name, handler, text in (
        ("partition", cmd_partition, "соответствие пересечений и разбиения L/R"),
        ("triangles", cmd_triangles, "треугольные элементы x▷y, x◁y, x▽y"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--x", required=True)
        p.add_argument("--y", required=True)
        p.set_defaults(handler=handler)

    p = sub.add_parser("tree-eval", parents=[common], help="значение дерева в суперпозиции")
    p.add_argument("--tree", required=True)
    p.set_defaults(handler=cmd_tree_eval)

    p = sub.add_parser("core-normalize", parents=[common], help="время входа в ядро и нормальная форма")
    p.add_argument("--tree", required=True)
    p.add_argument("--cap", type=positive_int)
    p.set_defaults(handler=cmd_core_normalize)

    kinds = [kind.value for kind in FlowKind]
    p = sub.add_parser("flow", parents=[common], help="поток сжатия в момент t")
    p.add_argument("--config", required=True)
    p.add_argument("--kind", choices=kinds, required=True)
    p.add_argument("--t", required=True, help="момент t ∈ [0, 1), например 1/2")
    p.add_argument("--name")
    p.set_defaults(handler=cmd_flow)

    p = sub.add_parser("entry-time", parents=[common], help="время входа потока в цель")
    p.add_argument("--config", required=True)
    p.add_argument("--kind", choices=kinds, required=True)
    p.add_argument("--inner", required=True, help="область B")
    p.add_argument("--outer", required=True, help="область B'")
    p.add_argument("--bisect", action="store_true", help="добавить интервал бисекции")
    p.set_defaults(handler=cmd_entry_time)

    p = sub.add_parser("render", parents=[common], help="SVG-проекция конфигураций")
    p.add_argument("--config", nargs="+", required=True)
    p.add_argument("--axes", type=axes_pair, default=(0, 1))
    p.add_argument("--enlarged", action="store_true", help="пунктирные круги C·B")
    p.add_argument("--domain")
    p.add_argument("--output")
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser("verify", parents=[common], help="рандомизированная проверка лемм")
    p.add_argument("--suite", nargs="+", default=["all"], choices=["all", *SUITES])
    p.add_argument("--trials", type=positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timings", action="store_true", help="включить время наборов в отчёт")
    p.set_defaults(handler=cmd_verify)
    return parser


def run_command(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    arguments: Dict = {k: v for k, v in vars(args).items() if k != "handler"}
    try:
        code = args.handler(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"diskop {args.command}: ошибка: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except DiskopError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc}", deduplicate=False, context={"command": args.command})
        print(f"ошибка: {exc}", file=sys.stderr)
        code = EXIT_DOMAIN
    logger.log_command(args.command, arguments, code)
    return code
