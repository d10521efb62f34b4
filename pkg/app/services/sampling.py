"""
Генераторы случайных экземпляров для проверки лемм: блочные структуры, отображения,
конфигурации заданного уровня, пары для делимости, формы ядра и деревья.

Все случайные числа рациональны с небольшими знаменателями; центры на рациональных
сферах (обратная стереографическая проекция) дают рациональные нормы.
"""
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from app.exceptions import StarvationError
from app.models.ball import ProductBall
from app.models.blocks import BlockStructure
from app.models.dilation import DilationMap
from app.models.group import GroupRep
from app.models.linalg import identity_matrix
from app.models.numeric import Numeric, Scalar
from app.models.operad import Config, MembershipLevel, StructureMap, operad_compose, validate
from app.services.core import CoreForm
from app.services.tensor import Leaf, SuperTree, Vertex

T = TypeVar("T")

_BLOCK_SHAPES = (
    (1, ((0,),)),
    (2, ((0, 1),)),
    (2, ((0,), (1,))),
    (3, ((0, 1), (2,))),
    (3, ((0, 1, 2),)),
    (4, ((0, 1), (2, 3))),
)


class Sampler:
    """Источник случайности одной попытки с учётом отбраковки."""

    def __init__(self, rng: np.random.Generator, num: Numeric, limit: int):
        self.rng = rng
        self.num = num
        self.limit = limit
        self.rejections = 0
        # экземпляры для сериализации контрпримера
        self.configs: Dict[str, Config] = {}
        self.trees: Dict[str, SuperTree] = {}

    # ----- числа -----

    def integer(self, low: int, high: int) -> int:
        """Равномерно на [low, high]."""
        return int(self.rng.integers(low, high + 1))

    def rational(self, low, high, denominator: int = 64) -> Scalar:
        lo = math.ceil(Fraction(low) * denominator)
        hi = math.floor(Fraction(high) * denominator)
        return self.num.coerce(Fraction(self.integer(lo, hi), denominator))

    def log_uniform(self, low: float, high: float, denominator: int = 1024) -> Scalar:
        value = math.exp(self.rng.uniform(math.log(low), math.log(high)))
        fraction = Fraction(value).limit_denominator(denominator)
        fraction = min(max(fraction, Fraction(low).limit_denominator(denominator)),
                       Fraction(high).limit_denominator(denominator))
        return self.num.coerce(fraction)

    def permutation(self, n: int) -> Tuple[int, ...]:
        return tuple(int(v) for v in self.rng.permutation(n))

    def choice(self, options: Sequence[T]) -> T:
        return options[self.integer(0, len(options) - 1)]

    def coin(self, p: float = 0.5) -> bool:
        return bool(self.rng.random() < p)

    # ----- точки -----

    def sphere_point(self, dim: int) -> Tuple[Fraction, ...]:
        """Рациональная точка единичной сферы S^{dim-1}."""
        if dim == 1:
            return (Fraction(self.choice((-1, 1))),)
        u = [Fraction(self.integer(-16, 16), 8) for _ in range(dim - 1)]
        s = sum(v * v for v in u)
        return tuple(2 * v / (s + 1) for v in u) + ((s - 1) / (s + 1),)

    def point_in_ball(self, center: Sequence[Scalar], radius: Scalar, dim: int) -> Tuple[Scalar, ...]:
        """Равномерная по объёму точка шара 0.8·B(center, radius) с рациональным расстоянием до центра."""
        rho = Fraction(float(self.rng.random()) ** (1 / dim)).limit_denominator(256) * Fraction(4, 5)
        direction = self.sphere_point(dim)
        radius = Fraction(radius) if self.num.exact else radius
        return tuple(self.num.coerce(c + rho * radius * d) for c, d in zip(center, direction))

    def keep(self, name: str, value):
        if isinstance(value, SuperTree):
            self.trees[name] = value
        else:
            self.configs[name] = value
        return value

    # ----- отбраковка -----

    def until(self, build: Callable[[], T], accept: Callable[[T], bool]) -> T:
        for _ in range(self.limit):
            candidate = build()
            if accept(candidate):
                return candidate
            self.rejections += 1
        raise StarvationError(f"генератор не построил экземпляр за {self.limit} попыток")


# ========== Геометрия ==========

def random_blocks(s: Sampler, max_dimension: int = 4, min_dimension: int = 1) -> BlockStructure:
    dimension, coarse = s.choice([shape for shape in _BLOCK_SHAPES if min_dimension <= shape[0] <= max_dimension])
    return BlockStructure(dimension, coarse, coarse)


def unit_domain(blocks: BlockStructure, num: Numeric) -> ProductBall:
    return ProductBall.centered(blocks, 1, num)


def random_ortho(s: Sampler, blocks: BlockStructure, permute_blocks: bool = False):
    """Знаковая перестановка внутри тонких блоков; по желанию переставляет грубые блоки равной размерности."""
    num = s.num
    d = blocks.dimension
    matrix = [[num.zero] * d for _ in range(d)]
    targets = list(range(blocks.block_count))
    if permute_blocks:
        same = [j for j in targets if len(blocks.coarse[j]) == len(blocks.coarse[0])]
        shuffled = [same[k] for k in s.permutation(len(same))]
        for j, k in zip(same, shuffled):
            targets[j] = k
    for j, block in enumerate(blocks.coarse):
        image = blocks.coarse[targets[j]]
        for col, row in zip(block, (image[k] for k in s.permutation(len(image)))):
            matrix[row][col] = num.one if s.coin() else -num.one
    return tuple(tuple(row) for row in matrix)


def random_group(s: Sampler, blocks: BlockStructure) -> GroupRep:
    if s.coin():
        return GroupRep.trivial(blocks, s.num)
    return GroupRep.from_generators(blocks, {"g": random_ortho(s, blocks, permute_blocks=True)}, s.num)


def _translation(s: Sampler, domain: ProductBall) -> Tuple[Scalar, ...]:
    translation = [s.num.zero] * domain.blocks.dimension
    for j, block in enumerate(domain.blocks.coarse):
        point = s.point_in_ball([domain.center[a] for a in block], domain.radii[j], len(block))
        for axis, value in zip(block, point):
            translation[axis] = value
    return tuple(translation)


def random_map(s: Sampler, domain: ProductBall, low="1/8", high="1/2", rotate: bool = True) -> DilationMap:
    """Отображение растяжения с масштабами в [low, high]·R_j и сдвигом в 0.8·области."""
    num = s.num
    blocks = domain.blocks
    ortho = random_ortho(s, blocks) if rotate else identity_matrix(blocks.dimension, num.one, num.zero)
    scales = tuple(s.rational(low, high) for _ in range(blocks.block_count))
    return DilationMap(blocks, ortho, scales, _translation(s, domain))


def random_config(s: Sampler, domain: ProductBall, arity: int, group: Optional[GroupRep] = None,
                  level: Optional[MembershipLevel] = None, low="1/8", high="1/2") -> Config:
    """Конфигурация с радиусами в [low, high]; при заданном уровне - отбраковкой до принадлежности."""
    group = group or GroupRep.trivial(domain.blocks, s.num)

    def build() -> Config:
        maps = [random_map(s, domain, low, high) for _ in range(arity)]
        return Config(tuple(maps), domain, group, s.num)

    if level is None:
        return build()
    return s.until(build, lambda x: validate(x, level).valid)


def random_disks(s: Sampler, domain: ProductBall, arity: int, low: float, high: float,
                 level: MembershipLevel) -> Config:
    """Диски без поворота с лог-равномерными радиусами и центрами в 0.8·области."""
    num = s.num
    blocks = domain.blocks

    def build() -> Config:
        maps = []
        for _ in range(arity):
            maps.append(DilationMap.dilation(blocks, s.log_uniform(low, high), _translation(s, domain), num))
        return Config.of(maps, domain, numeric=num)

    return s.until(build, lambda x: validate(x, level).valid)


def random_structure_map(s: Sampler, source: int, target: int) -> StructureMap:
    return StructureMap(source, target, tuple(s.integer(0, target - 1) for _ in range(source)))


def composite_pair(s: Sampler, x: Config, max_fiber: int = 2) -> Tuple[Config, StructureMap, Tuple[Config, ...]]:
    """y = x∘_α(q) со star-частными; α случайно перемешивает слои."""
    sizes = [s.integer(0, max_fiber) for _ in range(x.arity)]
    quotients = tuple(
        random_config(s, x.domain, size, x.group, MembershipLevel.STAR) for size in sizes
    )
    total = sum(sizes)
    order = s.permutation(total)
    slots = [j for j, size in enumerate(sizes) for _ in range(size)]
    assignment = [0] * total
    for position, k in enumerate(order):
        assignment[k] = slots[position]
    alpha = StructureMap(total, x.arity, tuple(assignment))
    return operad_compose(x, alpha, quotients), alpha, quotients


# ========== Формы ядра и деревья ==========

def _row_disks(s: Sampler, count: int, domain: ProductBall, constant: Scalar) -> Config:
    """
    Разделённые диски вдоль первой оси первого грубого блока: центры равномерно,
    радиус не больше 1/(8·C·count), чтобы объемлющие шары ячеек оставались разделёнными.
    """
    num = s.num
    blocks = domain.blocks
    axis = blocks.coarse[0][0]
    maps = []
    for i in range(count):
        center = [num.zero] * blocks.dimension
        center[axis] = -1 + num.coerce(Fraction(2 * i + 1, count))
        scale = s.rational("1/2", 1, 16) / (8 * constant * count)
        maps.append(DilationMap.dilation(blocks, scale, tuple(center), num))
    return Config.of(maps, domain, numeric=num)


def _cell(s: Sampler, domain: ProductBall, anchor: Tuple[Scalar, ...]) -> Config:
    """Унарная ячейка со знаковой перестановкой и образом B(anchor, ≤ 1/2) внутри области."""
    blocks = domain.blocks
    scales = tuple(s.rational("1/8", "1/2") for _ in range(blocks.block_count))
    f = DilationMap(blocks, random_ortho(s, blocks), scales, anchor)
    return Config.of((f,), domain, numeric=s.num)


def random_core_form(s: Sampler, constant: Scalar, max_rows: int = 3, max_cols: int = 3) -> CoreForm:
    """
    Форма ядра над V×W с блоками размерности не меньше 2: разделённые строки a и
    столбцы b, сдвинутые и повёрнутые унарные ячейки и случайная σ. Ячейки одной
    строки имеют общий центр в V, ячейки одного столбца - общий центр в W.
    """
    num = s.num
    v_domain = unit_domain(random_blocks(s, min_dimension=2), num)
    w_domain = unit_domain(random_blocks(s, min_dimension=2), num)
    rows, cols = s.integer(1, max_rows), s.integer(1, max_cols)

    def build() -> List[List[bool]]:
        return [[s.coin(0.6) for _ in range(cols)] for _ in range(rows)]

    def covered(grid) -> bool:
        return all(any(row) for row in grid) and all(any(grid[i][j] for i in range(rows)) for j in range(cols))

    grid = s.until(build, covered)
    a = _row_disks(s, rows, v_domain, constant)
    b = _row_disks(s, cols, w_domain, constant)
    v_anchors = [_translation(s, ProductBall.centered(v_domain.blocks, Fraction(1, 4), num)) for _ in range(rows)]
    w_anchors = [_translation(s, ProductBall.centered(w_domain.blocks, Fraction(1, 4), num)) for _ in range(cols)]
    empty = (Config.nullary(v_domain, numeric=num), Config.nullary(w_domain, numeric=num))
    cells = []
    for i in range(rows):
        row = []
        for j in range(cols):
            if grid[i][j]:
                row.append((_cell(s, v_domain, v_anchors[i]), _cell(s, w_domain, w_anchors[j])))
            else:
                row.append(empty)
        cells.append(tuple(row))
    occupied = sum(sum(row) for row in grid)
    return CoreForm(s.permutation(occupied), a, b, tuple(cells))


def random_tree(s: Sampler, v_domain: ProductBall, w_domain: ProductBall, max_height: int = 3,
                max_arity: int = 2) -> SuperTree:
    """Дерево в суперпозиции высоты не больше max_height с произвольными декорациями."""
    vertices: List[Optional[Vertex]] = []

    def grow(depth: int) -> int:
        index = len(vertices)
        vertices.append(None)
        p = random_config(s, v_domain, s.integer(0, max_arity))
        q = random_config(s, w_domain, s.integer(0, max_arity))
        cells = [(i, j) for i in range(p.arity) for j in range(q.arity)]
        inputs = []
        for _ in cells:
            if depth < max_height and s.coin(0.4):
                inputs.append(grow(depth + 1))
            else:
                inputs.append(Leaf(-1))
        vertices[index] = Vertex(p, q, tuple(inputs), tuple(cells))
        return index

    grow(1)
    leaf_count = sum(1 for v in vertices for e in v.inputs if isinstance(e, Leaf))
    labels = iter(s.permutation(leaf_count))
    labelled = [
        Vertex(v.p, v.q, tuple(Leaf(next(labels)) if isinstance(e, Leaf) else e for e in v.inputs), v.xi)
        for v in vertices
    ]
    return SuperTree(tuple(labelled))
