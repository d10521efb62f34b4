"""
Деревья в суперпозиции как представители элементов тензорного произведения
Бордмана–Фогта: проверка, вычисление в операд произведения, перестановочные
перестройки и изоморфизм унарных компонент.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from app.exceptions import ArityError, TreeError
from app.models.operad import Config, act, compose_blocks, configs_equal
from app.models.product import product_config, project
from app.utils.logger import get_logger

logger = get_logger()


@dataclass(frozen=True)
class Leaf:
    """Входное ребро дерева с номером входа."""
    label: int


Edge = Union[int, Leaf]


@dataclass(frozen=True)
class Vertex:
    """
    Вершина с белыми метками χ_W = ar(p) и чёрными χ_B = ar(q).
    inputs[e] - дочерняя вершина или лист; xi[e] = (i, j) - пара меток ребра e.
    """
    p: Config
    q: Config
    inputs: Tuple[Edge, ...]
    xi: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "xi", tuple(tuple(pair) for pair in self.xi))

    @property
    def is_stump(self) -> bool:
        return not self.inputs

    def edge_at(self, i: int, j: int) -> Edge:
        return self.inputs[self.xi.index((i, j))]


@dataclass(frozen=True)
class SuperTree:
    vertices: Tuple[Vertex, ...]
    root: int = 0

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))

    def leaves(self) -> List[int]:
        return [e.label for v in self.vertices for e in v.inputs if isinstance(e, Leaf)]

    @property
    def arity(self) -> int:
        return len(self.leaves())


@dataclass(frozen=True)
class TreeReport:
    well_formed: bool
    reduced: bool
    proper: bool
    core: bool
    height: int
    problems: Tuple[str, ...] = ()


def corolla(p: Config, q: Config, labels: Optional[Sequence[int]] = None) -> SuperTree:
    """Дерево из одной вершины; вход (i, j) получает номер labels[i·|q| + j]."""
    cells = [(i, j) for i in range(p.arity) for j in range(q.arity)]
    labels = list(range(len(cells))) if labels is None else list(labels)
    if len(labels) != len(cells):
        raise ArityError(f"нужно {len(cells)} номеров входов, передано {len(labels)}")
    return SuperTree((Vertex(p, q, tuple(Leaf(k) for k in labels), tuple(cells)),))


# ========== Проверка ==========

def _structure_problems(tree: SuperTree) -> List[str]:
    problems = []
    n = len(tree.vertices)
    if n == 0:
        return ["дерево без вершин"]
    if not 0 <= tree.root < n:
        return [f"корень {tree.root + 1} вне списка вершин"]
    parents: Dict[int, int] = {}
    first = tree.vertices[tree.root]
    for v, vertex in enumerate(tree.vertices):
        expected = vertex.p.arity * vertex.q.arity
        if len(vertex.inputs) != expected:
            problems.append(f"вершина {v + 1}: {len(vertex.inputs)} входящих рёбер вместо |χ_W|·|χ_B| = {expected}")
        cells = {(i, j) for i in range(vertex.p.arity) for j in range(vertex.q.arity)}
        if len(vertex.xi) != len(vertex.inputs) or set(vertex.xi) != cells or len(set(vertex.xi)) != len(vertex.xi):
            problems.append(f"вершина {v + 1}: ξ не является биекцией χ_W×χ_B → In(v)")
        if vertex.p.domain != first.p.domain or vertex.q.domain != first.q.domain:
            problems.append(f"вершина {v + 1}: декорации заданы над другими областями")
        for edge in vertex.inputs:
            if isinstance(edge, Leaf):
                continue
            if not 0 <= edge < n:
                problems.append(f"вершина {v + 1}: ссылка на несуществующую вершину {edge + 1}")
            elif edge == tree.root:
                problems.append(f"вершина {v + 1}: ребро ведёт в корень")
            elif edge in parents:
                problems.append(f"вершина {edge + 1} имеет двух родителей")
            else:
                parents[edge] = v
    if problems:
        return problems
    orphans = [v for v in range(n) if v != tree.root and v not in parents]
    if orphans:
        problems.append(f"вершины {[v + 1 for v in orphans]} не достижимы из корня")
    # без сирот и с единственными родителями цикл возможен только вне корня
    seen, stack = set(), [tree.root]
    while stack:
        v = stack.pop()
        seen.add(v)
        stack.extend(e for e in tree.vertices[v].inputs if not isinstance(e, Leaf))
    if len(seen) != n:
        problems.append("в дереве есть цикл")
    labels = tree.leaves()
    if sorted(labels) != list(range(len(labels))):
        problems.append(f"номера входов {[l + 1 for l in labels]} не образуют ординал")
    return problems


def height(tree: SuperTree, v: Optional[int] = None) -> int:
    """Наибольшее число вершин на пути от корня."""
    v = tree.root if v is None else v
    children = [e for e in tree.vertices[v].inputs if not isinstance(e, Leaf)]
    return 1 + max((height(tree, c) for c in children), default=0)


def _edge_not_stump(tree: SuperTree, edge: Edge) -> bool:
    return isinstance(edge, Leaf) or not tree.vertices[edge].is_stump


def is_reduced(tree: SuperTree) -> bool:
    for vertex in tree.vertices:
        if vertex.is_stump:
            continue
        n, m = vertex.p.arity, vertex.q.arity
        if not all(any(_edge_not_stump(tree, vertex.edge_at(i, j)) for j in range(m)) for i in range(n)):
            return False
        if not all(any(_edge_not_stump(tree, vertex.edge_at(i, j)) for i in range(n)) for j in range(m)):
            return False
    return True


def tree_validate(tree: SuperTree) -> TreeReport:
    problems = _structure_problems(tree)
    if problems:
        return TreeReport(False, False, False, False, 0, tuple(problems))
    reduced = is_reduced(tree)
    proper = reduced and all(
        isinstance(vertex.inputs[0], Leaf) for vertex in tree.vertices if len(vertex.inputs) == 1
    )
    h = height(tree)
    return TreeReport(True, reduced, proper, proper and h <= 2, h)


# ========== Вычисление ==========

def _evaluate_vertex(tree: SuperTree, v: int) -> Tuple[Config, List[int]]:
    vertex = tree.vertices[v]
    top = product_config(vertex.p, vertex.q)
    m = vertex.q.arity
    quotients, labels = [], []
    for k in range(top.arity):
        edge = vertex.edge_at(*divmod(k, m))
        if isinstance(edge, Leaf):
            quotients.append(Config.unit(top.domain, top.group, top.numeric))
            labels.append(edge.label)
        else:
            sub, sub_labels = _evaluate_vertex(tree, edge)
            quotients.append(sub)
            labels.extend(sub_labels)
    return compose_blocks(top, quotients), labels


def tree_evaluate(tree: SuperTree) -> Config:
    """
    Образ дерева в операде над B_V×B_W: корона вершины даёт (p_i × q_j) в
    лексикографическом порядке, поддеревья подставляются композицией,
    компонента с номером входа l оказывается на месте l.
    """
    problems = _structure_problems(tree)
    if problems:
        raise TreeError("; ".join(problems))
    value, labels = _evaluate_vertex(tree, tree.root)
    return act(labels, value.group.identity, value)


def interchange_equal(first: SuperTree, second: SuperTree) -> bool:
    """Равенство образов двух деревьев в операде произведения."""
    a, b = tree_evaluate(first), tree_evaluate(second)
    if a.arity != b.arity:
        raise ArityError(f"деревья разной арности: {a.arity} и {b.arity}")
    return configs_equal(a, b)


# ========== Перестройки ==========

WHITE_FIRST = "white"
BLACK_FIRST = "black"


def interchange_move(tree: SuperTree, v: int, order: str = WHITE_FIRST) -> SuperTree:
    """
    Раскрывает вершину (p, q) в двухуровневое дерево: p∘(q)_i при order="white"
    или q∘(p)_j при order="black". Значение дерева не меняется.
    """
    if order not in (WHITE_FIRST, BLACK_FIRST):
        raise TreeError(f"неизвестный порядок {order!r}, ожидается white или black")
    vertex = tree.vertices[v]
    p, q = vertex.p, vertex.q
    unit_v = Config.unit(p.domain, p.group, p.numeric)
    unit_w = Config.unit(q.domain, q.group, q.numeric)
    vertices = list(tree.vertices)
    n, m = p.arity, q.arity
    if order == WHITE_FIRST:
        children = []
        for i in range(n):
            children.append(len(vertices))
            vertices.append(Vertex(unit_v, q, tuple(vertex.edge_at(i, j) for j in range(m)),
                                   tuple((0, j) for j in range(m))))
        vertices[v] = Vertex(p, unit_w, tuple(children), tuple((i, 0) for i in range(n)))
    else:
        children = []
        for j in range(m):
            children.append(len(vertices))
            vertices.append(Vertex(p, unit_w, tuple(vertex.edge_at(i, j) for i in range(n)),
                                   tuple((i, 0) for i in range(n))))
        vertices[v] = Vertex(unit_v, q, tuple(children), tuple((0, j) for j in range(m)))
    return SuperTree(tuple(vertices), tree.root)


def relabel(
    tree: SuperTree,
    vertex_perm: Sequence[int],
    white_perms: Sequence[Sequence[int]],
    black_perms: Sequence[Sequence[int]],
    leaf_perm: Optional[Sequence[int]] = None,
) -> SuperTree:
    """
    Изоморфизм деревьев (α, γ_W, γ_B): вершина v становится α(v), белая метка i
    вершины v - γ_W(v)(i), чёрная j - γ_B(v)(j); декорации переставляются действием.
    leaf_perm дополнительно перенумеровывает входы.
    """
    n = len(tree.vertices)
    if sorted(vertex_perm) != list(range(n)):
        raise TreeError("α не является перестановкой вершин")
    leaf_perm = list(range(tree.arity)) if leaf_perm is None else list(leaf_perm)
    vertices: List[Optional[Vertex]] = [None] * n
    for v, vertex in enumerate(tree.vertices):
        gw, gb = tuple(white_perms[v]), tuple(black_perms[v])
        inputs = tuple(
            Leaf(leaf_perm[e.label]) if isinstance(e, Leaf) else vertex_perm[e]
            for e in vertex.inputs
        )
        xi = tuple((gw[i], gb[j]) for i, j in vertex.xi)
        vertices[vertex_perm[v]] = Vertex(
            act(gw, vertex.p.group.identity, vertex.p),
            act(gb, vertex.q.group.identity, vertex.q),
            inputs,
            xi,
        )
    return SuperTree(tuple(vertices), vertex_perm[tree.root])


# ========== (P⊗Q)(1) ≅ P(1)×Q(1) ==========

def unary_iso(p_bar: Config, q_bar: Config) -> SuperTree:
    if p_bar.arity != 1 or q_bar.arity != 1:
        raise ArityError("унарный изоморфизм определён только для элементов арности 1")
    return corolla(p_bar, q_bar)


def unary_iso_inverse(tree: SuperTree) -> Tuple[Config, Config]:
    w = tree_evaluate(tree)
    if w.arity != 1:
        raise ArityError(f"дерево имеет арность {w.arity}, ожидается 1")
    return project(w, 0), project(w, 1)
