"""
Загрузка и сохранение сцен: JSON-документ → проверенные объекты и обратно.
Ошибки схемы и инвариантов превращаются в SceneError с путём внутри документа.
"""
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from app.exceptions import DiskopError, SceneError
from app.models.ball import ProductBall
from app.models.blocks import BlockStructure
from app.models.dilation import DilationMap, validate_map
from app.models.group import GroupRep, validate_group
from app.models.linalg import identity_matrix
from app.models.numeric import Numeric, NumericMode, Scalar, format_scalar
from app.models.operad import Config
from app.schemas import (
    BlockSpec,
    ConfigSpec,
    DomainSpec,
    EdgeSpec,
    GroupSpec,
    MapSpec,
    SceneDocument,
    SettingsSpec,
    TreeSpec,
    VertexSpec,
)
from app.services.tensor import Leaf, SuperTree, Vertex, tree_validate
from app.utils.logger import get_logger

logger = get_logger()

Path = Tuple[Union[str, int], ...]


@dataclass
class Scene:
    document: SceneDocument
    numeric: Numeric
    separation_constant: Scalar
    shrink_factor: Scalar
    blocks: Dict[str, BlockStructure] = field(default_factory=dict)
    groups: Dict[str, GroupRep] = field(default_factory=dict)
    domains: Dict[str, ProductBall] = field(default_factory=dict)
    configs: Dict[str, Config] = field(default_factory=dict)
    trees: Dict[str, SuperTree] = field(default_factory=dict)

    def config(self, name: str) -> Config:
        if name not in self.configs:
            raise SceneError(f"конфигурация {name!r} не найдена", ("configs", name))
        return self.configs[name]

    def tree(self, name: str) -> SuperTree:
        if name not in self.trees:
            raise SceneError(f"дерево {name!r} не найдено", ("trees", name))
        return self.trees[name]


# ========== Разбор ==========

class _Resolver:
    """Разрешает имена документа с обнаружением циклов у произведений."""

    def __init__(self, document: SceneDocument, num: Numeric):
        self.doc = document
        self.num = num
        self.blocks: Dict[str, BlockStructure] = {}
        self.groups: Dict[str, GroupRep] = {}
        self.domains: Dict[str, ProductBall] = {}
        self._active = set()

    def _guard(self, path: Path):
        if path in self._active:
            raise SceneError("циклическая ссылка", path)
        self._active.add(path)

    def block(self, name: str, path: Path) -> BlockStructure:
        if name in self.blocks:
            return self.blocks[name]
        spec = self.doc.blocks.get(name)
        if spec is None:
            raise SceneError(f"блочная структура {name!r} не определена", path)
        here = ("blocks", name)
        self._guard(here)
        try:
            if spec.product is not None:
                left, right = (self.block(n, here + ("product", k)) for k, n in enumerate(spec.product))
                result = BlockStructure.product(left, right)
            else:
                axes = [list(range(spec.dimension))]
                coarse = spec.coarse or axes
                result = BlockStructure(spec.dimension, coarse, spec.fine or coarse)
        except SceneError:
            raise
        except DiskopError as exc:
            raise SceneError(str(exc), here) from exc
        finally:
            self._active.discard(here)
        self.blocks[name] = result
        return result

    def matrix(self, rows):
        return tuple(tuple(self.num.coerce(x) for x in row) for row in rows)

    def group(self, name: Optional[str], blocks: BlockStructure, path: Path) -> GroupRep:
        if name is None:
            return GroupRep.trivial(blocks, self.num)
        rep = self.named_group(name, path)
        if rep.blocks != blocks:
            raise SceneError(f"группа {name!r} задана над другой блочной структурой", path)
        return rep

    def named_group(self, name: str, path: Path) -> GroupRep:
        if name in self.groups:
            return self.groups[name]
        spec = self.doc.groups.get(name)
        if spec is None:
            raise SceneError(f"группа {name!r} не определена", path)
        here = ("groups", name)
        self._guard(here)
        try:
            if spec.product is not None:
                left, right = (self.named_group(n, here + ("product", k)) for k, n in enumerate(spec.product))
                rep = GroupRep.product(left, right)
            else:
                blocks = self.block(spec.blocks, here + ("blocks",))
                generators = {
                    g: self.matrix(m) for g, m in spec.generators.items()
                }
                rep = GroupRep.from_generators(blocks, generators, self.num)
            validate_group(rep, self.num)
        except SceneError:
            raise
        except DiskopError as exc:
            raise SceneError(str(exc), here) from exc
        finally:
            self._active.discard(here)
        self.groups[name] = rep
        return rep

    def domain(self, name: str, path: Path) -> ProductBall:
        if name in self.domains:
            return self.domains[name]
        spec = self.doc.domains.get(name)
        if spec is None:
            raise SceneError(f"область {name!r} не определена", path)
        here = ("domains", name)
        self._guard(here)
        try:
            if spec.product is not None:
                left, right = (self.domain(n, here + ("product", k)) for k, n in enumerate(spec.product))
                ball = left.product(right)
            else:
                blocks = self.block(spec.blocks, here + ("blocks",))
                center = spec.center or [0] * blocks.dimension
                ball = ProductBall(blocks, tuple(self.num.coerce(c) for c in center),
                                   tuple(self.num.coerce(r) for r in spec.radii))
        except SceneError:
            raise
        except DiskopError as exc:
            raise SceneError(str(exc), here) from exc
        finally:
            self._active.discard(here)
        self.domains[name] = ball
        return ball

    def dilation(self, spec: MapSpec, blocks: BlockStructure, path: Path) -> DilationMap:
        try:
            ortho = (self.matrix(spec.ortho) if spec.ortho is not None
                     else identity_matrix(blocks.dimension, self.num.one, self.num.zero))
            f = DilationMap(blocks, ortho, tuple(self.num.coerce(s) for s in spec.scales),
                            tuple(self.num.coerce(t) for t in spec.translation))
            validate_map(f, self.num)
        except DiskopError as exc:
            raise SceneError(str(exc), path) from exc
        return f

    def config(self, spec: ConfigSpec, path: Path) -> Config:
        domain = self.domain(spec.domain, path + ("domain",))
        group = self.group(spec.group, domain.blocks, path + ("group",))
        maps = [self.dilation(m, domain.blocks, path + ("maps", k + 1)) for k, m in enumerate(spec.maps)]
        return Config(tuple(maps), domain, group, self.num)

    def tree(self, spec: TreeSpec, configs: Dict[str, Config], path: Path) -> SuperTree:
        vertices = []
        for v, vertex in enumerate(spec.vertices):
            here = path + ("vertices", v + 1)
            p = self._decoration(vertex.p, configs, here + ("p",))
            q = self._decoration(vertex.q, configs, here + ("q",))
            inputs = tuple(
                Leaf(edge.leaf - 1) if edge.leaf is not None else edge.vertex - 1
                for edge in vertex.inputs
            )
            xi = tuple((i - 1, j - 1) for i, j in vertex.xi)
            vertices.append(Vertex(p, q, inputs, xi))
        tree = SuperTree(tuple(vertices), spec.root - 1)
        report = tree_validate(tree)
        if not report.well_formed:
            raise SceneError("; ".join(report.problems), path)
        return tree

    def _decoration(self, ref: Union[str, ConfigSpec], configs: Dict[str, Config], path: Path) -> Config:
        if isinstance(ref, str):
            if ref not in configs:
                raise SceneError(f"конфигурация {ref!r} не определена", path)
            return configs[ref]
        return self.config(ref, path)


def _numeric_for(document: SceneDocument, numeric: Optional[Numeric]) -> Numeric:
    if numeric is not None:
        return numeric
    from app import config
    tolerance = document.settings.tolerance
    return Numeric(NumericMode(document.numeric_mode), config.TOLERANCE if tolerance is None else tolerance)


def build_scene(document: SceneDocument, numeric: Optional[Numeric] = None) -> Scene:
    from app import config
    num = _numeric_for(document, numeric)
    settings = document.settings
    resolver = _Resolver(document, num)
    scene = Scene(
        document,
        num,
        num.coerce(settings.separation_constant if settings.separation_constant is not None
                   else config.SEPARATION_CONSTANT),
        num.coerce(settings.shrink_factor if settings.shrink_factor is not None else config.SHRINK_FACTOR),
    )
    for name in document.blocks:
        resolver.block(name, ("blocks", name))
    for name in document.groups:
        resolver.named_group(name, ("groups", name))
    for name in document.domains:
        resolver.domain(name, ("domains", name))
    for name, spec in document.configs.items():
        scene.configs[name] = resolver.config(spec, ("configs", name))
    for name, spec in document.trees.items():
        scene.trees[name] = resolver.tree(spec, scene.configs, ("trees", name))
    scene.blocks, scene.groups, scene.domains = resolver.blocks, resolver.groups, resolver.domains
    return scene


def parse_scene(raw: Union[bytes, str], numeric: Optional[Numeric] = None, source: str = "<scene>") -> Scene:
    """UTF-8 JSON → полностью проверенная сцена."""
    try:
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        data = json.loads(text)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SceneError(f"некорректный JSON: {exc}") from exc
    try:
        document = SceneDocument.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise SceneError(first["msg"], tuple(first["loc"])) from exc
    scene = build_scene(document, numeric)
    logger.log_scene("parse", source, {
        "configs": len(scene.configs), "trees": len(scene.trees), "mode": scene.numeric.mode.value,
    })
    return scene


def load_scene(path: str, numeric: Optional[Numeric] = None) -> Scene:
    try:
        with open(path, "rb") as handle:
            raw = handle.read()
    except OSError as exc:
        raise SceneError(f"не удалось прочитать файл: {exc}") from exc
    return parse_scene(raw, numeric, source=path)


def dump_document(document: SceneDocument) -> bytes:
    """Каноническая форма: отсортированные ключи, отступ 2, перевод строки в конце."""
    data = document.model_dump(mode="json", exclude_none=True)
    return (json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2) + "\n").encode("utf-8")


def serialize_scene(scene: Scene) -> bytes:
    return dump_document(scene.document)


# ========== Объекты → документ ==========

def _scalar(value: Scalar):
    return format_scalar(value)


def _is_identity(matrix) -> bool:
    return all(x == (1 if r == c else 0) for r, row in enumerate(matrix) for c, x in enumerate(row))


def map_to_spec(f: DilationMap) -> MapSpec:
    return MapSpec(
        ortho=None if _is_identity(f.ortho) else [[_scalar(x) for x in row] for row in f.ortho],
        scales=[_scalar(s) for s in f.scales],
        translation=[_scalar(t) for t in f.translation],
    )


class SceneBuilder:
    """Собирает документ сцены из готовых объектов, именуя блоки, группы и области по порядку."""

    def __init__(self, numeric: Numeric):
        self.numeric = numeric
        self.document = SceneDocument(numeric_mode=numeric.mode.value)
        if not numeric.exact:
            self.document.settings = SettingsSpec(tolerance=numeric.tolerance)
        self._blocks: List[Tuple[BlockStructure, str]] = []
        self._domains: List[Tuple[ProductBall, str]] = []
        self._groups: List[Tuple[GroupRep, str]] = []

    @staticmethod
    def _lookup(registry, obj) -> Optional[str]:
        return next((name for known, name in registry if known == obj), None)

    def block(self, blocks: BlockStructure) -> str:
        name = self._lookup(self._blocks, blocks)
        if name is not None:
            return name
        if blocks.is_product:
            spec = BlockSpec(product=(self.block(blocks.factors[0]), self.block(blocks.factors[1])))
        else:
            spec = BlockSpec(dimension=blocks.dimension,
                             coarse=[list(b) for b in blocks.coarse], fine=[list(b) for b in blocks.fine])
        name = f"blocks{len(self._blocks) + 1}"
        self._blocks.append((blocks, name))
        self.document.blocks[name] = spec
        return name

    def domain(self, ball: ProductBall) -> str:
        name = self._lookup(self._domains, ball)
        if name is not None:
            return name
        spec = DomainSpec(blocks=self.block(ball.blocks), center=[_scalar(c) for c in ball.center],
                          radii=[_scalar(r) for r in ball.radii])
        name = f"domain{len(self._domains) + 1}"
        self._domains.append((ball, name))
        self.document.domains[name] = spec
        return name

    def group(self, rep: GroupRep) -> Optional[str]:
        """Тривиальная группа конфигурации не записывается в документ."""
        if rep.order == 1 and not rep.factors:
            return None
        return self._register_group(rep)

    def _register_group(self, rep: GroupRep) -> str:
        name = self._lookup(self._groups, rep)
        if name is not None:
            return name
        if rep.factors:
            left, right = (self._register_group(f) for f in rep.factors)
            spec = GroupSpec(product=(left, right))
        else:
            spec = GroupSpec(blocks=self.block(rep.blocks), generators={
                label: [[_scalar(x) for x in row] for row in rep.matrices[g]]
                for g, label in enumerate(rep.elements) if g != rep.identity
            })
        name = f"group{len(self._groups) + 1}"
        self._groups.append((rep, name))
        self.document.groups[name] = spec
        return name

    def config_spec(self, x: Config) -> ConfigSpec:
        return ConfigSpec(domain=self.domain(x.domain), group=self.group(x.group),
                          maps=[map_to_spec(f) for f in x.maps])

    def add_config(self, name: str, x: Config) -> "SceneBuilder":
        self.document.configs[name] = self.config_spec(x)
        return self

    def add_tree(self, name: str, tree: SuperTree) -> "SceneBuilder":
        vertices = []
        for vertex in tree.vertices:
            vertices.append(VertexSpec(
                p=self.config_spec(vertex.p),
                q=self.config_spec(vertex.q),
                inputs=[EdgeSpec(leaf=e.label + 1) if isinstance(e, Leaf) else EdgeSpec(vertex=e + 1)
                        for e in vertex.inputs],
                xi=[(i + 1, j + 1) for i, j in vertex.xi],
            ))
        self.document.trees[name] = TreeSpec(root=tree.root + 1, vertices=vertices)
        return self

    def fragment(self) -> dict:
        return self.document.model_dump(mode="json", exclude_none=True)


def scene_fragment(configs: Dict[str, Config], trees: Optional[Dict[str, SuperTree]] = None,
                   numeric: Optional[Numeric] = None) -> dict:
    """Фрагмент сцены с контрпримером, пригодный для повторного запуска командами CLI."""
    first = next(iter(configs.values()), None)
    builder = SceneBuilder(numeric or (first.numeric if first is not None else Numeric()))
    for name, x in configs.items():
        builder.add_config(name, x)
    for name, tree in (trees or {}).items():
        builder.add_tree(name, tree)
    return builder.fragment()


def one_based(indices: Sequence[int]) -> List[int]:
    return [i + 1 for i in indices]
