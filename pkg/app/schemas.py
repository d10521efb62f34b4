"""
Pydantic-модели документов: сцены, отчёты проверки и JSON-вывод команд.
Рациональные числа передаются строками "p/q", приближённые - числами JSON.
Номера компонент, вершин и входов в документах начинаются с единицы.
"""
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, StrictFloat, StrictInt, model_validator

from app.models.numeric import format_scalar, parse_scalar


def _canonical_scalar(value):
    if isinstance(value, float):
        return value
    try:
        return format_scalar(parse_scalar(value))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"{value!r} не является числом вида p/q") from None


ScalarValue = Annotated[Union[StrictInt, StrictFloat, str], AfterValidator(_canonical_scalar)]
MatrixValue = List[List[ScalarValue]]


class SceneModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BlockSpec(SceneModel):
    """Оси нумеруются с нуля; по умолчанию один грубый блок, тонкие блоки совпадают с грубыми."""
    dimension: Optional[int] = Field(default=None, ge=1)
    coarse: Optional[List[List[int]]] = None
    fine: Optional[List[List[int]]] = None
    product: Optional[Tuple[str, str]] = None

    @model_validator(mode="after")
    def _one_form(self):
        if (self.product is None) == (self.dimension is None):
            raise ValueError("нужно указать либо dimension, либо product")
        return self


class GroupSpec(SceneModel):
    """Группа задаётся образующими над блочной структурой либо как произведение двух групп."""
    blocks: Optional[str] = None
    generators: Dict[str, MatrixValue] = Field(default_factory=dict)
    product: Optional[Tuple[str, str]] = None

    @model_validator(mode="after")
    def _one_form(self):
        if (self.product is None) == (self.blocks is None):
            raise ValueError("нужно указать либо blocks, либо product")
        return self


class DomainSpec(SceneModel):
    blocks: Optional[str] = None
    center: Optional[List[ScalarValue]] = None
    radii: Optional[List[ScalarValue]] = None
    product: Optional[Tuple[str, str]] = None

    @model_validator(mode="after")
    def _one_form(self):
        if self.product is None and (self.blocks is None or self.radii is None):
            raise ValueError("простая область требует blocks и radii")
        if self.product is not None and self.blocks is not None:
            raise ValueError("нужно указать либо blocks, либо product")
        return self


class MapSpec(SceneModel):
    """f(v) = ortho·diag(scales)·v + translation; ortho по умолчанию единичная."""
    ortho: Optional[MatrixValue] = None
    scales: List[ScalarValue]
    translation: List[ScalarValue]


class ConfigSpec(SceneModel):
    domain: str
    group: Optional[str] = None
    maps: List[MapSpec] = Field(default_factory=list)


class EdgeSpec(SceneModel):
    """Ровно одно поле: номер входа дерева либо номер дочерней вершины."""
    leaf: Optional[int] = Field(default=None, ge=1)
    vertex: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _one_target(self):
        if (self.leaf is None) == (self.vertex is None):
            raise ValueError("ребро должно вести либо в leaf, либо в vertex")
        return self


class VertexSpec(SceneModel):
    p: Union[str, ConfigSpec]
    q: Union[str, ConfigSpec]
    inputs: List[EdgeSpec] = Field(default_factory=list)
    xi: List[Tuple[int, int]] = Field(default_factory=list)


class TreeSpec(SceneModel):
    root: int = Field(default=1, ge=1)
    vertices: List[VertexSpec]


class SettingsSpec(SceneModel):
    separation_constant: Optional[ScalarValue] = None
    shrink_factor: Optional[ScalarValue] = None
    tolerance: Optional[float] = Field(default=None, ge=0)


class SceneDocument(SceneModel):
    version: Literal[1] = 1
    numeric_mode: Literal["exact", "float"] = "exact"
    settings: SettingsSpec = Field(default_factory=SettingsSpec)
    blocks: Dict[str, BlockSpec] = Field(default_factory=dict)
    groups: Dict[str, GroupSpec] = Field(default_factory=dict)
    domains: Dict[str, DomainSpec] = Field(default_factory=dict)
    configs: Dict[str, ConfigSpec] = Field(default_factory=dict)
    trees: Dict[str, TreeSpec] = Field(default_factory=dict)


# ===== Отчёты проверки =====

class LemmaReport(BaseModel):
    name: str
    trials: int
    failures: int
    rejections: int = 0
    starved: bool = False
    first_counterexample: Optional[dict] = None
    detail: Optional[str] = None
    elapsed: Optional[float] = None


class VerifyReport(BaseModel):
    seed: int
    trials: int
    numeric_mode: str
    suites: List[LemmaReport]

    @property
    def failures(self) -> int:
        return sum(s.failures for s in self.suites)


# ===== Вывод команд =====

class ViolationOut(BaseModel):
    group_element: str
    i: int
    j: Optional[int] = None
    predicate: str


class ValidateOut(BaseModel):
    config: str
    level: str
    valid: bool
    violations: List[ViolationOut] = Field(default_factory=list)


class DivisionOut(BaseModel):
    divides: bool
    alpha: Optional[List[int]] = None
    quotients: Optional[List[ConfigSpec]] = None


class PartitionOut(BaseModel):
    relation: List[Tuple[int, int]]
    l1: List[int]
    r1: List[int]
    l2: List[int]
    r2: List[int]


class EntryTimeOut(BaseModel):
    t: Union[str, float]
    exact: bool
    binding: Optional[str] = None
    bracket: Optional[Tuple[Union[str, float], Union[str, float]]] = None
