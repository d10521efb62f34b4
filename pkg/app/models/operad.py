"""
Элементы операда как кортежи отображений растяжения: композиция по конечным ординалам,
действие перестановок и группы, компоненты и проверка принадлежности уровням
Ambient ⊃ Star ⊃ Separated.

Индексы арности внутри библиотеки нумеруются с нуля.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

from app.exceptions import ArityError, BlockMismatchError, InvariantError
from app.models.ball import ProductBall, contains, disjoint, map_image
from app.models.dilation import DilationMap, map_compose
from app.models.group import GroupRep, conjugate
from app.models.numeric import EXACT, Numeric, Scalar


class MembershipLevel(str, Enum):
    AMBIENT = "ambient"
    STAR = "star"
    SEPARATED = "separated"

    @property
    def rank(self) -> int:
        return _LEVEL_RANK[self]


_LEVEL_RANK = {MembershipLevel.AMBIENT: 0, MembershipLevel.STAR: 1, MembershipLevel.SEPARATED: 2}


@dataclass(frozen=True)
class StructureMap:
    """α: {0..m-1} → {0..n-1}; слои α⁻¹(j) несут индуцированный порядок."""
    source: int
    target: int
    assignment: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(self.assignment))
        if len(self.assignment) != self.source:
            raise ArityError(f"α задаёт {len(self.assignment)} значений вместо {self.source}")
        bad = [k for k, j in enumerate(self.assignment) if not 0 <= j < self.target]
        if bad:
            raise ArityError(f"α({bad[0] + 1}) вне ординала {{1..{self.target}}}")

    @classmethod
    def identity(cls, n: int) -> "StructureMap":
        return cls(n, n, tuple(range(n)))

    @classmethod
    def lexicographic(cls, fiber_sizes: Sequence[int]) -> "StructureMap":
        """α для конкатенации слоёв подряд: сначала слой 0, затем слой 1 и т.д."""
        assignment = tuple(j for j, size in enumerate(fiber_sizes) for _ in range(size))
        return cls(len(assignment), len(fiber_sizes), assignment)

    def fiber(self, j: int) -> Tuple[int, ...]:
        return tuple(k for k, a in enumerate(self.assignment) if a == j)

    def fiber_sizes(self) -> Tuple[int, ...]:
        return tuple(len(self.fiber(j)) for j in range(self.target))

    def position(self, k: int) -> int:
        """Номер k внутри своего слоя."""
        j = self.assignment[k]
        return sum(1 for a in self.assignment[:k] if a == j)

    @property
    def image(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.assignment)))


@dataclass(frozen=True)
class Config:
    """Элемент операда: упорядоченный кортеж отображений над областью S и группой G."""
    maps: Tuple[DilationMap, ...]
    domain: ProductBall
    group: GroupRep
    numeric: Numeric = field(default=EXACT, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        blocks = self.domain.blocks
        if self.group.blocks != blocks:
            raise BlockMismatchError("группа и область заданы над разными блочными структурами")
        for i, f in enumerate(self.maps):
            if f.blocks != blocks:
                raise BlockMismatchError(f"компонента {i + 1} задана над другой блочной структурой")

    @classmethod
    def of(cls, maps: Iterable[DilationMap], domain: ProductBall, group: Optional[GroupRep] = None,
           numeric: Numeric = EXACT) -> "Config":
        return cls(tuple(maps), domain, group or GroupRep.trivial(domain.blocks, numeric), numeric)

    @classmethod
    def unit(cls, domain: ProductBall, group: Optional[GroupRep] = None, numeric: Numeric = EXACT) -> "Config":
        return cls.of((DilationMap.identity(domain.blocks, numeric),), domain, group, numeric)

    @classmethod
    def nullary(cls, domain: ProductBall, group: Optional[GroupRep] = None, numeric: Numeric = EXACT) -> "Config":
        return cls.of((), domain, group, numeric)

    @property
    def arity(self) -> int:
        return len(self.maps)

    @property
    def blocks(self):
        return self.domain.blocks

    def with_maps(self, maps: Iterable[DilationMap]) -> "Config":
        return Config(tuple(maps), self.domain, self.group, self.numeric)

    def component(self, i: int) -> "Config":
        return subconfig(self, (i,))

    def images(self) -> List[ProductBall]:
        return [map_image(f, self.domain) for f in self.maps]

    def then_scaled(self, factor: Scalar) -> "Config":
        """x∘(λ·id)_{i∈ar(x)}."""
        return self.with_maps(f.then_scaled(factor) for f in self.maps)

    def block_scaled(self, factors: Sequence[Scalar]) -> "Config":
        return self.with_maps(f.block_scaled(factors) for f in self.maps)


@dataclass(frozen=True)
class Violation:
    group_element: str
    i: int
    j: Optional[int]
    predicate: str

    def describe(self) -> str:
        pair = f"{self.i + 1}" if self.j is None else f"{self.i + 1},{self.j + 1}"
        return f"g={self.group_element} ({pair}): {self.predicate}"


@dataclass(frozen=True)
class ValidationReport:
    level: MembershipLevel
    valid: bool
    violations: Tuple[Violation, ...] = ()


def _star_violations(x: Config, star: bool) -> List[Violation]:
    num = x.numeric
    rep = x.group
    found = []
    for g in range(rep.order):
        label = rep.elements[g]
        images = [map_image(conjugate(g, f, rep), x.domain) for f in x.maps]
        for i, image in enumerate(images):
            if not contains(image, x.domain, num):
                found.append(Violation(label, i, None, "contained"))
        if not star:
            continue
        for i in range(len(images)):
            for j in range(i + 1, len(images)):
                if not disjoint(images[i], images[j], num):
                    found.append(Violation(label, i, j, "disjoint"))
    return found


def validate(x: Config, level: MembershipLevel, separation_constant: Optional[Scalar] = None) -> ValidationReport:
    """
    Проверка принадлежности уровню. Никогда не бросает исключений на корректно
    типизированном входе: нарушения перечисляются в отчёте.

    Separated означает Star для x и, при арности больше 1, Star для x∘(C·id),
    где C - константа разделения (по умолчанию 5).
    """
    level = MembershipLevel(level)
    violations = _star_violations(x, star=level is not MembershipLevel.AMBIENT)
    if level is MembershipLevel.SEPARATED and x.arity > 1:
        if separation_constant is None:
            from app import config
            separation_constant = config.SEPARATION_CONSTANT
        constant = x.numeric.coerce(separation_constant)
        enlarged = _star_violations(x.then_scaled(constant), star=True)
        violations.extend(
            Violation(v.group_element, v.i, v.j, f"{v.predicate} after ×{separation_constant}")
            for v in enlarged
        )
    return ValidationReport(level, not violations, tuple(violations))


def membership_level(x: Config, separation_constant: Optional[Scalar] = None) -> Optional[MembershipLevel]:
    """Наивысший уровень, которому принадлежит x, или None."""
    best = None
    for level in (MembershipLevel.AMBIENT, MembershipLevel.STAR, MembershipLevel.SEPARATED):
        if not validate(x, level, separation_constant).valid:
            break
        best = level
    return best


def _require_compatible(x: Config, y: Config, what: str) -> None:
    if x.domain.blocks != y.domain.blocks:
        raise BlockMismatchError(f"{what}: разные блочные структуры областей")


def operad_compose(x: Config, alpha: StructureMap, quotients: Sequence[Config]) -> Config:
    """x∘_α(q^j): компонента k равна x_{α(k)}∘q^{α(k)}_{номер k в слое}."""
    if alpha.target != x.arity:
        raise ArityError(f"α ведёт в ординал размера {alpha.target}, а арность x равна {x.arity}")
    if len(quotients) != x.arity:
        raise ArityError(f"нужно {x.arity} частных, передано {len(quotients)}")
    sizes = alpha.fiber_sizes()
    for j, q in enumerate(quotients):
        _require_compatible(x, q, "композиция")
        if q.arity != sizes[j]:
            raise ArityError(f"частное {j + 1} имеет арность {q.arity}, а слой α⁻¹({j + 1}) - {sizes[j]}")
    maps = [
        map_compose(x.maps[alpha.assignment[k]], quotients[alpha.assignment[k]].maps[alpha.position(k)])
        for k in range(alpha.source)
    ]
    return x.with_maps(maps)


def compose_blocks(x: Config, quotients: Sequence[Config]) -> Config:
    """Композиция с лексикографическим α: слои частных идут подряд."""
    return operad_compose(x, StructureMap.lexicographic([q.arity for q in quotients]), quotients)


def subconfig(x: Config, indices: Iterable[int]) -> Config:
    """x_A с индуцированным порядком на A."""
    chosen = sorted(set(indices))
    for i in chosen:
        if not 0 <= i < x.arity:
            raise ArityError(f"индекс {i + 1} вне ар(x) = {{1..{x.arity}}}")
    return x.with_maps(x.maps[i] for i in chosen)


def check_permutation(sigma: Sequence[int], n: int) -> Tuple[int, ...]:
    sigma = tuple(sigma)
    if sorted(sigma) != list(range(n)):
        raise ArityError(f"{[s + 1 for s in sigma]} не является перестановкой {{1..{n}}}")
    return sigma


def invert_permutation(sigma: Sequence[int]) -> Tuple[int, ...]:
    inverse = [0] * len(sigma)
    for i, s in enumerate(sigma):
        inverse[s] = i
    return tuple(inverse)


def act(sigma: Sequence[int], g: int, x: Config) -> Config:
    """(σ, g)·x: компонента σ(i) результата равна g·x_i·g⁻¹."""
    sigma = check_permutation(sigma, x.arity)
    maps: List[Optional[DilationMap]] = [None] * x.arity
    for i, f in enumerate(x.maps):
        maps[sigma[i]] = conjugate(g, f, x.group)
    return x.with_maps(maps)


def block_permutation(sigma: Sequence[int], fiber_sizes: Sequence[int]) -> Tuple[int, ...]:
    """
    σ{m_1,...,m_n}: переставляет слои целиком. fiber_sizes[k] - размер k-го слоя
    в целевом порядке; слой i источника переходит на место слоя σ(i).
    """
    sigma = check_permutation(sigma, len(fiber_sizes))
    target_offsets = [sum(fiber_sizes[:k]) for k in range(len(fiber_sizes))]
    result = []
    for i in range(len(sigma)):
        result.extend(target_offsets[sigma[i]] + r for r in range(fiber_sizes[sigma[i]]))
    return tuple(result)


def block_sum(perms: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    """τ_1 ⊕ ... ⊕ τ_n."""
    result = []
    offset = 0
    for tau in perms:
        result.extend(offset + t for t in tau)
        offset += len(tau)
    return tuple(result)


def configs_equal(x: Config, y: Config) -> bool:
    """Покомпонентное равенство: точное в режиме Exact, с допуском в режиме Float."""
    if x.arity != y.arity or x.domain.blocks != y.domain.blocks:
        return False
    return all(f.close_to(g, x.numeric) for f, g in zip(x.maps, y.maps))


def scaled_unit(x: Config, factor) -> Config:
    """Унарный элемент (λ·id) над областью x."""
    return Config((DilationMap.scaling(x.blocks, factor, x.numeric),), x.domain, x.group, x.numeric)


def require_level(x: Config, level: MembershipLevel, what: str = "конфигурация",
                  separation_constant: Optional[Scalar] = None) -> None:
    report = validate(x, level, separation_constant)
    if not report.valid:
        details = "; ".join(v.describe() for v in report.violations[:3])
        raise InvariantError(f"{what} не принадлежит уровню {level.value}: {details}")

