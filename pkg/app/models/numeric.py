"""
Числовой контекст: точные рациональные числа или числа с плавающей точкой с допуском.
Все предикаты сравнивают квадраты величин и не извлекают корней.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import isqrt
from typing import Tuple, Union

Scalar = Union[Fraction, float]

# Точность рациональной верхней оценки корня: 2^-64
_SQRT_BITS = 64


class NumericMode(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


def parse_scalar(raw: Union[str, int, float, Fraction]) -> Fraction:
    """Разбирает "p/q", целое или десятичную запись в Fraction без потери точности."""
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, bool):
        raise ValueError("булево значение не является числом")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        # repr даёт кратчайшую десятичную запись, 0.4 -> 2/5
        return Fraction(repr(raw))
    return Fraction(str(raw).strip())


def format_scalar(value: Scalar) -> Union[str, float]:
    """Точные значения сериализуются строкой "p/q", приближённые остаются числами."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return float(value)


@dataclass(frozen=True)
class Numeric:
    """Режим вычислений и допуск сравнения для режима Float."""
    mode: NumericMode = NumericMode.EXACT
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError("допуск должен быть неотрицательным")

    @property
    def exact(self) -> bool:
        return self.mode is NumericMode.EXACT

    @classmethod
    def from_settings(cls, mode: str = None, tolerance: float = None) -> "Numeric":
        from app import config
        return cls(NumericMode((mode or config.NUMERIC_MODE).lower()),
                   config.TOLERANCE if tolerance is None else tolerance)

    def coerce(self, value) -> Scalar:
        if self.exact:
            return parse_scalar(value)
        return float(value)

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0.0

    @property
    def one(self) -> Scalar:
        return Fraction(1) if self.exact else 1.0

    # a <= b означает a <= b + tolerance
    def le(self, a: Scalar, b: Scalar) -> bool:
        if self.exact:
            return a <= b
        return a <= b + self.tolerance

    def ge(self, a: Scalar, b: Scalar) -> bool:
        return self.le(b, a)

    def lt(self, a: Scalar, b: Scalar) -> bool:
        return not self.le(b, a)

    def gt(self, a: Scalar, b: Scalar) -> bool:
        return not self.le(a, b)

    def eq(self, a: Scalar, b: Scalar) -> bool:
        return self.le(a, b) and self.le(b, a)

    def sqrt(self, value: Scalar) -> Tuple[Scalar, bool]:
        """
        Квадратный корень. Возвращает (значение, точно_ли).
        В режиме Exact корень точен для квадратов рациональных чисел,
        иначе возвращается рациональная верхняя оценка с погрешностью до 2^-64.
        """
        if value < 0:
            raise ValueError("корень из отрицательного числа")
        if not self.exact:
            return float(value) ** 0.5, True
        q = Fraction(value)
        rn, rd = isqrt(q.numerator), isqrt(q.denominator)
        if rn * rn == q.numerator and rd * rd == q.denominator:
            return Fraction(rn, rd), True
        return sqrt_upper(q), False


def sqrt_upper(q: Fraction) -> Fraction:
    """Рациональная верхняя оценка sqrt(q) со знаменателем 2^64."""
    scaled_num = q.numerator << (2 * _SQRT_BITS)
    target = -(-scaled_num // q.denominator)
    s = isqrt(target)
    if s * s < target:
        s += 1
    return Fraction(s, 1 << _SQRT_BITS)


def sqrt_lower(q: Fraction) -> Fraction:
    """Рациональная нижняя оценка sqrt(q) со знаменателем 2^64."""
    scaled_num = q.numerator << (2 * _SQRT_BITS)
    return Fraction(isqrt(scaled_num // q.denominator), 1 << _SQRT_BITS)


EXACT = Numeric(NumericMode.EXACT)
FLOAT = Numeric(NumericMode.FLOAT)
