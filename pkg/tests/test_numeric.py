from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from app.models.numeric import EXACT, FLOAT, Numeric, NumericMode, format_scalar, parse_scalar, sqrt_lower, sqrt_upper
from tests.strategies import fractions


class TestScalars:
    def test_parse_rational_string(self):
        assert parse_scalar("3/10") == Fraction(3, 10)

    def test_parse_float_uses_shortest_repr(self):
        assert parse_scalar(0.4) == Fraction(2, 5)

    def test_parse_rejects_bool(self):
        with pytest.raises(ValueError):
            parse_scalar(True)

    def test_format(self):
        assert format_scalar(Fraction(4)) == "4"
        assert format_scalar(Fraction(-1, 2)) == "-1/2"
        assert format_scalar(0.25) == 0.25

    @given(fractions(-8, 8, 97))
    def test_format_then_parse(self, value):
        assert parse_scalar(format_scalar(value)) == value


class TestComparisons:
    def test_exact_is_strict(self):
        assert not EXACT.le(Fraction(1) + Fraction(1, 10 ** 12), Fraction(1))

    def test_float_tolerance(self):
        num = Numeric(NumericMode.FLOAT, 1e-6)
        assert num.le(1.0 + 1e-7, 1.0)
        assert num.eq(1.0, 1.0 + 1e-7)
        assert not num.lt(1.0, 1.0 + 1e-7)

    def test_negative_tolerance_rejected(self):
        with pytest.raises(ValueError):
            Numeric(NumericMode.FLOAT, -1.0)

    def test_float_coerce_accepts_fraction(self):
        assert FLOAT.coerce(Fraction(1, 4)) == 0.25

    @given(fractions(-4, 4), fractions(-4, 4))
    def test_le_is_total_in_exact_mode(self, a, b):
        assert EXACT.le(a, b) or EXACT.le(b, a)


class TestSqrt:
    def test_perfect_square_is_exact(self):
        assert EXACT.sqrt(Fraction(9, 16)) == (Fraction(3, 4), True)

    def test_irrational_gives_upper_bound(self):
        root, exact = EXACT.sqrt(Fraction(2))
        assert not exact
        assert root * root >= 2
        assert root - sqrt_lower(Fraction(2)) <= Fraction(1, 2 ** 63)

    @given(st.integers(1, 10 ** 6), st.integers(1, 10 ** 6))
    def test_bounds_bracket_root(self, p, q):
        value = Fraction(p, q)
        lower, upper = sqrt_lower(value), sqrt_upper(value)
        assert lower * lower <= value <= upper * upper
        assert upper - lower <= Fraction(1, 2 ** 63)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            EXACT.sqrt(Fraction(-1))
