from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from app.models.ball import ProductBall, contains, contains_point
from app.models.blocks import BlockStructure
from app.models.numeric import EXACT, FLOAT
from app.services.enclosing import common_point, enclosing_ball, welzl
from tests.strategies import fractions


def ball(blocks, center, radii):
    return ProductBall(blocks, tuple(F(c) for c in center), tuple(F(r) for r in radii))


@st.composite
def planar_balls(draw, count=st.integers(1, 4)):
    plane = BlockStructure.trivial(2)
    return [
        ball(plane, (draw(fractions(-1, 1)), draw(fractions(-1, 1))), (draw(fractions("1/16", "1/2")),))
        for _ in range(draw(count))
    ]


class TestWelzl:
    def test_diameter_pair(self):
        center, r2 = welzl(np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, 0.5]]))
        assert np.allclose(center, [0.0, 0.0])
        assert r2 == pytest.approx(1.0)

    def test_triangle(self):
        center, r2 = welzl(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]))
        assert np.allclose(center, [1.0, 1.0])
        assert r2 == pytest.approx(2.0)

    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=12))
    def test_contains_all_points(self, points):
        pts = np.array(points, dtype=float)
        center, r2 = welzl(pts)
        assert np.all(np.sum((pts - center) ** 2, axis=1) <= r2 + 1e-6)


class TestEnclosingBall:
    @given(planar_balls())
    def test_exact_encloses(self, balls):
        big = enclosing_ball(balls, EXACT)
        assert all(contains(b, big, EXACT) for b in balls)

    @given(planar_balls())
    def test_float_encloses(self, balls):
        big = enclosing_ball(balls, FLOAT)
        assert all(contains(b, big, FLOAT) for b in balls)

    def test_single_ball_is_itself(self, plane):
        b = ball(plane, (F(1, 2), 0), (F(1, 4),))
        assert enclosing_ball([b], EXACT) == b

    def test_per_block(self):
        blocks = BlockStructure(2, ((0,), (1,)), ((0,), (1,)))
        big = enclosing_ball([ball(blocks, (0, 0), (1, 1)), ball(blocks, (2, 0), (1, 2))], EXACT)
        assert big.center == (1, 0)
        assert big.radii == (2, 2)


class TestCommonPoint:
    def test_line_intervals(self):
        line = BlockStructure.trivial(1)
        point = common_point([ball(line, (0,), (1,)), ball(line, (F(3, 2),), (1,))], EXACT)
        assert point == (F(3, 4),)

    def test_tangent_balls_have_none(self, plane):
        assert common_point([ball(plane, (-1, 0), (1,)), ball(plane, (1, 0), (1,))], EXACT) is None

    def test_three_overlapping(self, plane):
        balls = [ball(plane, (0, 0), (1,)), ball(plane, (1, 0), (1,)), ball(plane, (F(1, 2), 1), (1,))]
        point = common_point(balls, EXACT)
        assert point is not None
        assert all(contains_point(b, point, EXACT) for b in balls)

    @given(planar_balls())
    def test_certificate_is_inside(self, balls):
        point = common_point(balls, FLOAT)
        if point is not None:
            assert all(contains_point(b, point, FLOAT) for b in balls)

    def test_concentric_certificate(self, plane):
        balls = [ball(plane, (F(1, 3), F(1, 3)), (r,)) for r in (F(1, 2), F(1, 8), F(1, 4))]
        assert common_point(balls, EXACT) == (F(1, 3), F(1, 3))
