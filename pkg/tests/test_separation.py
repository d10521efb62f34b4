from fractions import Fraction as F

import pytest
from hypothesis import given

from app.exceptions import HypothesisError
from app.models.dilation import DilationMap
from app.models.numeric import EXACT
from app.models.operad import Config, MembershipLevel, compose_blocks, configs_equal
from app.services.divisibility import intersection_data
from app.services.scene_io import load_scene
from app.services.separation import (
    SeparationPartition,
    correspondence_check,
    disk_bounds,
    is_separated,
    radius,
    separation_partition,
    triangle_decomposition,
    zigzag_holds,
)
from tests.strategies import configs


@pytest.fixture
def figure(scenes_dir):
    scene = load_scene(str(scenes_dir / "five_disks.json"))
    return scene.config("x"), scene.config("y")


@pytest.fixture
def bubble(plane, unit_disk):
    x = Config.of([DilationMap.dilation(plane, F(1, 50), (F(0), F(0)), EXACT)], unit_disk)
    y = Config.of([DilationMap.dilation(plane, F(1, 600), (F(-3, 250), F(0)), EXACT),
                   DilationMap.dilation(plane, F(1, 600), (F(3, 250), F(0)), EXACT)], unit_disk)
    return x, y


class TestDiskBounds:
    def test_lambda_five(self):
        bounds = disk_bounds(F(5), F(1), F(1))
        assert (bounds.lower_bound, bounds.mu_threshold) == (4, 4)

    def test_lambda_three(self):
        bounds = disk_bounds(F(3), F(1), F(1))
        assert (bounds.lower_bound, bounds.mu_threshold) == (2, 5)

    def test_lambda_must_exceed_one(self):
        with pytest.raises(HypothesisError):
            disk_bounds(F(1), F(1), F(1))

    def test_radii_must_be_positive(self):
        with pytest.raises(HypothesisError):
            disk_bounds(F(2), F(0), F(1))


class TestFigure:
    def test_relation(self, figure):
        x, y = figure
        assert intersection_data(x, y).pairs() == [(0, 0), (1, 0), (2, 1)]

    def test_partition(self, figure):
        x, y = figure
        assert separation_partition(x, y) == SeparationPartition(l1=(0, 1), r1=(2,), l2=(1,), r2=(0,))

    def test_radius_is_image_radius(self, figure):
        x, _ = figure
        assert [radius(f, x) for f in x.maps] == [1, 1, F(7, 10)]

    def test_figure_is_not_separated(self, figure):
        x, y = figure
        assert not is_separated(x)
        with pytest.raises(HypothesisError):
            triangle_decomposition(x, y)


class TestTriangles:
    def test_bubble(self, bubble):
        x, y = bubble
        assert is_separated(x) and is_separated(y)
        decomposition = triangle_decomposition(x, y)
        assert decomposition.partition == SeparationPartition(l1=(), r1=(0,), l2=(0, 1), r2=())
        assert decomposition.right.maps[0].scales == (F(1, 10),)
        assert decomposition.down.maps == y.maps
        assert configs_equal(decomposition.left, y)
        assert configs_equal(compose_blocks(decomposition.right, decomposition.mu_bar), x)
        assert zigzag_holds(decomposition, x, y)

    def test_correspondence(self, bubble):
        report = correspondence_check(*bubble)
        assert report.holds, report.problems

    def test_unmatched_disk(self, plane, unit_disk, bubble):
        x, y = bubble
        stray = y.with_maps(y.maps + (DilationMap.dilation(plane, F(1, 600), (F(1, 2), F(0)), EXACT),))
        with pytest.raises(HypothesisError):
            triangle_decomposition(x, stray)

    def test_self_decomposition(self, bubble):
        _, y = bubble
        decomposition = triangle_decomposition(y, y)
        assert configs_equal(decomposition.down, y)
        assert zigzag_holds(decomposition, y, y)

    @given(configs(level=MembershipLevel.SEPARATED, grouped=False))
    def test_separated_against_itself(self, x):
        report = correspondence_check(x, x)
        assert report.holds, report.problems
