from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given

from app.exceptions import CoreFormError, HypothesisError
from app.models.ball import ProductBall
from app.models.blocks import BlockStructure
from app.models.dilation import DilationMap
from app.models.numeric import EXACT, FLOAT
from app.models.operad import Config, MembershipLevel, configs_equal, validate
from app.models.product import product_config
from app.services.core import (
    CoreForm,
    canonical_core_form,
    common_refinement,
    core_normal_form,
    criticality,
    has_transitive_intersections,
    same_core_element,
    shrunk_membership,
)
from app.services.flows import FlowKind, core_entry_time, flow_apply
from app.services.sampling import Sampler, random_core_form
from app.services.scene_io import load_scene
from app.services.tensor import tree_evaluate, tree_validate
from tests.strategies import samplers


def disk(plane, domain, scale, cx, cy=0):
    return Config.of([DilationMap.dilation(plane, F(scale), (F(cx), F(cy)), EXACT)], domain)


@pytest.fixture
def core_tree(scenes_dir):
    return load_scene(str(scenes_dir / "trees.json")).tree("core")


class TestCriticality:
    def test_core_tree_value(self, core_tree):
        w = tree_evaluate(core_tree)
        result = criticality(w)
        assert result.critical
        assert result.witness.partition_p == ((0,), (1,))
        assert result.witness.partition_q == ((0, 1),)
        assert [f.translation for f in result.witness.a.maps] == [(F(1, 2),), (F(-1, 2),)]

    def test_overlap_without_separator(self, core_tree):
        # проекции на V слишком велики для разделённого объемлющего шара
        w = tree_evaluate(core_tree).then_scaled(8)
        result = criticality(w)
        assert not result.critical
        assert result.reason

    def test_separation_constant(self):
        line = BlockStructure.trivial(1)
        v = ProductBall.centered(line, 1, EXACT)
        p = Config.of([DilationMap.dilation(line, F(1, 5), (c,), EXACT) for c in (F(-1, 2), F(1, 2))], v)
        q = Config.of([DilationMap.dilation(line, F(1, 10), (F(0),), EXACT)], v)
        w = product_config(p, q)
        rejected = criticality(w, 5)
        assert not rejected.critical
        assert "разделённую конфигурацию" in rejected.reason
        accepted = criticality(w, 2)
        assert accepted.critical
        assert accepted.witness.partition_p == ((0,), (1,))

    def test_pairwise_overlap_without_common_point(self, plane):
        # три диска пересекаются попарно, но радиус описанной окружности больше 13/100
        line = BlockStructure.trivial(1)
        centers = [(F(-1, 8), F(-1, 16)), (F(1, 8), F(-1, 16)), (F(0), F(5, 32))]
        maps = [
            DilationMap.dilation(plane, F(13, 100), center, EXACT).product(
                DilationMap.dilation(line, F(1, 10), (offset,), EXACT))
            for center, offset in zip(centers, (F(-1, 2), F(0), F(1, 2)))
        ]
        domain = ProductBall.centered(plane, 1, EXACT).product(ProductBall.centered(line, 1, EXACT))
        result = criticality(Config.of(maps, domain))
        assert not result.critical
        assert result.reason == "пустое общее пересечение в блоке P_1"


class TestCoreForm:
    def test_normal_form_of_core_tree(self, core_tree):
        w = tree_evaluate(core_tree)
        form = core_normal_form(w, criticality(w).witness)
        assert form.occupied() == [(0, 0), (1, 0)]
        assert form.sigma == (0, 1)
        assert configs_equal(form.evaluate(), w)
        assert tree_validate(form.to_tree()).core

    def test_row_without_cell(self, core_tree):
        w = tree_evaluate(core_tree)
        form = core_normal_form(w, criticality(w).witness)
        nullary = (Config.nullary(form.cells[0][0][0].domain), Config.nullary(form.cells[0][0][1].domain))
        broken = CoreForm((0,), form.a, form.b, ((nullary,), form.cells[1]))
        with pytest.raises(CoreFormError):
            broken.check()

    def test_canonical_order(self, core_tree):
        w = tree_evaluate(core_tree)
        form = core_normal_form(w, criticality(w).witness)
        swapped = CoreForm((1, 0), form.a.with_maps(reversed(form.a.maps)), form.b,
                           (form.cells[1], form.cells[0]))
        assert canonical_core_form(swapped).sigma == (0, 1)
        assert same_core_element(form, swapped)

    @given(samplers())
    def test_round_trip(self, s):
        form = random_core_form(s, F(5))
        w = form.evaluate()
        result = criticality(w, 5)
        assert result.critical, result.reason
        assert same_core_element(form, core_normal_form(w, result.witness))

    @given(samplers(FLOAT))
    def test_round_trip_float(self, s):
        form = random_core_form(s, 5.0)
        w = form.evaluate()
        result = criticality(w, 5.0)
        assert result.critical, result.reason
        assert same_core_element(form, core_normal_form(w, result.witness))

    def test_generated_cells_are_not_concentric(self):
        s = Sampler(np.random.default_rng(11), EXACT, 5000)
        forms = [random_core_form(s, F(5)) for _ in range(20)]
        assert all(f.a.domain.blocks.dimension >= 2 and f.b.domain.blocks.dimension >= 2 for f in forms)
        cells = [c for f in forms for row in f.cells for c, _ in row if c.arity == 1]
        assert any(any(t != 0 for t in c.maps[0].translation) for c in cells)
        assert any(c.maps[0].ortho != DilationMap.identity(c.domain.blocks, EXACT).ortho for c in cells)
        for f in forms:
            assert validate(f.a, MembershipLevel.SEPARATED, 5).valid
            assert all(validate(c, MembershipLevel.STAR).valid for row in f.cells for c, d in row)


class TestCoreEntryTime:
    def test_first_step(self, core_tree):
        entry = core_entry_time(core_tree)
        assert entry.t == F(49, 50)
        assert entry.steps == 1

    def test_shrunk_membership(self, core_tree):
        w = tree_evaluate(core_tree)
        assert shrunk_membership(flow_apply(w, FlowKind.SHRINK_RIGHT_PRODUCT, F(49, 50)))
        assert not shrunk_membership(w)


class TestCommonRefinement:
    def test_example(self, plane, unit_disk):
        x1 = disk(plane, unit_disk, "1/10", "1/10")
        x2 = disk(plane, unit_disk, "1/20", "3/20")
        refinement = common_refinement([x1, x2], factor=F(1, 5))
        assert refinement.e.maps == (DilationMap.dilation(plane, F(1, 2), (F(1, 10), F(0)), EXACT),)
        assert refinement.classes == (((0, 0), (1, 0)),)
        (factor,) = refinement.per_config[1].factors
        assert factor.maps == (DilationMap.dilation(plane, F(1, 10), (F(1, 10), F(0)), EXACT),)

    def test_disjoint_classes_are_padded(self, plane, unit_disk):
        x1 = disk(plane, unit_disk, "1/100", "-1/2")
        x2 = disk(plane, unit_disk, "1/100", "1/2")
        refinement = common_refinement([x1, x2], factor=F(1, 5))
        assert refinement.e.arity == 2
        assert [f.arity for f in refinement.per_config[0].factors] == [1, 0]
        assert refinement.per_config[1].sigma == (1, 0)

    def test_chain_is_not_transitive(self, plane, unit_disk):
        chain = [disk(plane, unit_disk, "1/20", c) for c in ("-1/20", "1/40", "1/10")]
        assert not has_transitive_intersections(chain)
        with pytest.raises(HypothesisError):
            common_refinement(chain, factor=F(1, 5))

    def test_needs_shrunk_members(self, plane, unit_disk):
        with pytest.raises(HypothesisError):
            common_refinement([disk(plane, unit_disk, "1/2", 0)], factor=F(1, 5))

    def test_empty_family(self):
        with pytest.raises(HypothesisError):
            common_refinement([])
