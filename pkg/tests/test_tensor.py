from fractions import Fraction as F

import pytest
from hypothesis import given

from app.exceptions import ArityError, TreeError
from app.models.ball import ProductBall
from app.models.blocks import BlockStructure
from app.models.dilation import DilationMap
from app.models.numeric import EXACT
from app.models.operad import Config, act, configs_equal
from app.models.product import product_config
from app.services.sampling import random_config, random_tree, unit_domain
from app.services.scene_io import load_scene
from app.services.tensor import (
    BLACK_FIRST,
    WHITE_FIRST,
    Leaf,
    SuperTree,
    Vertex,
    corolla,
    height,
    interchange_equal,
    interchange_move,
    relabel,
    tree_evaluate,
    tree_validate,
    unary_iso,
    unary_iso_inverse,
)
from tests.strategies import samplers

LINE = BlockStructure.trivial(1)
SEGMENT = ProductBall.centered(LINE, 1, EXACT)


def segment(*rows):
    return Config.of([DilationMap.dilation(LINE, F(s), (F(c),), EXACT) for s, c in rows], SEGMENT)


@pytest.fixture
def scene(scenes_dir):
    return load_scene(str(scenes_dir / "trees.json"))


def tree_domains(s):
    return (unit_domain(BlockStructure.trivial(s.integer(1, 2)), s.num),
            unit_domain(BlockStructure.trivial(s.integer(1, 2)), s.num))


class TestEvaluate:
    def test_corolla(self, scene):
        w = tree_evaluate(scene.tree("corolla"))
        assert w.arity == 2
        assert [f.scales for f in w.maps] == [(F(3, 10), F(1, 2)), (F(3, 10), F(1, 2))]
        assert [f.translation for f in w.maps] == [(F(-1, 2), 0), (F(1, 2), 0)]

    def test_corolla_is_product(self, scene):
        p, q = scene.config("p"), scene.config("q")
        assert configs_equal(tree_evaluate(corolla(p, q)), product_config(p, q))

    def test_core_tree_places_leaves(self, scene):
        w = tree_evaluate(scene.tree("core"))
        assert [f.scales for f in w.maps] == [(F(1, 40), F(1, 20))] * 2
        assert [f.translation for f in w.maps] == [(F(1, 2), 0), (F(-1, 2), 0)]

    def test_corolla_labels(self):
        p, q = segment(("1/4", "-1/2"), ("1/4", "1/2")), segment(("1/2", 0))
        w = tree_evaluate(corolla(p, q, labels=[1, 0]))
        assert w.maps[0].translation == (F(1, 2), 0)
        with pytest.raises(ArityError):
            corolla(p, q, labels=[0])

    def test_stump_tree_is_nullary(self):
        tree = corolla(Config.nullary(SEGMENT), segment(("1/2", 0)))
        assert tree_evaluate(tree).arity == 0


class TestValidate:
    def test_core_tree(self, scene):
        report = tree_validate(scene.tree("core"))
        assert (report.well_formed, report.reduced, report.proper, report.core) == (True, True, True, True)
        assert report.height == 2

    def test_stump_child_breaks_reduction(self):
        stump = Vertex(Config.nullary(SEGMENT), segment(("1/2", 0)), (), ())
        unit = segment((1, 0))
        tree = SuperTree((Vertex(unit, unit, (1,), ((0, 0),)), stump))
        report = tree_validate(tree)
        assert report.well_formed and not report.reduced and not report.core

    def test_chain_of_unary_vertices_is_not_proper(self):
        unit = segment(("1/2", 0))
        tree = SuperTree((
            Vertex(unit, unit, (1,), ((0, 0),)),
            Vertex(unit, unit, (Leaf(0),), ((0, 0),)),
        ))
        report = tree_validate(tree)
        assert report.reduced and not report.proper
        assert height(tree) == 2

    def test_xi_must_be_bijection(self):
        p = segment(("1/4", "-1/2"), ("1/4", "1/2"))
        tree = SuperTree((Vertex(p, segment(("1/2", 0)), (Leaf(0), Leaf(1)), ((0, 0), (0, 0))),))
        report = tree_validate(tree)
        assert not report.well_formed
        with pytest.raises(TreeError):
            tree_evaluate(tree)

    def test_leaf_labels_must_form_ordinal(self):
        p = segment(("1/4", "-1/2"), ("1/4", "1/2"))
        tree = corolla(p, segment(("1/2", 0)), labels=[0, 2])
        assert not tree_validate(tree).well_formed

    def test_two_parents(self):
        unit = segment(("1/2", 0))
        pair = segment(("1/4", "-1/2"), ("1/4", "1/2"))
        tree = SuperTree((Vertex(pair, unit, (1, 1), ((0, 0), (1, 0))), Vertex(unit, unit, (Leaf(0),), ((0, 0),))))
        assert any("родителей" in problem for problem in tree_validate(tree).problems)


class TestInterchange:
    @given(samplers())
    def test_moves_preserve_value(self, s):
        tree = random_tree(s, *tree_domains(s))
        value = tree_evaluate(tree)
        v = s.integer(0, len(tree.vertices) - 1)
        for order in (WHITE_FIRST, BLACK_FIRST):
            assert configs_equal(tree_evaluate(interchange_move(tree, v, order)), value)

    @given(samplers())
    def test_relabel_permutes_inputs(self, s):
        tree = random_tree(s, *tree_domains(s))
        vertex_perm = s.permutation(len(tree.vertices))
        white = [s.permutation(vertex.p.arity) for vertex in tree.vertices]
        black = [s.permutation(vertex.q.arity) for vertex in tree.vertices]
        leaf_perm = s.permutation(tree.arity)
        value = tree_evaluate(tree)
        moved = relabel(tree, vertex_perm, white, black, leaf_perm)
        assert configs_equal(tree_evaluate(moved), act(leaf_perm, value.group.identity, value))

    def test_interchange_equal(self, scene):
        tree = scene.tree("corolla")
        assert interchange_equal(tree, interchange_move(tree, 0, BLACK_FIRST))

    def test_unknown_order(self, scene):
        with pytest.raises(TreeError):
            interchange_move(scene.tree("corolla"), 0, "grey")


class TestUnaryIso:
    @given(samplers())
    def test_round_trip(self, s):
        v_domain, w_domain = tree_domains(s)
        p, q = random_config(s, v_domain, 1), random_config(s, w_domain, 1)
        tree = unary_iso(p, q)
        assert configs_equal(tree_evaluate(tree), product_config(p, q))
        p2, q2 = unary_iso_inverse(tree)
        assert configs_equal(p, p2) and configs_equal(q, q2)

    def test_example(self):
        p = segment(("1/2", 0))
        w = tree_evaluate(unary_iso(p, segment((1, 0))))
        assert w.maps[0].scales == (F(1, 2), 1)

    def test_needs_unary(self, scene):
        with pytest.raises(ArityError):
            unary_iso(scene.config("p"), scene.config("q"))
        with pytest.raises(ArityError):
            unary_iso_inverse(scene.tree("corolla"))
