from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from app.exceptions import ArityError, BlockMismatchError, InvariantError
from app.models.ball import ProductBall
from app.models.blocks import BlockStructure
from app.models.dilation import DilationMap
from app.models.group import GroupRep
from app.models.numeric import EXACT
from app.models.operad import (
    Config,
    MembershipLevel,
    StructureMap,
    act,
    block_permutation,
    block_sum,
    compose_blocks,
    configs_equal,
    invert_permutation,
    membership_level,
    operad_compose,
    require_level,
    scaled_unit,
    subconfig,
    validate,
)
from tests.strategies import composable, configs, permutations, unit_of


def pair(plane, domain, scale, offset="1/2"):
    return Config.of([DilationMap.dilation(plane, F(scale), (-F(offset), F(0)), EXACT),
                      DilationMap.dilation(plane, F(scale), (F(offset), F(0)), EXACT)], domain)


class TestStructureMap:
    def test_fibers_keep_order(self):
        alpha = StructureMap(4, 2, (1, 0, 1, 0))
        assert alpha.fiber(1) == (0, 2)
        assert alpha.position(2) == 1
        assert alpha.fiber_sizes() == (2, 2)

    def test_out_of_range(self):
        with pytest.raises(ArityError):
            StructureMap(1, 1, (1,))

    def test_lexicographic(self):
        assert StructureMap.lexicographic([2, 0, 1]).assignment == (0, 0, 2)

    def test_block_permutation(self):
        assert block_permutation((1, 0), (1, 2)) == (1, 2, 0)

    def test_block_sum(self):
        assert block_sum([(1, 0), (0,), (2, 0, 1)]) == (1, 0, 2, 5, 3, 4)

    def test_invert_permutation(self):
        assert invert_permutation((2, 0, 1)) == (1, 2, 0)


class TestMembership:
    def test_star_but_not_separated(self, plane, unit_disk):
        x = pair(plane, unit_disk, "3/10")
        assert validate(x, MembershipLevel.STAR).valid
        report = validate(x, MembershipLevel.SEPARATED)
        assert not report.valid
        assert all("×5" in v.predicate for v in report.violations)

    def test_separated(self, plane, unit_disk):
        assert membership_level(pair(plane, unit_disk, "1/50")) is MembershipLevel.SEPARATED

    def test_overlap_is_ambient_only(self, plane, unit_disk):
        x = pair(plane, unit_disk, "3/10", offset="1/10")
        assert membership_level(x) is MembershipLevel.AMBIENT
        (violation,) = validate(x, MembershipLevel.STAR).violations
        assert (violation.i, violation.j, violation.predicate) == (0, 1, "disjoint")
        assert violation.describe() == "g=e (1,2): disjoint"

    def test_escaping_disk(self, plane, unit_disk):
        x = Config.of([DilationMap.dilation(plane, F(1, 2), (F(3, 4), F(0)), EXACT)], unit_disk)
        assert membership_level(x) is None

    def test_group_orbit_checked(self, plane):
        rep = GroupRep.from_generators(plane, {"a": ((-1, 0), (0, -1))}, EXACT)
        shifted = ProductBall(plane, (F(1, 2), F(0)), (F(1),))
        f = DilationMap.dilation(plane, F(1, 4), (F(1, 2), F(0)), EXACT)
        report = validate(Config.of([f], shifted, rep), MembershipLevel.AMBIENT)
        assert not report.valid
        assert {(v.group_element, v.predicate) for v in report.violations} == {("a", "contained")}

    def test_nullary_and_unary(self, unit_disk):
        assert validate(Config.nullary(unit_disk), MembershipLevel.SEPARATED).valid
        assert validate(Config.unit(unit_disk), MembershipLevel.SEPARATED).valid

    def test_separation_constant_override(self, plane, unit_disk):
        x = pair(plane, unit_disk, "1/8")
        assert not validate(x, MembershipLevel.SEPARATED).valid
        assert validate(x, MembershipLevel.SEPARATED, separation_constant=2).valid
        assert membership_level(x) is MembershipLevel.STAR
        assert membership_level(x, 2) is MembershipLevel.SEPARATED

    def test_require_level(self, plane, unit_disk):
        with pytest.raises(InvariantError):
            require_level(pair(plane, unit_disk, "3/10", offset="1/10"), MembershipLevel.STAR)
        x = pair(plane, unit_disk, "1/8")
        with pytest.raises(InvariantError):
            require_level(x, MembershipLevel.SEPARATED)
        require_level(x, MembershipLevel.SEPARATED, separation_constant=2)

    @given(configs(level=MembershipLevel.SEPARATED))
    def test_levels_are_nested(self, x):
        assert validate(x, MembershipLevel.STAR).valid
        assert validate(x, MembershipLevel.AMBIENT).valid


class TestComposition:
    def test_divides_example(self, plane, unit_disk):
        x = pair(plane, unit_disk, "3/10")
        q1 = Config.of([DilationMap.scaling(plane, F(1, 3), EXACT)], unit_disk)
        y = operad_compose(x, StructureMap(1, 2, (0,)), [q1, Config.nullary(unit_disk)])
        assert y.maps == (DilationMap.dilation(plane, F(1, 10), (F(-1, 2), F(0)), EXACT),)

    def test_arity_mismatch(self, plane, unit_disk):
        x = pair(plane, unit_disk, "3/10")
        with pytest.raises(ArityError):
            operad_compose(x, StructureMap(1, 2, (0,)), [Config.unit(unit_disk), Config.unit(unit_disk)])

    def test_blocks_mismatch(self, unit_disk):
        line = ProductBall.centered(BlockStructure.trivial(1), 1, EXACT)
        with pytest.raises(BlockMismatchError):
            compose_blocks(Config.unit(unit_disk), [Config.unit(line)])

    def test_subconfig_keeps_order(self, plane, unit_disk):
        x = pair(plane, unit_disk, "1/10")
        assert subconfig(x, [1, 0]).maps == x.maps
        assert x.component(1).maps == (x.maps[1],)
        with pytest.raises(ArityError):
            subconfig(x, [2])

    def test_action_is_inverse_indexed(self, plane, unit_disk):
        x = pair(plane, unit_disk, "1/10")
        assert act((1, 0), 0, x).maps == (x.maps[1], x.maps[0])
        with pytest.raises(ArityError):
            act((0, 0), 0, x)

    @given(composable())
    def test_associativity_law(self, triple):
        x, ys, zs = triple
        nested, offset = [], 0
        for y in ys:
            nested.append(compose_blocks(y, zs[offset:offset + y.arity]))
            offset += y.arity
        assert configs_equal(compose_blocks(compose_blocks(x, ys), zs), compose_blocks(x, nested))

    @given(configs())
    def test_unit_laws(self, x):
        unit = unit_of(x)
        assert configs_equal(compose_blocks(unit, [x]), x)
        assert configs_equal(compose_blocks(x, [unit] * x.arity), x)

    @given(composable(), st.data())
    def test_equivariance_law(self, triple, data):
        x, ys, _ = triple
        sigma = data.draw(permutations(x.arity))
        g = data.draw(st.integers(0, x.group.order - 1))
        inverse = invert_permutation(sigma)
        sizes = [ys[inverse[k]].arity for k in range(x.arity)]
        lhs = act(block_permutation(sigma, sizes), g, compose_blocks(x, ys))
        rhs = compose_blocks(act(sigma, g, x), [act(range(ys[inverse[k]].arity), g, ys[inverse[k]])
                                               for k in range(x.arity)])
        assert configs_equal(lhs, rhs)

    @given(composable(), st.data())
    def test_inner_permutation_law(self, triple, data):
        x, ys, _ = triple
        taus = [data.draw(permutations(y.arity)) for y in ys]
        lhs = compose_blocks(x, [act(tau, x.group.identity, y) for tau, y in zip(taus, ys)])
        assert configs_equal(lhs, act(block_sum(taus), x.group.identity, compose_blocks(x, ys)))

    @given(configs(), st.data())
    def test_group_action_is_homomorphism(self, x, data):
        g = data.draw(st.integers(0, x.group.order - 1))
        h = data.draw(st.integers(0, x.group.order - 1))
        identity = range(x.arity)
        assert configs_equal(act(identity, g, act(identity, h, x)), act(identity, x.group.multiply(g, h), x))

    @given(configs(level=MembershipLevel.STAR))
    def test_star_closed_under_composition(self, x):
        halves = [scaled_unit(x, F(1, 2)) for _ in range(x.arity)]
        assert validate(compose_blocks(x, halves), MembershipLevel.STAR).valid
