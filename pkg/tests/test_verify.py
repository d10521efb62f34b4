from fractions import Fraction as F

import numpy as np
import pytest

from app.exceptions import InvariantError, StarvationError
from app.models.ball import ProductBall
from app.models.blocks import BlockStructure
from app.models.dilation import DilationMap
from app.models.numeric import EXACT, FLOAT
from app.models.operad import Config, MembershipLevel, validate
from app.services import verify
from app.services.flows import EntryTimeReport, FlowKind, FlowTarget, entry_time
from app.services.sampling import Sampler, random_disks, unit_domain
from app.services.scene_io import load_scene
from app.services.verify import SUITES, resolve_suites, run_suite, verify_suite


class TestResolve:
    def test_all(self):
        assert resolve_suites(["all"]) == list(SUITES)
        assert resolve_suites([]) == list(SUITES)

    def test_keeps_canonical_order(self):
        assert resolve_suites(["flows", "operad-laws"]) == ["operad-laws", "flows"]

    def test_unknown(self):
        with pytest.raises(ValueError, match="bogus"):
            resolve_suites(["operad-laws", "bogus"])


class TestVerifySuite:
    def test_deterministic(self):
        suites = ["operad-laws", "divisibility-oracle", "disk-bounds"]
        first = verify_suite(7, 2, suites, EXACT)
        second = verify_suite(7, 2, suites, EXACT)
        assert first == second
        assert first.failures == 0
        assert all(s.elapsed is None for s in first.suites)

    def test_timings(self):
        report = verify_suite(0, 1, ["figure-regression"], EXACT, timings=True)
        assert report.suites[0].elapsed is not None

    def test_float_mode(self):
        report = verify_suite(0, 2, ["figure-regression", "disk-bounds"], FLOAT)
        assert report.numeric_mode == "float"
        assert report.failures == 0

    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError):
            verify_suite(0, 0)


class TestRunSuite:
    def test_counterexample_is_first_failure(self, monkeypatch):
        def broken(s):
            s.keep("x", verify.figure_configs(s.num)[0])
            return "не выполнено"

        monkeypatch.setitem(SUITES, "operad-laws", broken)
        report = run_suite("operad-laws", 0, 3, EXACT, 10)
        assert report.failures == 3
        assert report.detail == "попытка 0: не выполнено"
        assert "x" in report.first_counterexample["configs"]

    def test_domain_errors_count_as_failures(self, monkeypatch):
        def raising(s):
            raise InvariantError("сломано")

        monkeypatch.setitem(SUITES, "flows", raising)
        report = run_suite("flows", 0, 2, EXACT, 10)
        assert report.failures == 2
        assert "InvariantError" in report.detail

    def test_starvation_is_not_failure(self, monkeypatch):
        def starving(s):
            return s.until(lambda: 0, lambda _: False)

        monkeypatch.setitem(SUITES, "unary-iso", starving)
        report = run_suite("unary-iso", 0, 5, EXACT, 4)
        assert report.starved
        assert report.failures == 0
        assert report.rejections == 4

    def test_every_failing_run_is_logged(self, monkeypatch):
        logged = []

        def recording(message, level="info", deduplicate=True, context=None):
            logged.append((message, deduplicate))

        def broken(s):
            return "не выполнено"

        monkeypatch.setattr(verify.logger, "log", recording)
        monkeypatch.setitem(SUITES, "operad-laws", broken)
        run_suite("operad-laws", 0, 2, EXACT, 10)
        run_suite("operad-laws", 1, 2, EXACT, 10)
        errors = [entry for entry in logged if entry[0].startswith("❌")]
        assert errors == [("❌ Набор operad-laws: не выполнено", False)] * 2


class TestSampler:
    def test_sphere_points_have_unit_norm(self):
        s = Sampler(np.random.default_rng(1), EXACT, 10)
        for dim in (1, 2, 3):
            point = s.sphere_point(dim)
            assert sum(c * c for c in point) == 1

    def test_until_raises(self):
        s = Sampler(np.random.default_rng(0), EXACT, 3)
        with pytest.raises(StarvationError):
            s.until(lambda: 1, lambda _: False)
        assert s.rejections == 3

    def test_rational_bounds(self):
        s = Sampler(np.random.default_rng(2), EXACT, 10)
        values = [s.rational("1/8", "1/2") for _ in range(50)]
        assert all(F(1, 8) <= v <= F(1, 2) for v in values)

    def test_random_disks_level(self):
        s = Sampler(np.random.default_rng(3), EXACT, 5000)
        x = random_disks(s, unit_domain(BlockStructure.trivial(2), EXACT), 3, 0.005, 0.02,
                         MembershipLevel.SEPARATED)
        assert validate(x, MembershipLevel.SEPARATED).valid


class TestFlowsOracle:
    @pytest.mark.parametrize("num", [EXACT, FLOAT])
    def test_flows_suite_passes(self, num):
        report = verify_suite(0, 4, ["flows"], num)
        assert report.failures == 0

    def test_slack(self):
        assert verify._entry_slack(FLOAT, EntryTimeReport(0.25, None)) == 1e-12
        assert verify._entry_slack(EXACT, EntryTimeReport(F(1, 4), None)) == 0
        assert verify._entry_slack(EXACT, EntryTimeReport(F(1, 4), None, exact=False)) == F(1, 2 ** 50)

    def test_exact_twin(self):
        plane = BlockStructure.trivial(2)
        domain = ProductBall.centered(plane, 1.0, FLOAT)
        x = Config.of([DilationMap.dilation(plane, 0.3, (-0.5, 0.125), FLOAT)], domain, numeric=FLOAT)
        twin = verify.exact_twin(x)
        assert twin.numeric.exact
        assert twin.maps[0].scales == (F(3, 10),)
        assert twin.maps[0].translation == (F(-1, 2), F(1, 8))

    def test_float_entry_time_within_oracle_tolerance(self, scenes_dir):
        scene = load_scene(str(scenes_dir / "star.json"), FLOAT)
        x, goal = scene.config("shrink"), FlowTarget(scene.domains["half"], scene.domains["unit"])
        report = entry_time(x, FlowKind.SHRINK_LEFT, goal)
        bracket = verify._oracle_bracket(x, FlowKind.SHRINK_LEFT, goal)
        assert bracket.lower - F(1, 10 ** 12) <= F(report.t) <= bracket.upper + F(1, 10 ** 12)
        assert bracket.upper - bracket.lower < F(1, 2 ** 50)
