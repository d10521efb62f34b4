import json
from fractions import Fraction as F

import pytest
from hypothesis import given

from app.exceptions import SceneError
from app.models.numeric import FLOAT
from app.models.operad import MembershipLevel, configs_equal
from app.services.scene_io import SceneBuilder, load_scene, parse_scene, scene_fragment, serialize_scene
from app.services.tensor import tree_evaluate
from tests.strategies import configs


def scene_with(**configs_):
    return json.dumps({
        "blocks": {"plane": {"dimension": 2}},
        "domains": {"unit": {"blocks": "plane", "radii": ["1"]}},
        "configs": configs_,
    })


class TestLoad:
    @pytest.mark.parametrize("name", ["star.json", "divisibility.json", "five_disks.json", "trees.json"])
    def test_bundled_scenes(self, scenes_dir, name):
        scene = load_scene(str(scenes_dir / name))
        assert scene.configs
        assert scene.numeric.exact

    def test_star_values(self, scenes_dir):
        scene = load_scene(str(scenes_dir / "star.json"))
        star = scene.config("star")
        assert star.arity == 2
        assert star.maps[0].scales == (F(3, 10),)
        assert star.maps[0].translation == (F(-1, 2), F(0))
        assert scene.domains["half"].radii == (F(1, 2),)
        assert scene.separation_constant == 5
        assert scene.shrink_factor == F(1, 50)

    def test_trees(self, scenes_dir):
        scene = load_scene(str(scenes_dir / "trees.json"))
        core = scene.tree("core")
        assert core.root == 0
        assert tree_evaluate(core).arity == 2

    def test_float_override(self, scenes_dir):
        scene = load_scene(str(scenes_dir / "star.json"), numeric=FLOAT)
        assert scene.config("star").maps[0].scales == (pytest.approx(0.3),)

    def test_settings_override(self):
        raw = json.loads(scene_with())
        raw["settings"] = {"separation_constant": "2", "shrink_factor": "1/10"}
        scene = parse_scene(json.dumps(raw))
        assert (scene.separation_constant, scene.shrink_factor) == (2, F(1, 10))

    def test_missing_file(self, tmp_path):
        with pytest.raises(SceneError, match="не удалось прочитать"):
            load_scene(str(tmp_path / "absent.json"))


class TestErrors:
    def test_bad_json(self):
        with pytest.raises(SceneError, match="некорректный JSON"):
            parse_scene("{not json")

    def test_unknown_config(self, scenes_dir):
        scene = load_scene(str(scenes_dir / "star.json"))
        with pytest.raises(SceneError) as info:
            scene.config("ghost")
        assert info.value.path == ("configs", "ghost")

    def test_schema_error_has_location(self):
        raw = scene_with(x={"domain": "unit", "maps": [{"translation": ["0", "0"]}]})
        with pytest.raises(SceneError) as info:
            parse_scene(raw)
        assert info.value.path == ("configs", "x", "maps", 0, "scales")

    def test_bad_scalar(self):
        raw = scene_with(x={"domain": "unit", "maps": [{"scales": ["abc"], "translation": ["0", "0"]}]})
        with pytest.raises(SceneError) as info:
            parse_scene(raw)
        assert info.value.path[:4] == ("configs", "x", "maps", 0)

    def test_unknown_domain(self):
        with pytest.raises(SceneError) as info:
            parse_scene(scene_with(x={"domain": "nowhere"}))
        assert info.value.path == ("configs", "x", "domain")

    def test_invariant_reported_with_path(self):
        skew = {"ortho": [["1/2", "0"], ["0", "1"]], "scales": ["1/4"], "translation": ["0", "0"]}
        ok = {"scales": ["1/4"], "translation": ["0", "0"]}
        with pytest.raises(SceneError) as info:
            parse_scene(scene_with(x={"domain": "unit", "maps": [ok, skew]}))
        assert info.value.path == ("configs", "x", "maps", 2)

    def test_product_cycle(self):
        raw = {
            "blocks": {"plane": {"dimension": 2}},
            "domains": {"a": {"product": ["b", "b"]}, "b": {"product": ["a", "a"]}},
        }
        with pytest.raises(SceneError, match="циклическая"):
            parse_scene(json.dumps(raw))

    def test_tree_problems(self, scenes_dir):
        raw = json.loads((scenes_dir / "trees.json").read_text())
        raw["trees"]["corolla"]["vertices"][0]["xi"] = [[1, 1], [1, 1]]
        with pytest.raises(SceneError) as info:
            parse_scene(json.dumps(raw))
        assert info.value.path == ("trees", "corolla")


class TestSerialize:
    def test_canonical_dump_is_stable(self, scenes_dir):
        scene = load_scene(str(scenes_dir / "trees.json"))
        first = serialize_scene(scene)
        assert first.endswith(b"\n")
        assert serialize_scene(parse_scene(first)) == first

    def test_builder_reuses_names(self, scenes_dir):
        scene = load_scene(str(scenes_dir / "star.json"))
        builder = SceneBuilder(scene.numeric)
        builder.add_config("a", scene.config("star")).add_config("b", scene.config("separated"))
        fragment = builder.fragment()
        assert list(fragment["domains"]) == ["domain1"]
        assert fragment["configs"]["a"]["domain"] == "domain1"
        assert "group" not in fragment["configs"]["a"]

    def test_tree_fragment(self, scenes_dir):
        scene = load_scene(str(scenes_dir / "trees.json"))
        fragment = scene_fragment({}, {"core": scene.tree("core")}, scene.numeric)
        reloaded = parse_scene(json.dumps(fragment))
        assert configs_equal(tree_evaluate(reloaded.tree("core")), tree_evaluate(scene.tree("core")))

    @given(configs(level=MembershipLevel.STAR))
    def test_fragment_reloads(self, x):
        reloaded = parse_scene(json.dumps(scene_fragment({"x": x})))
        y = reloaded.config("x")
        assert configs_equal(x, y)
        assert y.group.order == x.group.order
