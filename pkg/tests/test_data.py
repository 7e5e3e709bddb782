"""Test all the modules related to data management"""
import os
import json
import numpy as np
import pytest
from modules.data.data_reader import deep_merge, get_abs_path, load_run_config, read_env, read_md, validate_config_types
from modules.data.field_io import MAGIC, decode_field, encode_field, read_field, write_field
from modules.data.report import Report, ReportWriter, config_hash, dumps, to_builtin
from modules.debug.errors import ConfigurationError
from modules.spectral.grid import PeriodicGrid, ScalarField, VectorField
from modules.spectral.sampling import random_smooth_field


class TestConfiguration:

    def test_defaults(self):
        """Tests that the shipped defaults load and validate
        """
        if os.path.exists(get_abs_path("config", "settings.yaml")):
            pytest.skip("local settings.yaml overrides the shipped defaults")
        config = load_run_config(environ={})
        assert config['grid']['points'] == 256
        assert config['sweep']['reference'] == "pme"
        assert config['solver']['max_step'] is None

    def test_run_document(self, tmp_path):
        """Tests that the run document overrides the defaults and the environment overrides both
        """
        document = tmp_path / "run.yaml"
        document.write_text("grid:\n  points: 64\nsolver:\n  tau: 0.5\n", encoding="utf-8")
        config = load_run_config(str(document), {"RELAX_SOLVER_TAU": "0.25", "RELAX_SEED": "7"})
        assert config['grid']['points'] == 64
        assert config['solver']['tau'] == 0.25
        assert config['seed'] == 7
        assert config['law']['gamma'] == 2.0

    def test_invalid_values(self):
        """Tests that broken rules and unreadable values name their key
        """
        cases = [({"RELAX_GRID_POINTS": "48"}, "grid.points"), ({"RELAX_SOLVER_TAU": "1.5"}, "solver.tau"),
                 ({"RELAX_SWEEP_TAU_LIST": "[0.5, 0.5]"}, "sweep.tau_list"), ({"RELAX_GRID_DIM": "two"}, "grid.dim"),
                 ({"RELAX_PME_ADAPTIVE": "maybe"}, "pme.adaptive")]
        for environ, key in cases:
            with pytest.raises(ConfigurationError) as info:
                load_run_config(environ=environ)
            assert info.value.field == key

    def test_invalid_document(self, tmp_path):
        """Tests that a missing or malformed run document is a configuration error
        """
        with pytest.raises(ConfigurationError):
            load_run_config(str(tmp_path / "missing.yaml"), {})
        broken = tmp_path / "broken.yaml"
        broken.write_text("- just\n- a list\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_run_config(str(broken), {})

    def test_deep_merge(self):
        """Tests that nested sections are merged and the base is left untouched
        """
        base = {"grid": {"dim": 1, "points": 8}, "seed": 1}
        merged = deep_merge(base, {"grid": {"points": 16}, "threads": 2})
        assert merged == {"grid": {"dim": 1, "points": 16}, "seed": 1, "threads": 2}
        assert base["grid"]["points"] == 8

    def test_read_env(self, tmp_path):
        """Tests the mapping of the variables on sections and the .env file
        """
        env_file = tmp_path / ".env"
        env_file.write_text("RELAX_LAW_GAMMA=1.4\nOTHER=1\n", encoding="utf-8")
        config = {}
        read_env(config, {"RELAX_OUTPUT_DIR": "runs", "HOME": "/root"}, str(env_file))
        assert config == {"law": {"gamma": "1.4"}, "output": {"dir": "runs"}}
        validate_config_types(config)
        assert config["law"]["gamma"] == 1.4

    def test_casts(self):
        """Tests the casts of the schema
        """
        config = {"pme": {"adaptive": "off"}, "sweep": {"tau_list": "[1, 0.5]"}, "grid": {"points": 32.0}}
        validate_config_types(config)
        assert config["pme"]["adaptive"] is False
        assert config["sweep"]["tau_list"] == [1, 0.5]
        assert config["grid"]["points"] == 32

    def test_read_md(self):
        """Tests the usage text shown by the command line
        """
        text = read_md("usage", unused="x")
        assert text == read_md("usage")
        assert "tau-sweep" in text
        assert text.endswith("was violated.")


class TestFieldContainer:

    def test_scalar(self, grid, rng):
        """Tests that a scalar field survives the container bit for bit
        """
        f = random_smooth_field(grid, rng)
        payload = encode_field(f)
        assert payload[:4] == MAGIC
        decoded = decode_field(payload)
        assert isinstance(decoded, ScalarField)
        assert decoded.grid == grid
        assert np.array_equal(decoded.values, f.values)

    def test_vector(self, grid_2d, rng, tmp_path):
        """Tests a two component field through a file
        """
        v = VectorField(grid_2d, np.stack([rng.standard_normal(grid_2d.shape) for _ in range(2)]))
        path = str(tmp_path / "v.rlxf")
        write_field(path, v)
        decoded = read_field(path)
        assert decoded.components == 2
        assert np.array_equal(decoded.values, v.values)

    def test_invalid(self, tmp_path):
        """Tests the rejection of foreign, truncated and missing containers
        """
        payload = encode_field(ScalarField.zeros(PeriodicGrid(1, 8)))
        with pytest.raises(ConfigurationError):
            decode_field(b"XXXX" + payload[4:])
        with pytest.raises(ConfigurationError):
            decode_field(payload[:-8])
        with pytest.raises(ConfigurationError):
            decode_field(payload[:5])
        with pytest.raises(ConfigurationError) as info:
            read_field(str(tmp_path / "missing.rlxf"))
        assert info.value.field == "norm.field"


class TestReports:

    def test_to_builtin(self):
        """Tests the conversion of numpy values and non finite floats
        """
        value = {"a": np.float64(1.5), "b": np.arange(2), "c": (np.inf, np.nan), 3: np.bool_(True)}
        assert to_builtin(value) == {"a": 1.5, "b": [0, 1], "c": ["inf", "nan"], "3": True}

    def test_canonical_json(self):
        """Tests that the JSON text and the hash do not depend on the key order
        """
        assert dumps({"b": 1, "a": [1.0]}) == '{"a":[1.0],"b":1}'
        assert config_hash({"b": 1, "a": 2}) == config_hash({"a": 2, "b": 1})
        record = json.loads(Report("op", {"s": 1.5}, 2.0, [(0, 1.0)], passed=True).to_json())
        assert record == {"op": "op", "params": {"s": 1.5}, "value": 2.0, "per_block": [[0, 1.0]], "passed": True}
        assert "passed" not in Report("op").to_dict()

    def test_manifest_first(self, tmp_path):
        """Tests that data files are refused before the manifest
        """
        writer = ReportWriter(str(tmp_path / "out"))
        with pytest.raises(RuntimeError):
            writer.write_json("result.json", {})
        manifest = writer.write_manifest("norm", {"seed": 1}, 1, 1)
        assert manifest["config_sha256"] == config_hash({"seed": 1})
        assert set(manifest["versions"]) == {"python", "numpy", "scipy", "yaml"}
        writer.write_csv("table.csv", ["tau", "error"], [[0.5, 0.1]])
        writer.write_jsonl("reports.jsonl", [Report("a"), {"op": "b"}])
        assert (tmp_path / "out" / "table.csv").read_text(encoding="utf-8") == "tau,error\n0.5,0.1\n"
        lines = (tmp_path / "out" / "reports.jsonl").read_text(encoding="utf-8").splitlines()
        assert [json.loads(line)["op"] for line in lines] == ["a", "b"]
