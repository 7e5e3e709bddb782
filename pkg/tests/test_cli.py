"""Test the command line: dispatch, outputs and exit codes"""
import json
import pytest
import yaml
from main import HANDLERS, dispatch
from modules.data.field_io import read_field
from modules.handlers import SUBCOMMANDS

DOCUMENT = {
    "grid": {"points": 32},
    "solver": {"tau": 0.5, "s_end": 0.05, "snapshot_times": [0.0, 0.05]},
    "pme": {"s_end": 0.05, "snapshot_times": [0.0, 0.05]},
    "sweep": {"tau_list": [0.5, 0.25], "comparison_times": [0.05]},
    "suites": {"family_size": 2, "directions": 5, "dims": [1, 2], "gammas": [2.0], "s_list": [0.5]},
}


@pytest.fixture
def run(tmp_path):
    """Runs a subcommand on the small run document, in a fresh output directory

    Returns:
        Callable: function (subcommand, *extra, environ=None) -> (exit code, output directory)
    """
    document = tmp_path / "run.yaml"
    document.write_text(yaml.safe_dump(DOCUMENT), encoding="utf-8")
    out = tmp_path / "out"

    def _run(subcommand, *extra, environ=None):
        code = dispatch([subcommand, "--config", str(document), "--out", str(out), *extra], environ or {})
        return code, out

    return _run


class TestDispatch:

    def test_handlers(self):
        """Tests that every advertised subcommand has a handler
        """
        assert set(HANDLERS) == set(SUBCOMMANDS)

    def test_unknown_subcommand(self, run, expected):
        """Tests that usage errors give the operational exit code
        """
        code, out = run("solve-navier-stokes")
        assert code == expected['exit_codes']['operational']
        assert not out.exists()

    def test_invalid_configuration(self, run, expected):
        """Tests that a broken rule stops the run before any output
        """
        code, out = run("sk-verify", environ={"RELAX_GRID_POINTS": "48"})
        assert code == expected['exit_codes']['operational']
        assert not (out / "manifest.json").exists()

    def test_manifest(self, run, expected):
        """Tests that the manifest records the seed given on the command line
        """
        code, out = run("sk-verify", "--seed", "3")
        assert code == expected['exit_codes']['success']
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["seed"] == 3
        assert manifest["subcommand"] == "sk-verify"
        lines = (out / "reports.jsonl").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 2
        assert all(json.loads(line)["passed"] for line in lines)


class TestSubcommands:

    def test_norm(self, run, expected):
        """Tests the norm of the configured initial density
        """
        code, out = run("norm")
        assert code == expected['exit_codes']['success']
        report = json.loads((out / "norm.json").read_text(encoding="utf-8"))
        assert report["op"] == "besov_norm"
        assert report["params"]["points"] == 32
        assert report["value"] > 0

    def test_solve_euler(self, run, expected):
        """Tests the outputs of an Euler run
        """
        code, out = run("solve-euler")
        assert code == expected['exit_codes']['success']
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["times"] == [0.0, 0.05]
        assert summary["data"] == "ill-prepared"
        assert read_field(str(out / "rho_001.rlxf")).grid.points == 32
        assert read_field(str(out / "u_001.rlxf")).components == 1
        header = (out / "diagnostics.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header.startswith("s,")

    def test_vacuum_data(self, run, expected):
        """Tests that data reaching vacuum fail after the manifest
        """
        code, out = run("solve-euler", environ={"RELAX_DATA_AMPLITUDE": "1.5"})
        assert code == expected['exit_codes']['operational']
        assert (out / "manifest.json").exists()
        assert not (out / "summary.json").exists()

    def test_solve_pme(self, run, expected):
        """Tests the outputs of a porous medium run
        """
        code, out = run("solve-pme")
        assert code == expected['exit_codes']['success']
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["bound"]["op"] == "pme_besov_bound"
        assert read_field(str(out / "n_001.rlxf")).grid.points == 32

    def test_tau_sweep(self, run, expected):
        """Tests the error table and the fits of a sweep
        """
        code, out = run("tau-sweep", "--threads", "2")
        assert code == expected['exit_codes']['success']
        rows = (out / "errors.csv").read_text(encoding="utf-8").splitlines()
        assert rows[0] == "tau,s,error"
        assert len(rows) == 5
        fits = json.loads((out / "fits.json").read_text(encoding="utf-8"))
        assert fits["reference"] == "pme"
        assert len(fits["members"]) == 2

    def test_audit_threshold(self, run, expected):
        """Tests that an unreachable spread limit gives the threshold exit code
        """
        code, out = run("audit-energy", environ={"RELAX_SUITES_SPREAD_LIMIT": "0.5"})
        assert code == expected['exit_codes']['threshold']
        ops = [json.loads(line)["op"] for line in (out / "audit.jsonl").read_text(encoding="utf-8").splitlines()]
        assert ops == ["energy_inequality_audit", "uniform_bounds"]
