"""Tests for the prcm command-line driver."""

import json
import os

import pytest

from prcm.cli import build_parser, main


@pytest.fixture
def run_cli(tmp_path):
    """Run main() with a JSON report file and return (exit code, report)."""
    def _run(*argv):
        path = tmp_path / "report.out"
        if path.exists():
            path.unlink()
        code = main([*argv, "--output", str(path)])
        text = path.read_text() if path.exists() else None
        return code, text

    return _run


def _json(text):
    return json.loads(text)


# ============================================================
# Parser
# ============================================================

class TestParser:
    """Test argument parsing."""

    def test_every_subcommand_is_registered(self):
        """Each subcommand parses with only its name."""
        parser = build_parser()
        for name in ("enumerate", "verify-duality", "sample-coupled", "estimate"):
            assert parser.parse_args([name]).command == name

    def test_unset_flags_are_none(self):
        """Flags default to None so the config file can supply them."""
        args = build_parser().parse_args(["sample", "--sweeps", "50"])
        assert args.sweeps == 50
        assert args.q is None
        assert args.burn_in is None

    def test_help_exits_cleanly(self, capsys):
        """--help is exit code 0."""
        assert main(["--help"]) == 0
        assert "subcommand" in capsys.readouterr().out

    def test_unknown_subcommand(self):
        """Usage errors are exit code 2."""
        assert main(["frobnicate"]) == 2


# ============================================================
# Subcommands
# ============================================================

class TestCommands:
    """Test subcommands end to end."""

    def test_enumerate_single_edge(self, run_cli):
        """The single edge has marginal 1/3 and Z = 3."""
        code, text = run_cli("enumerate", "--d", "1", "--box", "0,1", "--q", "2", "--p", "1/2")
        assert code == 0
        report = _json(text)
        assert report["command"] == "enumerate"
        assert report["results"]["marginals"] == {"anchor=(0);dirs={1}": "1/3"}
        assert report["results"]["Z"] == "3/1"
        assert report["config"]["p"] == "1/2"

    def test_verify_duality(self, run_cli):
        """Planar duality passes on the open 2x2 square."""
        code, text = run_cli("verify-duality", "--box", "0,2x0,2")
        assert code == 0
        report = _json(text)
        assert report["passed"] is True
        assert report["results"]["duality"]["details"]["p_star"] == "2/3"

    def test_failed_holley_is_exit_one(self, run_cli):
        """Wired is not dominated by free: the witness lands in the report."""
        code, text = run_cli(
            "verify-holley", "--box", "0,2x0,2", "--boundary", "wired", "--compare-boundary", "free"
        )
        assert code == 1
        report = _json(text)
        assert report["passed"] is False
        assert report["results"]["holley"]["witness"] is not None

    def test_conditioning(self, run_cli):
        """Conditioning a closed box on its annulus."""
        code, _ = run_cli(
            "verify-conditioning",
            "--box", "0,2x0,2",
            "--convention", "closed",
            "--inner-box", "0,1x0,1",
            "--outside-open", "anchor=(2,2);dirs={1} | anchor=(0,2);dirs={2}",
        )
        assert code == 0

    def test_csv_output(self, run_cli):
        """CSV reports carry one row per observable."""
        code, text = run_cli("verify-fkg", "--box", "0,2x0,2", "--format", "csv")
        assert code == 0
        lines = text.strip().splitlines()
        assert lines[0].startswith("command,d,i,q,p")
        assert lines[1].startswith("verify-fkg,2,1,2,1/2")

    def test_sample(self, run_cli):
        """A short heat-bath run reports its density estimate."""
        code, text = run_cli("sample", "--box", "0,2x0,2", "--sweeps", "300", "--burn-in", "20", "--seed", "4")
        assert code == 0
        rows = {row["name"]: row for row in _json(text)["observables"]}
        assert 0 <= rows["density"]["value"] <= 1
        assert rows["density"]["seed"] == 4

    def test_estimate_pressure_only(self, run_cli):
        """Pressure is exact and needs no chain."""
        code, text = run_cli("estimate", "--box", "0,2x0,2", "--observables", "pressure", "--sweeps", "20", "--burn-in", "0")
        assert code == 0
        assert "chains" not in _json(text)["results"]

    def test_config_file_with_override(self, run_cli, tmp_path):
        """Flags override the YAML file."""
        path = tmp_path / "experiment.yaml"
        path.write_text("box: 0,2x0,2\nq: 3\n")
        code, text = run_cli("--config", str(path), "enumerate", "--q", "2")
        assert code == 0
        assert _json(text)["config"]["q"] == 2

    def test_enumeration_cap_flag(self, run_cli):
        """A cap below the plaquette count is a usage error."""
        code, _ = run_cli("enumerate", "--box", "0,2x0,2", "--convention", "closed", "--enumeration-cap", "4")
        assert code == 2

    def test_enumeration_cap_leaves_environment(self, run_cli):
        """The cap flag reaches the enumeration without touching os.environ."""
        before = dict(os.environ)
        code, text = run_cli("enumerate", "--box", "0,2x0,2", "--enumeration-cap", "4")
        assert code == 0
        assert _json(text)["config"]["enumeration_cap"] == 4
        assert dict(os.environ) == before
        assert "PRCM_ENUMERATION_CAP" not in os.environ


class TestErrors:
    """Test configuration errors."""

    def test_invalid_config(self, run_cli):
        """i > d is rejected before anything runs."""
        code, text = run_cli("enumerate", "--d", "1", "--i", "2", "--box", "0,1")
        assert code == 2
        assert text is None

    def test_duality_needs_lower_i(self, run_cli):
        """verify-duality rejects i = d."""
        code, _ = run_cli("verify-duality", "--d", "1", "--box", "0,2")
        assert code == 2

    def test_unwritable_output(self, tmp_path):
        """A report path in a missing directory is exit code 2."""
        target = tmp_path / "missing" / "report.json"
        assert main(["enumerate", "--d", "1", "--box", "0,1", "--output", str(target)]) == 2
