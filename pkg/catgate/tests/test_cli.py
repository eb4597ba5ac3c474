"""Tests for the command-line surface: config loading, exit codes and output files."""

import csv
import json

import pytest

from catgate.channels.gate import GateParams
from catgate.characterization.entangled import entangled_fidelity
from catgate.cli.commands import cmd_figures
from catgate.cli.middleware import exit_code_for, run_command
from catgate.cli.models import RunConfig, load_run_config
from catgate.exceptions import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_UNEXPECTED,
    ConfigError,
    StageError,
    TruncationError,
)
from catgate.main import main
from catgate.states.factory import CatQubitSpec


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert config.T == 0.9
        assert config.XI == 0.83
        assert len(config.phase_list) == 12

    def test_comma_lists(self):
        config = RunConfig(PHASES="0,0.5,1.0", XI_VALUES="0.1, 0.2")
        assert config.phase_list == [0.0, 0.5, 1.0]
        assert config.XI_VALUES == [0.1, 0.2]

    def test_precedence(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("T=0.7\nxi=0.5\n", encoding="utf-8")
        config = load_run_config(str(path), preset="fig3c", overrides={"T": 0.95, "ALPHA": None})
        assert config.T == 0.95
        assert config.XI == 0.5
        assert config.ALPHA == 0.92
        assert config.PRESET == "fig3c"

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("BOGUS=1\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_run_config(str(path))

    def test_transmissivity_list_out_of_range(self):
        with pytest.raises(ConfigError, match="transmissivities"):
            load_run_config(overrides={"T_VALUES": "0.9,1.0"})

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="unknown preset"):
            load_run_config(preset="fig9")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(str(tmp_path / "absent.env"))

    @pytest.mark.parametrize("name", ["fig2-pipeline", "fig3a", "fig3b", "fig3c", "fig3d", "fig4", "fig5"])
    def test_shipped_presets_load(self, name):
        assert load_run_config(preset=name).PRESET == name

    def test_gate_params(self):
        p = RunConfig(T=0.95, XI=0.5, CUTOFF=12).gate_params()
        assert (p.T, p.xi, p.cutoff) == (0.95, 0.5, 12)


# ---------------------------------------------------------------------------
# Exit codes
# ---------------------------------------------------------------------------

class TestExitCodes:
    def test_mapping(self):
        assert exit_code_for(ConfigError("x")) == EXIT_CONFIG
        assert exit_code_for(TruncationError("x")) == EXIT_NUMERICAL
        assert exit_code_for(RuntimeError("x")) == EXIT_UNEXPECTED

    def test_stage_error_keeps_cause_code(self):
        def fail():
            raise StageError("tomography", TruncationError("cutoff too small"))

        code, result = run_command("pipeline", fail)
        assert code == EXIT_NUMERICAL
        assert result is None

    def test_success(self):
        assert run_command("noop", lambda: {"ok": True}) == (EXIT_OK, {"ok": True})


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

class TestStateCommand:
    def test_writes_ket_json(self, tmp_path):
        code = main(["state", "coherent", "--alpha", "0.92", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        payload = json.loads((tmp_path / "state_coherent.json").read_text(encoding="utf-8"))
        assert payload["cutoff"] == 20
        assert len(payload["re"]) == 21

    def test_writes_wigner_csv(self, tmp_path):
        code = main(["state", "cat", "--theta", "1.5707963", "--wigner", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        rows = _rows(tmp_path / "state_cat_wigner.csv")
        assert rows[0] == ["x", "p", "w"]
        assert len(rows) == 1 + 101 * 101

    def test_invalid_parameter_is_config_error(self, tmp_path):
        assert main(["state", "vacuum", "--T", "1.5", "--output-dir", str(tmp_path)]) == EXIT_CONFIG

    def test_truncation_is_numerical_error(self, tmp_path):
        code = main(["state", "coherent", "--alpha", "5", "--cutoff", "10", "--output-dir", str(tmp_path)])
        assert code == EXIT_NUMERICAL

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["teleport"])
        assert excinfo.value.code == 2


class TestDataCommands:
    def test_simulate_then_reconstruct_then_fit(self, tmp_path):
        out = ["--output-dir", str(tmp_path)]
        assert main(["simulate-homodyne", "--samples", "500", "--phase-count", "6", *out]) == EXIT_OK
        quadratures = tmp_path / "quadratures.csv"
        rows = _rows(quadratures)
        assert rows[0] == ["phase_rad", "quadrature"]
        assert len(rows) == 1 + 6 * 500

        assert main(["tomo", str(quadratures), "--cutoff", "8", "--mle-iterations", "20", *out]) == EXIT_OK
        assert (tmp_path / "rho_mle.json").exists()

        assert main(["fit", str(quadratures), *out]) == EXIT_OK
        report = json.loads((tmp_path / "fit_report.json").read_text(encoding="utf-8"))
        assert 0.0 < report["s"] <= 1.0
        assert report["h"] >= 1.0

    def test_tomo_missing_file(self, tmp_path):
        code = main(["tomo", str(tmp_path / "absent.csv"), "--output-dir", str(tmp_path)])
        assert code == EXIT_CONFIG


class TestCharacterizationCommands:
    def test_entangled_fidelity(self, tmp_path):
        code = main(["entangled-fidelity", "--entangled-cutoff", "20", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        summary = json.loads((tmp_path / "entangled_fidelity.json").read_text(encoding="utf-8"))
        assert 0.73 < summary["fidelity"] < 0.83

    def test_cat_adequacy(self, tmp_path):
        code = main(["cat-adequacy", "--alpha-values", "0.5,0.92", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        rows = _rows(tmp_path / "cat_adequacy.csv")
        assert rows[0] == ["alpha", "value"]
        assert len(rows) == 3

    def test_small_bloch_figure(self, tmp_path):
        code = main(["figures", "fig3a", "--theta-points", "3", "--phi-points", "4", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        rows = _rows(tmp_path / "fig3a_map.csv")
        assert rows[0] == ["theta_rad", "phi_rad", "fidelity"]
        assert len(rows) == 1 + 12

    def test_adequacy_figure(self, tmp_path):
        code = main(["figures", "fig5", "--alpha-values", "0.5,0.92,1.5", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        assert len(_rows(tmp_path / "fig5.csv")) == 4

    def test_bloch_sweep_writes_report_and_t_curve(self, tmp_path):
        code = main([
            "sweep-bloch", "--theta-points", "3", "--phi-points", "2",
            "--t-values", "0.9,0.99,0.9999", "--output-dir", str(tmp_path),
        ])
        assert code == EXIT_OK
        rows = _rows(tmp_path / "bloch_t_limit.csv")
        assert rows[0] == ["T", "value"]
        assert len(rows) == 4
        report = json.loads((tmp_path / "bloch_report.json").read_text(encoding="utf-8"))
        assert report["xi"] == 0.83
        assert report["adequacy"] == pytest.approx(report["adequacy_closed_form"], abs=1e-9)
        assert set(report["map_summary"]) >= {"min", "max", "equator_mean", "pole_mean"}
        assert 0.73 < report["entangled_fidelity"] < 0.83

    def test_unit_transmissivity_in_t_values(self, tmp_path):
        code = main([
            "sweep-bloch", "--theta-points", "2", "--phi-points", "1",
            "--t-values", "0.9,1.0", "--output-dir", str(tmp_path),
        ])
        assert code == EXIT_CONFIG

    def test_xi_figure_does_not_depend_on_value_order(self, tmp_path):
        config = load_run_config(
            preset="fig4",
            overrides={"OUTPUT_DIR": str(tmp_path), "ENTANGLED_CUTOFF": 20, "XI_VALUES": "1.0,0.0,0.5"},
        )
        summary = cmd_figures(config, "fig4")
        expected = entangled_fidelity(CatQubitSpec(0.92, 20), GateParams(T=0.9, xi=0.83, cutoff=20))
        assert summary["fidelity_at_xi"] == pytest.approx(expected, abs=1e-10)
