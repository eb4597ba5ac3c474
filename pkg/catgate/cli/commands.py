"""Implementations of the CLI subcommands.

Every command takes a validated RunConfig, writes its artifacts under
OUTPUT_DIR and returns a JSON-serializable summary dict.
"""

import logging
from contextlib import contextmanager
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional

import numpy as np

from catgate.channels.gate import double_subtraction, gate, success_probability
from catgate.characterization.bloch import bloch_sweep, t_limit_study
from catgate.characterization.entangled import (
    adequacy,
    adequacy_closed_form,
    branch_fidelities,
    cat_adequacy,
    characterize,
    entangled_fidelity,
    odd_cat_fidelity,
    optimal_alpha,
    printed_adequacy,
    xi_sweep,
)
from catgate.cli.models import (
    ASSUMED_H,
    ASSUMED_KAPPA,
    ASSUMED_S,
    CharacterizationModel,
    ComparisonModel,
    FitReport,
    PipelineReport,
    RunConfig,
)
from catgate.exceptions import ConfigError, StageError
from catgate.fock.core import DensityOperator, mean_photon_number, purity, rotate
from catgate.fock.wigner import grid_axis, wigner, wigner_at_origin
from catgate.states.factory import (
    BlochPoint,
    cat,
    coherent,
    fock,
    gaussian_model_state,
    squeezed_photon,
    squeezed_vacuum,
    vacuum,
)
from catgate.tomography.fitting import fit_squeezer, fit_xi, predict_and_compare
from catgate.tomography.homodyne import histogram, quad_density, sample
from catgate.tomography.mle import reconstruct
from catgate.utils.serialization import (
    read_density,
    read_quadratures_csv,
    write_curve_csv,
    write_histograms_csv,
    write_json,
    write_map_csv,
    write_quadratures_csv,
    write_rows,
    write_state,
    write_wigner_csv,
)

logger = logging.getLogger(__name__)

STATE_NAMES = ("vacuum", "fock", "coherent", "cat", "squeezed", "squeezed-photon", "gaussian")
FIGURE_PRESETS = ("fig2-pipeline", "fig3a", "fig3b", "fig3c", "fig3d", "fig4", "fig5")
PREDICTION_POINTS = 201


@contextmanager
def _stage(name: str):
    logger.info(f"Pipeline stage: {name}")
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        raise StageError(name, e) from e


def _assumptions(config: RunConfig) -> list[str]:
    notes = []
    if config.S == ASSUMED_S and config.H == ASSUMED_H:
        notes.append(f"source (s={ASSUMED_S}, h={ASSUMED_H}) is a synthetic default, not a measured value")
    if config.KAPPA == ASSUMED_KAPPA:
        notes.append(f"APD efficiency kappa={ASSUMED_KAPPA} is a synthetic default")
    if config.ETA == 1.0:
        notes.append("homodyne efficiency extrapolated to eta=1")
    return notes


# ---------------------------------------------------------------------------
# state
# ---------------------------------------------------------------------------

def build_state(config: RunConfig, name: str):
    cutoff = config.CUTOFF
    if name == "vacuum":
        return vacuum(cutoff)
    if name == "fock":
        return fock(config.N, cutoff)
    if name == "coherent":
        return coherent(config.ALPHA, cutoff)
    if name == "cat":
        return cat(config.cat_spec(), BlochPoint(config.THETA, config.PHI))
    if name == "squeezed":
        return squeezed_vacuum(config.S, cutoff)
    if name == "squeezed-photon":
        return squeezed_photon(config.S, cutoff)
    if name == "gaussian":
        return gaussian_model_state(config.squeezer(), cutoff)
    raise ConfigError(f"unknown state {name!r}; choose from {', '.join(STATE_NAMES)}")


def cmd_state(config: RunConfig, name: str, with_wigner: bool = False) -> dict:
    state = build_state(config, name)
    out_dir = config.output_path
    state_file = write_state(out_dir / f"state_{name}.json", state)
    summary = {"state": name, "cutoff": config.CUTOFF, "state_file": str(state_file)}
    if with_wigner:
        rho = state if isinstance(state, DensityOperator) else DensityOperator.from_ket(state)
        grid = wigner(rho, grid_axis(), grid_axis())
        summary["wigner_file"] = str(write_wigner_csv(out_dir / f"state_{name}_wigner.csv", grid))
        summary["wigner_origin"] = wigner_at_origin(rho)
        summary["wigner_max"] = float(grid.values.max())
    return summary


# ---------------------------------------------------------------------------
# homodyne data, tomography, fitting
# ---------------------------------------------------------------------------

def cmd_simulate_homodyne(config: RunConfig, state_file: Optional[str] = None) -> dict:
    if state_file:
        rho = read_density(Path(state_file))
    else:
        rho = gaussian_model_state(config.squeezer(), config.CUTOFF)
    rec = sample(rho, config.phase_list, config.SAMPLES_PER_PHASE, seed=config.SEED)
    out_dir = config.output_path
    quad_file = write_quadratures_csv(out_dir / "quadratures.csv", rec)
    hist_file = write_histograms_csv(out_dir / "histograms.csv", histogram(rec, config.BINS))
    return {
        "samples": rec.size,
        "phases": len(config.phase_list),
        "seed": config.SEED,
        "quadratures_file": str(quad_file),
        "histograms_file": str(hist_file),
    }


def cmd_tomo(config: RunConfig, input_csv: str) -> dict:
    rec = read_quadratures_csv(Path(input_csv))
    result = reconstruct(rec, config.CUTOFF, iterations=config.MLE_ITERATIONS, bins=config.BINS)
    state_file = write_state(config.output_path / "rho_mle.json", result.state)
    return {
        "state_file": str(state_file),
        "iterations": result.iterations,
        "converged": result.converged,
        "log_likelihood": result.log_likelihood[-1],
        "purity": purity(result.state),
        "mean_photon_number": mean_photon_number(result.state),
    }


def cmd_fit(config: RunConfig, source_csv: str, gated_csv: Optional[str] = None) -> dict:
    model = fit_squeezer(read_quadratures_csv(Path(source_csv)), bins=config.BINS)
    report = FitReport(s=model.s, h=model.h, T=config.T, eta=config.ETA, assumptions=_assumptions(config))
    if gated_csv:
        gated = read_quadratures_csv(Path(gated_csv))
        xi = fit_xi(gated, model, config.T, eta=config.ETA, cutoff=config.CUTOFF, bins=config.BINS)
        comparison = predict_and_compare(
            gaussian_model_state(model, config.CUTOFF), config.gate_params(xi=xi), gated, bins=config.BINS
        )
        report.xi = xi
        report.chi2_per_phase = comparison.chi2_per_phase
    write_json(config.output_path / "fit_report.json", report)
    return report.model_dump()


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def _run_pipeline(config: RunConfig) -> tuple[PipelineReport, dict]:
    cutoff = config.CUTOFF
    phases = config.phase_list
    n = config.SAMPLES_PER_PHASE
    out_dir = config.output_path
    truth = config.gate_params()

    with _stage("source-model"):
        rho0 = gaussian_model_state(config.squeezer(), cutoff)
        rho1 = gate(rho0, truth)
        rho2 = double_subtraction(rho0, truth, truth)
    with _stage("sample-source"):
        rec0 = sample(rho0, phases, n, seed=config.SEED)
        write_quadratures_csv(out_dir / "source_quadratures.csv", rec0)
    with _stage("tomography"):
        mle = reconstruct(rec0, cutoff, iterations=config.MLE_ITERATIONS, bins=config.BINS)
        write_state(out_dir / "rho0_mle.json", mle.state)
    with _stage("fit-squeezer"):
        model = fit_squeezer(rec0, bins=config.BINS)
    with _stage("sample-subtracted"):
        rec1 = sample(rho1, phases, n, seed=config.SEED + 1)
        rec2 = sample(rho2, phases, n, seed=config.SEED + 2)
        write_quadratures_csv(out_dir / "subtracted_quadratures.csv", rec1)
        write_quadratures_csv(out_dir / "double_subtracted_quadratures.csv", rec2)
    with _stage("fit-xi"):
        xi_hat = fit_xi(rec1, model, config.T, eta=config.ETA, cutoff=cutoff, bins=config.BINS)
    fitted = replace(truth, xi=xi_hat)
    with _stage("predict"):
        rho0_hat = gaussian_model_state(model, cutoff)
        rho1_hat = gate(rho0_hat, fitted)
        rho2_hat = double_subtraction(rho0_hat, fitted, fitted)
    with _stage("optimal-alpha"):
        # the squeezer reduces x; a quarter turn aligns the state with real-alpha cats
        aligned = rotate(rho1_hat, -np.pi / 2)
        alpha_star = optimal_alpha(aligned)
        alpha_fidelity = odd_cat_fidelity(aligned, alpha_star)
    with _stage("compare"):
        comparison = predict_and_compare(rho1_hat, fitted, rec2, bins=config.BINS)

    fit = FitReport(
        s=model.s,
        h=model.h,
        xi=xi_hat,
        chi2_per_phase=comparison.chi2_per_phase,
        T=config.T,
        eta=config.ETA,
        seed=config.SEED,
        assumptions=_assumptions(config),
    )
    report = PipelineReport(
        fit=fit,
        comparison=ComparisonModel(
            phases=comparison.phases,
            chi2_per_phase=comparison.chi2_per_phase,
            dof_per_phase=comparison.dof_per_phase,
            overlap_per_phase=comparison.overlap_per_phase,
            mean_chi2=comparison.mean_chi2,
        ),
        true_s=config.S,
        true_h=config.H,
        true_xi=config.XI,
        mle_iterations=mle.iterations,
        mle_log_likelihood=mle.log_likelihood[-1],
        mle_purity=purity(mle.state),
        mle_mean_photon_number=mean_photon_number(mle.state),
        model_mean_photon_number=mean_photon_number(rho0),
        optimal_alpha=alpha_star,
        optimal_alpha_fidelity=alpha_fidelity,
        success_rate=success_probability(rho0_hat, fitted),
        config=config.model_dump(),
    )
    write_json(out_dir / "fit_report.json", fit)
    write_json(out_dir / "pipeline_report.json", report)
    artifacts = {
        "records": {"source": rec0, "subtracted": rec1, "double_subtracted": rec2},
        "predictions": {"source": rho0_hat, "subtracted": rho1_hat, "double_subtracted": rho2_hat},
    }
    return report, artifacts


def cmd_pipeline(config: RunConfig) -> dict:
    report, _ = _run_pipeline(config)
    logger.info(
        f"Pipeline: s={report.fit.s:.4f}, h={report.fit.h:.4f}, xi={report.fit.xi:.4f} "
        f"(true xi {report.true_xi}), mean chi2 {report.comparison.mean_chi2:.3f}"
    )
    return report.model_dump()


# ---------------------------------------------------------------------------
# characterization
# ---------------------------------------------------------------------------

def _sweep_grid(config: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    thetas = np.linspace(0.0, np.pi, config.THETA_POINTS)
    phis = np.linspace(0.0, 2.0 * np.pi, config.PHI_POINTS, endpoint=False)
    return thetas, phis


def cmd_sweep_bloch(config: RunConfig, name: str = "bloch") -> dict:
    """Fidelity map, F(T) curve at theta = pi/4 and the characterization report."""
    spec = config.cat_spec()
    p = config.gate_params()
    out_dir = config.output_path
    thetas, phis = _sweep_grid(config)
    fidelity_map = bloch_sweep(spec, p, thetas, phis)
    map_file = write_map_csv(out_dir / f"{name}_map.csv", thetas, phis, fidelity_map.values)

    t_curve = t_limit_study(spec, p, config.T_VALUES)
    t_file = write_curve_csv(out_dir / f"{name}_t_limit.csv", t_curve.variable, t_curve.x, t_curve.values)

    report = characterize(spec, p, fidelity_map=fidelity_map)
    report_file = write_json(out_dir / f"{name}_report.json", CharacterizationModel(**asdict(report)))
    return {
        "map_file": str(map_file),
        "t_limit_file": str(t_file),
        "report_file": str(report_file),
        "T": config.T,
        "xi": config.XI,
        "alpha": config.ALPHA,
        "entangled_fidelity": report.entangled_fidelity,
        **fidelity_map.summary(),
    }


def cmd_entangled_fidelity(config: RunConfig) -> dict:
    cutoff = config.ENTANGLED_CUTOFF
    spec = config.cat_spec(cutoff)
    p = config.gate_params(cutoff)
    value = entangled_fidelity(spec, p)
    f_good, f_bad = branch_fidelities(spec, p)
    summary = {
        "fidelity": value,
        "fidelity_good": f_good,
        "fidelity_bad": f_bad,
        "T": config.T,
        "xi": config.XI,
        "alpha": config.ALPHA,
        "cutoff": cutoff,
    }
    write_json(config.output_path / "entangled_fidelity.json", summary)
    return summary


def cmd_cat_adequacy(config: RunConfig) -> dict:
    curve = cat_adequacy(config.ALPHA_VALUES)
    closed = np.array([adequacy_closed_form(a) for a in curve.x])
    curve_file = write_curve_csv(config.output_path / "cat_adequacy.csv", curve.variable, curve.x, curve.values)
    summary = {
        "curve_file": str(curve_file),
        "alpha": config.ALPHA,
        "adequacy": adequacy(config.ALPHA) if config.ALPHA > 0 else None,
        "closed_form": adequacy_closed_form(config.ALPHA),
        "printed_form": printed_adequacy(config.ALPHA),
        "max_deviation_from_closed_form": float(np.max(np.abs(curve.values - closed))),
        "matches": "1/2 (1 + tanh 2 alpha^2)",
    }
    write_json(config.output_path / "cat_adequacy.json", summary)
    return summary


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def _write_fig2(config: RunConfig, artifacts: dict) -> list[str]:
    out_dir = config.output_path
    files = []
    for stage, rec in artifacts["records"].items():
        path = write_histograms_csv(out_dir / f"fig2_{stage}_histograms.csv", histogram(rec, config.BINS))
        files.append(str(path))

    x = np.linspace(-5.0, 5.0, PREDICTION_POINTS)

    def rows():
        for stage, rho in artifacts["predictions"].items():
            for phase in config.phase_list:
                density = quad_density(rho, phase)(x)
                for point, value in zip(x, density):
                    yield stage, float(phase), float(point), float(value)

    files.append(str(write_rows(out_dir / "fig2_prediction.csv", ("stage", "phase_rad", "x", "density"), rows())))
    return files


def cmd_figures(config: RunConfig, preset: str) -> dict:
    """CSV data behind the figures; no plotting."""
    if preset not in FIGURE_PRESETS:
        raise ConfigError(f"unknown figure preset {preset!r}; choose from {', '.join(FIGURE_PRESETS)}")
    if preset == "fig2-pipeline":
        report, artifacts = _run_pipeline(config)
        return {"files": _write_fig2(config, artifacts), "mean_chi2": report.comparison.mean_chi2}
    if preset.startswith("fig3"):
        return cmd_sweep_bloch(config, name=preset)
    if preset == "fig4":
        cutoff = config.ENTANGLED_CUTOFF
        spec, p = config.cat_spec(cutoff), config.gate_params(cutoff)
        curve = xi_sweep(spec, p, config.XI_VALUES)
        path = write_curve_csv(config.output_path / "fig4.csv", curve.variable, curve.x, curve.values)
        return {"curve_file": str(path), "fidelity_at_xi": float(xi_sweep(spec, p, [config.XI]).values[0])}
    curve = cat_adequacy(config.ALPHA_VALUES)
    path = write_curve_csv(config.output_path / "fig5.csv", curve.variable, curve.x, curve.values)
    return {"curve_file": str(path), "adequacy_at_alpha": adequacy(config.ALPHA)}
