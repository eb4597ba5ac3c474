"""Tests for homodyne simulation, maximum-likelihood tomography and model fitting."""

from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import trapezoid

from catgate.channels.gate import GateParams, gate
from catgate.exceptions import ConfigError, FlatObjectiveError, TruncationError
from catgate.fock.core import DensityOperator, fidelity_pure, mean_photon_number
from catgate.states.factory import (
    SqueezerModel,
    coherent,
    gaussian_model_state,
    squeezed_photon,
    vacuum,
)
from catgate.tomography.fitting import (
    fit_squeezer,
    fit_xi,
    fit_xi_from_state,
    gaussian_bin_probabilities,
    predict_and_compare,
)
from catgate.tomography.homodyne import (
    Histogram,
    QuadratureRecord,
    bin_edges,
    binned_probabilities,
    fold_phases,
    histogram,
    quad_density,
    sample,
    wavefunctions,
)
from catgate.tomography.mle import mle_reconstruct, reconstruct

PHASES = list(np.linspace(0.0, np.pi, 12, endpoint=False))


def _pure(ket):
    return DensityOperator.from_ket(ket)


# ---------------------------------------------------------------------------
# Quadrature distributions
# ---------------------------------------------------------------------------

class TestQuadratureDensity:
    def test_wavefunctions_are_orthonormal(self):
        x = np.linspace(-12.0, 12.0, 4001)
        psi = wavefunctions(x, 10)
        gram = trapezoid(psi[:, None, :] * psi[None, :, :], x, axis=2)
        assert np.allclose(gram, np.eye(11), atol=1e-8)

    @pytest.mark.parametrize("phi", [0.0, 0.4, np.pi / 2])
    def test_vacuum_is_gaussian_at_every_phase(self, phi):
        x = np.linspace(-3.0, 3.0, 13)
        density = quad_density(_pure(vacuum(10)), phi)(x)
        assert np.allclose(density, np.exp(-x ** 2) / np.sqrt(np.pi))

    def test_squeezed_photon_density_normalized(self):
        x = np.linspace(-8.0, 8.0, 3201)
        density = quad_density(_pure(squeezed_photon(0.5, 24)), 0.0)(x)
        assert trapezoid(density, x) == pytest.approx(1.0, abs=1e-8)
        assert density[1600] == pytest.approx(0.0, abs=1e-12)

    def test_heavy_tail_rejected(self):
        mat = np.zeros((5, 5))
        mat[4, 4] = 1.0
        with pytest.raises(TruncationError):
            quad_density(DensityOperator(4, mat), 0.0)

    def test_binned_probabilities_match_model(self, reference_squeezer):
        edges = bin_edges(64, 5.0)
        rho = gaussian_model_state(reference_squeezer, 20)
        numeric = binned_probabilities(rho, PHASES[:4], edges)
        closed = gaussian_bin_probabilities(reference_squeezer, PHASES[:4], edges)
        assert np.allclose(numeric, closed, atol=1e-6)
        assert np.allclose(numeric.sum(axis=1), 1.0)


# ---------------------------------------------------------------------------
# Records and sampling
# ---------------------------------------------------------------------------

class TestRecords:
    def test_fold_phases(self):
        phases, values = fold_phases(np.array([3 * np.pi / 2, 2 * np.pi, np.pi]), np.array([1.0, 1.0, 1.0]))
        assert np.allclose(phases, [np.pi / 2, 0.0, 0.0])
        assert np.allclose(values, [-1.0, 1.0, -1.0])

    def test_length_mismatch(self):
        with pytest.raises(ConfigError):
            QuadratureRecord(np.zeros(3), np.zeros(2))

    def test_histogram_counts_every_sample(self):
        rec = QuadratureRecord(np.zeros(5), np.array([-6.0, -1.0, 0.0, 1.0, 7.0]))
        (hist,) = histogram(rec, bins=10, half_width=5.0)
        assert hist.counts.sum() == 3
        assert hist.overflow == 2
        assert hist.total == 5


class TestSampling:
    def test_same_seed_same_record(self):
        rho = _pure(coherent(0.92, 20))
        first = sample(rho, PHASES[:3], 500, seed=7)
        second = sample(rho, PHASES[:3], 500, seed=7)
        assert np.array_equal(first.values, second.values)
        assert first.size == 1500

    def test_different_seed_different_record(self):
        rho = _pure(coherent(0.92, 20))
        assert not np.array_equal(sample(rho, [0.0], 100, seed=1).values, sample(rho, [0.0], 100, seed=2).values)

    def test_vacuum_statistics(self):
        rec = sample(_pure(vacuum(10)), [0.0, np.pi / 2], 20000, seed=3)
        assert np.mean(rec.values) == pytest.approx(0.0, abs=0.02)
        assert np.var(rec.values) == pytest.approx(0.5, abs=0.02)

    def test_coherent_mean_follows_phase(self):
        rec = sample(_pure(coherent(0.92, 20)), [0.0, np.pi / 2], 20000, seed=4)
        assert np.mean(rec.at_phase(0.0)) == pytest.approx(np.sqrt(2.0) * 0.92, abs=0.02)
        assert np.mean(rec.at_phase(np.pi / 2)) == pytest.approx(0.0, abs=0.02)

    def test_zero_samples(self):
        rec = sample(_pure(vacuum(10)), [0.0], 0)
        assert rec.size == 0

    def test_no_phases(self):
        with pytest.raises(ConfigError):
            sample(_pure(vacuum(10)), [], 10)


# ---------------------------------------------------------------------------
# Maximum-likelihood reconstruction
# ---------------------------------------------------------------------------

class TestReconstruction:
    def test_recovers_coherent_state(self):
        truth = coherent(0.92, 20)
        rec = sample(_pure(truth), PHASES[:6], 4000, seed=11)
        result = reconstruct(rec, 12, iterations=500, bins=64)
        assert fidelity_pure(result.state, coherent(0.92, 12)) > 0.97
        assert mean_photon_number(result.state) == pytest.approx(0.92 ** 2, abs=0.08)

    def test_recovers_squeezed_photon(self):
        rec = sample(_pure(squeezed_photon(0.5, 24)), PHASES, 10000, seed=13)
        rho = mle_reconstruct(rec, 14)
        assert fidelity_pure(rho.padded(24), squeezed_photon(0.5, 24)) > 0.99

    def test_log_likelihood_never_decreases(self):
        rec = sample(_pure(coherent(0.5, 20)), PHASES[:4], 1000, seed=12)
        result = reconstruct(rec, 8, iterations=50, bins=32)
        assert np.all(np.diff(result.log_likelihood) >= 0.0)
        assert result.state.trace == pytest.approx(1.0)

    def test_empty_record(self):
        with pytest.raises(ConfigError):
            reconstruct(QuadratureRecord(np.zeros(0), np.zeros(0)), 8)

    def test_single_phase_is_degenerate(self):
        rec = sample(_pure(vacuum(10)), [0.0], 100, seed=1)
        with pytest.raises(ConfigError, match="degenerate"):
            reconstruct(rec, 8)


# ---------------------------------------------------------------------------
# Fitting and prediction
# ---------------------------------------------------------------------------

@pytest.fixture
def source_record(reference_squeezer):
    return sample(gaussian_model_state(reference_squeezer, 20), PHASES, 10000, seed=21)


@pytest.fixture
def gated_record(reference_squeezer):
    rho1 = gate(gaussian_model_state(reference_squeezer, 20), GateParams(T=0.9, xi=0.83))
    return sample(rho1, PHASES, 10000, seed=22)


class TestFitSqueezer:
    def test_recovers_s_and_h(self, source_record):
        model = fit_squeezer(source_record)
        assert model.s == pytest.approx(0.5, abs=0.02)
        assert model.h == pytest.approx(1.05, abs=0.03)

    def test_fixed_gain(self, source_record):
        model = fit_squeezer(source_record, fix_h=1.05)
        assert model.h == 1.05
        assert model.s == pytest.approx(0.5, abs=0.02)

    def test_needs_two_phases(self, reference_squeezer):
        rec = sample(gaussian_model_state(reference_squeezer, 20), [0.0], 100, seed=1)
        with pytest.raises(ConfigError):
            fit_squeezer(rec)


class TestFitXi:
    @pytest.mark.parametrize("xi", [0.0, 0.5, 0.83, 1.0])
    def test_recovers_modal_purity(self, reference_squeezer, xi):
        rho1 = gate(gaussian_model_state(reference_squeezer, 20), GateParams(T=0.9, xi=xi))
        rec = sample(rho1, PHASES, 10000, seed=22)
        assert fit_xi(rec, reference_squeezer, 0.9, cutoff=20) == pytest.approx(xi, abs=0.03)

    def test_vacuum_input_is_flat(self, gated_record):
        with pytest.raises(FlatObjectiveError):
            fit_xi_from_state(gated_record, _pure(vacuum(20)), 0.9)


class TestPredictAndCompare:
    def test_true_parameters_fit_the_data(self, gated_record, reference_squeezer):
        rho0 = gaussian_model_state(reference_squeezer, 20)
        report = predict_and_compare(rho0, GateParams(T=0.9, xi=0.83), gated_record)
        assert 0.7 <= report.mean_chi2 <= 1.3
        assert len(report.chi2_per_phase) == 12
        assert min(report.overlap_per_phase) > 0.95

    def test_wrong_purity_is_detected(self, gated_record, reference_squeezer):
        rho0 = gaussian_model_state(reference_squeezer, 20)
        p = GateParams(T=0.9, xi=0.83)
        right = predict_and_compare(rho0, p, gated_record)
        wrong = predict_and_compare(rho0, replace(p, xi=0.0), gated_record)
        assert wrong.mean_chi2 > 3.0 * right.mean_chi2

    def test_binning_mismatch(self, reference_squeezer):
        counts = np.full(10, 100)
        hists = [
            Histogram(0.0, bin_edges(10, 5.0), counts),
            Histogram(0.5, bin_edges(10, 4.0), counts),
        ]
        rho0 = gaussian_model_state(reference_squeezer, 20)
        with pytest.raises(ConfigError, match="binning mismatch"):
            predict_and_compare(rho0, GateParams(T=0.9), hists)
