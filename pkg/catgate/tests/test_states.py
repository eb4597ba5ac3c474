"""Tests for the state factory."""

import numpy as np
import pytest

from catgate.exceptions import ConfigError
from catgate.fock.core import (
    DensityOperator,
    annihilation,
    fidelity_pure,
    mean_photon_number,
    overlap,
    rotate,
)
from catgate.fock.wigner import grid_axis, wigner
from catgate.states.factory import (
    BlochPoint,
    CatQubitSpec,
    SqueezerModel,
    bell_cat,
    bit_flip_target,
    cat,
    coherent,
    gaussian_model_state,
    omega_target,
    parity_cat,
    required_cutoff,
    squeezed_photon,
    squeezed_vacuum,
    thermal,
)


def _x_variance(rho: DensityOperator) -> float:
    a = annihilation(rho.cutoff).matrix
    x = (a + a.T) / np.sqrt(2.0)
    mean = np.real(np.trace(rho.matrix @ x))
    return float(np.real(np.trace(rho.matrix @ x @ x)) - mean ** 2)


def _p_variance(rho: DensityOperator) -> float:
    a = annihilation(rho.cutoff).matrix
    p = (a - a.T) / (1j * np.sqrt(2.0))
    mean = np.real(np.trace(rho.matrix @ p))
    return float(np.real(np.trace(rho.matrix @ p @ p)) - mean ** 2)


# ---------------------------------------------------------------------------
# Coherent states and cats
# ---------------------------------------------------------------------------

class TestCoherent:
    def test_mean_photon_number(self):
        rho = DensityOperator.from_ket(coherent(0.92, 20))
        assert mean_photon_number(rho) == pytest.approx(0.92 ** 2, abs=1e-8)

    def test_negative_amplitude_flips_odd_levels(self):
        plus = coherent(0.92, 20).amplitudes
        minus = coherent(-0.92, 20).amplitudes
        assert np.allclose(minus[0::2], plus[0::2])
        assert np.allclose(minus[1::2], -plus[1::2])

    def test_overlap_of_opposite_amplitudes(self):
        value = overlap(coherent(0.92, 20), coherent(-0.92, 20))
        assert value.real == pytest.approx(np.exp(-2 * 0.92 ** 2), abs=1e-10)


class TestCatQubit:
    def test_zero_alpha_rejected(self):
        with pytest.raises(ConfigError, match="zero norm"):
            CatQubitSpec(alpha=0.0)

    def test_normalization_constants(self, reference_spec):
        a2 = reference_spec.alpha ** 2
        assert reference_spec.n_plus == pytest.approx(1 / np.sqrt(2 * (1 + np.exp(-2 * a2))))
        assert reference_spec.c("+", "-") == pytest.approx(np.tanh(a2))

    def test_parity_is_exact(self, reference_spec):
        plus = parity_cat(reference_spec, "+").amplitudes
        minus = parity_cat(reference_spec, "-").amplitudes
        assert np.all(plus[1::2] == 0)
        assert np.all(minus[0::2] == 0)

    def test_poles_are_coherent_states(self, reference_spec):
        north = cat(reference_spec, BlochPoint(0.0, 0.0))
        south = cat(reference_spec, BlochPoint(np.pi, 0.0))
        assert abs(overlap(north, coherent(0.92, 20))) == pytest.approx(1.0)
        assert abs(overlap(south, coherent(-0.92, 20))) == pytest.approx(1.0)

    def test_equator_is_parity_cat(self, reference_spec):
        even = cat(reference_spec, BlochPoint(np.pi / 2, 0.0))
        odd = cat(reference_spec, BlochPoint(np.pi / 2, np.pi))
        assert abs(overlap(even, parity_cat(reference_spec, "+"))) == pytest.approx(1.0)
        assert abs(overlap(odd, parity_cat(reference_spec, "-"))) == pytest.approx(1.0)

    def test_theta_out_of_range(self):
        with pytest.raises(ConfigError):
            BlochPoint(4.0, 0.0)

    def test_flipped_negates_theta(self):
        assert BlochPoint(0.3, 1.0).flipped() == BlochPoint(-0.3, 1.0)

    def test_required_cutoff_grows_with_alpha(self):
        assert required_cutoff(0.92) == 20
        assert required_cutoff(3.0) > 20


# ---------------------------------------------------------------------------
# Gaussian states
# ---------------------------------------------------------------------------

class TestSqueezed:
    def test_squeezed_vacuum_variances(self):
        rho = DensityOperator.from_ket(squeezed_vacuum(0.5, 20))
        assert _x_variance(rho) == pytest.approx(0.25, abs=1e-6)
        assert _p_variance(rho) == pytest.approx(1.0, abs=1e-6)

    def test_squeezed_photon_variance(self):
        rho = DensityOperator.from_ket(squeezed_photon(0.5, 24))
        assert _x_variance(rho) == pytest.approx(0.75, abs=1e-6)

    def test_squeezed_photon_is_odd(self):
        amps = squeezed_photon(0.5, 24).amplitudes
        assert np.allclose(amps[0::2], 0.0, atol=1e-12)

    def test_invalid_squeezing(self):
        with pytest.raises(ConfigError):
            squeezed_vacuum(1.5, 20)

    @pytest.mark.parametrize("s", [0.5, 0.75, 1.0])
    def test_quarter_turn_resembles_even_cat(self, s):
        aligned = DensityOperator.from_ket(rotate(squeezed_vacuum(s, 20), -np.pi / 2))
        best = max(
            fidelity_pure(aligned, parity_cat(CatQubitSpec(alpha, 20), "+"))
            for alpha in np.linspace(0.05, 1.5, 146)
        )
        assert best > 0.99


class TestSqueezerModel:
    def test_variances(self, reference_squeezer):
        v_x, v_p = reference_squeezer.variances
        assert v_x == pytest.approx((0.5 * 1.05 + 0.05) / 2)
        assert v_p == pytest.approx((1.05 / 0.5 + 0.05) / 2)

    def test_from_variances_inverts(self, reference_squeezer):
        model = SqueezerModel.from_variances(*reference_squeezer.variances)
        assert model.s == pytest.approx(0.5)
        assert model.h == pytest.approx(1.05)

    def test_from_gamma(self):
        model = SqueezerModel.from_gamma(0.5, 0.4)
        r = -0.5 * np.log(0.5)
        assert model.h == pytest.approx(np.cosh(0.4 * r))

    def test_gain_below_one_rejected(self):
        with pytest.raises(ConfigError):
            SqueezerModel(0.5, 0.9)

    def test_model_state_variances(self, reference_squeezer):
        rho = gaussian_model_state(reference_squeezer, 20)
        v_x, v_p = reference_squeezer.variances
        assert _x_variance(rho) == pytest.approx(v_x, abs=1e-6)
        assert _p_variance(rho) == pytest.approx(v_p, abs=1e-6)
        assert rho.trace == pytest.approx(1.0)

    def test_model_state_wigner_is_gaussian(self):
        model = SqueezerModel(0.5, 1.1)
        x = grid_axis(3.0, 31)
        grid = wigner(gaussian_model_state(model, 24), x, x)
        v_x, v_p = model.variances
        X, P = np.meshgrid(x, x, indexing="ij")
        closed = np.exp(-X ** 2 / (2.0 * v_x) - P ** 2 / (2.0 * v_p)) / (2.0 * np.pi * np.sqrt(v_x * v_p))
        assert np.allclose(grid.values, closed, rtol=0.0, atol=1e-6)

    def test_unit_gain_is_squeezed_vacuum(self):
        rho = gaussian_model_state(SqueezerModel(0.5, 1.0), 20)
        assert fidelity_pure(rho, squeezed_vacuum(0.5, 20)) == pytest.approx(1.0, abs=1e-9)

    def test_thermal_mean(self):
        assert mean_photon_number(thermal(0.3, 20)) == pytest.approx(0.3, abs=1e-9)


# ---------------------------------------------------------------------------
# Entangled input pairs
# ---------------------------------------------------------------------------

class TestBellCats:
    def test_general_reduces_to_named_pairs(self, reference_spec):
        phi_plus = bell_cat(reference_spec, "phi_plus")
        psi_plus = bell_cat(reference_spec, "psi_plus")
        assert abs(overlap(phi_plus, bell_cat(reference_spec, "general", mu="+"))) == pytest.approx(1.0)
        assert abs(overlap(psi_plus, bell_cat(reference_spec, "general", mu="-"))) == pytest.approx(1.0)
        assert abs(overlap(phi_plus, psi_plus)) == pytest.approx(0.0, abs=1e-12)

    def test_bit_flip_of_phi_plus_is_psi_plus(self, reference_spec):
        phi_plus = bell_cat(reference_spec, "phi_plus")
        flipped = bit_flip_target(reference_spec, phi_plus)
        assert abs(overlap(flipped, bell_cat(reference_spec, "psi_plus"))) == pytest.approx(1.0)

    def test_omega_target_is_normalized(self, reference_spec):
        omega = omega_target(reference_spec, bell_cat(reference_spec, "phi_plus"))
        assert omega.norm_squared == pytest.approx(1.0)
        assert omega.modes == 2

    def test_unknown_kind(self, reference_spec):
        with pytest.raises(ConfigError):
            bell_cat(reference_spec, "ghz")
