import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spacetime_refraction.analysis import (
    broadening,
    check_spacetime_snell,
    fit_worldline,
    fringe_period,
    spectral_split,
    stable_from,
    width_ratio,
)
from spacetime_refraction.dynamics import ZeemanStep
from spacetime_refraction.errors import EmptyRegion, EvanescentRegime, IllConditionedFit
from spacetime_refraction.model import DensityField, GaussianSpectrum, SpacetimeGrid, StepPotential
from spacetime_refraction.rays import DispersiveMedium, quantum_medium


def moving_gaussian(grid, x0, velocity, width=2.0):
    x, t = grid.x, grid.t
    centre = x0 + velocity * t[:, None]
    return np.exp(-((x[None, :] - centre) ** 2) / (2 * width**2))


class TestFitWorldline:
    grid = SpacetimeGrid(-50.0, 50.0, 1001, 0.0, 20.0, 101)

    def test_exact_line(self):
        d = DensityField(self.grid, moving_gaussian(self.grid, -30.0, 2.0))
        fit = fit_worldline(d, 2.0, region="all")
        assert fit.slope == pytest.approx(1.0, rel=1e-9)
        assert fit.velocity == pytest.approx(2.0, rel=1e-9)
        assert fit.angle == pytest.approx(math.pi / 4, rel=1e-9)
        assert fit.intercept == pytest.approx(30.0, rel=1e-8)
        assert fit.residual < 1e-8
        assert fit.n_rows == 101
        assert fit.label == "incident"

    def test_right_region_lobe(self):
        rho = moving_gaussian(self.grid, 10.0, 1.5)
        d = DensityField(self.grid, rho)
        fit = fit_worldline(d, 3.0, region="right")
        assert fit.slope == pytest.approx(2.0, rel=1e-6)
        assert fit.label == "transmitted"

    def test_window(self):
        d = DensityField(self.grid, moving_gaussian(self.grid, -30.0, 2.0))
        fit = fit_worldline(d, 2.0, region="all", window=(5.0, 10.0))
        assert fit.window == (5.0, 10.0)
        assert fit.n_rows == 26
        with pytest.raises(ValueError):
            fit_worldline(d, 2.0, region="all", window=(5.0, 30.0))

    def test_stationary_lobe_is_ill_conditioned(self):
        d = DensityField(self.grid, moving_gaussian(self.grid, 0.0, 0.0))
        with pytest.raises(IllConditionedFit):
            fit_worldline(d, 1.0, region="all")

    def test_too_few_rows(self):
        grid = SpacetimeGrid(-50.0, 50.0, 101, 0.0, 1.0, 5)
        d = DensityField(grid, moving_gaussian(grid, -20.0, 5.0))
        with pytest.raises(IllConditionedFit):
            fit_worldline(d, 1.0, region="all")

    def test_empty_lobe(self):
        d = DensityField(self.grid, moving_gaussian(self.grid, -30.0, 0.5))
        with pytest.raises(EmptyRegion):
            fit_worldline(d, 1.0, region="right", window=(0.0, 20.0))

    def test_bad_direction(self):
        d = DensityField(self.grid, moving_gaussian(self.grid, -30.0, 2.0))
        with pytest.raises(ValueError):
            fit_worldline(d, 1.0, direction="sideways")


def test_stable_from():
    norms = np.array([1.0, 0.9, 0.7, 0.5, 0.4, 0.39999, 0.39999, 0.39999])
    assert stable_from(norms) == 5
    assert stable_from(np.ones(5)) == 0


class TestSnellCheck:
    def test_perfect_agreement(self):
        m1, m2 = quantum_medium(0.0, 2.76125), quantum_medium(2.5, 2.76125)
        theta2 = math.atan(2.35 / 0.722841614740048015)
        assert check_spacetime_snell(math.pi / 4, theta2, m1, m2) == pytest.approx(0, abs=1e-12)

    def test_mismatch(self):
        m = DispersiveMedium(1.0)
        assert check_spacetime_snell(math.atan(1.0), math.atan(1.1), m, m) == pytest.approx(0.1)


class TestBroadening:
    def test_fig3(self):
        b = broadening(GaussianSpectrum(2.35, 0.5, -30.0), 30.0)
        assert b.fresnel_f == pytest.approx(0.0249342744177302693, rel=1e-12)
        assert b.regime == "dispersive"

    def test_fig2(self):
        b = broadening(GaussianSpectrum(2.35, 0.1, -30.0), 30.0)
        assert b.fresnel_f == pytest.approx(0.623356860443256732, rel=1e-12)
        assert b.wavelength == pytest.approx(2.67369587539556871, rel=1e-14)
        assert b.t_broad == pytest.approx(50.0)
        assert b.t_prop == pytest.approx(30 / 2.35)

    def test_ray_like(self):
        assert broadening(GaussianSpectrum(10.0, 0.05, -30.0), 30.0).regime == "ray-like"

    @given(
        dk1=st.floats(0.01, 1.0),
        dk2=st.floats(0.01, 1.0),
        k0=st.floats(5.0, 10.0),
        length=st.floats(1.0, 100.0),
    )
    def test_monotone_in_width(self, dk1, dk2, k0, length):
        lo, hi = sorted((dk1, dk2))
        f_narrow_spectrum = broadening(GaussianSpectrum(k0, lo, -30.0), length).fresnel_f
        f_wide_spectrum = broadening(GaussianSpectrum(k0, hi, -30.0), length).fresnel_f
        assert f_narrow_spectrum >= f_wide_spectrum

    @given(l1=st.floats(1.0, 100.0), l2=st.floats(1.0, 100.0))
    def test_monotone_in_distance(self, l1, l2):
        p = GaussianSpectrum(2.35, 0.1, -30.0)
        lo, hi = sorted((l1, l2))
        assert broadening(p, lo).fresnel_f >= broadening(p, hi).fresnel_f

    def test_invalid_distance(self):
        with pytest.raises(ValueError):
            broadening(GaussianSpectrum(2.35, 0.1, -30.0), 0.0)


class TestWidthRatio:
    def test_fig4(self):
        up, down = width_ratio(3.5, ZeemanStep(2.5))
        assert up == pytest.approx(1.18666055184543926, rel=1e-14)
        assert down == pytest.approx(0.769309258162072004, rel=1e-14)

    def test_no_field(self):
        assert width_ratio(2.0, ZeemanStep(0.0)) == (1.0, 1.0)

    def test_evanescent(self):
        with pytest.raises(EvanescentRegime):
            width_ratio(2.0, ZeemanStep(2.5))

    @given(k=st.floats(0.1, 20.0), mu_b=st.floats(0.0, 50.0))
    def test_identity(self, k, mu_b):
        if k * k <= 2 * mu_b * (1 + 1e-9):
            return
        up, down = width_ratio(k, ZeemanStep(mu_b))
        assert up**2 - down**2 == pytest.approx(4 * mu_b / k**2, rel=1e-9, abs=1e-12)
        assert up >= 1 >= down


@pytest.mark.parametrize("period", [1.3369, 2.0, 0.9])
def test_fringe_period_synthetic(period):
    x = np.linspace(-60, 0, 1201)
    envelope = np.exp(-((x + 20) ** 2) / (2 * 8.0**2))
    rho = envelope * (1 + 0.5 * np.cos(2 * math.pi * x / period))
    assert fringe_period(rho, x, smooth_length=2.0) == pytest.approx(period, rel=0.01)


def test_fringe_period_no_signal():
    x = np.linspace(-10, 0, 101)
    with pytest.raises(EmptyRegion):
        fringe_period(np.zeros_like(x), x)


def test_spectral_split():
    r, t, v = spectral_split(GaussianSpectrum(2.35, 0.1, -30.0), StepPotential(0, 2.5))
    assert r + t == pytest.approx(1.0, abs=1e-12)
    assert 0.25 <= r <= 0.45
    assert v > 0.722841614740048015
    r0, t0, v0 = spectral_split(GaussianSpectrum(2.35, 0.1, -30.0), StepPotential(0, 0))
    assert (r0, t0) == (0.0, pytest.approx(1.0))
    assert v0 == pytest.approx(2.35, rel=1e-12)
