import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from spacetime_refraction.errors import (
    DegenerateDispersion,
    EvanescentRegime,
    TotalInternalReflection,
)
from spacetime_refraction.model import GaussianSpectrum, StepPotential
from spacetime_refraction.rays import (
    ALPHA_QUANTUM,
    DispersiveMedium,
    group_velocity,
    n_quantum,
    predict_worldlines,
    quantum_medium,
    snell_spacetime,
    snell_spatial,
)

# fig2 central component; reference values from an independent mpmath evaluation
K0 = 2.35
OMEGA = K0**2 / 2
N2 = 0.307592176485126815
KPRIME = 0.722841614740048015


class TestQuantumIndex:
    def test_free_space(self):
        assert n_quantum(0.0, 3.7) == 1.0

    def test_band_edge(self):
        assert n_quantum(2.5, 2.5) == 0.0

    def test_fig2_value(self):
        n = n_quantum(2.5, OMEGA)
        assert n == pytest.approx(N2, rel=1e-14)
        # k' = n k0 = sqrt(k0^2 - 2 V0)
        assert n * K0 == pytest.approx(math.sqrt(K0**2 - 5.0), rel=1e-14)

    def test_evanescent(self):
        with pytest.raises(EvanescentRegime):
            n_quantum(2.5, 2.0)

    def test_rejects_nonpositive_omega(self):
        with pytest.raises(ValueError):
            n_quantum(0.0, 0.0)


class TestSpatialSnell:
    def test_identical_media(self):
        assert snell_spatial(1.3, 1.3, 0.3) == pytest.approx(0.3, abs=1e-15)

    def test_dense_to_thin(self):
        assert math.degrees(snell_spatial(1.5, 1.0, math.radians(30))) == pytest.approx(
            48.5903778907291407, abs=1e-10
        )

    def test_total_internal_reflection(self):
        with pytest.raises(TotalInternalReflection):
            snell_spatial(1.0, 0.5, math.radians(45))

    @given(
        n1=st.floats(0.1, 5),
        n2=st.floats(0.1, 5),
        theta=st.floats(0, math.pi / 2 - 1e-3),
    )
    def test_round_trip(self, n1, n2, theta):
        assume(n1 * math.sin(theta) / n2 < 0.999)
        back = snell_spatial(n2, n1, snell_spatial(n1, n2, theta))
        assert back == pytest.approx(theta, abs=1e-12)


class TestGroupVelocity:
    def test_vacuum(self):
        assert group_velocity(DispersiveMedium(1.0), 1.0, 1.0, 1.0) == 1.0

    def test_nondispersive(self):
        assert group_velocity(DispersiveMedium(1.5), 1.0, 1.0, 1.0) == pytest.approx(2 / 3)

    def test_quantum_equals_kprime(self):
        medium = DispersiveMedium(N2, 2.5 / (2 * OMEGA**2 * N2))
        vg = group_velocity(medium, OMEGA, ALPHA_QUANTUM, K0)
        assert vg == pytest.approx(KPRIME, rel=1e-12)
        # independent oracle: centred finite difference of omega(k) = k^2/2 at k'
        h = 1e-5
        fd = ((KPRIME + h) ** 2 / 2 - (KPRIME - h) ** 2 / 2) / (2 * h)
        assert vg == pytest.approx(fd, rel=1e-9)

    def test_degenerate(self):
        # 1 + alpha (omega/n) dn/domega = 0
        with pytest.raises(DegenerateDispersion):
            group_velocity(DispersiveMedium(1.0, -0.5), 1.0, 2.0, 1.0)

    @given(v=st.floats(-10, 10), omega=st.floats(0.05, 50))
    def test_quantum_reduction_identity(self, v, omega):
        assume(v < omega * (1 - 1e-6))
        m = quantum_medium(v, omega)
        chain = 1 + 2 * (omega / m.n) * m.dn_domega
        assert chain == pytest.approx(1 / m.n**2, rel=1e-10)
        v0 = math.sqrt(2 * omega)
        assert group_velocity(m, omega, ALPHA_QUANTUM, v0) == pytest.approx(v0 * m.n, rel=1e-10)


class TestSpacetimeSnell:
    def test_identical_media(self):
        m = quantum_medium(1.0, 3.0)
        assert snell_spacetime(m, m, 3.0, 2.0, 0.7) == pytest.approx(0.7, abs=1e-15)

    def test_nondispersive_bends_toward_time_axis(self):
        theta2 = snell_spacetime(DispersiveMedium(1.0), DispersiveMedium(1.5), 1.0, 1.0, math.pi / 4)
        assert math.degrees(theta2) == pytest.approx(56.3099324740202131, abs=1e-10)
        # n2 tan(t1) = n1 tan(t2)
        assert 1.5 * math.tan(math.pi / 4) == pytest.approx(math.tan(theta2), rel=1e-12)

    def test_quantum_fig2(self):
        m1 = quantum_medium(0.0, OMEGA)
        m2 = quantum_medium(2.5, OMEGA)
        theta2 = snell_spacetime(m1, m2, OMEGA, ALPHA_QUANTUM, math.pi / 4)
        assert math.degrees(theta2) == pytest.approx(72.9025120927732454, abs=1e-9)
        assert math.tan(theta2) == pytest.approx(K0 / KPRIME, rel=1e-12)

    def test_zero_angle_tie_break(self):
        m1, m2 = quantum_medium(0.0, OMEGA), quantum_medium(2.5, OMEGA)
        assert snell_spacetime(m1, m2, OMEGA, 2.0, 0.0) == 0.0

    def test_degenerate_propagates(self):
        with pytest.raises(DegenerateDispersion):
            snell_spacetime(DispersiveMedium(1.0), DispersiveMedium(1.0, -0.5), 1.0, 2.0, 0.5)

    @given(
        n1=st.floats(0.2, 3),
        n2=st.floats(0.2, 3),
        d1=st.floats(-0.2, 0.5),
        d2=st.floats(-0.2, 0.5),
        omega=st.floats(0.5, 2),
        alpha=st.sampled_from([1.0, 2.0]),
        theta=st.floats(0.01, 1.5),
    )
    def test_group_velocity_form(self, n1, n2, d1, d2, omega, alpha, theta):
        m1, m2 = DispersiveMedium(n1, d1), DispersiveMedium(n2, d2)
        try:
            vg1 = group_velocity(m1, omega, alpha, 1.0)
            vg2 = group_velocity(m2, omega, alpha, 1.0)
        except DegenerateDispersion:
            return
        assume(vg1 > 0 and vg2 > 0 and vg1 < 1e6 and vg2 < 1e6)
        theta2 = snell_spacetime(m1, m2, omega, alpha, theta)
        lhs = vg1 * math.tan(theta)
        assert vg2 * math.tan(theta2) == pytest.approx(lhs, rel=1e-10)

    @given(
        n1=st.floats(0.1, 3),
        n2=st.floats(0.1, 3),
        theta=st.floats(0.01, 1.5),
    )
    def test_special_cases(self, n1, n2, theta):
        flat = snell_spacetime(DispersiveMedium(n1), DispersiveMedium(n2), 1.0, 1.0, theta)
        assert n1 * math.tan(flat) == pytest.approx(n2 * math.tan(theta), rel=1e-12)
        # quantum media with the same indices at omega = 1
        omega = 1.0
        q1 = quantum_medium(omega * (1 - n1**2), omega)
        q2 = quantum_medium(omega * (1 - n2**2), omega)
        quant = snell_spacetime(q1, q2, omega, ALPHA_QUANTUM, theta)
        assert n2 * math.tan(quant) == pytest.approx(n1 * math.tan(theta), rel=1e-12)

    def test_opposite_bending(self):
        omega, n2 = 1.0, 0.5
        q1, q2 = quantum_medium(0.0, omega), quantum_medium(omega * (1 - n2**2), omega)
        theta1 = math.pi / 4
        quant = snell_spacetime(q1, q2, omega, ALPHA_QUANTUM, theta1)
        flat = snell_spacetime(DispersiveMedium(1.0), DispersiveMedium(n2), omega, 1.0, theta1)
        assert quant > theta1
        assert flat < theta1


class TestWorldlines:
    def test_fig2_fan(self):
        fan = predict_worldlines(GaussianSpectrum(2.35, 0.1, -30), StepPotential(0, 2.5))
        assert not fan.total_reflection
        assert fan.arrival_time == pytest.approx(12.7659574468085106, rel=1e-14)
        assert [w.label for w in fan] == ["incident", "reflected", "transmitted"]
        inc, ref, tra = fan
        assert inc.segments[0].slope == 1.0
        assert inc.segments[0].end == (0.0, 30.0)
        assert ref.segments[0].slope == -1.0
        assert 1 / tra.segments[0].velocity_ratio == pytest.approx(K0 / KPRIME)
        assert K0 / tra.segments[0].slope == pytest.approx(KPRIME, rel=1e-14)
        # the three worldlines share the arrival event
        assert ref.segments[0].start == tra.segments[0].start == inc.segments[0].end
        assert ref.weight + tra.weight == pytest.approx(1.0)

    def test_no_step(self):
        fan = predict_worldlines(GaussianSpectrum(2.0, 0.1, -10), StepPotential(1.0, 1.0))
        inc, ref, tra = fan
        assert tra.segments[0].slope == inc.segments[0].slope
        assert ref.weight == 0.0

    def test_total_reflection(self):
        fan = predict_worldlines(GaussianSpectrum(2.0, 0.1, -30), StepPotential(0, 2.5))
        assert fan.total_reflection
        assert [w.label for w in fan] == ["incident", "reflected"]
