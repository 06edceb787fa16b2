from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

import gravclock as gc
from conftest import UNIT_SCALES, random_specs


def make_spec(z1=0.0, z2=0.02, delta=0.01, theta=math.pi / 8, phi=0.0):
    """Desk-scale state, heights already in zeta units."""
    return gc.SuperpositionSpec(z1=z1, z2=z2, delta=delta, theta=theta,
                                phi=phi)


def test_local_rate():
    assert gc.local_rate(0.0) == 1.0
    assert gc.local_rate(0.25) == 1.25
    got = gc.local_rate(np.array([-0.1, 0.3]))
    assert np.allclose(got, [0.9, 1.3])
    with pytest.raises(gc.HorizonError):
        gc.local_rate(-1.0)


# ---------------------------------------------------------------------------
# rate excess of the superposition
# ---------------------------------------------------------------------------


def test_quantum_correction_spot_value():
    """Equal-weight-adjacent case with a clean closed answer.

    dz = 2 delta, theta = pi/8, phi = 0: the excess reduces to
    dz/4 / (e + sin(pi/4)) in zeta units.
    """
    got = gc.quantum_correction(make_spec(), UNIT_SCALES)
    want = 0.005 / (math.e + math.sin(math.pi / 4))
    assert got == pytest.approx(want, rel=1e-15)
    assert got == pytest.approx(1.4596883944555782e-3, rel=1e-13)


def test_quantum_correction_quadrature_matches_closed():
    for spec in random_specs(100):
        closed = gc.quantum_correction(spec, UNIT_SCALES)
        quad_v = gc.quantum_correction(spec, UNIT_SCALES,
                                       method="quadrature")
        assert quad_v == pytest.approx(closed, rel=1e-11)


def test_quantum_correction_gh_and_adaptive_agree():
    spec = make_spec(theta=0.6, phi=2.8)
    gh = gc.quantum_correction(spec, UNIT_SCALES, method="quadrature",
                               quad_spec=gc.QuadratureSpec(order=80))
    ad = gc.quantum_correction(
        spec, UNIT_SCALES, method="quadrature",
        quad_spec=gc.QuadratureSpec(method="adaptive"))
    assert ad == pytest.approx(gh, rel=1e-11)


def test_quantum_correction_antisymmetric_in_theta():
    for spec in random_specs(20):
        mirrored = gc.SuperpositionSpec(z1=spec.z1, z2=spec.z2,
                                        delta=spec.delta,
                                        theta=math.pi / 2 - spec.theta,
                                        phi=spec.phi)
        assert gc.quantum_correction(mirrored, UNIT_SCALES) == pytest.approx(
            -gc.quantum_correction(spec, UNIT_SCALES), rel=1e-12)


def test_quantum_correction_swap_invariant():
    for spec in random_specs(20):
        assert gc.quantum_correction(spec.swapped(), UNIT_SCALES) \
            == pytest.approx(gc.quantum_correction(spec, UNIT_SCALES),
                             rel=1e-12)


def test_quantum_correction_zeros():
    """No coherence term survives at theta in {0, pi/4, pi/2} or phi=pi/2."""
    for theta in (0.0, math.pi / 4, math.pi / 2):
        spec = make_spec(theta=theta, phi=0.7)
        assert abs(gc.quantum_correction(spec, UNIT_SCALES)) < 1e-15
    spec = make_spec(theta=0.6, phi=math.pi / 2)
    assert abs(gc.quantum_correction(spec, UNIT_SCALES)) < 1e-15


def test_quantum_correction_decay_bound_resolved_packets():
    """|excess| <= (g/4c^2)|dz| exp(-dz^2/4 delta^2) * 2 once dz >= 2 delta.

    (For overlapping packets near theta=pi/4, phi=pi the norm bracket
    vanishes and no constant works; from dz = 2 delta on, the bracket is
    >= 1 - 1/e and the constant is provably under 1.582.)
    """
    rng = np.random.default_rng(7)
    for _ in range(300):
        delta = rng.uniform(0.002, 0.02)
        dz = rng.uniform(2.0, 8.0) * delta * rng.choice((-1.0, 1.0))
        theta = rng.uniform(0.0, math.pi / 2)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        spec = gc.SuperpositionSpec(z1=-0.5 * dz, z2=0.5 * dz, delta=delta,
                                    theta=theta, phi=phi)
        bound = 0.25 * abs(dz) * math.exp(-dz**2 / (4.0 * delta**2)) * 2.0
        assert abs(gc.quantum_correction(spec, UNIT_SCALES)) <= bound


def test_quantum_correction_vanishes_at_large_separation():
    delta = 0.01
    values = []
    for ratio in (4.0, 6.0, 8.0, 10.0):
        spec = gc.SuperpositionSpec(z1=0.0, z2=ratio * delta, delta=delta,
                                    theta=0.7543, phi=math.pi)
        values.append(abs(gc.quantum_correction(spec, UNIT_SCALES)))
    assert values[0] > values[1] > values[2] > values[3]
    assert values[-1] < 1e-12


def test_quantum_correction_rejections():
    spec = make_spec()
    with pytest.raises(gc.ConfigurationError, match="method"):
        gc.quantum_correction(spec, UNIT_SCALES, method="magic")
    other = make_spec(z2=0.03).mixture()
    with pytest.raises(gc.ConfigurationError):
        gc.quantum_correction(spec, UNIT_SCALES, mixture=other)
    # the matched mixture is accepted
    gc.quantum_correction(spec, UNIT_SCALES, mixture=spec.mixture())


def test_decay_rates_consistency():
    spec = make_spec(theta=0.5, phi=0.3)
    res = gc.decay_rates(spec, UNIT_SCALES)
    dens_sup = gc.HeightDensity.superposition(spec, UNIT_SCALES)
    dens_mix = gc.HeightDensity.mixture(spec.mixture(), UNIT_SCALES)
    assert res.gamma_sup == pytest.approx(1.0 + dens_sup.mean(), rel=1e-15)
    assert res.gamma_cl == pytest.approx(1.0 + dens_mix.mean(), rel=1e-15)
    assert res.gammaQ_inv == pytest.approx(
        gc.quantum_correction(spec, UNIT_SCALES), rel=1e-15)
    # the excess is the difference of the two means (difference path exact)
    assert res.gamma_sup - res.gamma_cl == pytest.approx(res.gammaQ_inv,
                                                         rel=1e-10)
    d = res.to_dict()
    assert set(d) == {"gamma_sup", "gamma_cl", "gammaQ_inv", "method"}
    quad_res = gc.decay_rates(spec, UNIT_SCALES, method="quadrature")
    assert quad_res.gammaQ_inv == pytest.approx(res.gammaQ_inv, rel=1e-11)


# ---------------------------------------------------------------------------
# survival and rates in time
# ---------------------------------------------------------------------------


def test_total_rate_mean():
    dens = gc.HeightDensity.mixture_zeta(0.0, 0.01, 0.002, math.pi / 3)
    want = 1.0 + 0.01 * math.sin(math.pi / 3) ** 2
    assert gc.total_rate(dens) == pytest.approx(want, rel=1e-14)
    assert gc.total_rate(dens, at_time=0.0) == pytest.approx(want, rel=1e-14)


def test_total_rate_is_minus_survival_slope():
    dens = gc.HeightDensity.superposition_zeta(-0.01, 0.015, 0.004, 0.6, 0.9)
    s0, h = 0.8, 1e-5
    slope = (gc.survival_probability(dens, s0 - h)
             - gc.survival_probability(dens, s0 + h)) / (2.0 * h)
    assert gc.total_rate(dens, at_time=s0) == pytest.approx(slope, rel=1e-8)
    with pytest.raises(gc.ConfigurationError):
        gc.total_rate(dens, at_time=-0.1)


def test_survival_closed_form_symmetric_mixture():
    """Symmetric two-branch mixture: e^{-s} cosh(0.45 s) e^{w^2 s^2/4}."""
    dens = gc.HeightDensity.mixture_zeta(-0.45, 0.45, 0.004, math.pi / 4)
    got = gc.survival_probability(dens, 1.0)
    want = math.exp(-1.0) * math.cosh(0.45) * math.exp(0.004**2 / 4.0)
    assert got == pytest.approx(want, rel=1e-14)
    assert got == pytest.approx(0.40576167228058513, rel=1e-13)


def test_survival_basics():
    dens = gc.HeightDensity.superposition_zeta(0.0, 0.02, 0.01, math.pi / 8,
                                               0.0)
    assert gc.survival_probability(dens, 0.0) == 1.0
    s = np.linspace(0.0, 5.0, 11)
    p = gc.survival_probability(dens, s)
    assert p.shape == s.shape
    assert np.all(np.diff(p) < 0.0)
    with pytest.raises(gc.ConfigurationError):
        gc.survival_probability(dens, -1e-9)


def test_survival_sampled_matches_analytic():
    closed = gc.HeightDensity.mixture_zeta(-0.01, 0.01, 0.003, 0.8)
    sampled = gc.HeightDensity.from_callable(closed, closed.support)
    for s in (0.0, 0.7, 2.5):
        assert gc.survival_probability(sampled, s) == pytest.approx(
            gc.survival_probability(closed, s), rel=1e-9)


def test_excited_amplitude_sq():
    assert gc.excited_amplitude_sq(0.25, 2.0) == pytest.approx(
        math.exp(-2.5), rel=1e-15)
    out = gc.excited_amplitude_sq(np.array([0.0, 0.5]), 1.0)
    assert np.allclose(out, [math.exp(-1.0), math.exp(-1.5)])
    with pytest.raises(gc.HorizonError):
        gc.excited_amplitude_sq(-1.0, 1.0)
    with pytest.raises(gc.ConfigurationError):
        gc.excited_amplitude_sq(0.0, -1.0)


def test_photon_amplitude_reaches_lorentzian_kernel():
    """After ~50 lifetimes the mode intensity sits on the stationary kernel."""
    zeta, r = 0.2, 1e3
    gam = 1.0 + zeta
    s = 50.0 / gam
    nu = np.linspace(r * zeta - 4.0, r * zeta + 4.0, 9)
    got = gc.photon_amplitude_sq(zeta, nu, s, r)
    limit = 1.0 / (0.25 * gam**2 + (r * zeta - nu) ** 2)
    assert np.allclose(got, limit, rtol=1e-10)


def test_photon_amplitude_validation():
    with pytest.raises(gc.ConfigurationError):
        gc.photon_amplitude_sq(0.1, 0.0, -1.0, 1e3)
    with pytest.raises(gc.ConfigurationError):
        gc.photon_amplitude_sq(0.1, 0.0, 1.0, 0.0)
    with pytest.raises(gc.HorizonError):
        gc.photon_amplitude_sq(-1.1, 0.0, 1.0, 1e3)


# ---------------------------------------------------------------------------
# line shapes
# ---------------------------------------------------------------------------


def test_lorentzian_line_unit_area():
    for zeta in (0.0, 0.25, 0.5):
        u = 1e3 * zeta  # integrate centered so quadpack sees the peak
        mass, _ = quad(lambda x: gc.lorentzian_line(x + u, zeta, 1e3),
                       -np.inf, np.inf)
        assert mass == pytest.approx(1.0, abs=1e-10)


def test_lorentzian_line_finite_window_mass():
    """Window mass must match the arctan closed form exactly."""
    zeta, r, w = 0.25, 1e3, 80.0
    u, gam = r * zeta, 1.0 + zeta
    mass, _ = quad(gc.lorentzian_line, u - w, u + w, args=(zeta, r),
                   points=[u], limit=200)
    want = (math.atan(2.0 * w / gam) - math.atan(-2.0 * w / gam)) / math.pi
    assert mass == pytest.approx(want, rel=1e-12)


def test_lorentzian_line_peak_and_width():
    zeta, r = 0.3, 1e3
    u, gam = r * zeta, 1.0 + zeta
    nu = np.linspace(u - 10.0, u + 10.0, 4001)
    p = gc.lorentzian_line(nu, zeta, r)
    assert gc.line_peak(nu, p) == pytest.approx(u, abs=1e-9)
    assert gc.line_fwhm(nu, p) == pytest.approx(gam, rel=1e-4)
    with pytest.raises(gc.HorizonError):
        gc.lorentzian_line(0.0, -1.0, r)


def test_spectrum_voigt_equals_quadrature_at_narrow_width():
    """With a narrow packet the frozen-linewidth error is negligible."""
    dens = gc.HeightDensity.mixture_zeta(-2e-3, 2e-3, 1e-5, math.pi / 4)
    nu = np.linspace(-4.0, 4.0, 41)
    v = gc.spectrum(dens, nu, 1e3, method="voigt")
    q = gc.spectrum(dens, nu, 1e3, method="quadrature")
    assert np.allclose(v.p_values, q.p_values, rtol=1e-4)


def test_spectrum_voigt_close_to_quadrature_at_desk_width():
    dens = gc.HeightDensity.superposition_zeta(-2e-3, 2e-3, 1e-3,
                                               math.pi / 4, 0.0)
    nu = np.linspace(-4.0, 4.0, 21)
    v = gc.spectrum(dens, nu, 1e3, method="voigt")
    q = gc.spectrum(dens, nu, 1e3, method="quadrature")
    assert np.allclose(v.p_values, q.p_values, rtol=2e-2,
                       atol=1e-4 * v.p_values.max())


def test_spectrum_auto_dispatch_and_mass():
    dens = gc.HeightDensity.mixture_zeta(0.0, 2e-3, 1e-3, 0.5)
    nu = np.linspace(-60.0, 60.0, 4001)
    res = gc.spectrum(dens, nu, 1e3)
    assert res.total_mass == pytest.approx(1.0, abs=1e-2)
    assert not res.low_mass
    narrow = gc.spectrum(dens, np.linspace(-0.4, 0.4, 81), 1e3)
    assert narrow.low_mass
    assert np.all(res.p_values >= 0.0)


def test_spectrum_sampled_density_uses_quadrature():
    closed = gc.HeightDensity.mixture_zeta(0.0, 2e-3, 1e-3, 0.5)
    sampled = gc.HeightDensity.from_callable(closed, closed.support)
    nu = np.linspace(-3.0, 3.0, 11)
    auto = gc.spectrum(sampled, nu, 1e3)
    ref = gc.spectrum(closed, nu, 1e3, method="quadrature")
    assert np.allclose(auto.p_values, ref.p_values, rtol=1e-8)
    with pytest.raises(gc.ConfigurationError, match="analytic"):
        gc.spectrum(sampled, nu, 1e3, method="voigt")


def test_spectrum_validation():
    dens = gc.HeightDensity.mixture_zeta(0.0, 2e-3, 1e-3, 0.5)
    nu = np.linspace(-3.0, 3.0, 11)
    with pytest.raises(gc.ConfigurationError):
        gc.spectrum(dens, nu, 0.0)
    with pytest.raises(gc.ConfigurationError):
        gc.spectrum(dens, nu[::-1], 1e3)
    with pytest.raises(gc.ConfigurationError):
        gc.spectrum(dens, nu, 1e3, method="fft")


def test_spectrum_voigt_cancellation_guard():
    """Signed component sums that dip negative must raise, not return junk."""
    dens = gc.HeightDensity(kind="analytic-mixture", support=(-0.1, 0.1),
                            width=1e-6, centers=(0.0, 2e-4),
                            weights=(6.0, -5.0))
    nu = np.linspace(-5.0, 5.0, 201)
    with pytest.raises(gc.AccuracyError):
        gc.spectrum(dens, nu, 1e3, method="voigt")


# ---------------------------------------------------------------------------
# wave-packet coherence time
# ---------------------------------------------------------------------------


def kp_from_spec(spec: gc.SuperpositionSpec, *, t=1.0, m=1.0,
                 sigma_v=1.0, p_bar=0.0) -> gc.KhandelwalParams:
    return gc.KhandelwalParams(sigma_z=spec.delta, sigma_v=sigma_v,
                               p_bar=p_bar, alpha_w=math.cos(spec.theta) ** 2,
                               phi=spec.phi, t=t, m=m)


def test_tcoh_reduced_equals_quantum_correction():
    for spec in random_specs(100):
        reduced = gc.khandelwal_tcoh_reduced(kp_from_spec(spec), spec.z1,
                                             spec.z2, g=1.0, c=1.0)
        assert reduced == pytest.approx(
            gc.quantum_correction(spec, UNIT_SCALES), rel=1e-12)


def test_tcoh_full_bracket_terms():
    kp = gc.KhandelwalParams(sigma_z=1.0, sigma_v=2.0, p_bar=3.0,
                             alpha_w=0.25, phi=0.5, t=2.0, m=1.5)
    res = gc.khandelwal_tcoh_full(kp, 0.0, 1.0, g=2.0, c=10.0, hbar=0.7)
    sv2 = (2.0 / 10.0) ** 2
    assert res.term1 == pytest.approx(0.25 * sv2, rel=1e-15)
    assert res.term2 == pytest.approx(-2.0 * 1.0 * (1.0 - 0.5) / 100.0,
                                      rel=1e-15)
    base3 = -(2.0 / 0.7) * sv2 * 1.0 * (3.0 - 1.5 * 2.0 * 2.0)
    assert res.term3 == pytest.approx(base3 * math.tan(0.5), rel=1e-14)
    root = math.sqrt(0.25 * 0.75)
    n = 1.0 + 2.0 * math.cos(0.5) * root * math.exp(-0.25)
    assert res.n_factor == pytest.approx(n, rel=1e-15)
    p3 = base3 * 2.0 * math.sin(0.5) * root * math.exp(-0.25)
    want = ((n - 1.0) * (res.term1 + res.term2) + p3) * 2.0 / (2.0 * n)
    assert res.tcoh == pytest.approx(want, rel=1e-14)


def test_tcoh_finite_through_phi_half_pi():
    """tan(phi) diverges at pi/2 exactly as N-1 vanishes; the product form
    must pass through smoothly."""
    kp0 = gc.KhandelwalParams(sigma_z=1.0, sigma_v=0.5, p_bar=0.2,
                              alpha_w=0.3, phi=math.pi / 2, t=1.5, m=1.0)
    at = gc.khandelwal_tcoh_full(kp0, 0.0, 1.0, g=1.0, c=1.0, hbar=1.0)
    assert math.isfinite(at.tcoh)
    eps = 1e-9
    kp1 = gc.KhandelwalParams(sigma_z=1.0, sigma_v=0.5, p_bar=0.2,
                              alpha_w=0.3, phi=math.pi / 2 - eps, t=1.5,
                              m=1.0)
    near = gc.khandelwal_tcoh_full(kp1, 0.0, 1.0, g=1.0, c=1.0, hbar=1.0)
    assert near.tcoh == pytest.approx(at.tcoh, rel=1e-6)


def test_tcoh_single_packet_limits():
    # all weight in one packet: no two-branch coherence, tcoh = 0
    for alpha in (0.0, 1.0):
        kp = gc.KhandelwalParams(sigma_z=1.0, sigma_v=1.0, p_bar=0.0,
                                 alpha_w=alpha, phi=0.0, t=1.0, m=1.0)
        res = gc.khandelwal_tcoh_full(kp, 0.0, 1.0)
        assert res.tcoh == 0.0


def test_tcoh_validation():
    with pytest.raises(gc.ConfigurationError):
        gc.KhandelwalParams(sigma_z=0.0, sigma_v=1.0, p_bar=0.0, alpha_w=0.5,
                            phi=0.0, t=1.0, m=1.0)
    with pytest.raises(gc.ConfigurationError):
        gc.KhandelwalParams(sigma_z=1.0, sigma_v=1.0, p_bar=0.0, alpha_w=1.5,
                            phi=0.0, t=1.0, m=1.0)
    with pytest.raises(gc.ConfigurationError):
        gc.KhandelwalParams(sigma_z=1.0, sigma_v=1.0, p_bar=0.0, alpha_w=0.5,
                            phi=math.nan, t=1.0, m=1.0)
    # destructive overlap: N = 0 exactly
    kp = gc.KhandelwalParams(sigma_z=1.0, sigma_v=1.0, p_bar=0.0,
                             alpha_w=0.5, phi=math.pi, t=1.0, m=1.0)
    with pytest.raises(gc.ConfigurationError, match="norm"):
        gc.khandelwal_tcoh_full(kp, 0.0, 0.0)


@given(theta=st.floats(0.05, math.pi / 2 - 0.05),
       phi=st.floats(0.0, 2.0 * math.pi, exclude_max=True),
       ratio=st.floats(0.5, 4.0),
       delta=st.floats(0.003, 0.02))
def test_tcoh_reduced_identity_property(theta, phi, ratio, delta):
    dz = ratio * delta
    spec = gc.SuperpositionSpec(z1=-0.5 * dz, z2=0.5 * dz, delta=delta,
                                theta=theta, phi=phi)
    reduced = gc.khandelwal_tcoh_reduced(kp_from_spec(spec), spec.z1,
                                         spec.z2, g=1.0, c=1.0)
    closed = gc.quantum_correction(spec, UNIT_SCALES)
    assert reduced == pytest.approx(closed, rel=1e-9, abs=1e-18)
