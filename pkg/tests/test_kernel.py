"""Mode-kernel tests.

Oracles: the half-integer Bessel reduction (elementary closed form), the
spherical average of the 3D Euclidean Gaussian (independent quadrature), the
Euclidean heat kernel itself for the full mode sum, arbitrary-precision
Bessel values, and the dilation scaling law checked at randomized inputs.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from coneheat.cone import ConeModel, RoundSphereLink
from coneheat.kernel import (
    BesselEnvelopeError,
    ModeKernel,
    assemble_kernel,
    kernel_asymptotic_coefficient,
    kernel_remainder_check,
    mode_heat_kernel,
    mode_kernel_reduced,
    mode_mass,
    reduced_kernel_point,
    scaled_bessel_i,
    semigroup_residual,
)
from coneheat.quadrature import gauss_legendre


def euclid_gaussian(t, d2, m=3):
    return (4 * math.pi * t) ** (-m / 2) * math.exp(-d2 / (4 * t))


def spherical_average_oracle(t, r, rp, order=200):
    """Mode-0 radial kernel as the S^2 average of the 3D Gaussian."""
    theta, w = gauss_legendre(order, 0.0, math.pi)
    d2 = r * r + rp * rp - 2 * r * rp * np.cos(theta)
    vals = (4 * math.pi * t) ** (-1.5) * np.exp(-d2 / (4 * t))
    return 2 * math.pi * float(w @ (vals * np.sin(theta)))


def test_scaled_bessel_against_mpmath():
    mpmath.mp.dps = 40
    for nu in [0.0, 0.5, 1.0, 2.5, 7.3, 20.0, 100.0, 350.0, 1000.0]:
        for z in [1e-8, 0.1, 1.0, 10.0, 100.0, 1e4, 1e8]:
            got = float(scaled_bessel_i(nu, z))
            want = float(mpmath.besseli(nu, z) * mpmath.exp(-z))
            if want == 0.0:
                assert got == pytest.approx(0.0, abs=1e-300)
            else:
                assert got == pytest.approx(want, rel=2e-12)


def test_scaled_bessel_large_argument_branch():
    # beyond the library backend's range the explicit expansion takes over
    mpmath.mp.dps = 40
    for nu in (0.0, 0.5, 2.5, 20.0):
        for z in (2e8, 1e9, 3e10, 1e12):
            got = float(scaled_bessel_i(nu, z))
            want = float(mpmath.besseli(nu, z) * mpmath.exp(-z))
            assert got == pytest.approx(want, rel=1e-12)
    # orders too large for the validated branch are refused
    with pytest.raises(BesselEnvelopeError):
        scaled_bessel_i(5000.0, 1e9)


def test_bessel_envelope_errors():
    with pytest.raises(BesselEnvelopeError):
        scaled_bessel_i(2e4, 1.0)
    with pytest.raises(BesselEnvelopeError):
        scaled_bessel_i(1.0, -0.5)
    with pytest.raises(BesselEnvelopeError):
        scaled_bessel_i(-1.0, 0.5)


def test_mode_kernel_half_integer_closed_form():
    # I_{1/2}(z) = sqrt(2/(pi z)) sinh z reduces the nu=1/2 kernel
    k = ModeKernel.from_lambda(3, 0.0)
    assert k.nu == pytest.approx(0.5)
    assert k.alpha_plus == pytest.approx(0.0)
    got = float(mode_heat_kernel(k, 1.0, 1.0, 1.0))
    want = (1 / math.sqrt(math.pi)) * math.exp(-0.5) * math.sinh(0.5)
    assert got == pytest.approx(want, rel=1e-14)


def test_mode_kernel_matches_spherical_average():
    k = ModeKernel.from_lambda(3, 0.0)
    for t, r, rp in [(1.0, 1.0, 1.0), (0.3, 0.5, 1.2), (2.0, 2.0, 0.3)]:
        got = float(mode_heat_kernel(k, t, r, rp))
        assert got == pytest.approx(spherical_average_oracle(t, r, rp), rel=1e-10)


def test_scaling_law_randomized():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(3, 6))
        lam = float(rng.uniform(0.0, 60.0))
        k = ModeKernel.from_lambda(m, lam)
        t = float(rng.uniform(0.1, 1.0))
        r = float(rng.uniform(0.3, 3.0))
        rp = float(rng.uniform(0.3, 3.0))
        s = float(rng.uniform(0.5, 2.0))
        base = float(mode_heat_kernel(k, t, r, rp))
        scaled = float(mode_heat_kernel(k, s * s * t, s * r, s * rp))
        worst = max(worst, abs(scaled - s ** (-m) * base) / (s ** (-m) * base))
    assert worst < 1e-12


def test_small_r_limit_exists():
    k = ModeKernel.from_lambda(3, 2.0)  # alpha+ = 1
    vals = [
        float(mode_heat_kernel(k, 0.7, r, 1.3)) / r**k.alpha_plus
        for r in (1e-3, 1e-4, 1e-5)
    ]
    assert vals[2] > 0
    assert vals[1] == pytest.approx(vals[2], rel=1e-5)
    # and the limit equals the leading asymptotic coefficient
    coef = float(kernel_asymptotic_coefficient(k, 0, 0.7, 1.3))
    assert vals[2] == pytest.approx(coef, rel=1e-8)


def euclidean_model(lambda_max=2000.0):
    return ConeModel.build(RoundSphereLink(3, 1.0), 8.0, lambda_max)


def test_assemble_euclidean_reconstruction():
    model = euclidean_model()
    pole = model.link.point(0.0)
    for t in (0.3, 1.0):
        for r in (0.5, 1.0, 1.5):
            for theta in (0.0, 1.0, 2.8):
                x = (model.link.point(theta), r)
                y = (pole, 1.0)
                kv = assemble_kernel(model, t, x, y)
                d = model.cone_distance(x, y)
                assert kv.tail_ok
                assert kv.value == pytest.approx(
                    euclid_gaussian(t, d * d), rel=1e-8
                )


def test_assemble_euclidean_m4():
    # S^3(1) link: the cone is R^4; validates the higher-dimensional
    # eigenspace kernel normalization
    model = ConeModel.build(RoundSphereLink(4, 1.0), 8.0, 3000.0)
    pole = np.array([1.0, 0.0, 0.0, 0.0])
    for t in (0.4, 1.0):
        for r in (0.6, 1.2):
            for theta in (0.5, 2.2):
                x = (np.array([math.cos(theta), math.sin(theta), 0.0, 0.0]), r)
                y = (pole, 1.0)
                kv = assemble_kernel(model, t, x, y)
                d = model.cone_distance(x, y)
                exact = (4 * math.pi * t) ** (-2.0) * math.exp(-d * d / (4 * t))
                assert kv.value == pytest.approx(exact, rel=1e-7)


def test_assemble_symmetry_and_positivity():
    model = euclidean_model(500.0)
    rng = np.random.default_rng(1)
    for _ in range(20):
        t = float(rng.uniform(0.2, 2.0))
        x = (model.link.point(float(rng.uniform(0, math.pi))), float(rng.uniform(0.3, 2.0)))
        y = (model.link.point(float(rng.uniform(0, math.pi))), float(rng.uniform(0.3, 2.0)))
        a = assemble_kernel(model, t, x, y)
        b = assemble_kernel(model, t, y, x)
        assert a.value == b.value  # exact term-by-term symmetry
        assert a.value > 0


def test_assemble_kmax_beyond_cutoff_rejected():
    model = euclidean_model(100.0)
    n = len(model.spectrum.entries)
    with pytest.raises(ValueError):
        assemble_kernel(model, 1.0, (model.link.point(0.0), 1.0), (model.link.point(1.0), 1.0), k_max=n + 1)


def test_assemble_tail_flag_not_silent():
    model = euclidean_model(30.0)  # few modes: tail cannot converge at small t
    x = (model.link.point(0.0), 1.0)
    kv = assemble_kernel(model, 0.01, x, x, k_max=len(model.spectrum.entries))
    assert not kv.tail_ok


def test_coefficient_consistency_with_numerical_limit():
    k = ModeKernel.from_lambda(3, 0.0)
    coef = float(kernel_asymptotic_coefficient(k, 0, 1.0, 1.0))
    limit = float(mode_heat_kernel(k, 1.0, 1e-6, 1.0)) / (1e-6) ** 0.0
    assert coef == pytest.approx(limit, rel=1e-6)


def test_coefficient_series_reconstructs_kernel():
    # partial sums over shifts converge to the kernel at small r
    k = ModeKernel.from_lambda(3, 2.0)
    t, r, rp = 0.6, 0.05, 0.9
    total = sum(
        float(kernel_asymptotic_coefficient(k, j, t, rp)) * r ** (k.alpha_plus + 2 * j)
        for j in range(6)
    )
    assert total == pytest.approx(float(mode_heat_kernel(k, t, r, rp)), rel=1e-12)


def test_coefficient_homogeneity():
    k = ModeKernel.from_lambda(3, 2.0)
    s, t, rp = 1.7, 0.4, 0.8
    for j in (0, 1, 2):
        lhs = float(kernel_asymptotic_coefficient(k, j, s * s * t, s * rp))
        rhs = s ** (-k.m - k.alpha_plus - 2 * j) * float(
            kernel_asymptotic_coefficient(k, j, t, rp)
        )
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_coefficient_bound_stable_on_log_grid():
    # |H_0(t, y)| <= c (t + rho(y)^2)^{-(m + alpha)/2} with stable measured c
    k = ModeKernel.from_lambda(3, 2.0)
    beta = k.alpha_plus

    def measured_c(nt, nr):
        ts = np.geomspace(1e-3, 10.0, nt)
        rs = np.geomspace(1e-3, 1.0, nr)
        worst = 0.0
        for t in ts:
            for rp in rs:
                h0 = abs(float(kernel_asymptotic_coefficient(k, 0, t, rp)))
                bound = (t + min(rp, 1.0) ** 2) ** (-(3 + beta) / 2)
                worst = max(worst, h0 / bound)
        return worst

    coarse, fine = measured_c(8, 8), measured_c(16, 16)
    assert math.isfinite(fine)
    assert fine <= coarse * 1.2 + 1e-12


def test_mode_mass_sub_markovian():
    # lambda = 0 mode carries unit mass on the exact cone (m >= 3)
    for m in (3, 4):
        k = ModeKernel.from_lambda(m, 0.0)
        for r in (0.5, 1.0, 2.0):
            mass = mode_mass(k, 0.5, r)
            assert mass <= 1.0 + 1e-8
            assert mass == pytest.approx(1.0, abs=1e-9)
    # higher modes carry strictly less
    k2 = ModeKernel.from_lambda(3, 2.0)
    assert mode_mass(k2, 0.5, 1.0) < 1.0


def test_semigroup_property():
    for lam in (0.0, 2.0):
        k = ModeKernel.from_lambda(3, lam)
        res = semigroup_residual(k, 0.3, 0.7, 1.0, 0.5)
        assert res < 1e-9


def test_remainder_check_trivial_below_zero():
    # gamma in (2-m, 0): no asymptotics subtracted, plain kernel bound
    model = euclidean_model(800.0)
    pole = model.link.point(0.5)
    t_grid = [0.05, 0.5]
    y_grid = [(pole, 0.8)]
    stage = (
        t_grid,
        [(model.link.point(0.0), r) for r in np.geomspace(1e-3, 0.5, 6)],
        y_grid,
    )
    report = kernel_remainder_check(model, -0.5, [stage])
    assert report["gamma_plus"] == pytest.approx(0.0)
    assert math.isfinite(report["sups"][0])
    # reduced kernel coincides with the kernel itself for gamma < alpha+
    k = ModeKernel.from_lambda(3, 0.0)
    full = float(mode_heat_kernel(k, 0.3, 0.2, 0.7))
    red = float(mode_kernel_reduced(k, -0.5, model.chi, 0.3, 0.2, 0.7))
    assert red == full


def test_remainder_check_refinement_trend():
    model = euclidean_model(800.0)
    pole = model.link.point(0.7)
    y_grid = [(pole, 0.6)]
    t_grid = [0.1, 0.7]

    def stage(rmin):
        xs = [(model.link.point(0.0), r) for r in np.geomspace(rmin, 0.4, 5)]
        return (t_grid, xs, y_grid)

    report = kernel_remainder_check(model, 1.5, [stage(1e-2), stage(2.5e-3), stage(6.25e-4)])
    sups = report["sups"]
    assert all(math.isfinite(s) for s in sups)
    assert sups[1] <= sups[0] * 1.2 and sups[2] <= sups[1] * 1.2
    assert report["gamma_plus"] == pytest.approx(2.0)


def test_remainder_ratio_scale_invariance():
    # both remainder and bound scale identically under the parabolic dilation
    # provided every radius stays inside the chi = 1 plateau and rho = r
    model = euclidean_model(800.0)
    pole = model.link.point(0.4)
    s = 2.0
    t, r, rp = 0.02, 0.3, 0.25

    def ratio(tv, rv, rpv):
        x = ((model.link.point(0.0), rv))
        y = ((pole, rpv))
        kv = reduced_kernel_point(model, 1.5, tv, x, y)
        d = model.cone_distance(x, y)
        bound = (tv + d * d) ** (-1.5) * (rv**2 / (rv**2 + rpv**2)) ** 1.0
        return abs(kv.value) / bound

    base = ratio(t, r, rp)
    dilated = ratio(s * s * t, s * r, s * rp)
    assert dilated == pytest.approx(base, rel=1e-8)
