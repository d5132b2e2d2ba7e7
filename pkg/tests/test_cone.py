"""Cone model tests: cutoff, bases, Laplacian action, boundary functions.

Oracles: spherical-harmonic eigenspace kernels are checked against the
reproducing property by quadrature, the cutoff commutator against a
product-rule finite-difference expansion, and basis counts against the
index-function module.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from coneheat.cone import (
    ConeModel,
    FlatTorusLink,
    RoundSphereLink,
    asymptotics_basis,
    commutator_terms,
    cone_laplacian_on_basis,
    cutoff_extension,
    evaluate_bdf,
    harmonic_basis,
)
from coneheat.indicial import ExceptionalWeightError, model_space_dims


def s2_model(R_out=4.0, lambda_max=300.0):
    return ConeModel.build(RoundSphereLink(3, 1.0), R_out, lambda_max)


def test_cutoff_plateaus_and_smoothness():
    model = s2_model(R_out=4.0)
    chi = model.chi
    assert chi(0.5) == 1.0 and chi(1.0) == 1.0
    assert chi(2.0) == 0.0 and chi(3.5) == 0.0
    r = np.linspace(0.9, 2.1, 400)
    vals = chi(r)
    assert np.all(np.diff(vals) <= 1e-15)  # monotone join
    # C^2: finite-difference derivatives match the closed forms
    h = 1e-5
    for r0 in [1.2, 1.5, 1.9]:
        fd1 = (chi(r0 + h) - chi(r0 - h)) / (2 * h)
        fd2 = (chi(r0 + h) - 2 * chi(r0) + chi(r0 - h)) / h**2
        assert fd1 == pytest.approx(chi.d1(r0), rel=1e-7, abs=1e-9)
        assert fd2 == pytest.approx(chi.d2(r0), rel=1e-5, abs=1e-7)


def test_rho_algebra():
    model = s2_model()
    r = np.array([0.01, 0.5, 1.0, 2.0, 3.9])
    rho = model.rho(r)
    assert np.all(rho <= 1.0) and np.all(rho > 0)
    assert np.allclose(rho[:3], r[:3].clip(max=1.0))
    g, d = 1.3, -0.4
    assert np.allclose(rho**g * rho**d, rho ** (g + d))


def test_sphere_eigenspace_kernel_reproducing():
    """Quadrature oracle: Phi_k must reproduce P_k(cos .) under convolution."""
    link = RoundSphereLink(3, 1.0)
    n = 4000
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(n, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    p = np.array([0.0, 0.0, 1.0])
    area = 4 * math.pi
    for k in (0, 1, 3):
        # f = degree-k zonal function around q0
        q0 = np.array([1.0, 0.0, 0.0])
        legendre = np.polynomial.legendre.Legendre.basis(k)
        f_vals = legendre(pts @ q0)
        phi_vals = np.array([link.eigenspace_kernels(p, pt, k + 1)[k] for pt in pts])
        integral = float(np.mean(phi_vals * f_vals) * area)
        assert integral == pytest.approx(legendre(p @ q0), abs=0.05)


def test_sphere_kernel_trace_is_dimension():
    link = RoundSphereLink(3, 1.0)
    p = link.point(0.7)
    vals = link.eigenspace_kernels(p, p, 5)
    # Phi_k(p, p) * vol = eigenspace dimension
    assert vals * link.volume() == pytest.approx([1, 3, 5, 7, 9])
    link4 = RoundSphereLink(4, 1.0)
    p4 = np.array([1.0, 0, 0, 0])
    vals4 = link4.eigenspace_kernels(p4, p4, 4)
    assert vals4 * link4.volume() == pytest.approx([1.0, 4.0, 9.0, 16.0])


def test_torus_kernel_trace_and_zero_mode():
    link = FlatTorusLink.from_matrix(np.eye(2))
    p = np.array([0.3, 0.4])
    q = np.array([0.3, 0.4])
    vals = link.eigenspace_kernels(p, q, 3)
    # multiplicities 1, 4, 4 over unit volume
    assert vals == pytest.approx([1.0, 4.0, 4.0])
    q2 = np.array([0.8, 0.9])
    vals2 = link.eigenspace_kernels(p, q2, 1)
    assert vals2[0] == pytest.approx(1.0)  # constant-mode kernel


def test_torus_distance_wraps():
    link = FlatTorusLink.from_matrix(np.eye(2))
    assert link.distance(np.array([0.05, 0.0]), np.array([0.95, 0.0])) == pytest.approx(0.1)


def test_cone_distance_clamps_link_distance():
    model = s2_model()
    sigma = model.link.point(0.0)
    d = model.cone_distance((sigma, 1.0), (sigma, 2.0))
    assert d == pytest.approx(1.0)
    # radius-2 sphere link: angle pi means link distance 2 pi, capped at pi
    model2 = ConeModel.build(RoundSphereLink(3, 2.0), 4.0, 100.0)
    far = model2.link.point(math.pi)
    near = model2.link.point(0.0)
    d2 = model2.cone_distance((near, 1.0), (far, 1.0))
    assert d2 == pytest.approx(2.0)  # through the tip


def test_bdf_plug_in_examples():
    model = s2_model()
    sigma = model.link.point(0.3)
    x = (sigma, 0.5)
    vals = evaluate_bdf(model, 0.0, x, x)
    assert vals.tf == 0.0
    assert vals.lb == pytest.approx(1 / math.sqrt(2))
    assert vals.rb == pytest.approx(1 / math.sqrt(2))
    assert vals.bff == pytest.approx(math.sqrt(0.5))

    y = (model.link.point(0.3), 1.0)
    vals = evaluate_bdf(model, 1.0, y, y)
    assert vals.bff == pytest.approx(math.sqrt(3.0))
    assert vals.tf == pytest.approx(1 / math.sqrt(3.0))
    assert vals.tb == pytest.approx(1.0)

    # large-time limit of the t-parabolic ratio
    x2 = (model.link.point(0.0), 1.0)
    y2 = (model.link.point(1.0), 2.0)
    assert evaluate_bdf(model, 1e9, x2, y2).tb == pytest.approx(1.0, abs=1e-6)


def test_bdf_ranges():
    model = s2_model()
    rng = np.random.default_rng(2)
    for _ in range(100):
        t = float(rng.uniform(0, 4))
        x = (model.link.point(rng.uniform(0, math.pi)), float(rng.uniform(0.01, 3.9)))
        y = (model.link.point(rng.uniform(0, math.pi)), float(rng.uniform(0.01, 3.9)))
        vals = evaluate_bdf(model, t, x, y)
        assert vals.bff >= 0
        for v in (vals.lb, vals.rb, vals.tb):
            assert 0 <= v <= 1 + 1e-12
        assert vals.tf >= 0
        if x[1] <= 1.0 and y[1] <= 1.0:
            # with rho = r on both slots, d^2 <= (r + r')^2 <= 2(r^2 + r'^2)
            assert vals.tf <= math.sqrt(2) + 1e-12


def test_harmonic_basis_counts():
    model = s2_model()
    profile = model.profile((-4.0, 6.0))
    basis = harmonic_basis(model, profile, 1.5)
    assert len(basis) == 4
    assert sorted(e.alpha for e in basis.elements) == [0.0, 1.0, 1.0, 1.0]
    assert len(harmonic_basis(model, profile, 0.5)) == 1  # constants only
    assert len(harmonic_basis(model, profile, -0.5)) == 0


def test_asymptotics_basis_counts_match_index_functions():
    model = s2_model()
    ext = model.extended_profile((-4.0, 8.0))
    basis = asymptotics_basis(model, ext, 2.5)
    assert len(basis) == 10
    assert any(e.alpha == 0.0 and e.k == 1 for e in basis.elements)
    # below 2 the shifted space equals the harmonic space
    b_low = asymptotics_basis(model, ext, 1.5)
    h_low = harmonic_basis(model, ext.profile, 1.5)
    assert [(e.alpha, e.k) for e in b_low.elements] == [
        (e.alpha, e.k) for e in h_low.elements
    ]
    assert len(asymptotics_basis(model, ext, -0.7)) == 0
    rng = np.random.default_rng(9)
    count = 0
    while count < 25:
        g = float(rng.uniform(0.05, 6.0))
        try:
            dim_h, dim_v = model_space_dims(ext, g)
        except ExceptionalWeightError:
            continue
        count += 1
        assert len(asymptotics_basis(model, ext, g)) == dim_v
        assert len(harmonic_basis(model, ext.profile, g)) == dim_h


def test_exceptional_gamma_refused():
    model = s2_model()
    ext = model.extended_profile((-4.0, 6.0))
    with pytest.raises(ExceptionalWeightError):
        asymptotics_basis(model, ext, 2.0)


def test_cone_laplacian_on_basis():
    from coneheat.cone import BasisElement

    # harmonic elements are annihilated exactly
    coef, target = cone_laplacian_on_basis(BasisElement(1.0, 0, 2.0, 0), 3)
    assert coef == 0.0 and target is None
    # (m=3, alpha=0, k=1): (2)(3) - 0 = 6 on the (alpha=0, k=0) element
    coef, target = cone_laplacian_on_basis(BasisElement(0.0, 1, 0.0, 0), 3)
    assert coef == 6.0 and (target.alpha, target.k) == (0.0, 0)
    # (m=3, alpha=1, k=1): (3)(4) - (1)(2) = 10
    coef, target = cone_laplacian_on_basis(BasisElement(1.0, 1, 2.0, 0), 3)
    assert coef == 10.0 and (target.alpha, target.k) == (1.0, 0)


def test_nilpotency():
    model = s2_model()
    ext = model.extended_profile((-4.0, 8.0))
    for gamma in (0.5, 1.5, 2.5, 4.5, 5.3):
        basis = asymptotics_basis(model, ext, gamma)
        max_steps = math.ceil(gamma / 2)
        for element in basis.elements:
            current, steps = element, 0
            while current is not None:
                coef, current = cone_laplacian_on_basis(current, model.m)
                steps += 1
                if coef == 0.0:
                    break
            assert steps <= max_steps


def test_dim_bookkeeping_identity():
    # basis-level restatement of the two-step index identity
    model = s2_model()
    ext = model.extended_profile((-4.0, 8.0))
    for gamma in (2.5, 3.7, 4.3, 5.9):
        n_g = len(asymptotics_basis(model, ext, gamma))
        n_gm2 = len(asymptotics_basis(model, ext, gamma - 2))
        m_g = len(harmonic_basis(model, ext.profile, gamma))
        assert n_g - n_gm2 == m_g


def test_cutoff_extension_values_and_commutator_support():
    model = s2_model(R_out=4.0)
    from coneheat.cone import BasisElement

    element = BasisElement(1.0, 1, 2.0, 0)
    handle = cutoff_extension(model, element)
    r_in = model.R_out / 8
    assert handle(r_in) == pytest.approx(r_in**3.0)  # chi = 1 there
    assert handle(model.R_out) == 0.0

    # commutator Delta(chi v) - chi Delta v vanishes off [R/4, R/2]
    r = np.concatenate(
        [np.linspace(0.01, 0.999, 60), np.linspace(2.001, 3.99, 60)]
    )
    assert np.max(np.abs(commutator_terms(model, element, r))) < 1e-12

    # inside the join, match a finite-difference product-rule oracle
    def delta_radial(f, r0, beta_lam, h=1e-4):
        lap = (f(r0 + h) - 2 * f(r0) + f(r0 - h)) / h**2
        grad = (f(r0 + h) - f(r0 - h)) / (2 * h)
        return lap + (model.m - 1) / r0 * grad - beta_lam / r0**2 * f(r0)

    for r0 in [1.3, 1.6, 1.9]:
        v = lambda rr: rr**element.order
        chi_v = lambda rr: model.chi(rr) * v(rr)
        lam = element.lam
        oracle = delta_radial(chi_v, r0, lam) - model.chi(r0) * delta_radial(v, r0, lam)
        assert commutator_terms(model, element, r0) == pytest.approx(
            oracle, rel=1e-5, abs=1e-8
        )
