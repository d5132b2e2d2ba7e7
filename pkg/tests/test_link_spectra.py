"""Spectrum catalogue tests against independent enumeration oracles."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from coneheat.link_spectra import (
    load_spectrum,
    save_spectrum,
    sphere_spectrum,
    torus_spectrum,
)


def brute_torus_eigenvalues(lattice, lam_max, n_range=12):
    """Oracle: enumerate |2 pi xi|^2 over dual vectors xi = n . inv(L)^T."""
    lattice = np.asarray(lattice, dtype=float)
    dual = np.linalg.inv(lattice).T
    d = lattice.shape[0]
    counts: dict[float, int] = {}
    for idx in np.ndindex(*([2 * n_range + 1] * d)):
        n = np.array(idx) - n_range
        xi = n @ dual
        lam = float(4 * math.pi**2 * xi @ xi)
        if lam < lam_max:
            key = round(lam, 9)
            counts[key] = counts.get(key, 0) + 1
    return sorted(counts.items())


def test_sphere_s2_truncated_at_10():
    spec = sphere_spectrum(3, 1.0, 10.0)
    # closed-form round-sphere spectrum k(k+1), multiplicity 2k+1
    assert [(e.lam, e.multiplicity) for e in spec.entries] == [
        (0.0, 1),
        (2.0, 3),
        (6.0, 5),
    ]
    assert spec.cutoff == 10.0


def test_sphere_only_constant_mode():
    spec = sphere_spectrum(3, 1.0, 0.5)
    assert [(e.lam, e.multiplicity) for e in spec.entries] == [(0.0, 1)]


def test_sphere_s3_radius_2():
    spec = sphere_spectrum(4, 2.0, 2.0)
    # k(k+2)/4 for S^3, multiplicity (k+1)^2; lambda_max is strict, so the
    # k=2 eigenvalue 2.0 is excluded
    assert [(e.lam, e.multiplicity) for e in spec.entries] == [
        (0.0, 1),
        (0.75, 4),
    ]
    assert spec.entries[1].exact == Fraction(3, 4)


def test_sphere_rejects_small_m():
    with pytest.raises(ValueError):
        sphere_spectrum(2, 1.0, 10.0)


def test_sphere_multiplicity_partial_sums():
    # dimension of spherical harmonics through degree k on S^2 is (k+1)^2
    spec = sphere_spectrum(3, 1.0, 500.0)
    running = 0
    for k, e in enumerate(spec.entries):
        running += e.multiplicity
        assert running == (k + 1) ** 2


def test_torus_identity_lattice():
    oracle = brute_torus_eigenvalues(np.eye(2), 80.0)
    spec = torus_spectrum(np.eye(2), 80.0)
    got = [(round(e.lam, 9), e.multiplicity) for e in spec.entries]
    assert got == oracle
    four_pi2 = 4 * math.pi**2
    assert got == [
        (0.0, 1),
        (round(four_pi2, 9), 4),
        (round(2 * four_pi2, 9), 4),
    ]


def test_torus_identity_small_cutoff():
    spec = torus_spectrum(np.eye(2), 1.0)
    assert [(e.lam, e.multiplicity) for e in spec.entries] == [(0.0, 1)]


def test_torus_rect_lattice():
    spec = torus_spectrum(np.diag([2.0, 1.0]), 12.0)
    oracle = brute_torus_eigenvalues(np.diag([2.0, 1.0]), 12.0)
    assert [(round(e.lam, 9), e.multiplicity) for e in spec.entries] == oracle
    assert [(round(e.lam, 6), e.multiplicity) for e in spec.entries] == [
        (0.0, 1),
        (round(math.pi**2, 6), 2),
    ]


def test_torus_singular_lattice_rejected():
    with pytest.raises(ValueError):
        torus_spectrum(np.array([[1.0, 2.0], [2.0, 4.0]]), 10.0)


def test_torus_rotation_invariance():
    theta = 0.7
    rot = np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    )
    base = torus_spectrum(np.eye(2), 100.0)
    rotated = torus_spectrum(np.eye(2) @ rot, 100.0)
    assert len(base.entries) == len(rotated.entries)
    for a, b in zip(base.entries, rotated.entries):
        assert a.multiplicity == b.multiplicity
        assert a.lam == pytest.approx(b.lam, rel=1e-12)


def test_load_sorts_and_merges(tmp_path):
    f = tmp_path / "spec.txt"
    f.write_text("# comment\n2 3\n0 1\n")
    spec = load_spectrum(f)
    assert [(e.lam, e.multiplicity) for e in spec.entries] == [(0.0, 1), (2.0, 3)]
    assert not spec.zero_mode_missing

    f.write_text("0 1\n0 2\n")
    spec = load_spectrum(f)
    assert [(e.lam, e.multiplicity) for e in spec.entries] == [(0.0, 3)]


def test_load_rational_literals(tmp_path):
    f = tmp_path / "spec.txt"
    f.write_text("0 1\n3/4 4\n")
    spec = load_spectrum(f)
    assert spec.entries[1].lam == 0.75
    assert spec.entries[1].exact == Fraction(3, 4)


def test_load_negative_eigenvalue_rejected(tmp_path):
    f = tmp_path / "spec.txt"
    f.write_text("-1 1\n")
    with pytest.raises(ValueError):
        load_spectrum(f)


def test_load_missing_zero_mode_warns_not_raises(tmp_path):
    f = tmp_path / "spec.txt"
    f.write_text("2 3\n")
    spec = load_spectrum(f)
    assert spec.zero_mode_missing


def test_save_load_round_trip(tmp_path):
    f1 = tmp_path / "a.txt"
    f2 = tmp_path / "b.txt"
    f1.write_text("0 1\n1/3 2\n0.1 5\n")
    spec = load_spectrum(f1)
    save_spectrum(spec, f2)
    spec2 = load_spectrum(f2)
    assert [(e.lam, e.multiplicity, e.exact) for e in spec.entries] == [
        (e.lam, e.multiplicity, e.exact) for e in spec2.entries
    ]
