"""Eigenvalue/multiplicity tables of the link Laplacian.

Catalogued families (round spheres, flat tori) are enumerated analytically and
stored with exact rational keys wherever the family permits, so that the
integer-valued index bookkeeping downstream never wobbles with rounding.
User-supplied spectra are loaded from plain-text files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from pathlib import Path

import numpy as np

__all__ = [
    "SpectrumEntry",
    "LinkSpectrum",
    "sphere_spectrum",
    "sphere_eigenspace_dim",
    "torus_spectrum",
    "load_spectrum",
    "save_spectrum",
]


@dataclass(frozen=True)
class SpectrumEntry:
    """One eigenvalue of the link Laplacian with its multiplicity.

    ``exact`` carries the rational value (or the rational coefficient of
    4*pi^2 for flat tori) when the generating family is exact; it is the key
    used for duplicate detection.
    """

    lam: float
    multiplicity: int
    exact: Fraction | None = None


@dataclass(frozen=True)
class LinkSpectrum:
    """Sorted spectrum of the Laplacian on a compact link (Sigma, h).

    ``cutoff`` is the completeness guarantee: every eigenvalue of the
    generating family strictly below it appears exactly once.
    ``zero_mode_missing`` flags a loaded spectrum without the lambda=0 row
    (the link may be disconnected; catalogued families never set it).
    """

    link_dim: int
    entries: tuple[SpectrumEntry, ...]
    cutoff: float
    source: str
    zero_mode_missing: bool = False

    def __post_init__(self) -> None:
        if self.link_dim < 1:
            raise ValueError(f"link_dim must be >= 1, got {self.link_dim}")
        lams = [e.lam for e in self.entries]
        if any(l < 0 for l in lams):
            raise ValueError("negative eigenvalue in spectrum")
        if any(l2 <= l1 for l1, l2 in zip(lams, lams[1:])):
            raise ValueError("entries must be strictly increasing in lambda")
        if any(e.multiplicity < 1 for e in self.entries):
            raise ValueError("multiplicities must be positive")

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([e.multiplicity for e in self.entries], dtype=int)


def sphere_eigenspace_dim(d: int, k: int) -> int:
    """Dimension of degree-k spherical harmonics on S^d."""
    if k < 0:
        return 0
    return comb(k + d, d) - (comb(k + d - 2, d) if k >= 2 else 0)


def sphere_spectrum(m: int, a: float, lambda_max: float) -> LinkSpectrum:
    """Spectrum of the round sphere S^{m-1} of radius ``a``.

    Eigenvalues k(k+m-2)/a^2 with the spherical-harmonic multiplicities,
    truncated strictly below ``lambda_max``.  Exact rationals are kept
    (a float carries an exact rational value).
    """
    if m < 3:
        raise ValueError(f"ambient dimension m must be >= 3, got m={m}")
    if a <= 0:
        raise ValueError("sphere radius must be positive")
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    d = m - 1
    a2 = Fraction(a) ** 2
    entries = []
    k = 0
    while True:
        lam_exact = Fraction(k * (k + m - 2)) / a2
        lam = float(lam_exact)
        if lam >= lambda_max:
            break
        entries.append(SpectrumEntry(lam, sphere_eigenspace_dim(d, k), lam_exact))
        k += 1
    return LinkSpectrum(
        link_dim=d,
        entries=tuple(entries),
        cutoff=lambda_max,
        source=f"RoundSphere(m={m}, radius={a})",
    )


def _exact_inverse(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Invert a small rational matrix by Gauss-Jordan; raises on singular."""
    n = len(rows)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if piv is None:
            raise ValueError("singular lattice matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [x * inv_p for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [r[n:] for r in aug]


def torus_dual_gram(lattice: np.ndarray) -> list[list[Fraction]]:
    """Exact Gram matrix D D^T of the dual lattice, rows-of-basis convention."""
    lattice = np.asarray(lattice, dtype=float)
    if lattice.ndim != 2 or lattice.shape[0] != lattice.shape[1]:
        raise ValueError("lattice must be a square matrix of basis rows")
    rows = [[Fraction(x) for x in row] for row in lattice]
    inv = _exact_inverse(rows)  # D = inv(L)^T, so D D^T = inv(L)^T inv(L)
    n = len(rows)
    return [
        [sum(inv[k][i] * inv[k][j] for k in range(n)) for j in range(n)]
        for i in range(n)
    ]


def torus_spectrum(lattice: np.ndarray, lambda_max: float) -> LinkSpectrum:
    """Spectrum of the flat torus R^d / L for the lattice with basis rows L.

    Eigenvalues |2 pi xi|^2 over dual-lattice vectors xi, aggregated by the
    exact rational quadratic form value, truncated strictly below
    ``lambda_max``.
    """
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    lattice = np.asarray(lattice, dtype=float)
    gram = torus_dual_gram(lattice)
    d = len(gram)
    four_pi2 = 4.0 * math.pi**2
    # |2 pi xi|^2 = 4 pi^2 n^T G n >= 4 pi^2 sigma_min(G) |n|^2
    gram_f = np.array([[float(x) for x in row] for row in gram])
    sigma_min = float(np.linalg.eigvalsh(gram_f)[0])
    bound = int(math.floor(math.sqrt(lambda_max / (four_pi2 * sigma_min)))) + 1
    counts: dict[Fraction, int] = {}
    for idx in np.ndindex(*([2 * bound + 1] * d)):
        n_vec = [i - bound for i in idx]
        c = sum(
            gram[i][j] * n_vec[i] * n_vec[j] for i in range(d) for j in range(d)
        )
        if float(c) * four_pi2 < lambda_max:
            counts[c] = counts.get(c, 0) + 1
    entries = tuple(
        SpectrumEntry(float(c) * four_pi2, mult, c)
        for c, mult in sorted(counts.items())
    )
    return LinkSpectrum(
        link_dim=d,
        entries=entries,
        cutoff=lambda_max,
        source=f"FlatTorus(lattice={lattice.tolist()})",
    )


def _parse_number(token: str) -> Fraction:
    if "/" in token:
        num, den = token.split("/")
        return Fraction(int(num), int(den))
    return Fraction(token)


def load_spectrum(path: str | Path, link_dim: int = 2) -> LinkSpectrum:
    """Load a spectrum file: one "lambda multiplicity" pair per line.

    '#' starts a comment; decimal or rational "p/q" literals accepted.
    Duplicates are merged by summing multiplicities; rows are re-sorted.
    A missing lambda=0 row sets ``zero_mode_missing`` instead of raising.
    """
    path = Path(path)
    counts: dict[Fraction, int] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'lambda multiplicity'")
        lam = _parse_number(parts[0])
        mult = int(parts[1])
        if lam < 0:
            raise ValueError(f"{path}:{lineno}: negative eigenvalue {lam}")
        if mult < 1:
            raise ValueError(f"{path}:{lineno}: multiplicity must be positive")
        counts[lam] = counts.get(lam, 0) + mult
    if not counts:
        raise ValueError(f"{path}: no spectrum rows found")
    entries = tuple(
        SpectrumEntry(float(lam), mult, lam) for lam, mult in sorted(counts.items())
    )
    return LinkSpectrum(
        link_dim=link_dim,
        entries=entries,
        cutoff=max(e.lam for e in entries),
        source=f"UserFile({path})",
        zero_mode_missing=entries[0].lam != 0.0,
    )


def save_spectrum(spectrum: LinkSpectrum, path: str | Path) -> None:
    """Write a spectrum file that round-trips bit-exactly through load."""
    lines = [f"# source: {spectrum.source}"]
    for e in spectrum.entries:
        if e.exact is not None and e.exact.denominator != 1 and float(e.exact) == e.lam:
            lines.append(f"{e.exact.numerator}/{e.exact.denominator} {e.multiplicity}")
        else:
            lines.append(f"{e.lam!r} {e.multiplicity}")
    Path(path).write_text("\n".join(lines) + "\n")
