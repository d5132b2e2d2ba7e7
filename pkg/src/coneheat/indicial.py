"""Indicial roots, exceptional sets, index functions, and Fredholm indices.

The two roots of alpha(alpha + m - 2) = lambda are the orders of homogeneous
harmonic functions on the cone; collecting them over the link spectrum gives
the exceptional set together with its even shifts, and the signed multiplicity
counters that control Fredholm indices and model-space dimensions.

All counters are integers and must not wobble: queries carry an explicit
bounded window whose completeness is guaranteed by the spectrum cutoff, and
weights within ``tol`` of an exceptional value are refused rather than
classified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .link_spectra import LinkSpectrum

__all__ = [
    "ExceptionalWeightError",
    "WindowError",
    "RootEntry",
    "IndexProfile",
    "ExtendedProfile",
    "WeightVector",
    "indicial_roots",
    "exceptional_set_D",
    "extended_set_E",
    "index_function_M",
    "index_function_N",
    "gamma_plus_minus",
    "fredholm_index",
    "model_space_dims",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9


def guard_window(gamma: float, m: int) -> tuple[float, float]:
    """Window wide enough to classify gamma and bracket it in the extended set."""
    return (2.0 - m - 1.5, max(gamma, 0.0) + 2.5)


class ExceptionalWeightError(ValueError):
    """A weight sits within tolerance of an exceptional value."""

    def __init__(self, weight: float, nearest: float, cone_index: int | None = None):
        self.weight = weight
        self.nearest = nearest
        self.cone_index = cone_index
        where = "" if cone_index is None else f" (cone {cone_index})"
        super().__init__(
            f"weight {weight!r} is within tolerance of exceptional value "
            f"{nearest!r}{where}"
        )


class WindowError(ValueError):
    """A query falls outside the profile's guaranteed-complete window."""


def indicial_roots(lam: float, m: int) -> tuple[float, float]:
    """The two real roots of alpha^2 + (m-2) alpha - lambda = 0.

    Returns (alpha_minus, alpha_plus) with alpha_minus <= 2-m < 0 <= alpha_plus.
    """
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if m < 3:
        raise ValueError(f"ambient dimension m must be >= 3, got {m}")
    h = (m - 2) / 2.0
    s = math.sqrt(h * h + lam)
    return (-h - s, -h + s)


@dataclass(frozen=True)
class RootEntry:
    alpha: float
    multiplicity: int
    lam: float  # generating eigenvalue of the link Laplacian


def _required_cutoff(window: tuple[float, float], m: int) -> float:
    wmax = max(abs(window[0]), abs(window[1]))
    return wmax * (wmax + m - 2)


@dataclass(frozen=True)
class IndexProfile:
    """Exceptional orders of one link within a query window.

    Windows are half-open [lo, hi), matching the bracket convention of the
    index counters.  ``roots`` lists every order in the window (ascending)
    with the eigenvalue multiplicity; completeness inside the window is
    guaranteed by the spectrum-cutoff precondition checked at construction.
    """

    m: int
    spectrum: LinkSpectrum
    window: tuple[float, float]
    roots: tuple[RootEntry, ...]
    tol: float = DEFAULT_TOL

    def guard(self, delta: float, cone_index: int | None = None) -> None:
        """Raise ExceptionalWeightError if delta is within tol of a root."""
        for r in self.roots:
            if abs(delta - r.alpha) <= self.tol:
                raise ExceptionalWeightError(delta, r.alpha, cone_index)

    def check_window(self, delta: float) -> None:
        lo, hi = self.window
        if not (lo <= delta < hi):
            raise WindowError(
                f"delta={delta} outside profile window [{lo}, {hi})"
            )

    def M(self, delta: float, cone_index: int | None = None) -> int:
        """Signed multiplicity counter M over the exceptional orders."""
        self.check_window(delta)
        self.guard(delta, cone_index)
        if delta < 0:
            return -sum(r.multiplicity for r in self.roots if delta < r.alpha < 0)
        return sum(r.multiplicity for r in self.roots if 0 <= r.alpha < delta)


def exceptional_set_D(
    spectrum: LinkSpectrum,
    m: int,
    window: tuple[float, float],
    tol: float = DEFAULT_TOL,
) -> IndexProfile:
    """Collect all indicial roots of the spectrum inside ``window``.

    Errors if the spectrum cutoff cannot guarantee completeness there.
    """
    lo, hi = window
    if not (lo < hi) or not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"window must be bounded with lo < hi, got {window}")
    if m < 3:
        raise ValueError(f"ambient dimension m must be >= 3, got {m}")
    need = _required_cutoff(window, m)
    if spectrum.cutoff <= need:
        raise WindowError(
            f"spectrum cutoff {spectrum.cutoff} insufficient for window "
            f"{window}: require cutoff > {need}"
        )
    roots: list[RootEntry] = []
    for e in spectrum.entries:
        a_minus, a_plus = indicial_roots(e.lam, m)
        for a in (a_minus, a_plus):
            if lo <= a < hi:
                roots.append(RootEntry(a, e.multiplicity, e.lam))
    roots.sort(key=lambda r: r.alpha)
    return IndexProfile(m=m, spectrum=spectrum, window=window, roots=tuple(roots), tol=tol)


@dataclass(frozen=True)
class EEntry:
    beta: float
    n_multiplicity: int
    # (alpha, k) ladders contributing m(alpha) at beta = alpha + 2k
    ladder: tuple[tuple[float, int, int], ...]


@dataclass(frozen=True)
class ExtendedProfile:
    """IndexProfile together with the even-shift extension and its counters."""

    profile: IndexProfile
    eset: tuple[EEntry, ...]

    @property
    def m(self) -> int:
        return self.profile.m

    @property
    def window(self) -> tuple[float, float]:
        return self.profile.window

    @property
    def tol(self) -> float:
        return self.profile.tol

    def guard(self, delta: float, cone_index: int | None = None) -> None:
        for e in self.eset:
            if abs(delta - e.beta) <= self.tol:
                raise ExceptionalWeightError(delta, e.beta, cone_index)

    def n(self, beta: float) -> int:
        """Multiplicity counter n at beta; 0 off the extended set."""
        self.profile.check_window(beta)
        for e in self.eset:
            if abs(beta - e.beta) <= self.tol:
                return e.n_multiplicity
        return 0

    def N(self, delta: float, cone_index: int | None = None) -> int:
        """Signed counter N over the extended set (as M, with n weights)."""
        self.profile.check_window(delta)
        self.guard(delta, cone_index)
        if delta < 0:
            return -sum(e.n_multiplicity for e in self.eset if delta < e.beta < 0)
        return sum(e.n_multiplicity for e in self.eset if 0 <= e.beta < delta)


def extended_set_E(profile: IndexProfile) -> ExtendedProfile:
    """Extend the root set by the even shifts alpha + 2k (alpha >= 0, k >= 1).

    Contributions landing within tol of each other are clustered; the counter
    at a cluster is the sum of the ladder multiplicities.  The window must
    reach down to 0, else ladders rooted below the window would be missed.
    """
    lo, hi = profile.window
    if lo > 0:
        raise WindowError(
            f"extended-set window {profile.window} must include 0 so that "
            "every shift ladder is generated"
        )
    contributions: list[tuple[float, int, float, int]] = []
    for r in profile.roots:
        contributions.append((r.alpha, r.multiplicity, r.alpha, 0))
        if r.alpha >= 0:
            k = 1
            while r.alpha + 2 * k < hi:
                contributions.append((r.alpha + 2 * k, r.multiplicity, r.alpha, k))
                k += 1
    contributions.sort(key=lambda c: c[0])
    entries: list[EEntry] = []
    i = 0
    while i < len(contributions):
        j = i + 1
        while j < len(contributions) and contributions[j][0] - contributions[j - 1][0] <= profile.tol:
            j += 1
        cluster = contributions[i:j]
        beta = cluster[0][0]
        entries.append(
            EEntry(
                beta=beta,
                n_multiplicity=sum(c[1] for c in cluster),
                ladder=tuple((c[2], c[3], c[1]) for c in cluster),
            )
        )
        i = j
    return ExtendedProfile(profile=profile, eset=tuple(entries))


def index_function_M(profile: IndexProfile, delta: float) -> int:
    return profile.M(delta)


def index_function_N(extended: ExtendedProfile, delta: float) -> int:
    return extended.N(delta)


def gamma_plus_minus(extended: ExtendedProfile, gamma: float) -> tuple[float, float]:
    """Nearest extended-set elements below (strict) and at-or-above gamma.

    gamma within tol of an element maps to that element on the plus side.
    Errors if the window cannot bracket gamma on both sides.
    """
    extended.profile.check_window(gamma)
    betas = [e.beta for e in extended.eset]
    tol = extended.tol
    minus_candidates = [b for b in betas if b < gamma - tol]
    plus_candidates = [b for b in betas if b >= gamma - tol]
    if not minus_candidates or not plus_candidates:
        raise WindowError(
            f"window {extended.window} too small to bracket gamma={gamma} "
            "in the extended exceptional set"
        )
    return (max(minus_candidates), min(plus_candidates))


@dataclass(frozen=True)
class WeightVector:
    """One weight per conical point; componentwise order semantics."""

    gammas: tuple[float, ...]

    def __le__(self, other: "WeightVector") -> bool:
        self._check(other)
        return all(a <= b for a, b in zip(self.gammas, other.gammas))

    def __lt__(self, other: "WeightVector") -> bool:
        self._check(other)
        return all(a < b for a, b in zip(self.gammas, other.gammas))

    def _check(self, other: "WeightVector") -> None:
        if len(self.gammas) != len(other.gammas):
            raise ValueError("weight vectors attach to different cone lists")

    def shifted(self, a: float) -> "WeightVector":
        return WeightVector(tuple(g + a for g in self.gammas))


def fredholm_index(profiles: list[IndexProfile], gamma: WeightVector) -> int:
    """Fredholm index of the Laplacian between weighted spaces: -sum_i M_i(gamma_i)."""
    if len(profiles) != len(gamma.gammas):
        raise ValueError(
            f"{len(profiles)} cone profiles but {len(gamma.gammas)} weights"
        )
    total = 0
    for i, (profile, g) in enumerate(zip(profiles, gamma.gammas)):
        total += profile.M(g, cone_index=i)
    return -total


def model_space_dims(extended: ExtendedProfile, gamma: float) -> tuple[int, int]:
    """Dimensions (harmonic part, full shifted model space) at weight gamma."""
    if gamma < 2 - extended.m:
        raise ValueError(f"gamma must be >= 2-m = {2 - extended.m}, got {gamma}")
    return (extended.profile.M(gamma), extended.N(gamma))
