"""Exact-cone computational model.

The manifold is the exact cone dr^2 + r^2 h over a catalogued link, truncated
at an outer radius with a homogeneous Dirichlet condition.  This module holds
the radius function, the C^2 cutoff, link geometry (distances and eigenspace
projection kernels via addition theorems), the discrete-asymptotics bases of
cone-harmonic profiles and their even shifts, and the boundary-defining
functions that organize heat-kernel asymptotics.

Eigenfunctions are never evaluated individually: bases carry symbolic mode
ids, and pointwise synthesis goes through the eigenspace kernels, with the
L^2(Sigma, h)-unit normalization convention baked into those kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .indicial import (
    ExtendedProfile,
    IndexProfile,
    exceptional_set_D,
    extended_set_E,
)
from .link_spectra import (
    LinkSpectrum,
    sphere_eigenspace_dim,
    sphere_spectrum,
    torus_spectrum,
)

__all__ = [
    "CutoffChi",
    "radius_function",
    "RoundSphereLink",
    "FlatTorusLink",
    "ConeModel",
    "BoundaryDefiningValues",
    "evaluate_bdf",
    "BasisElement",
    "AsymptoticsBasis",
    "harmonic_basis",
    "asymptotics_basis",
    "cone_laplacian_on_basis",
    "cutoff_extension",
    "commutator_terms",
]


def radius_function(r):
    """rho = min(r, 1), valued in (0, 1]; equal to r near the tip."""
    return np.minimum(r, 1.0)


@dataclass(frozen=True)
class CutoffChi:
    """C^2 monotone bump: 1 below scale/4, 0 above scale/2, quintic join."""

    scale: float

    def _s(self, r):
        lo, hi = self.scale / 4.0, self.scale / 2.0
        return np.clip((np.asarray(r, dtype=float) - lo) / (hi - lo), 0.0, 1.0)

    def __call__(self, r):
        s = self._s(r)
        return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2)

    def d1(self, r):
        s = self._s(r)
        inner = np.where((s > 0) & (s < 1), -30.0 * s**2 * (1.0 - s) ** 2, 0.0)
        return inner / (self.scale / 4.0)

    def d2(self, r):
        s = self._s(r)
        inner = np.where(
            (s > 0) & (s < 1), -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s), 0.0
        )
        return inner / (self.scale / 4.0) ** 2


class LinkGeometry(Protocol):
    """A catalogued link: spectrum, distances, eigenspace kernels."""

    dim: int

    def volume(self) -> float: ...

    def spectrum(self, lambda_max: float) -> LinkSpectrum: ...

    def distance(self, p: np.ndarray, q: np.ndarray) -> float: ...

    def eigenspace_kernels(self, p: np.ndarray, q: np.ndarray, count: int) -> np.ndarray: ...


def _sphere_surface_area(d: int) -> float:
    # vol(S^d) = 2 pi^{(d+1)/2} / Gamma((d+1)/2)
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def gegenbauer_ratio(order: float, kmax: int, t: float) -> np.ndarray:
    """C_k^order(t) / C_k^order(1) for k = 0..kmax by forward recurrence.

    The normalized values are bounded by 1 in magnitude, so the recurrence is
    run on the raw polynomials and divided by the (positive, growing) values
    at t = 1 computed alongside.
    """
    vals = np.empty(kmax + 1)
    ones = np.empty(kmax + 1)
    c_prev, c_here = 1.0, 2.0 * order * t
    o_prev, o_here = 1.0, 2.0 * order
    vals[0], ones[0] = c_prev, o_prev
    if kmax >= 1:
        vals[1], ones[1] = c_here, o_here
    for k in range(1, kmax):
        c_next = (2.0 * (k + order) * t * c_here - (k + 2.0 * order - 1.0) * c_prev) / (k + 1)
        o_next = (2.0 * (k + order) * o_here - (k + 2.0 * order - 1.0) * o_prev) / (k + 1)
        vals[k + 1], ones[k + 1] = c_next, o_next
        c_prev, c_here = c_here, c_next
        o_prev, o_here = o_here, o_next
    return vals / ones


@dataclass(frozen=True)
class RoundSphereLink:
    """Round sphere S^{m-1} of a given radius; points are unit vectors in R^m."""

    m: int
    radius: float = 1.0

    @property
    def dim(self) -> int:
        return self.m - 1

    def volume(self) -> float:
        return _sphere_surface_area(self.dim) * self.radius**self.dim

    def spectrum(self, lambda_max: float) -> LinkSpectrum:
        return sphere_spectrum(self.m, self.radius, lambda_max)

    def _cos_angle(self, p: np.ndarray, q: np.ndarray) -> float:
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        c = float(p @ q / (np.linalg.norm(p) * np.linalg.norm(q)))
        return min(1.0, max(-1.0, c))

    def distance(self, p: np.ndarray, q: np.ndarray) -> float:
        return self.radius * math.acos(self._cos_angle(p, q))

    def eigenspace_kernels(self, p: np.ndarray, q: np.ndarray, count: int) -> np.ndarray:
        """Projection kernels Phi_k(p, q) for degrees k = 0..count-1.

        Addition theorem: the degree-k eigenspace kernel on the unit sphere is
        dim_k * C_k^{(d-1)/2}(cos theta) / (C_k^{(d-1)/2}(1) * vol), rescaled
        by radius^{-d} for radius a.
        """
        d = self.dim
        t = self._cos_angle(p, q)
        ratios = gegenbauer_ratio((d - 1) / 2.0, count - 1, t)
        dims = np.array([sphere_eigenspace_dim(d, k) for k in range(count)], dtype=float)
        return dims * ratios / self.volume()

    def point(self, angle: float) -> np.ndarray:
        """Unit vector at polar angle from the north pole (first axis plane)."""
        v = np.zeros(self.m)
        v[0] = math.cos(angle)
        v[1] = math.sin(angle)
        return v


@dataclass(frozen=True)
class FlatTorusLink:
    """Flat torus R^d / L with basis rows L; points are coordinate vectors."""

    lattice: tuple[tuple[float, ...], ...]

    @classmethod
    def from_matrix(cls, lattice) -> "FlatTorusLink":
        arr = np.asarray(lattice, dtype=float)
        return cls(tuple(tuple(row) for row in arr))

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.lattice, dtype=float)

    @property
    def dim(self) -> int:
        return len(self.lattice)

    def volume(self) -> float:
        return abs(float(np.linalg.det(self.matrix)))

    def spectrum(self, lambda_max: float) -> LinkSpectrum:
        return torus_spectrum(self.matrix, lambda_max)

    def _dual_orbits(self, lambda_max: float) -> list[tuple[float, np.ndarray]]:
        spec = self.spectrum(lambda_max)
        dual = np.linalg.inv(self.matrix).T
        d = self.dim
        sigma_min = float(np.linalg.eigvalsh(dual @ dual.T)[0])
        bound = int(math.floor(math.sqrt(lambda_max / (4 * math.pi**2 * sigma_min)))) + 1
        orbits: dict[int, list[np.ndarray]] = {i: [] for i in range(len(spec.entries))}
        lams = spec.lambdas
        for idx in np.ndindex(*([2 * bound + 1] * d)):
            n = np.array(idx) - bound
            xi = n @ dual
            lam = float(4 * math.pi**2 * xi @ xi)
            if lam < lambda_max:
                i = int(np.argmin(np.abs(lams - lam)))
                if abs(lams[i] - lam) < 1e-9 * max(1.0, lam):
                    orbits[i].append(xi)
        return [(lams[i], np.array(v)) for i, v in orbits.items()]

    def distance(self, p: np.ndarray, q: np.ndarray) -> float:
        delta = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
        lat = self.matrix
        best = math.inf
        for idx in np.ndindex(*([5] * self.dim)):
            n = np.array(idx) - 2
            best = min(best, float(np.linalg.norm(delta - n @ lat)))
        return best

    def eigenspace_kernels(self, p: np.ndarray, q: np.ndarray, count: int) -> np.ndarray:
        """Phi_lambda(p, q) = sum_xi cos(2 pi xi . (p-q)) / vol over the orbit."""
        orbits = self._dual_orbits(self._cutoff_for(count))
        delta = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
        out = np.zeros(count)
        for i in range(min(count, len(orbits))):
            _, xis = orbits[i]
            out[i] = float(np.sum(np.cos(2 * math.pi * (xis @ delta)))) / self.volume()
        return out

    def _cutoff_for(self, count: int) -> float:
        spec = self.spectrum(4 * math.pi**2 * (count + 2) ** 2)
        if len(spec.entries) < count:
            raise ValueError(f"cannot enumerate {count} torus eigenvalue orbits")
        return spec.entries[count - 1].lam * (1 + 1e-12) + 1e-9


@dataclass(frozen=True)
class ConeModel:
    """Truncated exact cone over a catalogued link.

    The metric is exactly dr^2 + r^2 h on (0, R_out); the cutoff is 1 on
    r <= R_out/4 and 0 from R_out/2 outward.
    """

    m: int
    link: RoundSphereLink | FlatTorusLink
    spectrum: LinkSpectrum
    R_out: float
    chi: CutoffChi

    @classmethod
    def build(cls, link, R_out: float, lambda_max: float) -> "ConeModel":
        m = link.dim + 1
        if m < 3:
            raise ValueError(f"ambient dimension m must be >= 3, got m={m}")
        if R_out <= 0:
            raise ValueError("R_out must be positive")
        return cls(
            m=m,
            link=link,
            spectrum=link.spectrum(lambda_max),
            R_out=R_out,
            chi=CutoffChi(R_out),
        )

    def rho(self, r):
        return radius_function(r)

    def profile(self, window: tuple[float, float]) -> IndexProfile:
        return exceptional_set_D(self.spectrum, self.m, window)

    def extended_profile(self, window: tuple[float, float]) -> ExtendedProfile:
        return extended_set_E(self.profile(window))

    def cone_distance(self, x, y) -> float:
        """Exact cone distance; link distances are capped at pi."""
        (sigma, r), (sigma_p, r_p) = x, y
        dh = min(self.link.distance(sigma, sigma_p), math.pi)
        d2 = r * r + r_p * r_p - 2.0 * r * r_p * math.cos(dh)
        return math.sqrt(max(d2, 0.0))


@dataclass(frozen=True)
class BoundaryDefiningValues:
    bff: float
    tf: float
    lb: float
    rb: float
    tb: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.bff, self.tf, self.lb, self.rb, self.tb)


def evaluate_bdf(model: ConeModel, t: float, x, y) -> BoundaryDefiningValues:
    """Boundary-defining functions of the heat space at (t, x, y).

    At the degenerate corner t = 0, x = y the t-parabolic ratio is defined by
    its limit along t > 0 (value 1).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    rho_x = float(model.rho(x[1]))
    rho_y = float(model.rho(y[1]))
    d = model.cone_distance(x, y)
    bff = math.sqrt(t + rho_x**2 + rho_y**2)
    tf = math.sqrt(t + d * d) / bff if bff > 0 else 0.0
    lb = rho_x / bff if bff > 0 else 0.0
    rb = rho_y / bff if bff > 0 else 0.0
    tb = math.sqrt(t) / math.sqrt(t + d * d) if t + d * d > 0 else 1.0
    return BoundaryDefiningValues(bff=bff, tf=tf, lb=lb, rb=rb, tb=tb)


@dataclass(frozen=True)
class BasisElement:
    """One model-space profile r^{alpha + 2k} phi_mode (phi symbolic)."""

    alpha: float
    k: int
    lam: float
    eigen_index: int
    normalization: float = 1.0

    @property
    def order(self) -> float:
        return self.alpha + 2 * self.k


@dataclass(frozen=True)
class AsymptoticsBasis:
    gamma: float
    elements: tuple[BasisElement, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def orders(self) -> list[float]:
        return [e.order for e in self.elements]


def harmonic_basis(model: ConeModel, profile: IndexProfile, gamma: float) -> AsymptoticsBasis:
    """Basis of homogeneous harmonic profiles of order in [0, gamma)."""
    if gamma < 2 - model.m:
        raise ValueError(f"gamma must be >= 2-m = {2 - model.m}")
    profile.guard(gamma)
    elements = []
    for root in profile.roots:
        if 0 <= root.alpha < gamma:
            for j in range(root.multiplicity):
                elements.append(BasisElement(root.alpha, 0, root.lam, j))
    elements.sort(key=lambda e: (e.order, e.lam, e.eigen_index))
    return AsymptoticsBasis(gamma=gamma, elements=tuple(elements))


def asymptotics_basis(model: ConeModel, extended: ExtendedProfile, gamma: float) -> AsymptoticsBasis:
    """Model-space basis: harmonic profiles and their even shifts below gamma."""
    if gamma < 2 - model.m:
        raise ValueError(f"gamma must be >= 2-m = {2 - model.m}")
    extended.guard(gamma)
    elements = []
    for root in extended.profile.roots:
        if root.alpha < 0:
            continue
        k = 0
        while root.alpha + 2 * k < gamma:
            for j in range(root.multiplicity):
                elements.append(BasisElement(root.alpha, k, root.lam, j))
            k += 1
    elements.sort(key=lambda e: (e.order, e.lam, e.eigen_index, e.k))
    return AsymptoticsBasis(gamma=gamma, elements=tuple(elements))


def cone_laplacian_on_basis(
    element: BasisElement, m: int
) -> tuple[float, BasisElement | None]:
    """Cone Laplacian on r^{alpha+2k} phi: a single element of two orders lower.

    Returns (coefficient, target element); harmonic elements (k = 0) map to
    exactly zero.
    """
    if element.k == 0:
        return (0.0, None)
    beta = element.order
    coef = beta * (beta + m - 2) - element.alpha * (element.alpha + m - 2)
    target = BasisElement(
        element.alpha,
        element.k - 1,
        element.lam,
        element.eigen_index,
        element.normalization,
    )
    return (coef, target)


def cutoff_extension(model: ConeModel, element: BasisElement) -> Callable[[np.ndarray], np.ndarray]:
    """Radial part of the cutoff extension chi(r) r^{alpha+2k} of an element.

    The angular factor is symbolic (the element's mode id); synthesis against
    eigenspace kernels happens at the caller.
    """

    def handle(r):
        r = np.asarray(r, dtype=float)
        return model.chi(r) * r**element.order * element.normalization

    return handle


def commutator_terms(model: ConeModel, element: BasisElement, r) -> np.ndarray:
    """Radial part of Delta(chi v) - chi Delta v for v = r^{alpha+2k} phi.

    Every term carries chi' or chi'', so the support is [R_out/4, R_out/2].
    """
    r = np.asarray(r, dtype=float)
    beta = element.order
    return r ** (beta - 1) * (
        model.chi.d2(r) * r + (2 * beta + model.m - 1) * model.chi.d1(r)
    )
