"""Self-consistent spectral model built from a set of correction values.

Given Z_1..Z_ell, the model polynomial is P(z, w) = 1 + z w + sum Z_n w^(2n)
and its inverse-function form R(w) = -1/w - w - (Z_1 - 1) w - sum_{n>=2}
Z_n w^(2n-1), with P(z, w) = 0 iff R(w) = z.  The right spectral edge is
L_root = R(-tau) at the critical point R'(tau) = 0 near 1; L_series is the
same quantity at the truncated two-step series for tau.  The transform
m(z) is the P-root on the branch continued from -1/z at large Im z; Stieltjes
inversion of that branch gives the density.

Models are immutable; every operation here is a pure function, safe to call
concurrently across grid points.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .corrections import CorrectionSet

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 100
TAU_WINDOW = (0.5, 1.5)
EDGE_WINDOW = 0.5          # enforced |L_root - 2| bound
Z1_WINDOW = 0.5            # |Z_1 - 1| <= this
ZN_WINDOW = 0.5            # |Z_n| <= this for n >= 2
RESIDUAL_TOL = 1e-12       # |P(z, w)| <= tol * (1 + |z|)


class DegenerateModelError(ValueError):
    """Corrections outside the perturbative regime: no usable model."""


class BranchTrackingError(RuntimeError):
    """Persistent root ambiguity along the continuation path."""


@dataclass(frozen=True)
class SelfConsistentModel:
    ell: int
    Z: tuple[float, ...]
    tau: float
    edge_root: float     # L_root = R(-tau)
    edge_series: float   # L_series from the eps-series critical point
    eps0: float
    eps1: float

    # Polynomial and inverse-function evaluations -----------------------------

    def P(self, z: complex, w: complex) -> complex:
        acc = 1.0 + z * w
        w2 = w * w
        pw = w2
        for Zn in self.Z:
            acc += Zn * pw
            pw *= w2
        return acc

    def dP(self, z: complex, w: complex) -> complex:
        acc = z + 0.0j
        pw = w
        for n, Zn in enumerate(self.Z, start=1):
            acc += 2 * n * Zn * pw
            pw *= w * w
        return acc

    def d2P(self, w: complex) -> complex:
        acc = 0.0 + 0.0j
        pw = 1.0 + 0.0j
        for n, Zn in enumerate(self.Z, start=1):
            acc += 2 * n * (2 * n - 1) * Zn * pw
            pw *= w * w
        return acc

    def R(self, w: complex) -> complex:
        acc = -1.0 / w - w - (self.Z[0] - 1.0) * w
        pw = w ** 3
        for Zn in self.Z[1:]:
            acc -= Zn * pw
            pw *= w * w
        return acc

    def Rp(self, w: float) -> float:
        acc = 1.0 / w ** 2 - self.Z[0]
        pw = w * w
        for n, Zn in enumerate(self.Z[1:], start=2):
            acc -= (2 * n - 1) * Zn * pw
            pw *= w * w
        return acc

    def Rpp(self, w: float) -> float:
        acc = -2.0 / w ** 3
        pw = w
        for n, Zn in enumerate(self.Z[1:], start=2):
            acc -= (2 * n - 1) * (2 * n - 2) * Zn * pw
            pw *= w * w
        return acc

    def kappa_of(self, z: complex) -> float:
        """Distance of Re z to the edge set {-L_root, +L_root}."""
        x = z.real if isinstance(z, complex) else float(z)
        return min(abs(x - self.edge_root), abs(x + self.edge_root))


@dataclass(frozen=True)
class StieltjesPoint:
    z: complex
    w: complex
    residual: float


# ---------------------------------------------------------------------------
# Model construction
# ---------------------------------------------------------------------------

def build(corrections: CorrectionSet) -> SelfConsistentModel:
    """Solve for the critical point and both edge locations.

    Newton on R' from 1.0 (tolerance 1e-12 on |R'|), bisection fallback on
    (0.5, 1.5).  Raises DegenerateModelError when the corrections are outside
    the perturbative window or no acceptable critical point exists.
    """
    Z = tuple(float(v) for v in corrections.Z)
    if abs(Z[0] - 1.0) > Z1_WINDOW:
        raise DegenerateModelError(f"Z_1 = {Z[0]:.6g} outside 1 +- {Z1_WINDOW}")
    for n, Zn in enumerate(Z[1:], start=2):
        if abs(Zn) > ZN_WINDOW:
            raise DegenerateModelError(f"|Z_{n}| = {abs(Zn):.6g} exceeds {ZN_WINDOW}")

    probe = SelfConsistentModel(ell=len(Z), Z=Z, tau=1.0, edge_root=2.0,
                                edge_series=2.0, eps0=0.0, eps1=0.0)
    tau = _solve_tau(probe)
    if not TAU_WINDOW[0] < tau < TAU_WINDOW[1]:
        raise DegenerateModelError(f"critical point tau = {tau:.6g} outside {TAU_WINDOW}")
    edge_root = float(probe.R(-tau).real)
    if abs(edge_root - 2.0) > EDGE_WINDOW:
        raise DegenerateModelError(f"edge {edge_root:.6g} outside 2 +- {EDGE_WINDOW}")

    eps0 = 0.5 * ((Z[0] - 1.0) + math.fsum((2 * n - 1) * Zn for n, Zn in enumerate(Z[1:], start=2)))
    e_corr = math.fsum((2 * n - 1) * Zn * ((1.0 - eps0) ** (2 * n - 2) - 1.0)
                       for n, Zn in enumerate(Z[1:], start=2))
    eps1 = 0.5 * e_corr - eps0 ** 2 / (1.0 - eps0)
    tau_series = 1.0 - eps0 - eps1
    edge_series = float(probe.R(-tau_series).real)

    return SelfConsistentModel(ell=len(Z), Z=Z, tau=tau, edge_root=edge_root,
                               edge_series=edge_series, eps0=eps0, eps1=eps1)


def _solve_tau(model: SelfConsistentModel) -> float:
    w = 1.0
    for _ in range(NEWTON_MAX_ITER):
        rp = model.Rp(w)
        if abs(rp) <= NEWTON_TOL:
            return w
        rpp = model.Rpp(w)
        if rpp == 0.0:
            break
        step = rp / rpp
        w_next = w - step
        if not TAU_WINDOW[0] / 2 < w_next < TAU_WINDOW[1] * 2:
            break
        w = w_next
    # Bisection fallback: R' is monotone decreasing through tau in the window.
    lo, hi = TAU_WINDOW
    flo, fhi = model.Rp(lo), model.Rp(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise DegenerateModelError(
            f"R' has no sign change on {TAU_WINDOW}: R'({lo}) = {flo:.3g}, R'({hi}) = {fhi:.3g}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = model.Rp(mid)
        if abs(fm) <= NEWTON_TOL or hi - lo < 1e-16:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    raise DegenerateModelError("critical-point solve did not converge")


# ---------------------------------------------------------------------------
# Branch-tracked transform
# ---------------------------------------------------------------------------

def _poly_coeffs(model: SelfConsistentModel, z: complex) -> list[complex]:
    # Highest power first: Z_ell w^(2 ell) + ... + Z_1 w^2 + z w + 1.
    coeffs: list[complex] = []
    for Zn in reversed(model.Z):
        coeffs.append(complex(Zn))
        coeffs.append(0.0j)
    coeffs[-1] = complex(z)
    coeffs.append(1.0 + 0.0j)
    while len(coeffs) > 1 and coeffs[0] == 0:
        coeffs.pop(0)
    return coeffs


def _roots(model: SelfConsistentModel, z: complex) -> np.ndarray:
    return np.roots(_poly_coeffs(model, z))


_PATH_TOP = 1.0e6
_AMBIGUITY_FACTOR = 0.45  # nearest root must beat the runner-up by this ratio


def stieltjes(model: SelfConsistentModel, z: complex) -> StieltjesPoint:
    """Branch-tracked root of P(z, .) with Im w > 0.

    Continuation from w ~ -1/z at Im z = 1e6 down a vertical path to the
    requested z; ambiguous steps trigger path refinement with smaller ratios,
    persistent ambiguity raises BranchTrackingError.  The returned root is
    Newton-polished to |P| <= 1e-12 (1 + |z|).
    """
    z = complex(z)
    if z.imag <= 0.0:
        raise ValueError(f"stieltjes needs Im z > 0, got {z!r}")
    ratio = 0.5
    for _ in range(8):
        w = _walk_branch(model, z, ratio)
        if w is not None:
            break
        ratio = math.sqrt(ratio)
    else:
        raise BranchTrackingError(f"persistent branch ambiguity at z = {z!r}")

    for _ in range(6):
        dp = model.dP(z, w)
        if dp == 0:
            break
        w = w - model.P(z, w) / dp
    residual = abs(model.P(z, w))
    if w.imag <= 0.0:
        raise BranchTrackingError(f"continued branch left the upper half-plane at z = {z!r}")
    if residual > RESIDUAL_TOL * (1.0 + abs(z)):
        raise BranchTrackingError(f"root residual {residual:.3g} too large at z = {z!r}")
    return StieltjesPoint(z=z, w=w, residual=residual)


def _walk_branch(model: SelfConsistentModel, z: complex, ratio: float) -> complex | None:
    eta_target = z.imag
    eta = max(_PATH_TOP, eta_target * 2.0)
    zc = complex(z.real, eta)
    w = -1.0 / zc
    while True:
        roots = _roots(model, zc)
        if len(roots) == 1:
            w = complex(roots[0])
        else:
            dist = np.abs(roots - w)
            order = np.argsort(dist)
            d1, d2 = dist[order[0]], dist[order[1]]
            if d1 > _AMBIGUITY_FACTOR * d2:
                return None  # runner-up too close: refine the path
            w = complex(roots[order[0]])
        if eta <= eta_target:
            return w
        eta = max(eta * ratio, eta_target)
        zc = complex(z.real, eta)


def density(model: SelfConsistentModel, x: float, eta_floor: float = 1e-6) -> float:
    """Eta-regularized density (1/pi) Im m(x + i eta_floor)."""
    if not 1e-9 <= eta_floor <= 1e-3:
        raise ValueError(f"eta_floor {eta_floor:.3g} outside [1e-9, 1e-3]")
    return stieltjes(model, complex(x, eta_floor)).w.imag / math.pi


def control_phi(model: SelfConsistentModel, z: complex) -> float:
    """Edge control parameter: sqrt(kappa+eta) inside the support, eta/sqrt(kappa+eta) outside."""
    z = complex(z)
    if z.imag <= 0.0:
        raise ValueError(f"control_phi needs Im z > 0, got {z!r}")
    kappa = model.kappa_of(z)
    eta = z.imag
    if abs(z.real) <= model.edge_root:
        return math.sqrt(kappa + eta)
    return eta / math.sqrt(kappa + eta)


def local_law_rhs(model: SelfConsistentModel, z: complex, N: int) -> float:
    """Nine-term deterministic envelope for |m - m_model| at matrix size N."""
    z = complex(z)
    if z.imag <= 0.0:
        raise ValueError(f"local_law_rhs needs Im z > 0, got {z!r}")
    eta = z.imag
    kappa = model.kappa_of(z)
    phi = control_phi(model, z)
    s = math.sqrt(kappa + eta)
    neta = N * eta
    terms = (
        (phi / neta) ** 0.5,
        s ** 0.25 * (phi / neta) ** 0.375,
        N ** -0.25 * (phi / neta) ** 0.125,
        s ** 0.25 * (phi / (N * neta)) ** 0.25,
        N ** -0.5 * eta ** -0.25,
        1.0 / neta,
        s ** 0.4 / neta ** 0.6,
        N ** (-2.0 / 7.0) * neta ** (-1.0 / 7.0),
        s ** (1.0 / 3.0) / neta ** (2.0 / 3.0),
    )
    return math.fsum(terms)


def semicircle_model() -> SelfConsistentModel:
    """The uncorrected limit Z = (1, 0): tau = 1, both edges at 2."""
    return build(CorrectionSet(ell=2, Z=(1.0, 0.0), X=0.0))


def semicircle_stieltjes(z: complex) -> complex:
    """Closed form (-z +- sqrt(z^2 - 4))/2: the root with Im > 0.

    The two P-roots multiply to 1, so exactly one lies in the upper half-plane
    for Im z > 0.
    """
    z = complex(z)
    s = cmath.sqrt(z * z - 4.0)
    m1 = 0.5 * (-z + s)
    return m1 if m1.imag > 0 else 0.5 * (-z - s)
