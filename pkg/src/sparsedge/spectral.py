"""Dense symmetric eigensolver, empirical transform, and exact-identity checks.

Full spectra go through LAPACK's orthogonal tridiagonalization + implicit
shift path (numpy.linalg.eigh); the extremal-only route reduces to tridiagonal
form and bisects for the top eigenvalues, which is cheaper per sample when
eigenvectors are not needed.  A hand-rolled Sturm-sequence count on the
tridiagonal form serves as the independent cross-check for eigenvalue counts.

The Ward identity sum_l |G_il|^2 = Im G_ii / eta and the diagonal resolvent
identity are exact algebra for the true resolvent; their residuals here are
pure floating-point noise and are used as numeric self-checks.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .ensemble import MatrixSample, write_sample_binary

MAX_DENSE_N = 8192


class EigensolverError(RuntimeError):
    """LAPACK failed to converge; the offending matrix is dumped to disk."""


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Eigenvalues sorted descending; eigenvector columns aligned when kept."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    @property
    def N(self) -> int:
        return self.eigenvalues.shape[0]


def eigen(sample_: MatrixSample, want_vectors: bool = False) -> SpectrumResult:
    """Full spectrum of one sample (dense path, N <= 8192)."""
    H = sample_.entries
    if H.shape[0] > MAX_DENSE_N:
        raise ValueError(f"dense path supports N <= {MAX_DENSE_N}, got {H.shape[0]}")
    try:
        if want_vectors:
            vals, vecs = np.linalg.eigh(H)
            return SpectrumResult(eigenvalues=vals[::-1].copy(),
                                  eigenvectors=vecs[:, ::-1].copy())
        vals = np.linalg.eigvalsh(H)
        return SpectrumResult(eigenvalues=vals[::-1].copy())
    except np.linalg.LinAlgError as err:
        fd, path = tempfile.mkstemp(prefix="sparsedge_eigfail_", suffix=".bin")
        os.close(fd)
        write_sample_binary(path, sample_)
        raise EigensolverError(f"eigensolver did not converge; matrix dumped to {path}") from err


def tridiagonalize(sample_: MatrixSample) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal reduction to tridiagonal form: diagonal d, off-diagonal e."""
    return tridiagonalize_array(sample_.entries)


def tridiagonalize_array(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    _, d, e, _, info = sla.lapack.dsytrd(H)
    if info != 0:
        raise EigensolverError(f"tridiagonal reduction failed (info = {info})")
    return d, e


def extremal_eigenvalues(sample_: MatrixSample, k: int) -> np.ndarray:
    """Top k eigenvalues, descending, via bisection on the tridiagonal form."""
    return top_eigenvalues(sample_.entries, k)


def top_eigenvalues(H: np.ndarray, k: int) -> np.ndarray:
    N = H.shape[0]
    if not 1 <= k <= N:
        raise ValueError(f"need 1 <= k <= N, got k = {k}, N = {N}")
    if N == 1:
        return H[0, :1].copy()
    # syevx: blocked tridiagonal reduction + bisection for the selected range
    vals = sla.eigh(H, eigvals_only=True, subset_by_index=(N - k, N - 1),
                    driver="evx", check_finite=False)
    return vals[::-1].copy()


def sturm_count_below(d: np.ndarray, e: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the tridiagonal matrix strictly below x.

    Shifted LDL^T pivot signs; zero pivots are nudged by a relative epsilon,
    which only matters on a measure-zero set of shifts.
    """
    n = len(d)
    scale = float(np.max(np.abs(d)) + (np.max(np.abs(e)) if n > 1 else 0.0)) or 1.0
    tiny = 1e-300 * scale
    t = d[0] - x
    count = 1 if t < 0 else 0
    for i in range(1, n):
        if t == 0.0:
            t = tiny
        t = (d[i] - x) - e[i - 1] * e[i - 1] / t
        if t < 0:
            count += 1
    return count


def count_in_interval(d: np.ndarray, e: np.ndarray, a: float, b: float) -> int:
    """Eigenvalue count in (a, b] from Sturm sequences."""
    return sturm_count_below(d, e, b) - sturm_count_below(d, e, a)


# ---------------------------------------------------------------------------
# Empirical transform and resolvent identities
# ---------------------------------------------------------------------------

def empirical_stieltjes(spectrum: SpectrumResult, z: complex) -> complex:
    """(1/N) sum_i 1/(lambda_i - z) for Im z > 0."""
    z = complex(z)
    if z.imag <= 0.0:
        raise ValueError(f"empirical_stieltjes needs Im z > 0, got {z!r}")
    return complex(np.mean(1.0 / (spectrum.eigenvalues - z)))


def write_spectrum_binary(path, spectrum: SpectrumResult) -> None:
    """Debug dump: 8-byte N header, eigenvalues, then eigenvector columns."""
    N = spectrum.N
    with open(path, "wb") as fh:
        fh.write(np.uint64(N).tobytes())
        fh.write(np.ascontiguousarray(spectrum.eigenvalues, dtype=np.float64).tobytes())
        if spectrum.eigenvectors is not None:
            fh.write(np.ascontiguousarray(spectrum.eigenvectors, dtype=np.float64).tobytes())


def read_spectrum_binary(path) -> SpectrumResult:
    with open(path, "rb") as fh:
        N = int(np.frombuffer(fh.read(8), dtype="<u8")[0])
        vals = np.frombuffer(fh.read(8 * N), dtype="<f8").copy()
        rest = np.frombuffer(fh.read(), dtype="<f8")
    vecs = rest.reshape(N, N).copy() if rest.size == N * N else None
    return SpectrumResult(eigenvalues=vals, eigenvectors=vecs)


def _cfsum(values: np.ndarray) -> complex:
    # compensated summation for the N^2-term identity sums
    flat = values.ravel()
    return complex(math.fsum(flat.real), math.fsum(flat.imag))


def resolvent(sample_: MatrixSample, z: complex,
              spectrum: SpectrumResult | None = None) -> np.ndarray:
    """Full resolvent (H - z)^{-1} from the eigendecomposition."""
    if spectrum is None or spectrum.eigenvectors is None:
        spectrum = eigen(sample_, want_vectors=True)
    V = spectrum.eigenvectors
    inv = 1.0 / (spectrum.eigenvalues - complex(z))
    return (V * inv) @ V.T


def check_ward(sample_: MatrixSample, z: complex, row: int) -> float:
    """Residual |sum_l |G_rl|^2 - Im G_rr / eta| for the exact resolvent."""
    z = complex(z)
    if z.imag <= 0.0:
        raise ValueError(f"check_ward needs Im z > 0, got {z!r}")
    spectrum = eigen(sample_, want_vectors=True)
    V = spectrum.eigenvectors
    inv = 1.0 / (spectrum.eigenvalues - z)
    g_row = (V[row] * inv) @ V.T
    lhs = math.fsum(np.abs(g_row) ** 2)
    rhs = g_row[row].imag / z.imag
    return abs(lhs - rhs)


def check_resolvent_identity(sample_: MatrixSample, z: complex, i: int) -> float:
    """Residual of G_ii = m + (G_ii/N) sum_xy h_xy G_yx - m sum_x h_ix G_xi."""
    z = complex(z)
    if z.imag <= 0.0:
        raise ValueError(f"check_resolvent_identity needs Im z > 0, got {z!r}")
    H = sample_.entries
    N = sample_.N
    G = resolvent(sample_, z)
    m = _cfsum(np.diag(G)) / N
    trace_hg = _cfsum(H * G)            # G symmetric, so sum h_xy G_yx = sum(H * G)
    row_term = _cfsum(H[i] * G[:, i])   # sum_x h_ix G_xi
    rhs = m + G[i, i] / N * trace_hg - m * row_term
    return abs(G[i, i] - rhs)
