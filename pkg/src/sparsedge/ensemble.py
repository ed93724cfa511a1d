"""Sparse symmetric random-matrix ensembles with exact entry cumulants.

Entries are centered with variance exactly 1/N; higher moments are suppressed
by powers of the sparsity parameter q = N^b, 0 < b < 1/2.  Two families:

* ``signed-sparse``: h = B * xi with B ~ Bernoulli(q^2/(s^2 N)) and xi uniform
  on {-s/q, +s/q}.  Symmetric three-point law; odd cumulants vanish.  The
  default scale s = sqrt(6) puts the normalized fourth cumulant near 1.
* ``centered-bernoulli``: h = (chi - p0)/sqrt(N p0(1-p0)) with
  chi ~ Bernoulli(p0), p0 = q^2/N.  The centered, rescaled adjacency entry of
  an Erdos-Renyi graph with mean degree q^2.

Specs and cumulant profiles are immutable; sampling is a pure function of
(master_seed, index), so any number of samples may be drawn concurrently.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

SIGNED_SPARSE = "signed-sparse"
CENTERED_BERNOULLI = "centered-bernoulli"
FAMILIES = (SIGNED_SPARSE, CENTERED_BERNOULLI)

DEFAULT_SCALE = math.sqrt(6.0)
MAX_CUMULANT_ORDER = 8  # nothing implemented downstream uses higher orders


class EnsembleError(ValueError):
    """Invalid ensemble specification."""


@dataclass(frozen=True)
class EnsembleSpec:
    """Law of a single matrix entry plus the sampling seed.

    ``c_min`` is the validation floor for the normalized fourth cumulant; the
    default 0.5 suits the signed-sparse family at its default scale.  The
    centered-bernoulli family has c4 ~ 1/6 and needs an explicit lower floor.
    """

    N: int
    b: float
    family: str = SIGNED_SPARSE
    scale: float = DEFAULT_SCALE
    master_seed: int = 0
    c_min: float = 0.5

    def __post_init__(self) -> None:
        if not isinstance(self.N, int) or self.N < 1:
            raise EnsembleError(f"N must be a positive integer, got {self.N!r}")
        if not 0.0 < self.b < 0.5:
            raise EnsembleError(f"b must lie in (0, 0.5), got {self.b!r}")
        if self.family not in FAMILIES:
            raise EnsembleError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if not self.scale > 0.0:
            raise EnsembleError(f"scale must be positive, got {self.scale!r}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise EnsembleError(f"master_seed must be a nonnegative integer, got {self.master_seed!r}")
        p = self.activation
        if self.family == SIGNED_SPARSE and not 0.0 < p <= 1.0:
            raise EnsembleError(f"activation probability q^2/(s^2 N) = {p:.6g} outside (0, 1]")
        if self.family == CENTERED_BERNOULLI and not 0.0 < p < 1.0:
            raise EnsembleError(f"activation probability q^2/N = {p:.6g} outside (0, 1)")

    @property
    def q(self) -> float:
        return float(self.N) ** self.b

    @property
    def activation(self) -> float:
        """Probability that the underlying Bernoulli indicator fires."""
        if self.family == SIGNED_SPARSE:
            return self.q ** 2 / (self.scale ** 2 * self.N)
        return self.q ** 2 / self.N

    def spec_id(self) -> str:
        return (f"{self.family}:N={self.N}:b={self.b!r}:scale={self.scale!r}"
                f":seed={self.master_seed}")


@dataclass(frozen=True)
class CumulantProfile:
    """Exact cumulants C_p and normalized cumulants c_p for p = 2..8.

    C_p = (p-1)! c_p / (N q^(p-2)); C_2 = 1/N exactly.
    """

    C: tuple[float, ...]
    c: tuple[float, ...]

    def cumulant(self, p: int) -> float:
        if not 2 <= p <= MAX_CUMULANT_ORDER:
            raise ValueError(f"cumulant order {p} outside 2..{MAX_CUMULANT_ORDER}")
        return self.C[p - 2]

    def normalized(self, p: int) -> float:
        if not 2 <= p <= MAX_CUMULANT_ORDER:
            raise ValueError(f"cumulant order {p} outside 2..{MAX_CUMULANT_ORDER}")
        return self.c[p - 2]


@dataclass(frozen=True, eq=False)
class MatrixSample:
    """One symmetric N x N realization.  ``seed`` is the per-sample counter."""

    entries: np.ndarray
    seed: int
    spec: EnsembleSpec

    @property
    def N(self) -> int:
        return self.entries.shape[0]


# ---------------------------------------------------------------------------
# Moments and cumulants
# ---------------------------------------------------------------------------

def entry_moments(spec: EnsembleSpec) -> list[float]:
    """Raw moments m_1..m_8 of one entry, closed form.  Index 0 unused."""
    m = [0.0] * (MAX_CUMULANT_ORDER + 1)
    if spec.family == SIGNED_SPARSE:
        p = spec.activation
        a = (spec.scale / spec.q) ** 2
        for k in range(2, MAX_CUMULANT_ORDER + 1, 2):
            m[k] = p * a ** (k // 2)
    else:
        p0 = spec.activation
        sig = 1.0 / math.sqrt(spec.N * p0 * (1.0 - p0))
        for k in range(2, MAX_CUMULANT_ORDER + 1):
            central = p0 * (1.0 - p0) * ((1.0 - p0) ** (k - 1) + (-1.0) ** k * p0 ** (k - 1))
            m[k] = central * sig ** k
    m[2] = 1.0 / spec.N  # exact by construction for both families
    return m


def _moments_to_cumulants(m: list[float]) -> list[float]:
    # C_n = m_n - sum_{k<n} binom(n-1, k-1) C_k m_{n-k}, with m_1 = C_1 = 0.
    C = [0.0] * (MAX_CUMULANT_ORDER + 1)
    for n in range(2, MAX_CUMULANT_ORDER + 1):
        acc = m[n]
        for k in range(2, n):
            acc -= math.comb(n - 1, k - 1) * C[k] * m[n - k]
        C[n] = acc
    return C


def cumulants(spec: EnsembleSpec) -> CumulantProfile:
    """Exact cumulants of the entry law up to order 8.

    Rejects specs whose activation probability is out of range (already
    enforced at construction) or whose normalized fourth cumulant falls below
    ``spec.c_min``.
    """
    m = entry_moments(spec)
    C = _moments_to_cumulants(m)
    q = spec.q
    c = [C[p] * spec.N * q ** (p - 2) / math.factorial(p - 1)
         for p in range(2, MAX_CUMULANT_ORDER + 1)]
    c4 = c[2]
    if c4 < spec.c_min:
        raise EnsembleError(
            f"normalized fourth cumulant c4 = {c4:.6g} below floor c_min = {spec.c_min:.6g}")
    return CumulantProfile(C=tuple(C[2:]), c=tuple(c))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _stream(spec: EnsembleSpec, index: int) -> np.random.Generator:
    # Counter-based: SeedSequence mixes (master_seed, index), so streams are
    # independent of draw order across workers.
    return np.random.default_rng((spec.master_seed, index))


def sample(spec: EnsembleSpec, index: int) -> MatrixSample:
    """Draw the ``index``-th matrix of the ensemble, bit-reproducibly.

    The upper triangle (diagonal included) is drawn i.i.d. from the entry law
    and mirrored, so entries[i][j] == entries[j][i] exactly.
    """
    if index < 0:
        raise EnsembleError(f"sample index must be >= 0, got {index}")
    N = spec.N
    rng = _stream(spec, index)
    n_up = N * (N + 1) // 2
    if spec.family == SIGNED_SPARSE:
        # activations first, then signs for the active slots only (row-major);
        # the draw count is derived from the first draw, so the stream stays a
        # pure function of (master_seed, index)
        active = np.flatnonzero(rng.random(n_up) < spec.activation)
        signs = rng.integers(0, 2, size=active.size) * 2 - 1
        vals = np.zeros(n_up)
        vals[active] = signs * (spec.scale / spec.q)
    else:
        p0 = spec.activation
        chi = (rng.random(n_up) < p0).astype(np.float64)
        vals = (chi - p0) / math.sqrt(N * p0 * (1.0 - p0))
    H = np.zeros((N, N))
    pos = 0
    for i in range(N):  # row-major upper-triangle fill, cheaper than fancy indexing
        H[i, i:] = vals[pos:pos + N - i]
        pos += N - i
    mirror = np.ascontiguousarray(H.T)  # same bits as adding triu(H,1).T, much faster
    np.fill_diagonal(mirror, 0.0)
    H += mirror
    return MatrixSample(entries=H, seed=index, spec=spec)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def spec_to_text(spec: EnsembleSpec) -> str:
    lines = [
        f"N = {spec.N}",
        f"b = {spec.b!r}",
        f"family = {spec.family}",
        f"scale = {spec.scale!r}",
        f"master_seed = {spec.master_seed}",
    ]
    if spec.c_min != 0.5:
        lines.append(f"c_min = {spec.c_min!r}")
    return "\n".join(lines) + "\n"


def spec_from_text(text: str) -> EnsembleSpec:
    kv: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise EnsembleError(f"malformed spec line: {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        kv[key] = val
    try:
        return EnsembleSpec(
            N=int(kv["N"]),
            b=float(kv["b"]),
            family=kv.get("family", SIGNED_SPARSE),
            scale=float(kv.get("scale", DEFAULT_SCALE)),
            master_seed=int(kv.get("master_seed", "0")),
            c_min=float(kv.get("c_min", "0.5")),
        )
    except KeyError as missing:
        raise EnsembleError(f"spec text missing key {missing}") from None


def write_sample_binary(path, sample_: MatrixSample) -> None:
    """Row-major float64 dump with an 8-byte little-endian N header."""
    H = np.ascontiguousarray(sample_.entries, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", H.shape[0]))
        fh.write(H.tobytes(order="C"))


def read_sample_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (N,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != N * N:
        raise EnsembleError(f"binary sample {path}: expected {N * N} entries, got {data.size}")
    return data.reshape(N, N).copy()
