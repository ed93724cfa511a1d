import math

import numpy as np
import pytest

from sparsedge.ensemble import EnsembleSpec, MatrixSample, sample
from sparsedge.spectral import (check_resolvent_identity, check_ward,
                                count_in_interval, eigen, empirical_stieltjes,
                                extremal_eigenvalues, resolvent, tridiagonalize)
from sparsedge.scm import build
from sparsedge.corrections import compute_Z


def toy_sample(H: np.ndarray) -> MatrixSample:
    spec = EnsembleSpec(N=H.shape[0], b=0.25, master_seed=0)
    return MatrixSample(entries=np.asarray(H, dtype=float), seed=0, spec=spec)


# ---------------------------------------------------------------------------
# eigen
# ---------------------------------------------------------------------------

def test_two_by_two_offdiagonal():
    spec = eigen(toy_sample(np.array([[0.0, 0.7], [0.7, 0.0]])))
    assert spec.eigenvalues == pytest.approx([0.7, -0.7], abs=1e-14)


def test_diagonal_matrix():
    spec = eigen(toy_sample(np.diag([1.0, 2.0, 3.0])))
    assert spec.eigenvalues == pytest.approx([3.0, 2.0, 1.0], abs=0.0)


def test_trace_invariance():
    spec_in = EnsembleSpec(N=50, b=0.3, master_seed=4)
    smp = sample(spec_in, 0)
    spec = eigen(smp)
    assert math.fsum(spec.eigenvalues) == pytest.approx(np.trace(smp.entries), abs=1e-10)


def test_ordering_and_reconstruction():
    spec_in = EnsembleSpec(N=80, b=0.3, master_seed=1)
    smp = sample(spec_in, 3)
    spec = eigen(smp, want_vectors=True)
    assert np.all(np.diff(spec.eigenvalues) <= 0)
    recon = (spec.eigenvectors * spec.eigenvalues) @ spec.eigenvectors.T
    err = np.max(np.abs(recon - smp.entries))
    assert err <= 1e-9 * np.max(np.abs(smp.entries))


def test_dense_size_limit():
    H = np.zeros((8193, 8193))
    with pytest.raises(ValueError):
        eigen(toy_sample(H))


def test_extremal_matches_full_spectrum():
    spec_in = EnsembleSpec(N=120, b=0.3, master_seed=2)
    smp = sample(spec_in, 1)
    top = extremal_eigenvalues(smp, 4)
    full = eigen(smp).eigenvalues
    assert top == pytest.approx(full[:4], abs=1e-11)


def test_sturm_count_against_spectrum():
    spec_in = EnsembleSpec(N=90, b=0.3, master_seed=6)
    smp = sample(spec_in, 5)
    d, e = tridiagonalize(smp)
    lams = eigen(smp).eigenvalues
    rng = np.random.default_rng(17)
    for _ in range(100):
        a, b = sorted(rng.uniform(-3.0, 3.0, size=2))
        expected = int(np.count_nonzero((lams > a) & (lams <= b)))
        assert count_in_interval(d, e, a, b) == expected


# ---------------------------------------------------------------------------
# empirical transform
# ---------------------------------------------------------------------------

def test_empirical_stieltjes_single_eigenvalue():
    smp = toy_sample(np.array([[0.3]]))
    spec = eigen(smp)
    got = empirical_stieltjes(spec, 1j)
    assert got == pytest.approx((0.3 + 1j) / 1.09, rel=1e-14)


def test_empirical_stieltjes_large_y_asymptotics():
    spec_in = EnsembleSpec(N=40, b=0.3, master_seed=9)
    spec = eigen(sample(spec_in, 0))
    for y in (1e3, 1e5):
        val = empirical_stieltjes(spec, complex(0.0, y))
        assert val == pytest.approx(-1.0 / complex(0.0, y), rel=1e-4)


def test_empirical_stieltjes_herglotz():
    spec_in = EnsembleSpec(N=40, b=0.3, master_seed=9)
    spec = eigen(sample(spec_in, 1))
    rng = np.random.default_rng(0)
    for _ in range(25):
        z = complex(rng.uniform(-3, 3), rng.uniform(1e-6, 2.0))
        assert empirical_stieltjes(spec, z).imag > 0.0
    with pytest.raises(ValueError):
        empirical_stieltjes(spec, complex(0.0, -1.0))


# ---------------------------------------------------------------------------
# exact identities
# ---------------------------------------------------------------------------

def test_ward_small_matrix():
    spec_in = EnsembleSpec(N=3, b=0.3, master_seed=12)
    smp = sample(spec_in, 0)
    assert check_ward(smp, complex(2.0, 0.1), 0) <= 1e-10


def test_ward_single_site():
    smp = toy_sample(np.array([[0.4]]))
    assert check_ward(smp, complex(0.1, 0.5), 0) <= 1e-15


def test_ward_small_eta_contract():
    spec_in = EnsembleSpec(N=100, b=0.3, master_seed=13)
    smp = sample(spec_in, 2)
    eta = 1e-4
    resid = check_ward(smp, complex(1.0, eta), 7)
    assert resid <= 1e-8 / eta ** 2


def test_resolvent_identity_at_i():
    spec_in = EnsembleSpec(N=25, b=0.3, master_seed=14)
    smp = sample(spec_in, 0)
    for i in (0, 7, 24):
        assert check_resolvent_identity(smp, 1j, i) <= 1e-11


def test_resolvent_identity_single_site():
    # N=1: G = 1/(h - z); the right side collapses to G by hand
    smp = toy_sample(np.array([[0.25]]))
    assert check_resolvent_identity(smp, complex(0.3, 0.7), 0) <= 1e-15


def test_resolvent_identity_near_edge_contract():
    spec_in = EnsembleSpec(N=200, b=0.3, master_seed=15)
    smp = sample(spec_in, 4)
    model = build(compute_Z(smp, ell=2))
    eta = float(spec_in.N) ** (-2.0 / 3.0)
    z = complex(model.edge_series, eta)
    resid = check_resolvent_identity(smp, z, 11)
    assert resid <= 1e-9 * (1.0 + 1.0 / eta ** 2)


def test_spectrum_binary_roundtrip(tmp_path):
    from sparsedge.spectral import read_spectrum_binary, write_spectrum_binary
    spec_in = EnsembleSpec(N=20, b=0.3, master_seed=8)
    spectrum = eigen(sample(spec_in, 0), want_vectors=True)
    path = tmp_path / "spec.bin"
    write_spectrum_binary(path, spectrum)
    back = read_spectrum_binary(path)
    assert np.array_equal(back.eigenvalues, spectrum.eigenvalues)
    assert np.array_equal(back.eigenvectors, spectrum.eigenvectors)


def test_resolvent_full_matrix_consistency():
    spec_in = EnsembleSpec(N=30, b=0.3, master_seed=16)
    smp = sample(spec_in, 0)
    z = complex(0.5, 0.2)
    G = resolvent(smp, z)
    eye = (smp.entries - z * np.eye(30)) @ G
    assert np.max(np.abs(eye - np.eye(30))) <= 1e-12
