"""Shared generators for the test suite."""
import numpy as np

from entwine.ensembles import Ensemble
from entwine.linalg import BipartiteVector

S2 = np.sqrt(0.5)
PHI_PLUS = BipartiteVector(2, 2, [S2, 0, 0, S2])
PHI_MINUS = BipartiteVector(2, 2, [S2, 0, 0, -S2])
KET00 = BipartiteVector(2, 2, [1, 0, 0, 0])
KET01 = BipartiteVector(2, 2, [0, 1, 0, 0])


def complex_gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unit(rng, size):
    v = complex_gaussian(rng, size)
    return v / np.linalg.norm(v)


def random_state(rng, dim_a, dim_b):
    return BipartiteVector(dim_a, dim_b, random_unit(rng, dim_a * dim_b))


def random_hermitian(rng, d):
    h = complex_gaussian(rng, (d, d))
    return 0.5 * (h + h.conj().T)


def random_positive(rng, d, rank=None):
    rank = d if rank is None else rank
    g = complex_gaussian(rng, (d, rank))
    return g @ g.conj().T


def random_unitary(rng, d):
    q, r = np.linalg.qr(complex_gaussian(rng, (d, d)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_rank2_two_qubit(seed):
    """Seeded random rank-2 two-qubit density matrix (complex Gaussian mixture)."""
    rng = np.random.default_rng(seed)
    v = complex_gaussian(rng, (2, 4))
    rho = v.T @ v.conj()
    return rho / np.trace(rho).real


def random_ensemble(rng, n, dim_a, dim_b, uniform=False):
    v = complex_gaussian(rng, (n, dim_a * dim_b))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if uniform:
        w = np.full(n, 1.0 / n)
    else:
        w = rng.dirichlet(np.ones(n))
    return Ensemble(dim_a, dim_b, v * np.sqrt(w)[:, None])


def entropy_functional(a):
    """Reference value of ``-tr[A log2(A / tr A)]`` straight from eigenvalues."""
    lam = np.linalg.eigvalsh(a)
    lam = lam[lam > 1e-300]
    tr = lam.sum()
    return float(-np.sum(lam * np.log2(lam / tr)))
