"""Decompositions of mixed states into unnormalized ("tilde") pure vectors.

An ensemble ``{x_i}`` represents ``rho = sum_i |x_i><x_i|``; the weight of
member ``i`` is ``|x_i|^2``. Two ensembles realize the same state exactly when
they are related by a right unitary ``U`` (``U^dagger U = 1``) through
``y_j = sum_i U_ji x_i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeError, ValidationError
from .linalg import EPS_KER, BipartiteVector, batch_homog_entanglement, herm_eig

#: Members with squared norm at or below this are dropped at construction.
EPS_WEIGHT = 1e-14

_UNITARITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Ordered list of unnormalized bipartite vectors, stored row-wise.

    ``vectors`` has shape ``(n, dim_a * dim_b)``. Zero-weight members are
    pruned on construction, so every stored row has squared norm above
    :data:`EPS_WEIGHT`.
    """

    dim_a: int
    dim_b: int
    vectors: np.ndarray

    def __post_init__(self):
        d = self.dim_a * self.dim_b
        vecs = np.array(self.vectors, dtype=complex)
        if vecs.size == 0:
            vecs = vecs.reshape(0, d)
        if vecs.ndim != 2 or vecs.shape[1] != d:
            raise ShapeError(f"vectors must have shape (n, {d}), got {vecs.shape}")
        if not np.all(np.isfinite(vecs)):
            raise ValidationError("ensemble vectors must be finite")
        norms = np.einsum("ij,ij->i", vecs.conj(), vecs).real
        vecs = vecs[norms > EPS_WEIGHT]
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def from_members(cls, members: Sequence[BipartiteVector]) -> "Ensemble":
        if not members:
            raise ValidationError("need at least one member to infer the split")
        dims = members[0].dims
        for m in members:
            if m.dims != dims:
                raise ShapeError(f"mixed bipartite splits: {dims} vs {m.dims}")
        return cls(dims[0], dims[1], np.stack([m.amplitudes for m in members]))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    def __len__(self):
        return self.count

    @property
    def weights(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.vectors.conj(), self.vectors).real

    @property
    def states(self) -> np.ndarray:
        """Normalized member states as rows."""
        return self.vectors / np.sqrt(self.weights)[:, None]

    def members(self) -> list[BipartiteVector]:
        return [BipartiteVector(self.dim_a, self.dim_b, v) for v in self.vectors]

    def normalized_members(self) -> list[BipartiteVector]:
        return [BipartiteVector(self.dim_a, self.dim_b, v) for v in self.states]

    def is_uniform(self, tol: float = 1e-10) -> bool:
        w = self.weights
        return bool(w.size) and float(np.max(np.abs(w - w.mean()))) <= tol

    def uniform(self) -> "Ensemble":
        """The same set of states, each with weight ``1/n``."""
        return Ensemble(self.dim_a, self.dim_b, self.states / np.sqrt(self.count))

    def __eq__(self, other):
        if not isinstance(other, Ensemble):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.vectors, other.vectors)

    __hash__ = None


def from_weighted(weights, states: Sequence[BipartiteVector]) -> Ensemble:
    """Build the tilde form ``sqrt(p_i) psi_i`` from probabilities and normalized states."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(states),):
        raise ShapeError(f"{weights.size} weights for {len(states)} states")
    if np.any(weights < 0.0):
        raise ValidationError("weights must be nonnegative")
    if weights.sum() > 1.0 + 1e-10:
        raise ValidationError(f"weights sum to {weights.sum()!r} > 1")
    for k, s in enumerate(states):
        if abs(s.norm - 1.0) > 1e-10:
            raise ValidationError(f"state {k} is not normalized (norm {s.norm!r})")
    scaled = [s.scaled(np.sqrt(w)) for w, s in zip(weights, states)]
    return Ensemble.from_members(scaled)


def density(e: Ensemble) -> np.ndarray:
    """``sum_i |x_i><x_i|``; the zero operator for an empty ensemble."""
    v = e.vectors
    return v.T @ v.conj()


def avg_entanglement(e: Ensemble) -> float:
    """Average pure-state entanglement ``sum_i p_i E(psi_i)`` in bits."""
    if e.count == 0:
        return 0.0
    return float(np.sum(batch_homog_entanglement(e.vectors, e.dim_a, e.dim_b)))


def check_right_unitary(u, tol: float = _UNITARITY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] < u.shape[1]:
        raise ShapeError(f"right unitary must be m x n with m >= n, got {u.shape}")
    err = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1]))
    if err > tol:
        raise ValidationError(f"U^dagger U deviates from identity by {err:.3g}")
    return u


def transform(e: Ensemble, u) -> Ensemble:
    """The decomposition ``y_j = sum_i U_ji x_i`` of the same state."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[1] != e.count:
        raise ShapeError(f"U has shape {u.shape}, ensemble has {e.count} members")
    u = check_right_unitary(u)
    return Ensemble(e.dim_a, e.dim_b, u @ e.vectors)


def spectral_ensemble(rho, dims: tuple[int, int] | None = None) -> Ensemble:
    """Eigen-decomposition of ``rho`` as an ensemble on the split ``dims``.

    Members are ``sqrt(lambda_k) v_k`` for eigenvalues above the kernel cutoff,
    in descending eigenvalue order.
    """
    if dims is None:
        raise ValidationError("a bipartite split (dim_a, dim_b) must be declared")
    dim_a, dim_b = (int(x) for x in dims)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim_a * dim_b, dim_a * dim_b):
        raise ShapeError(f"rho has shape {rho.shape}, split is {dim_a}x{dim_b}")
    spec = herm_eig(rho)
    lam = spec.eigenvalues
    top = max(float(lam[0]), 0.0)
    if lam[-1] < -1e-10 * max(1.0, top):
        raise ValidationError(f"rho is not positive semidefinite (eigenvalue {lam[-1]:.3g})")
    keep = lam > EPS_KER * top
    vecs = (spec.eigenvectors[:, keep] * np.sqrt(lam[keep])).T
    return Ensemble(dim_a, dim_b, vecs)


def _regroup(vectors: np.ndarray, da1, db1, da2, db2) -> np.ndarray:
    """Reorder flattened ``(a1 b1 a2 b2)`` amplitudes to ``(a1 a2 b1 b2)``."""
    t = vectors.reshape(-1, da1, db1, da2, db2).transpose(0, 1, 3, 2, 4)
    return t.reshape(vectors.shape[0], -1)


def tensor_product_ensemble(e1: Ensemble, e2: Ensemble) -> Ensemble:
    """Ensemble ``{x_i (x) y_j}`` on the split ``(A1 A2 | B1 B2)``, ``i`` major."""
    prods = np.einsum("ip,jq->ijpq", e1.vectors, e2.vectors).reshape(e1.count * e2.count, -1)
    vecs = _regroup(prods, e1.dim_a, e1.dim_b, e2.dim_a, e2.dim_b)
    return Ensemble(e1.dim_a * e2.dim_a, e1.dim_b * e2.dim_b, vecs)


def regroup_operator(op, dims1: tuple[int, int], dims2: tuple[int, int]) -> np.ndarray:
    """Apply the ``(a1 b1 a2 b2) -> (a1 a2 b1 b2)`` reordering to an operator on both sides."""
    (da1, db1), (da2, db2) = dims1, dims2
    op = np.asarray(op).reshape(da1, db1, da2, db2, da1, db1, da2, db2)
    op = op.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    d = da1 * db1 * da2 * db2
    return op.reshape(d, d)


def random_right_unitary(m: int, n: int, seed=None) -> np.ndarray:
    """Haar-distributed ``m x n`` isometry from a seeded complex Gaussian matrix."""
    if n < 1 or m < n:
        raise ShapeError(f"need m >= n >= 1, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
