"""Dense complex linear algebra and entropy calculus on bipartite systems.

Bipartite vectors are flattened with the index convention ``a * dim_b + b``;
every module and the file format rely on it. All entropies are in bits.

Besides the scalar operations there are a few batched kernels
(:func:`reduced_states`, :func:`batch_homog_entanglement`) used by the
optimizers, which evaluate hundreds of superpositions per step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    HermiticityError,
    NormalizationError,
    ShapeError,
)

#: Relative cutoff below which eigenvalues are treated as kernel.
EPS_KER = 1e-12

_HERM_TOL = 1e-10
_PHASE_TOL = 1e-10


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigenvalues in descending order and matching unitary eigenvectors (columns).

    Under degenerate eigenvalues the eigenvectors are not unique; nothing
    downstream depends on the particular choice.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True, eq=False)
class BipartiteVector:
    """A possibly unnormalized vector on a ``dim_a x dim_b`` bipartite space.

    The squared norm carries the probability weight of the state.
    """

    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise ShapeError(f"dimensions must be positive, got {self.dim_a}x{self.dim_b}")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.dim_a * self.dim_b:
            raise ShapeError(
                f"expected {self.dim_a * self.dim_b} amplitudes, got {amps.size}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def product(cls, a, b) -> "BipartiteVector":
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        return cls(a.size, b.size, np.kron(a, b))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq))

    def as_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to ``(dim_a, dim_b)``."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    def scaled(self, c: complex) -> "BipartiteVector":
        return BipartiteVector(self.dim_a, self.dim_b, c * self.amplitudes)

    def normalized(self) -> "BipartiteVector":
        n = self.norm
        if n == 0.0:
            raise DegenerateInputError("cannot normalize the zero vector")
        return self.scaled(1.0 / n)

    def __eq__(self, other):
        if not isinstance(other, BipartiteVector):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash((self.dim_a, self.dim_b, self.amplitudes.tobytes()))


@dataclass(frozen=True)
class SchmidtForm:
    """``psi = sum_k coefficients[k] * basis_a[:, k] (x) basis_b[:, k]``."""

    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    def reconstruct(self) -> np.ndarray:
        terms = np.einsum("k,ak,bk->ab", self.coefficients, self.basis_a, self.basis_b)
        return terms.reshape(-1)


def _check_square(h: np.ndarray, name: str = "matrix") -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {h.shape}")
    return h


def _check_hermitian(h: np.ndarray, name: str = "matrix") -> np.ndarray:
    h = _check_square(h, name)
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    if np.max(np.abs(h - h.conj().T), initial=0.0) > _HERM_TOL * scale:
        raise HermiticityError(f"{name} is not Hermitian")
    return 0.5 * (h + h.conj().T)


def herm_eig(h) -> HermitianSpectrum:
    """Eigendecomposition of a Hermitian matrix with a reproducible gauge.

    Eigenvalues are returned in descending order. Each eigenvector is rotated
    so that its first component with modulus above ``1e-10`` is real positive.

    Raises
    ------
    ShapeError
        If ``h`` is not square.
    HermiticityError
        If ``h`` deviates from Hermitian by more than ``1e-10`` (relative).
    """
    h = _check_hermitian(h)
    w, v = np.linalg.eigh(h)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        idx = np.flatnonzero(np.abs(col) > _PHASE_TOL)
        if idx.size:
            z = col[idx[0]]
            v[:, k] = col * (abs(z) / z)
    return HermitianSpectrum(w, v)


def _same_split(psi: BipartiteVector, phi: BipartiteVector):
    if psi.dims != phi.dims:
        raise ShapeError(f"bipartite splits differ: {psi.dims} vs {phi.dims}")


def partial_trace_b(psi: BipartiteVector, phi: BipartiteVector) -> np.ndarray:
    """``tr_B |psi><phi|`` as a ``dim_a x dim_a`` matrix."""
    _same_split(psi, phi)
    return psi.as_matrix() @ phi.as_matrix().conj().T


def schmidt(psi: BipartiteVector) -> SchmidtForm:
    """Schmidt decomposition via SVD of the amplitude matrix.

    Only coefficients above ``1e-12`` relative to the largest are kept, so the
    count equals the rank of the reduced state.
    """
    if psi.norm_sq == 0.0:
        raise DegenerateInputError("Schmidt form of the zero vector is undefined")
    u, s, vh = np.linalg.svd(psi.as_matrix(), full_matrices=False)
    # singular values are sqrt of reduced-state eigenvalues, hence the sqrt cutoff
    keep = s > np.sqrt(EPS_KER) * s[0]
    return SchmidtForm(s[keep], u[:, keep], vh[keep].T)


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


def vn_entropy(rho) -> float:
    """Von Neumann entropy ``-tr rho log2 rho`` of a unit-trace density operator."""
    rho = _check_hermitian(rho, "density operator")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > 1e-10:
        raise NormalizationError(f"trace must be 1, got {tr!r}")
    lam = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    return _entropy_bits(lam)


def homog_entanglement(psi: BipartiteVector) -> float:
    """Degree-2 homogeneous entanglement ``|psi|^2 E(psi/|psi|)``; zero for the zero vector."""
    sigma = partial_trace_b(psi, psi)
    lam = np.clip(np.linalg.eigvalsh(sigma), 0.0, None)
    tr = lam.sum()
    if tr == 0.0:
        return 0.0
    return tr * _entropy_bits(lam / tr)


def _support_log2(a: np.ndarray, normalize: bool) -> np.ndarray:
    """``log2`` of ``a`` (optionally ``a / tr a``) restricted to its support."""
    lam, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    top = lam[-1] if lam.size else 0.0
    if top <= 0.0:
        return np.zeros_like(a)
    keep = lam > EPS_KER * top
    logs = np.zeros_like(lam)
    scale = lam[keep].sum() if normalize else 1.0
    logs[keep] = np.log2(lam[keep] / scale)
    return (v * logs) @ v.conj().T


def entropy_term(sigma_ij, sigma_ii) -> complex:
    """``tr[sigma_ij log2 sigma_ii]`` evaluated on the support of ``sigma_ii``.

    Kernel contributions vanish analytically for cross operators built from
    genuine state pairs, so sub-threshold eigenvalues are simply dropped.
    """
    sigma_ij = _check_square(sigma_ij, "sigma_ij")
    sigma_ii = _check_square(sigma_ii, "sigma_ii")
    if sigma_ij.shape != sigma_ii.shape:
        raise ShapeError(f"shape mismatch: {sigma_ij.shape} vs {sigma_ii.shape}")
    return complex(np.trace(sigma_ij @ _support_log2(sigma_ii, normalize=False)))


def _flow(a, direction, name: str) -> float:
    a = _check_square(a, "a")
    direction = _check_hermitian(direction, name)
    if direction.shape != a.shape:
        raise ShapeError(f"shape mismatch: {direction.shape} vs {a.shape}")
    return float(-np.trace(direction @ _support_log2(a, normalize=True)).real)


def entropy_flow_derivative(a, a_dot) -> float:
    """First derivative of ``t -> -tr[A log2(A / tr A)]`` along ``a_dot``.

    Parameters
    ----------
    a : (d, d) array
        Positive operator ``A(t)`` at the evaluation point, any trace > 0.
    a_dot : (d, d) array
        Hermitian tangent ``A'(t)``.
    """
    return _flow(a, a_dot, "a_dot")


def entropy_flow_second(a0, a_ddot) -> float:
    """Second derivative of the same flow at a point where ``A'(t0) = 0``.

    The vanishing first derivative is the caller's responsibility; it is not
    checked here.
    """
    return _flow(a0, a_ddot, "a_ddot")


# -- batched kernels -------------------------------------------------------


def reduced_states(amps: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Reduced operators ``tr_B |x><x|`` for a stack of flattened vectors ``(..., D)``."""
    m = amps.reshape(amps.shape[:-1] + (dim_a, dim_b))
    return m @ np.swapaxes(m.conj(), -1, -2)


def batch_homog_entanglement(amps: np.ndarray, dim_a: int, dim_b: int, grad: bool = False):
    """Homogeneous entanglement of every vector in a stack ``(..., D)``.

    With ``grad=True`` also returns the Euclidean gradient with respect to the
    amplitudes, ``-2 log2(sigma / tr sigma) X`` (support-restricted), in the
    real inner product ``Re <g, dx>``.
    """
    m = amps.reshape(amps.shape[:-1] + (dim_a, dim_b))
    sigma = m @ np.swapaxes(m.conj(), -1, -2)
    lam, v = np.linalg.eigh(sigma)
    lam = np.clip(lam, 0.0, None)
    tr = lam.sum(axis=-1, keepdims=True)
    top = lam[..., -1:]
    keep = (lam > EPS_KER * top) & (top > 0.0)
    safe_tr = np.where(tr > 0.0, tr, 1.0)
    logs = np.zeros_like(lam)
    np.log2(lam / safe_tr, out=logs, where=keep)
    values = -np.sum(lam * logs, axis=-1)
    if not grad:
        return values
    log_op = (v * logs[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)
    g = -2.0 * (log_op @ m)
    return values, g.reshape(amps.shape)
