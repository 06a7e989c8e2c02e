"""Closed-form two-qubit concurrence, entanglement of formation and optimal decompositions.

Used as independent ground truth for the optimality test and the EoF minimizer.
The decomposition follows Wootters' construction: vectors ``x_i`` with a
diagonal preconcurrence matrix ``<x_i|x~_j> = lambda_i delta_ij`` come from a
Takagi factorization; phases are adjusted so the diagonal sums to ``C``
(or to zero when ``C = 0``), and a final real rotation spreads it so every
member carries exactly concurrence ``C``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import Ensemble, density
from .errors import ValidationError

#: sigma_y (x) sigma_y
SPIN_FLIP = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex
)

_EPS = 1e-12


def check_two_qubit(rho, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValidationError(f"two-qubit state must be 4x4, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValidationError("density matrix is not Hermitian")
    rho = 0.5 * (rho + rho.conj().T)
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValidationError(f"trace is {np.trace(rho).real!r}, expected 1")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ValidationError("density matrix is not positive semidefinite")
    return rho


def spin_flip_roots(rho) -> np.ndarray:
    """Descending square roots of the eigenvalues of ``rho (Y(x)Y) conj(rho) (Y(x)Y)``.

    Computed as singular values of ``sqrt(rho) (Y(x)Y) conj(sqrt(rho))``, whose
    squares are those eigenvalues; taking square roots of tiny eigenvalues
    directly would amplify rounding noise to ~1e-8.
    """
    rho = check_two_qubit(rho)
    mu, v = np.linalg.eigh(rho)
    root = (v * np.sqrt(np.clip(mu, 0.0, None))) @ v.conj().T
    return np.linalg.svd(root @ SPIN_FLIP @ root.conj(), compute_uv=False)


def concurrence(rho) -> float:
    lam = spin_flip_roots(rho)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


def eof_from_concurrence(c: float) -> float:
    c = min(max(c, 0.0), 1.0)
    return binary_entropy(0.5 * (1.0 + np.sqrt(1.0 - c * c)))


def eof_2qubit(rho) -> float:
    """Entanglement of formation in bits."""
    return eof_from_concurrence(concurrence(rho))


def pure_concurrence(x) -> float:
    """Concurrence of the normalized version of a (tilde) two-qubit vector."""
    x = np.asarray(x, dtype=complex)
    nrm = np.vdot(x, x).real
    if nrm == 0.0:
        return 0.0
    return float(abs(x @ SPIN_FLIP @ x) / nrm)


def takagi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Takagi factorization ``a = W diag(s) W^T`` of a complex symmetric matrix.

    Uses the real symmetric embedding ``[[Re a, Im a], [Im a, -Re a]]``, whose
    positive eigenpairs ``(s, [p; q])`` give Takagi vectors ``p + iq``; this
    stays well defined under degenerate singular values. Vectors for
    (numerically) zero singular values complete ``W`` to a unitary.
    """
    r = a.shape[0]
    emb = np.block([[a.real, a.imag], [a.imag, -a.real]])
    ev, vec = np.linalg.eigh(emb)
    scale = max(float(ev[-1]), 0.0)
    order = np.argsort(ev)[::-1][:r]
    pos = [k for k in order if ev[k] > 1e-9 * max(scale, 1e-300)]
    w = vec[:r, pos] + 1j * vec[r:, pos]
    s = ev[pos]
    if len(pos) < r:
        # orthonormal completion of the span of the positive Takagi vectors
        q, _ = np.linalg.qr(np.concatenate([w, np.eye(r)], axis=1))
        w = np.concatenate([w, q[:, len(pos) : r]], axis=1)
        s = np.concatenate([s, np.zeros(r - len(pos))])
    return w, s


def _closing_phases(lengths: np.ndarray) -> np.ndarray:
    """Angles ``phi`` with ``sum_k lengths[k] exp(i phi_k) = 0``.

    ``lengths`` has four entries, descending, with ``l1 <= l2 + l3 + l4``.
    """
    l1, l2, l3, l4 = lengths
    # |u1 + u2| = L must fit both triangles (l1, l2, L) and (l3, l4, L)
    lo = max(l1 - l2, l3 - l4)
    hi = min(l1 + l2, l3 + l4)
    big = max(lo, min(hi, 0.5 * (lo + hi)))

    def angle(a, b, c):
        # interior angle between sides a and b of a triangle with third side c
        if a < _EPS or b < _EPS:
            return 0.0
        return float(np.arccos(np.clip((a * a + b * b - c * c) / (2 * a * b), -1.0, 1.0)))

    phi = np.zeros(4)
    phi[1] = np.pi - angle(l1, l2, big)
    w = -(l1 + l2 * np.exp(1j * phi[1]))
    base = float(np.angle(w)) if abs(w) > _EPS else 0.0
    phi[2] = base - angle(l3, abs(w), l4)
    u4 = w - l3 * np.exp(1j * phi[2])
    phi[3] = float(np.angle(u4)) if abs(u4) > _EPS else 0.0
    return phi


def _zero_diagonal_rotation(a: np.ndarray) -> np.ndarray:
    """Real orthogonal ``O`` with ``diag(O a O^T) = 0`` for traceless real symmetric ``a``."""
    r = a.shape[0]
    o = np.eye(r)
    a = a.copy()
    free = list(range(r))
    while len(free) > 1:
        d = np.array([a[k, k] for k in free])
        i = free[int(np.argmax(d))]
        j = free[int(np.argmin(d))]
        aii, ajj, aij = a[i, i], a[j, j], a[i, j]
        if aii <= 0.0 or ajj >= 0.0:
            break
        # zero of (ii) entry: aii + 2 t aij + t^2 ajj = 0 with t = tan(theta)
        t = (-aij + np.sqrt(aij * aij - aii * ajj)) / ajj
        cs = 1.0 / np.sqrt(1.0 + t * t)
        sn = t * cs
        g = np.eye(r)
        g[i, i], g[i, j], g[j, i], g[j, j] = cs, sn, -sn, cs
        a = g @ a @ g.T
        o = g @ o
        free.remove(i)
    return o


def _preconcurrence(x: np.ndarray) -> np.ndarray:
    """Matrix ``<x_i|x~_j> = conj(x_i)^T (Y(x)Y) conj(x_j)`` for row vectors ``x``."""
    xc = x.conj()
    return xc @ SPIN_FLIP @ xc.T


@dataclass
class WoottersDecomposition:
    ensemble: Ensemble
    concurrence: float
    eof: float
    jitter: float = 0.0
    jitter_seed: int | None = None


def _construct(rho: np.ndarray) -> tuple[np.ndarray, float]:
    mu, vecs = np.linalg.eigh(rho)
    keep = mu > 1e-12 * max(mu[-1], 0.0)
    v = (vecs[:, keep] * np.sqrt(mu[keep])).T[::-1]
    r = v.shape[0]
    tau = _preconcurrence(v)
    w, lam = takagi(0.5 * (tau + tau.T))
    x = w.T @ v
    c = lam[0] - lam[1:].sum()
    if c > 0.0:
        y = x.copy()
        y[1:] *= 1j
        tau_y = _preconcurrence(y).real
        gram = (y.conj() @ y.T).real
        o = _zero_diagonal_rotation(tau_y - c * gram)
        return o @ y, c
    if r == 1:
        return x, 0.0
    size = 2 if r <= 2 else 4
    lengths = np.zeros(4)
    lengths[:r] = lam
    phi = _closing_phases(lengths)
    y = np.zeros((size, 4), dtype=complex)
    y[:r] = x * np.exp(-0.5j * phi[:r])[:, None]
    h = np.array([[1.0]])
    while h.shape[0] < size:
        h = np.block([[h, h], [h, -h]])
    return (h / np.sqrt(size)) @ y, 0.0


def wootters_decomposition(rho, max_retries: int = 3) -> WoottersDecomposition:
    """Optimal decomposition of a two-qubit state, all members with concurrence ``C``.

    The result is validated (density reconstruction and member concurrence to
    ``1e-8``). On failure, typically from a numerically degenerate spin-flip
    spectrum, the state is perturbed by a seeded Hermitian jitter of size
    ``1e-10`` and the construction retried; the jitter is recorded.
    """
    rho = check_two_qubit(rho)
    target = concurrence(rho)
    jitter, seed = 0.0, None
    work = rho
    for attempt in range(max_retries + 1):
        z, _ = _construct(work)
        e = Ensemble(2, 2, z)
        recon = np.max(np.abs(density(e) - rho))
        conc = [pure_concurrence(m) for m in e.vectors]
        if recon <= 1e-8 and all(abs(k - target) <= 1e-8 for k in conc):
            return WoottersDecomposition(e, target, eof_from_concurrence(target), jitter, seed)
        seed = attempt
        rng = np.random.default_rng(seed)
        h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = h + h.conj().T
        jitter = 1e-10
        work = rho + jitter * h / np.linalg.norm(h)
        work = work / np.trace(work).real
    raise ValidationError("could not construct a validated optimal decomposition")


def optimal_decomposition_2qubit(rho) -> Ensemble:
    """Ensemble of at most four vectors realizing ``rho`` with average entanglement ``E_f``."""
    return wootters_decomposition(rho).ensemble
