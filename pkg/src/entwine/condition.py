"""Optimality test for a set of pure states.

For normalized states ``psi_1..psi_n`` with cross operators
``sigma_ij = tr_B |psi_i><psi_j|`` and ``M_ij = tr[sigma_ij log2 sigma_ii]``,
the set is an optimal decomposition (of any state it generates with positive
weights) exactly when the gap functional

    G(c) = Ent(sum_i c_i psi_i) + Re sum_ij c_i conj(c_j) M_ij

is nonnegative for every complex ``c``. ``G`` is homogeneous of degree two,
so it suffices to search the unit sphere. A negative value is a certificate
of non-optimality; failing to find one is not a proof of optimality.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .ensembles import Ensemble
from .errors import NormalizationError, ShapeError, ValidationError
from .linalg import (
    BipartiteVector,
    batch_homog_entanglement,
    entropy_flow_derivative,
    entropy_flow_second,
    entropy_term,
    homog_entanglement,
    partial_trace_b,
)
from .manifold import multistart
from .perturbation import PerturbationPath

#: Default threshold separating a genuine violation from numerical noise (bits).
TAU_GAP = 1e-7


class Verdict(str, enum.Enum):
    VIOLATED = "VIOLATED"
    NO_VIOLATION_FOUND = "NO_VIOLATION_FOUND"


class Family(str, enum.Enum):
    """Two-state rotation families mixing members ``k`` and ``l``."""

    REAL_PLUS = "REAL+"
    REAL_MINUS = "REAL-"
    IMAG_PLUS = "IMAG+"
    IMAG_MINUS = "IMAG-"


@dataclass(frozen=True, eq=False)
class CrossTable:
    """Normalized states, their cross operators and the traced log table ``M``."""

    dim_a: int
    dim_b: int
    states: np.ndarray
    sigma: np.ndarray
    m_table: np.ndarray

    @property
    def n(self) -> int:
        return self.states.shape[0]

    def entanglements(self) -> np.ndarray:
        """``E(psi_i)`` for every member, read off the diagonal of ``M``."""
        return -np.diagonal(self.m_table).real


@dataclass
class GapCertificate:
    c: np.ndarray
    gap: float
    verdict: Verdict
    restarts_used: int
    min_history: list = field(default_factory=list)
    seed: int | None = None
    tau_gap: float = TAU_GAP

    @property
    def violated(self) -> bool:
        return self.verdict is Verdict.VIOLATED


def build_cross_table(states: Sequence[BipartiteVector]) -> CrossTable:
    """Cross table for a list of normalized states (weights play no role here)."""
    states = list(states)
    if not states:
        raise ValidationError("need at least one state")
    dims = states[0].dims
    for k, s in enumerate(states):
        if s.dims != dims:
            raise ShapeError(f"state {k} has split {s.dims}, expected {dims}")
        if abs(s.norm - 1.0) > 1e-10:
            raise NormalizationError(f"state {k} is not normalized (norm {s.norm!r})")
    n = len(states)
    sigma = np.array([[partial_trace_b(si, sj) for sj in states] for si in states])
    m = np.array([[entropy_term(sigma[i, j], sigma[i, i]) for j in range(n)] for i in range(n)])
    arr = np.stack([s.amplitudes for s in states])
    for a in (arr, sigma, m):
        a.setflags(write=False)
    return CrossTable(dims[0], dims[1], arr, sigma, m)


def cross_table_of(e: Ensemble) -> CrossTable:
    """Cross table of the normalized members of an ensemble."""
    return build_cross_table(e.normalized_members())


def _coeffs(ct: CrossTable, c) -> np.ndarray:
    c = np.asarray(c, dtype=complex).reshape(-1)
    if c.size != ct.n:
        raise ShapeError(f"{c.size} coefficients for {ct.n} states")
    return c


def _quadratic(ct: CrossTable, c: np.ndarray) -> float:
    return float((c @ ct.m_table @ c.conj()).real)


def gap(ct: CrossTable, c) -> float:
    """Gap functional ``G(c)``; nonnegative for all ``c`` iff the set is optimal."""
    c = _coeffs(ct, c)
    sup = BipartiteVector(ct.dim_a, ct.dim_b, c @ ct.states)
    return homog_entanglement(sup) + _quadratic(ct, c)


def superposition_bound(ct: CrossTable, c) -> float:
    """Lower bound on ``Ent(sum_i c_i psi_i)`` that holds whenever the set is optimal.

    Written as ``sum_i |c_i|^2 E(psi_i) - Re sum_{i != j} c_i conj(c_j) M_ij``,
    which equals ``-Re sum_ij c_i conj(c_j) M_ij``.
    """
    c = _coeffs(ct, c)
    off = ct.m_table - np.diag(np.diagonal(ct.m_table))
    diag = float(np.sum(np.abs(c) ** 2 * ct.entanglements()))
    return diag - float((c @ off @ c.conj()).real)


def hermiticity_check(ct: CrossTable) -> float:
    """``max_{k != l} |M_kl - conj(M_lk)|``; must vanish for an optimal set."""
    if ct.n < 2:
        return 0.0
    diff = np.abs(ct.m_table - ct.m_table.conj().T)
    np.fill_diagonal(diff, 0.0)
    return float(diff.max())


def rotation_derivative(ct: CrossTable, k: int, l: int, family) -> float:
    """``d/dtheta`` at 0 of the summed entanglement along a two-state rotation.

    The ensemble has uniform weights ``1/n``; members ``k`` and ``l`` are mixed
    by a real rotation (``REAL+/-``) or a phase rotation (``IMAG+/-``) and all
    other members stay fixed. Indices are zero-based. For an optimal set all
    four families give nonnegative values.
    """
    family = Family(family)
    n = ct.n
    if not (0 <= k < n and 0 <= l < n):
        raise IndexError(f"indices ({k}, {l}) out of range for {n} states")
    if k == l:
        raise ValidationError("rotation needs two distinct members")
    # tangent coefficients: psi_k' = a psi_l / sqrt(n), psi_l' = b psi_k / sqrt(n)
    s = 1.0 if family in (Family.REAL_PLUS, Family.IMAG_PLUS) else -1.0
    if family in (Family.REAL_PLUS, Family.REAL_MINUS):
        a, b = s, -s
    else:
        a, b = 1j * s, 1j * s
    sig = ct.sigma
    dk = (a * sig[l, k] + np.conj(a) * sig[k, l]) / n
    dl = (b * sig[k, l] + np.conj(b) * sig[l, k]) / n
    return entropy_flow_derivative(sig[k, k] / n, dk) + entropy_flow_derivative(sig[l, l] / n, dl)


def second_derivative_crosscheck(e: Ensemble, c, h: float = 1e-3) -> tuple[float, float]:
    """Second derivative of the summed entanglement along the splitting path, two ways.

    Returns ``(analytic, numeric)``. The analytic value is assembled member by
    member from the entropy-flow second derivative plus ``2 Ent(sum c_i x_i)``
    for the new member, and equals ``(2/n) G(c)``. The numeric value is the
    central second difference with step ``h`` along the exact path.
    """
    if not e.is_uniform():
        raise ValidationError("crosscheck requires an ensemble with uniform weights")
    path = PerturbationPath(e, c)
    c = path.c
    x = e.vectors
    n = e.count
    mats = x.reshape(n, e.dim_a, e.dim_b)
    sup = c @ x
    sup_mat = sup.reshape(e.dim_a, e.dim_b)
    analytic = 2.0 * homog_entanglement(BipartiteVector(e.dim_a, e.dim_b, sup))
    for i in range(n):
        # x_i(t) = x_i + (cos t - 1) conj(c_i) sup, so x_i''(0) = -conj(c_i) sup
        cross = -np.conj(c[i]) * (sup_mat @ mats[i].conj().T)
        analytic += entropy_flow_second(mats[i] @ mats[i].conj().T, cross + cross.conj().T)

    def total(t):
        return float(np.sum(batch_homog_entanglement(path.vectors(t), e.dim_a, e.dim_b)))

    numeric = (total(h) - 2.0 * total(0.0) + total(-h)) / h**2
    return analytic, numeric


# -- minimization -----------------------------------------------------------


def structured_starts(n: int) -> np.ndarray:
    """Basis vectors and all pairwise ``(e_k +/- e_l)/sqrt2``, ``(e_k +/- i e_l)/sqrt2``."""
    eye = np.eye(n, dtype=complex)
    starts = list(eye)
    r2 = np.sqrt(0.5)
    for k, l in combinations(range(n), 2):
        for ph in (1.0, -1.0, 1j, -1j):
            starts.append(r2 * (eye[k] + ph * eye[l]))
    return np.array(starts)


def random_starts(n: int, count: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _gap_objective(ct: CrossTable):
    psi = ct.states
    psi_h = psi.conj().T
    herm2 = ct.m_table + ct.m_table.conj().T

    def fun(x):
        c = x[..., 0]
        ent, g_sup = batch_homog_entanglement(c @ psi, ct.dim_a, ct.dim_b, grad=True)
        quad = np.einsum("ri,ij,rj->r", c, ct.m_table, c.conj()).real
        grad = g_sup @ psi_h + c @ herm2
        return ent + quad, grad[..., None]

    return fun


def fix_phase(c: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-modulus entry (first on ties) is real positive."""
    k = int(np.argmax(np.round(np.abs(c), 12)))
    return c * (abs(c[k]) / c[k]) if c[k] != 0 else c


def minimize_gap(
    ct: CrossTable,
    restarts: int = 64,
    max_iters: int = 500,
    seed: int = 0,
    tau_gap: float = TAU_GAP,
    step0: float = 0.5,
) -> GapCertificate:
    """Multistart search for the minimum of ``G`` on the unit sphere.

    Starting points are all basis vectors and pairwise two-state combinations
    followed by ``restarts`` seeded random points. Each is refined by
    Armijo-backtracked projected gradient descent. The best local minimum
    (lowest restart index on ties) decides the verdict: ``VIOLATED`` iff it
    lies below ``-tau_gap``.
    """
    n = ct.n
    starts = np.concatenate([structured_starts(n), random_starts(n, restarts, seed)])
    res = multistart(_gap_objective(ct), starts[..., None], max_iters=max_iters, step0=step0)
    values = res.values
    best = int(np.argmin(values))
    c = fix_phase(res.x[best, :, 0] / np.linalg.norm(res.x[best, :, 0]))
    g = gap(ct, c)
    verdict = Verdict.VIOLATED if g < -tau_gap else Verdict.NO_VIOLATION_FOUND
    history = [(i, float(v)) for i, v in enumerate(values)]
    return GapCertificate(c, g, verdict, len(starts), history, seed, tau_gap)
