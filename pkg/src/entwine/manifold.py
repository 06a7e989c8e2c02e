"""Batched projected-gradient descent on the complex Stiefel manifold.

Points are stacks ``X`` of shape ``(R, m, n)`` with ``X^dagger X = 1``; the
unit sphere in ``C^n`` is the case ``(R, n, 1)``. Every restart in a batch
evolves independently (its own step size, its own stopping test), so results
do not depend on how restarts are grouped into batches or threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

#: Restarts per batch; fixed so that results are independent of thread count.
CHUNK = 16


@dataclass
class DescentResult:
    x: np.ndarray
    values: np.ndarray
    iterations: np.ndarray


def qr_retract(y: np.ndarray) -> np.ndarray:
    """Q factor of ``y`` with the gauge ``diag(R) > 0``."""
    q, r = np.linalg.qr(y)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(d)
    phase = np.where(mag > 0.0, d / np.where(mag > 0.0, mag, 1.0), 1.0)
    return q * phase[..., None, :]


def tangent_project(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Project a Euclidean gradient onto the tangent space at ``x``."""
    xg = np.swapaxes(x.conj(), -1, -2) @ g
    return g - x @ (0.5 * (xg + np.swapaxes(xg.conj(), -1, -2)))


def _sqnorm(a: np.ndarray) -> np.ndarray:
    return np.sum(a.real**2 + a.imag**2, axis=(-2, -1))


def stiefel_descent(
    fun,
    x0: np.ndarray,
    max_iters: int = 500,
    step0: float = 0.5,
    armijo: float = 1e-4,
    gtol: float = 1e-10,
    ftol: float = 1e-15,
    max_backtracks: int = 60,
) -> DescentResult:
    """Armijo-backtracked Riemannian gradient descent with QR retraction.

    Parameters
    ----------
    fun : callable
        ``fun(X) -> (values, egrad)`` on a stack ``X`` of shape ``(R, m, n)``;
        ``egrad`` is the Euclidean gradient in the metric ``Re tr(A^dagger B)``.
    x0 : (R, m, n) complex array
        Starting points, assumed to lie on the manifold.

    A restart stops once its Riemannian gradient norm falls below ``gtol``,
    an accepted step lowers the value by at most ``ftol * max(1, |f|)``, or no
    step passes the Armijo test.
    """
    x = np.array(x0, dtype=complex)
    f, g = fun(x)
    nr = x.shape[0]
    step = np.full(nr, float(step0))
    iters = np.zeros(nr, dtype=int)
    active = np.ones(nr, dtype=bool)

    for _ in range(max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa, fa = x[idx], f[idx]
        rg = tangent_project(xa, g[idx])
        gn2 = _sqnorm(rg)
        converged = gn2 <= gtol**2
        alpha = step[idx].copy()
        pending = ~converged
        accepted = np.zeros(idx.size, dtype=bool)
        new_x = xa.copy()
        new_f = fa.copy()
        new_g = g[idx].copy()
        for _ in range(max_backtracks):
            p = np.flatnonzero(pending)
            if p.size == 0:
                break
            cand = qr_retract(xa[p] - alpha[p, None, None] * rg[p])
            fc, gc = fun(cand)
            ok = fc <= fa[p] - armijo * alpha[p] * gn2[p]
            hit = p[ok]
            new_x[hit], new_f[hit], new_g[hit] = cand[ok], fc[ok], gc[ok]
            accepted[hit] = True
            pending[hit] = False
            alpha[p[~ok]] *= 0.5

        gi = idx[accepted]
        x[gi], g[gi] = new_x[accepted], new_g[accepted]
        decrease = f[gi] - new_f[accepted]
        f[gi] = new_f[accepted]
        iters[gi] += 1
        step[gi] = 2.0 * alpha[accepted]
        stalled = decrease <= ftol * np.maximum(1.0, np.abs(f[gi]))
        active[gi[stalled]] = False
        active[idx[~accepted]] = False

    return DescentResult(x, f, iters)


def worker_count() -> int:
    """Thread cap from ``ENTWINE_THREADS`` (default: CPU count, at most 8)."""
    env = os.environ.get("ENTWINE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(os.cpu_count() or 1, 8))


def multistart(fun, starts: np.ndarray, **kwargs) -> DescentResult:
    """Run :func:`stiefel_descent` over all starts in fixed-size chunks.

    Chunks may be processed concurrently; the merge is by restart index, so
    the output is identical for any thread count.
    """
    chunks = [starts[i : i + CHUNK] for i in range(0, len(starts), CHUNK)]
    threads = min(worker_count(), len(chunks))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: stiefel_descent(fun, c, **kwargs), chunks))
    else:
        parts = [stiefel_descent(fun, c, **kwargs) for c in chunks]
    return DescentResult(
        np.concatenate([p.x for p in parts]),
        np.concatenate([p.values for p in parts]),
        np.concatenate([p.iterations for p in parts]),
    )
