"""One-parameter unitary families that split off a superposition as a new member.

For a unit vector ``c`` the generator ``T`` is the ``(n+1) x (n+1)``
skew-Hermitian matrix with last row ``c`` and last column ``-conj(c)``.
``T`` rotates the plane spanned by ``w = (conj(c), 0)`` and ``e_{n+1}``, so

    exp(tT) = 1 + sin(t) T - (1 - cos(t)) (w w^dagger + e e^dagger)

exactly. The first ``n`` columns form a right unitary taking an ensemble to
an ``(n+1)``-member ensemble of the same state, whose last member is
``sin(t) * sum_i c_i x_i``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import Ensemble
from .errors import NormalizationError, ShapeError, ValidationError


def _unit(c) -> np.ndarray:
    c = np.asarray(c, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(c)
    if abs(nrm - 1.0) > 1e-10:
        raise NormalizationError(f"coefficient vector must have unit norm, got {nrm!r}")
    return c / nrm


def generator(c) -> np.ndarray:
    """The skew-Hermitian generator ``T`` for coefficient vector ``c``."""
    c = np.asarray(c, dtype=complex).reshape(-1)
    n = c.size
    t = np.zeros((n + 1, n + 1), dtype=complex)
    t[n, :n] = c
    t[:n, n] = -c.conj()
    return t


@dataclass(frozen=True)
class PerturbationPath:
    """The family ``t -> U(t) x`` with ``U(t)`` the first ``n`` columns of ``exp(tT)``.

    No weight restriction applies here; :func:`perturb` adds the uniform-weight
    precondition used by the optimality proof.
    """

    base: Ensemble
    c: np.ndarray

    def __post_init__(self):
        c = _unit(self.c)
        if c.size != self.base.count:
            raise ShapeError(f"{c.size} coefficients for {self.base.count} members")
        object.__setattr__(self, "c", c)

    @property
    def generator(self) -> np.ndarray:
        return generator(self.c)

    def unitary(self, t: float) -> np.ndarray:
        n = self.c.size
        w = np.append(self.c.conj(), 0.0)
        e = np.zeros(n + 1, dtype=complex)
        e[n] = 1.0
        proj = np.outer(w, w.conj()) + np.outer(e, e)
        return np.eye(n + 1) + np.sin(t) * self.generator - (1.0 - np.cos(t)) * proj

    def right_unitary(self, t: float) -> np.ndarray:
        return self.unitary(t)[:, : self.c.size]

    def vectors(self, t: float) -> np.ndarray:
        """All ``n + 1`` output vectors, including a (near) zero last one."""
        return self.right_unitary(t) @ self.base.vectors

    def at(self, t: float) -> Ensemble:
        b = self.base
        return Ensemble(b.dim_a, b.dim_b, self.vectors(t))


def perturb(e: Ensemble, c, t: float) -> Ensemble:
    """Apply ``U(t)`` to a uniform-weight ensemble; the density is preserved for every ``t``."""
    if not e.is_uniform():
        raise ValidationError("perturb requires an ensemble with uniform weights")
    return PerturbationPath(e, c).at(t)
