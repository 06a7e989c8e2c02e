import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entwine.condition import (
    TAU_GAP,
    Family,
    Verdict,
    _gap_objective,
    build_cross_table,
    cross_table_of,
    fix_phase,
    gap,
    hermiticity_check,
    minimize_gap,
    rotation_derivative,
    second_derivative_crosscheck,
    structured_starts,
    superposition_bound,
)
from entwine.ensembles import Ensemble, avg_entanglement, from_weighted
from entwine.errors import NormalizationError, ShapeError, ValidationError
from entwine.linalg import BipartiteVector, homog_entanglement
from entwine.wootters import optimal_decomposition_2qubit

from helpers import (
    KET00,
    KET01,
    PHI_MINUS,
    PHI_PLUS,
    S2,
    random_ensemble,
    random_rank2_two_qubit,
    random_state,
    random_unit,
)

BELL_BASIS = np.array(
    [[S2, 0, 0, S2], [S2, 0, 0, -S2], [0, S2, S2, 0], [0, S2, -S2, 0]], dtype=complex
)


def bell_pair_table():
    return build_cross_table([PHI_PLUS, PHI_MINUS])


def bell_diagonal(p):
    return np.einsum("k,ki,kj->ij", p, BELL_BASIS, BELL_BASIS.conj())


def uniform(members):
    n = len(members)
    return from_weighted([1.0 / n] * n, members)


class TestCrossTable:
    def test_single_bell(self):
        np.testing.assert_allclose(build_cross_table([PHI_PLUS]).m_table, [[-1.0]], atol=1e-14)

    def test_bell_pair(self):
        np.testing.assert_allclose(bell_pair_table().m_table, -np.eye(2), atol=1e-14)

    def test_products(self):
        np.testing.assert_allclose(build_cross_table([KET00, KET01]).m_table, np.zeros((2, 2)))

    def test_invariants_random(self):
        rng = np.random.default_rng(30)
        for _ in range(20):
            states = [random_state(rng, 2, 3) for _ in range(4)]
            ct = build_cross_table(states)
            for i in range(4):
                for j in range(4):
                    assert np.max(np.abs(ct.sigma[i, j].conj().T - ct.sigma[j, i])) <= 1e-12
            ent = [homog_entanglement(s) for s in states]
            np.testing.assert_allclose(np.diagonal(ct.m_table).real, -np.array(ent), atol=1e-10)

    def test_rejects_unnormalized(self):
        with pytest.raises(NormalizationError):
            build_cross_table([PHI_PLUS.scaled(2.0)])

    def test_rejects_mixed_dims(self):
        with pytest.raises(ShapeError):
            build_cross_table([PHI_PLUS, BipartiteVector(1, 4, [1, 0, 0, 0])])

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            build_cross_table([])


class TestGap:
    def test_single_state(self):
        ct = build_cross_table([PHI_PLUS])
        assert abs(gap(ct, [1.0])) <= 1e-14

    def test_bell_pair_violation(self):
        ct = bell_pair_table()
        c = np.array([S2, S2])
        # superposition is |00>: entanglement term 0, quadratic term -1
        sup = BipartiteVector(2, 2, c @ ct.states)
        assert homog_entanglement(sup) <= 1e-15
        assert gap(ct, c) == pytest.approx(-1.0, abs=1e-14)

    def test_products_nonnegative(self):
        rng = np.random.default_rng(31)
        ct = build_cross_table([KET00, KET01])
        for _ in range(20):
            c = random_unit(rng, 2)
            assert gap(ct, c) >= 0.0
            assert gap(ct, c) == pytest.approx(homog_entanglement(BipartiteVector(2, 2, c @ ct.states)))

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            gap(bell_pair_table(), [1.0])

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), mod=st.floats(0.05, 5.0), theta=st.floats(0, 2 * np.pi))
    def test_homogeneity_and_phase(self, seed, mod, theta):
        rng = np.random.default_rng(seed)
        ct = cross_table_of(random_ensemble(rng, 3, 2, 3))
        c = random_unit(rng, 3)
        base = gap(ct, c)
        scaled = gap(ct, mod * np.exp(1j * theta) * c)
        assert abs(scaled - mod**2 * base) <= 1e-12 * max(1.0, mod**2 * abs(base))
        assert abs(gap(ct, np.exp(1j * theta) * c) - base) <= 1e-12

    def test_basis_vectors_vanish(self):
        rng = np.random.default_rng(32)
        for _ in range(20):
            n = int(rng.integers(1, 6))
            ct = cross_table_of(random_ensemble(rng, n, 3, 3))
            for k in range(n):
                assert abs(gap(ct, np.eye(n)[k])) <= 1e-10

    def test_gap_gradient_finite_difference(self):
        rng = np.random.default_rng(33)
        ct = cross_table_of(random_ensemble(rng, 3, 2, 3))
        fun = _gap_objective(ct)
        c = random_unit(rng, 3)
        _, g = fun(c[None, :, None])
        h = 1e-6
        for k in range(3):
            for step in (h, 1j * h):
                dc = np.zeros(3, dtype=complex)
                dc[k] = step
                fd = (gap(ct, c + dc) - gap(ct, c - dc)) / (2 * h)
                analytic = np.real(np.vdot(g[0, :, 0], dc)) / h
                assert abs(fd - analytic) <= 1e-6 * max(1.0, abs(fd))


class TestSuperpositionBound:
    def test_single(self):
        ct = build_cross_table([PHI_PLUS])
        assert superposition_bound(ct, [1.0]) == pytest.approx(1.0, abs=1e-14)

    def test_products(self):
        ct = build_cross_table([KET00, KET01])
        assert superposition_bound(ct, random_unit(np.random.default_rng(0), 2)) == 0.0

    def test_matches_quadratic_form(self):
        rng = np.random.default_rng(34)
        ct = cross_table_of(random_ensemble(rng, 3, 3, 3))
        c = random_unit(rng, 3)
        quad = float((c @ ct.m_table @ c.conj()).real)
        assert superposition_bound(ct, c) == pytest.approx(-quad, abs=1e-12)

    def test_holds_on_optimal_sets(self):
        rng = np.random.default_rng(35)
        for seed in range(10):
            ct = cross_table_of(optimal_decomposition_2qubit(random_rank2_two_qubit(seed)))
            for _ in range(10):
                c = random_unit(rng, ct.n)
                sup = homog_entanglement(BipartiteVector(2, 2, c @ ct.states))
                assert superposition_bound(ct, c) <= sup + 1e-8


class TestHermiticity:
    def test_single(self):
        assert hermiticity_check(build_cross_table([PHI_PLUS])) == 0.0

    def test_bell_pair(self):
        assert hermiticity_check(bell_pair_table()) <= 1e-14

    def test_optimal_sets(self):
        for seed in range(20):
            ct = cross_table_of(optimal_decomposition_2qubit(random_rank2_two_qubit(seed)))
            assert hermiticity_check(ct) <= 1e-8

    def test_generic_set_is_not_hermitian(self):
        ct = cross_table_of(random_ensemble(np.random.default_rng(36), 3, 2, 2))
        assert hermiticity_check(ct) > 1e-3


def _rotation_path_total(states, k, l, family, theta):
    # explicit two-state rotation with all members at weight 1/n
    n = len(states)
    psi = np.array([s.amplitudes for s in states]) / np.sqrt(n)
    c, s = np.cos(theta), np.sin(theta)
    sign = 1.0 if family.value.endswith("+") else -1.0
    if family.value.startswith("REAL"):
        rot = np.array([[c, sign * s], [-sign * s, c]])
    else:
        rot = np.array([[c, 1j * sign * s], [1j * sign * s, c]])
    new = psi.copy()
    new[k] = rot[0, 0] * psi[k] + rot[0, 1] * psi[l]
    new[l] = rot[1, 0] * psi[k] + rot[1, 1] * psi[l]
    da, db = states[0].dims
    return sum(homog_entanglement(BipartiteVector(da, db, v)) for v in new)


class TestRotationDerivative:
    def test_products_vanish(self):
        ct = build_cross_table([KET00, KET01])
        for fam in Family:
            assert rotation_derivative(ct, 0, 1, fam) == 0.0

    def test_bell_pair_finite_difference(self):
        states = [PHI_PLUS, PHI_MINUS]
        ct = build_cross_table(states)
        h = 1e-4
        fd = (
            _rotation_path_total(states, 0, 1, Family.REAL_PLUS, h)
            - _rotation_path_total(states, 0, 1, Family.REAL_PLUS, -h)
        ) / (2 * h)
        val = rotation_derivative(ct, 0, 1, "REAL+")
        assert np.isfinite(val)
        assert abs(val - fd) <= 1e-5

    def test_random_finite_difference(self):
        rng = np.random.default_rng(37)
        h = 1e-4
        for _ in range(10):
            states = [random_state(rng, 2, 3) for _ in range(3)]
            ct = build_cross_table(states)
            for fam in Family:
                fd = (
                    _rotation_path_total(states, 0, 2, fam, h)
                    - _rotation_path_total(states, 0, 2, fam, -h)
                ) / (2 * h)
                assert abs(rotation_derivative(ct, 0, 2, fam) - fd) <= 1e-5

    def test_optimal_sets_nonnegative(self):
        for seed in range(10):
            ct = cross_table_of(optimal_decomposition_2qubit(random_rank2_two_qubit(seed)))
            for k in range(ct.n):
                for l in range(ct.n):
                    if k != l:
                        for fam in Family:
                            assert rotation_derivative(ct, k, l, fam) >= -1e-9

    def test_bad_indices(self):
        ct = bell_pair_table()
        with pytest.raises(IndexError):
            rotation_derivative(ct, 0, 2, "REAL+")
        with pytest.raises(ValidationError):
            rotation_derivative(ct, 1, 1, "IMAG-")


class TestSecondDerivativeCrosscheck:
    def test_member_direction(self):
        rng = np.random.default_rng(38)
        e = uniform([random_state(rng, 2, 3) for _ in range(3)])
        analytic, numeric = second_derivative_crosscheck(e, [1, 0, 0])
        assert abs(analytic) <= 1e-10
        assert abs(numeric) <= 1e-4

    def test_bell_pair(self):
        e = uniform([PHI_PLUS, PHI_MINUS])
        analytic, numeric = second_derivative_crosscheck(e, [S2, S2])
        assert analytic == pytest.approx(-1.0, abs=1e-12)
        assert abs(numeric + 1.0) <= 1e-4

    def test_random_three_state(self):
        rng = np.random.default_rng(39)
        for _ in range(10):
            e = uniform([random_state(rng, 3, 3) for _ in range(3)])
            analytic, numeric = second_derivative_crosscheck(e, random_unit(rng, 3))
            assert abs(analytic - numeric) <= 1e-4

    def test_consistency_with_gap(self):
        rng = np.random.default_rng(40)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            e = uniform([random_state(rng, 2, 3) for _ in range(n)])
            c = random_unit(rng, n)
            analytic, _ = second_derivative_crosscheck(e, c)
            assert abs(analytic * n / 2 - gap(cross_table_of(e), c)) <= 1e-12

    def test_rejects_nonuniform(self):
        e = from_weighted([0.3, 0.7], [PHI_PLUS, PHI_MINUS])
        with pytest.raises(ValidationError):
            second_derivative_crosscheck(e, [S2, S2])


class TestMinimizeGap:
    def test_single_state(self):
        cert = minimize_gap(build_cross_table([PHI_PLUS]))
        assert cert.verdict is Verdict.NO_VIOLATION_FOUND
        assert abs(cert.gap) <= 1e-12

    def test_bell_pair(self):
        cert = minimize_gap(bell_pair_table())
        assert cert.verdict is Verdict.VIOLATED and cert.violated
        assert cert.gap <= -1 + 1e-6
        c = fix_phase(cert.c)
        assert min(np.linalg.norm(c - [S2, S2]), np.linalg.norm(c - [S2, -S2])) <= 1e-3

    def test_bell_pair_matches_dense_sampling(self):
        # n=2 sphere up to phase: c = (cos a, e^{ib} sin a)
        ct = bell_pair_table()
        a, b = np.meshgrid(np.linspace(0, np.pi / 2, 91), np.linspace(0, 2 * np.pi, 181))
        cs = np.stack([np.cos(a).ravel(), np.exp(1j * b.ravel()) * np.sin(a).ravel()], axis=1)
        sampled = min(gap(ct, c) for c in cs)
        assert sampled == pytest.approx(-1.0, abs=1e-3)
        assert minimize_gap(ct).gap <= sampled + 1e-9

    def test_certificate_fields(self):
        ct = cross_table_of(random_ensemble(np.random.default_rng(41), 3, 2, 2))
        cert = minimize_gap(ct, restarts=8, seed=5)
        assert abs(np.linalg.norm(cert.c) - 1) <= 1e-12
        assert cert.restarts_used == len(structured_starts(3)) + 8
        assert len(cert.min_history) == cert.restarts_used
        assert cert.seed == 5 and cert.tau_gap == TAU_GAP
        assert cert.gap <= min(v for _, v in cert.min_history) + 1e-12
        assert cert.violated == (cert.gap < -TAU_GAP)

    def test_deterministic(self):
        ct = cross_table_of(random_ensemble(np.random.default_rng(42), 3, 2, 3))
        a = minimize_gap(ct, restarts=8, seed=3)
        b = minimize_gap(ct, restarts=8, seed=3)
        assert np.array_equal(a.c, b.c) and a.gap == b.gap and a.min_history == b.min_history

    def test_bell_diagonal_optimal(self):
        rng = np.random.default_rng(43)
        for _ in range(5):
            p = rng.dirichlet(np.ones(4))
            e = optimal_decomposition_2qubit(bell_diagonal(p))
            cert = minimize_gap(cross_table_of(e), restarts=16)
            assert cert.verdict is Verdict.NO_VIOLATION_FOUND
            assert cert.gap >= -1e-6

    def test_necessary_condition_chain(self):
        for seed in range(5):
            ct = cross_table_of(optimal_decomposition_2qubit(random_rank2_two_qubit(seed)))
            cert = minimize_gap(ct, restarts=16)
            if cert.verdict is Verdict.NO_VIOLATION_FOUND:
                assert hermiticity_check(ct) <= 1e-8
                for k in range(ct.n):
                    for l in range(ct.n):
                        if k != l:
                            assert min(rotation_derivative(ct, k, l, f) for f in Family) >= -1e-9

    def test_generic_sets_are_violated(self):
        # random decompositions are almost never optimal
        e = random_ensemble(np.random.default_rng(44), 3, 2, 2, uniform=True)
        cert = minimize_gap(cross_table_of(e), restarts=8)
        assert cert.verdict is Verdict.VIOLATED
        assert avg_entanglement(e) > 0


class TestFixPhase:
    def test_largest_entry_real_positive(self):
        c = fix_phase(np.array([0.1j, -0.9, 0.3]))
        assert c[1] == pytest.approx(0.9)
        assert abs(np.linalg.norm(c) - np.linalg.norm([0.1, 0.9, 0.3])) < 1e-15

    def test_zero_vector(self):
        assert np.array_equal(fix_phase(np.zeros(2, dtype=complex)), np.zeros(2))

    def test_ensemble_from_members(self):
        e = Ensemble.from_members([PHI_PLUS])
        assert e.count == 1
