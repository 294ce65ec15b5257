import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gafzeros import kernels as kn
from gafzeros.intensity import (
    bergman_determinant,
    bergman_intensity,
    build_intensity_matrices,
    counterexample_count_annulus,
    counterexample_count_disc,
    counterexample_intensity,
    expected_count_annulus,
    expected_count_disc,
    joint_intensity_numeric,
    one_point_intensity,
    permanent,
    permanent_bruteforce,
)
from gafzeros.model import DomainError, IllConditionedError, ModelSpec
from gafzeros.verify import random_tuples

Q = -1 / 3
BERGMAN_SPECS = [
    (ModelSpec("iid"), None, 1e-6),
    (ModelSpec("tridiag", q=Q), None, 1e-6),
    (ModelSpec("kms", q=0.5), None, 1e-6),
    (ModelSpec("kms", q=0.3 + 0.4j), None, 1e-6),
    (ModelSpec("fgn0"), None, 1e-6),
    (ModelSpec("fgn", h=0.75), 300, 1e-4),
]


class TestPermanent:
    def test_identity(self):
        assert permanent(np.eye(3)) == pytest.approx(1)

    def test_two_by_two(self):
        assert permanent([[1, 2], [3, 4]]) == pytest.approx(10)

    def test_all_ones(self):
        assert permanent(np.ones((3, 3))) == pytest.approx(6)
        assert permanent_bruteforce(np.ones((3, 3))) == pytest.approx(6)

    def test_empty(self):
        assert permanent(np.zeros((0, 0))) == 1

    @pytest.mark.parametrize("n", range(1, 7))
    def test_ryser_equals_bruteforce(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            assert abs(permanent(M) - permanent_bruteforce(M)) < 1e-10 * max(1, abs(permanent_bruteforce(M)))

    @settings(max_examples=40, deadline=None)
    @given(hnp.arrays(float, (4, 4), elements=st.floats(-3, 3)), st.permutations(range(4)), st.permutations(range(4)))
    def test_permutation_invariance(self, M, p, s):
        # perm is invariant under row and column permutations and transposition
        P = M[np.ix_(p, s)]
        assert permanent(P) == pytest.approx(permanent(M), abs=1e-9)
        assert permanent(M.T) == pytest.approx(permanent(M), abs=1e-9)

    def test_limit(self):
        with pytest.raises(DomainError):
            permanent(np.eye(13))
        with pytest.raises(DomainError):
            permanent(np.ones((2, 3)))

    def test_twelve(self):
        # perm of the all-ones matrix is n!
        assert permanent(np.ones((12, 12))).real == pytest.approx(math.factorial(12), rel=1e-12)


class TestMatrices:
    def test_identity_origin(self):
        m = build_intensity_matrices(kn.closed_kernel(ModelSpec("iid")), [0])
        assert m.A[0, 0] == pytest.approx(1)
        assert m.B[0, 0] == pytest.approx(0)
        assert m.C[0, 0] == pytest.approx(1)

    @pytest.mark.parametrize("spec", [s for s, _, _ in BERGMAN_SPECS[:5]] + [ModelSpec("tridiag", q=Q, mode="direct")], ids=str)
    def test_structure(self, spec):
        K = kn.make_kernel(spec)
        z = random_tuples(np.random.default_rng(0), 4, 1)[0]
        m = build_intensity_matrices(K, z)
        assert np.allclose(m.A, m.A.conj().T, atol=1e-12)
        assert np.allclose(m.C, m.C.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(m.A).min() > 0
        assert np.linalg.eigvalsh(m.C).min() > -1e-9
        S = m.C - m.B @ np.linalg.solve(m.A, m.B.conj().T)
        assert np.linalg.eigvalsh(0.5 * (S + S.conj().T)).min() > -1e-9

    def test_finite_differences(self):
        K = kn.closed_kernel(ModelSpec("tridiag", q=Q))
        z = np.array([0.2 + 0.1j, -0.3j])
        m = build_intensity_matrices(K, z)
        h = 1e-5
        # holomorphic in the first argument: d/dz along the real direction
        B_fd = (K.gram(z + h, z) - K.gram(z - h, z)) / (2 * h)
        assert np.max(np.abs(B_fd - m.B)) < 1e-8
        # antiholomorphic in the second: d/dwbar = d/dRe(w) of the conjugate-linear slot
        C_fd = (K.gram(z + h, z + h) - K.gram(z + h, z - h) - K.gram(z - h, z + h) + K.gram(z - h, z - h)) / (4 * h * h)
        assert np.max(np.abs(C_fd - m.C)) < 1e-5

    def test_outside_disc(self):
        with pytest.raises(DomainError):
            build_intensity_matrices(kn.closed_kernel(ModelSpec("iid")), [1.0])


class TestJointIntensity:
    def test_identity_origin(self):
        assert joint_intensity_numeric(kn.closed_kernel(ModelSpec("iid")), [0]) == pytest.approx(1 / math.pi)

    @pytest.mark.parametrize("z", [0.3, 0.5 - 0.2j, -0.8j])
    def test_identity_one_point_is_bergman(self, z):
        val = joint_intensity_numeric(kn.closed_kernel(ModelSpec("iid")), [z])
        assert val == pytest.approx(bergman_intensity(z), rel=1e-12)

    def test_tridiag_two_point_example(self):
        pts = [0.2, -0.3j]
        val = joint_intensity_numeric(kn.closed_kernel(ModelSpec("tridiag", q=Q)), pts)
        assert val == pytest.approx(bergman_determinant(pts), rel=1e-6)

    @pytest.mark.parametrize("spec,N,tol", BERGMAN_SPECS, ids=[s.describe() for s, _, _ in BERGMAN_SPECS])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_inverse_covariance_gives_bergman(self, spec, N, tol, n):
        K = kn.make_kernel(spec, N) if N else kn.closed_kernel(spec)
        rng = np.random.default_rng(100 + n)
        for pts in random_tuples(rng, n, 6):
            assert joint_intensity_numeric(K, pts) == pytest.approx(bergman_determinant(pts), rel=tol)

    def test_direct_is_not_bergman(self):
        K = kn.closed_kernel(ModelSpec("tridiag", q=Q, mode="direct"))
        pts = [0.2, -0.3j]
        assert abs(joint_intensity_numeric(K, pts) / bergman_determinant(pts) - 1) > 1e-3

    @pytest.mark.parametrize("spec", [ModelSpec("tridiag", q=Q), ModelSpec("tridiag", q=Q, mode="direct"), ModelSpec("fgn", h=0.3)], ids=str)
    def test_one_point_formula_matches_general(self, spec):
        K = kn.make_kernel(spec)
        for z in (0.1, 0.4 - 0.5j, -0.6j):
            assert one_point_intensity(K, z) == pytest.approx(joint_intensity_numeric(K, [z]), rel=1e-12)

    def test_coincident_points(self):
        with pytest.raises(IllConditionedError, match="separate"):
            joint_intensity_numeric(kn.closed_kernel(ModelSpec("iid")), [0.3, 0.3 + 1e-9])

    def test_too_many_points(self):
        pts = 0.5 * np.exp(2j * np.pi * np.arange(13) / 13)
        with pytest.raises(DomainError):
            joint_intensity_numeric(kn.closed_kernel(ModelSpec("iid")), pts)

    def test_positive(self):
        K = kn.closed_kernel(ModelSpec("kms", q=0.5))
        for pts in random_tuples(np.random.default_rng(9), 4, 5):
            assert joint_intensity_numeric(K, pts) > 0


class TestBergman:
    def test_origin(self):
        assert bergman_determinant([0]) == pytest.approx(1 / math.pi)

    def test_duplicate(self):
        assert bergman_determinant([0, 0]) == pytest.approx(0, abs=1e-15)

    def test_two_points_by_hand(self):
        # [[1, 1], [1, 1/(1-1/4)^2]] / pi^2 -> (16/9 - 1) / pi^2
        assert bergman_determinant([0, 0.5]) == pytest.approx((16 / 9 - 1) / math.pi**2, rel=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, 0.95), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
    def test_rotation_invariant(self, r, a, b):
        z = [r * np.exp(1j * a), 0.3]
        zr = [p * np.exp(1j * b) for p in z]
        assert bergman_determinant(zr) == pytest.approx(bergman_determinant(z), rel=1e-9, abs=1e-14)


class TestCounterexample:
    def test_origin(self):
        assert counterexample_intensity(Q, 0) == pytest.approx(8 / (9 * math.pi))

    def test_origin_ratio(self):
        for q in (-0.45, -1 / 3, 0.2):
            assert counterexample_intensity(q, 0) / bergman_intensity(0) == pytest.approx(1 - q * q, abs=1e-8)

    def test_q_zero_is_bergman(self):
        z = np.array([0.1, 0.5j, -0.7 + 0.2j])
        np.testing.assert_allclose(counterexample_intensity(0.0, z), bergman_intensity(z), rtol=1e-15)

    @pytest.mark.parametrize("z", [0, 0.3, -0.4 + 0.5j, 0.8j])
    def test_matches_kernel_path(self, z):
        K = kn.closed_kernel(ModelSpec("tridiag", q=Q, mode="direct"))
        assert joint_intensity_numeric(K, [z]) == pytest.approx(counterexample_intensity(Q, z), abs=1e-8)

    def test_below_bergman(self):
        z = random_tuples(np.random.default_rng(2), 1, 50, radius=0.9, sep=0)
        z = np.array([p[0] for p in z])
        assert np.all(counterexample_intensity(Q, z) < bergman_intensity(z))


class TestExpectedCounts:
    @pytest.mark.parametrize("r,v", [(0.6, 0.5625), (0.0, 0.0), (0.8, 16 / 9)])
    def test_examples(self, r, v):
        assert expected_count_disc(r) == pytest.approx(v, abs=1e-14)

    def test_radial_quadrature_oracle(self):
        from scipy.integrate import quad

        v, _ = quad(lambda s: 2 * math.pi * s * bergman_intensity(s), 0, 0.6, epsabs=1e-14)
        assert expected_count_disc(0.6) == pytest.approx(v, rel=1e-12)

    def test_annulus(self):
        assert expected_count_annulus(0.2, 0.6) == pytest.approx(0.5625 - 0.04 / 0.96)

    def test_domain(self):
        with pytest.raises(DomainError):
            expected_count_disc(1.0)

    def test_counterexample_count_at_q_zero(self):
        assert counterexample_count_disc(0.0, 0.6) == pytest.approx(0.5625, rel=1e-12)

    def test_counterexample_count_quadrature_oracle(self):
        from scipy.integrate import dblquad

        v, _ = dblquad(
            lambda t, s: s * counterexample_intensity(Q, s * np.exp(1j * t)), 0, 0.6, 0, 2 * math.pi, epsabs=1e-12
        )
        assert counterexample_count_disc(Q, 0.6) == pytest.approx(v, rel=1e-9)
        assert counterexample_count_disc(Q, 0.6) < 0.5625

    def test_counterexample_additive(self):
        a = counterexample_count_annulus(Q, 0, 0.3) + counterexample_count_annulus(Q, 0.3, 0.6)
        assert a == pytest.approx(counterexample_count_disc(Q, 0.6), rel=1e-12)
