import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosetrap import cgbasis


sizes = st.integers(min_value=2, max_value=12)


class TestFrame:
    @given(n=sizes)
    def test_rows_orthonormal(self, n):
        frame = cgbasis.make_frame(n)
        u = frame.transform
        assert np.allclose(u @ u.T, np.eye(n - 1), atol=1e-14)

    @given(n=sizes)
    def test_rows_orthogonal_to_cm(self, n):
        frame = cgbasis.make_frame(n)
        assert np.allclose(frame.transform @ np.ones(n), 0.0, atol=1e-14)
        assert frame.cm_row @ frame.cm_row == pytest.approx(1.0)

    @given(n=sizes, data=st.data())
    def test_pair_vector_reconstructs_distance(self, n, data):
        i = data.draw(st.integers(0, n - 2))
        j = data.draw(st.integers(i + 1, n - 1))
        frame = cgbasis.make_frame(n)
        rng = np.random.default_rng(0)
        r = rng.normal(size=n)
        x = frame.transform @ r
        w = frame.pair_vector(i, j)
        assert w @ x == pytest.approx(r[i] - r[j], abs=1e-12)

    @given(n=sizes)
    def test_pair_vector_norm(self, n):
        frame = cgbasis.make_frame(n)
        for w in frame.pair_vectors():
            assert w @ w == pytest.approx(2.0, abs=1e-13)

    def test_too_few_particles(self):
        with pytest.raises(ValueError):
            cgbasis.make_frame(1)


class TestTerms:
    def test_hyperradial_form(self):
        frame = cgbasis.make_frame(4)
        a = cgbasis.internal_form(cgbasis.HyperRadialTerm(0.7), frame)
        assert np.allclose(a, 0.7 * np.eye(3))

    def test_pair_form(self):
        frame = cgbasis.make_frame(3)
        term = cgbasis.PairCGTerm(alpha=0.5, beta=2.0)
        a = cgbasis.internal_form(term, frame)
        w = frame.pair_vector(0, 1)
        assert np.allclose(a, 0.5 * np.eye(2) + 2.0 * np.outer(w, w))

    def test_full_form_quadratic_identity(self):
        # x^T A x must equal sum_{i<j} a_ij (r_i - r_j)^2 for any r
        n = 4
        frame = cgbasis.make_frame(n)
        rng = np.random.default_rng(1)
        alpha = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        alpha[iu] = rng.uniform(0.1, 2.0, len(iu[0]))
        alpha += alpha.T
        a = cgbasis.internal_form(cgbasis.FullCGTerm.from_matrix(alpha), frame)
        for _ in range(5):
            r = rng.normal(size=n)
            x = frame.transform @ r
            direct = sum(alpha[i, j] * (r[i] - r[j]) ** 2
                         for i, j in itertools.combinations(range(n), 2))
            assert x @ a @ x == pytest.approx(direct, rel=1e-12)

    def test_positive_definite_guards(self):
        with pytest.raises(cgbasis.NotPositiveDefiniteError):
            cgbasis.HyperRadialTerm(-1.0)
        with pytest.raises(cgbasis.NotPositiveDefiniteError):
            cgbasis.PairCGTerm(alpha=1.0, beta=-0.6)
        # a single pair coefficient leaves flat directions for N = 3
        frame = cgbasis.make_frame(3)
        alpha = np.zeros((3, 3))
        alpha[0, 1] = alpha[1, 0] = 1.0
        with pytest.raises(cgbasis.NotPositiveDefiniteError):
            cgbasis.internal_form(cgbasis.FullCGTerm.from_matrix(alpha), frame)

    def test_full_term_validation(self):
        with pytest.raises(ValueError):
            cgbasis.FullCGTerm.from_matrix(np.eye(3))   # nonzero diagonal
        with pytest.raises(ValueError):
            cgbasis.FullCGTerm.from_matrix(
                np.array([[0.0, -1.0], [-1.0, 0.0]]))   # negative coefficient


class TestSymmetrisation:
    @given(n=st.integers(min_value=2, max_value=30))
    def test_pair_class_count_identity(self, n):
        same, share, disjoint = cgbasis.pair_class_counts(n)
        assert same + share + disjoint == n * (n - 1) // 2

    @pytest.mark.parametrize("n", [2, 3, 4, 6])
    def test_pair_orbit(self, n):
        frame = cgbasis.make_frame(n)
        orbit = cgbasis.symmetrise(cgbasis.PairCGTerm(1.0, 0.5), frame)
        assert len(orbit.terms) == n * (n - 1) // 2
        assert orbit.total_weight == n * (n - 1) // 2
        assert sum(w for _, w in orbit.reduced) == orbit.total_weight

    def test_hyperradial_orbit_is_trivial(self):
        frame = cgbasis.make_frame(5)
        orbit = cgbasis.symmetrise(cgbasis.HyperRadialTerm(1.0), frame)
        assert len(orbit.terms) == 1
        assert orbit.total_weight == 1

    def test_full_orbit_weights_sum_to_factorial(self):
        n = 4
        frame = cgbasis.make_frame(n)
        rng = np.random.default_rng(2)
        alpha = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        alpha[iu] = rng.uniform(0.1, 2.0, len(iu[0]))
        alpha += alpha.T
        orbit = cgbasis.symmetrise(cgbasis.FullCGTerm.from_matrix(alpha), frame)
        assert orbit.total_weight == math.factorial(n)

    @pytest.mark.parametrize("n", [4, 10])
    def test_symmetric_full_term_collapses(self, n):
        # all pair coefficients equal: already exchange symmetric, so the
        # orbit is trivial even beyond the factorial-enumeration limit
        frame = cgbasis.make_frame(n)
        alpha = 0.3 * (np.ones((n, n)) - np.eye(n))
        orbit = cgbasis.symmetrise(cgbasis.FullCGTerm.from_matrix(alpha), frame)
        assert len(orbit.terms) == 1
        assert orbit.total_weight == 1

    def test_symmetrise_idempotent_weights(self):
        # resymmetrising any orbit representative yields the same orbit
        frame = cgbasis.make_frame(4)
        term = cgbasis.PairCGTerm(0.9, 1.7)
        o1 = cgbasis.symmetrise(term, frame)
        o2 = cgbasis.symmetrise(term, frame)
        assert len(o1.terms) == len(o2.terms)
        for (f1, w1), (f2, w2) in zip(o1.terms, o2.terms):
            assert w1 == w2
            assert np.array_equal(f1, f2)

    def test_factorial_guard(self):
        frame = cgbasis.make_frame(9)
        alpha = 0.1 * (np.ones((9, 9)) - np.eye(9))
        alpha[0, 1] = alpha[1, 0] = 0.7   # genuinely asymmetric orbit
        with pytest.raises(ValueError, match="refused"):
            cgbasis.symmetrise(cgbasis.FullCGTerm.from_matrix(alpha), frame)
