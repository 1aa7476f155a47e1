import numpy as np
import pytest
import scipy.linalg

from bosetrap import eigensolve


def random_problem(k: int, seed: int, cond: float = 1.0):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(k, k))
    s = m @ m.T + cond * np.eye(k)
    h = rng.normal(size=(k, k))
    h = 0.5 * (h + h.T)
    return h, s


class TestGeneralizedEig:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_direct_solver(self, seed):
        h, s = random_problem(12, seed)
        res = eigensolve.generalized_eig(h, s)
        direct = scipy.linalg.eigh(h, s, eigvals_only=True)
        assert np.allclose(res.energies - eigensolve.CM_ENERGY, direct,
                           atol=1e-9)

    def test_coefficients_normalised(self):
        h, s = random_problem(10, 3)
        res = eigensolve.generalized_eig(h, s)
        gram = res.coefficients.T @ s @ res.coefficients
        assert np.allclose(gram, np.eye(gram.shape[0]), atol=1e-8)

    def test_linear_dependence_filtered(self):
        h, s = random_problem(8, 4)
        # duplicate the last basis vector: S becomes exactly singular
        h2 = np.pad(h, ((0, 1), (0, 1)))
        s2 = np.pad(s, ((0, 1), (0, 1)))
        h2[-1], h2[:, -1] = h2[-2], h2[:, -2]
        h2[-1, -1] = h2[-2, -2]
        s2[-1], s2[:, -1] = s2[-2], s2[:, -2]
        s2[-1, -1] = s2[-2, -2]
        res = eigensolve.generalized_eig(h2, s2)
        assert res.retained_dim == 8
        ref = eigensolve.generalized_eig(h, s)
        assert np.allclose(res.energies, ref.energies, atol=1e-8)

    def test_scale_invariance_of_conditioning(self):
        # wildly different diagonal scales must not change the spectrum
        h, s = random_problem(9, 5)
        d = np.logspace(-8, 8, 9)
        h2 = h * d[:, None] * d[None, :]
        s2 = s * d[:, None] * d[None, :]
        r1 = eigensolve.generalized_eig(h, s)
        r2 = eigensolve.generalized_eig(h2, s2)
        assert np.allclose(r1.energies, r2.energies, rtol=1e-7, atol=1e-7)

    def test_cm_offset(self):
        # H = diag(e), S = I: energies are e + 3/2
        e = np.array([-2.0, 0.5, 4.0])
        res = eigensolve.generalized_eig(np.diag(e), np.eye(3))
        assert np.allclose(res.energies, np.sort(e) + 1.5)

    def test_validation(self):
        with pytest.raises(ValueError):
            eigensolve.generalized_eig(np.eye(3), np.eye(2))
        with pytest.raises(ValueError):
            eigensolve.generalized_eig(np.full((2, 2), np.nan), np.eye(2))
        with pytest.raises(ValueError):
            eigensolve.generalized_eig(np.eye(2), -np.eye(2))


class TestClassification:
    def test_counts_and_bec_index(self):
        e = np.array([-30.0, -5.0, 0.8, 1.9, 3.1])
        res = eigensolve.generalized_eig(np.diag(e - 1.5), np.eye(5))
        assert res.n_negative == 2
        assert res.bec_index == 2
        assert res.bec_energy == pytest.approx(0.8)

    def test_threshold_tie_break(self):
        # an energy within the zero tolerance counts as positive
        e = np.array([-4.0, 1e-10, 2.0]) - 1.5
        res = eigensolve.generalized_eig(np.diag(e), np.eye(3))
        assert res.n_negative == 1
        assert res.bec_index == 1

    def test_classify_spacings(self):
        e = np.array([-10.0, 1.0, 2.0, 3.5]) - 1.5
        res = eigensolve.generalized_eig(np.diag(e), np.eye(4))
        idx, spacings = eigensolve.classify_bec(res)
        assert idx == 1
        assert np.allclose(spacings, [1.0, 1.5])

    def test_all_negative_spectrum_rejected(self):
        e = np.array([-10.0, -5.0]) - 1.5
        res = eigensolve.generalized_eig(np.diag(e), np.eye(2))
        with pytest.raises(ValueError):
            eigensolve.classify_bec(res)
