import numpy as np
import pytest
import scipy.linalg

from contactlab.eigen import (
    EigenRequest,
    OperatorHandle,
    SpectrumResult,
    check_symmetry,
    eigs_smallest,
    from_matrix,
    from_tridiagonal,
    inertia_negative,
    negative_count,
    sturm_negative_count,
)
from contactlab.errors import ValidationError


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return 0.5 * (a + a.T)


class TestHandles:
    def test_tridiagonal_matvec_matches_dense(self):
        rng = np.random.default_rng(0)
        d, e = rng.standard_normal(40), rng.standard_normal(39)
        op = from_tridiagonal(d, e)
        x = rng.standard_normal(40)
        assert np.allclose(op.matvec(x), op.dense() @ x)

    def test_symmetry_check_passes_and_fails(self):
        check_symmetry(from_matrix(random_symmetric(20, 1)))
        skew = np.triu(np.ones((20, 20)), 1)
        with pytest.raises(ValidationError):
            check_symmetry(OperatorHandle(20, lambda x: skew @ x))


class TestCounting:
    def test_sturm_matches_full_spectrum(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            d, e = rng.standard_normal(80), rng.standard_normal(79)
            exact = int(np.count_nonzero(scipy.linalg.eigvalsh_tridiagonal(d, e) < 0))
            assert sturm_negative_count(d, e) == exact

    def test_sturm_with_shift(self):
        d = np.array([1.0, 2.0, 3.0])
        e = np.zeros(2)
        assert sturm_negative_count(d, e, shift=2.5) == 2

    def test_inertia_matches_eigvalsh(self):
        for seed in range(5):
            a = random_symmetric(60, seed)
            exact = int(np.count_nonzero(np.linalg.eigvalsh(a) < 0))
            assert inertia_negative(a) == exact

    def test_negative_count_handles(self):
        a = np.diag([-3.0, -1.0, 2.0, 5.0])
        assert negative_count(from_matrix(a)) == 2
        assert negative_count(from_tridiagonal(np.array([-3.0, -1.0, 2.0]), np.zeros(2))) == 2


class TestEigsSmallest:
    def test_dense_path_matches_lapack(self):
        a = random_symmetric(50, 3)
        res = eigs_smallest(from_matrix(a), EigenRequest(k=5))
        assert np.allclose(res.eigenvalues, np.linalg.eigvalsh(a)[:5], atol=1e-12)
        assert np.all(res.residuals < 1e-10)

    def test_iterative_matches_dense(self):
        a = random_symmetric(120, 4)
        dense = eigs_smallest(from_matrix(a), EigenRequest(k=4), method="dense")
        it = eigs_smallest(from_matrix(a), EigenRequest(k=4), method="iterative")
        assert np.allclose(dense.eigenvalues, it.eigenvalues, atol=1e-9)

    def test_tridiagonal_iterative_matches_dense(self):
        rng = np.random.default_rng(5)
        d, e = rng.standard_normal(200) + 3.0, rng.standard_normal(199)
        op = from_tridiagonal(d, e)
        dense = eigs_smallest(op, EigenRequest(k=3), method="dense")
        it = eigs_smallest(op, EigenRequest(k=3), method="iterative")
        assert np.allclose(dense.eigenvalues, it.eigenvalues, atol=1e-9)

    def test_deterministic_for_fixed_seed(self):
        a = random_symmetric(90, 6)
        r1 = eigs_smallest(from_matrix(a), EigenRequest(k=3, seed=11), method="iterative")
        r2 = eigs_smallest(from_matrix(a), EigenRequest(k=3, seed=11), method="iterative")
        assert np.array_equal(r1.eigenvalues, r2.eigenvalues)

    def test_k_exceeding_dimension_rejected(self):
        with pytest.raises(ValidationError):
            eigs_smallest(from_matrix(np.eye(3)), EigenRequest(k=4))

    def test_k_zero_returns_empty(self):
        res = eigs_smallest(from_matrix(np.eye(3)), EigenRequest(k=0))
        assert res.eigenvalues.size == 0

    def test_spectrum_result_rejects_descending(self):
        with pytest.raises(ValidationError):
            SpectrumResult(eigenvalues=np.array([1.0, 0.0]), residuals=np.zeros(2))

    def test_negative_count_reported(self):
        a = np.diag([-2.0, -0.5, 1.0, 4.0])
        res = eigs_smallest(from_matrix(a), EigenRequest(k=2))
        assert res.negative_count == 2
