import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudospec import _kernels
from pseudospec.eigen import eigenvalues, eigenvector, spectrum_report
from pseudospec.errors import NoConvergence, NonFinite


def _random_complex(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def _match(a, b):
    """Max distance after greedy multiset matching."""
    b = list(b)
    worst = 0.0
    for z in a:
        k = int(np.argmin([abs(z - w) for w in b]))
        worst = max(worst, abs(z - b.pop(k)))
    return worst


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    if request.param == "numpy":
        monkeypatch.setenv("PSEUDOSPEC_DISABLE_NUMBA", "1")
    else:
        monkeypatch.delenv("PSEUDOSPEC_DISABLE_NUMBA", raising=False)
    assert _kernels.backend_name() == request.param
    return request.param


def test_rotation_generator(backend):
    np.testing.assert_allclose(eigenvalues(np.array([[0, 1], [-1, 0]])), [-1j, 1j], atol=1e-14)


def test_diagonal(backend):
    w = eigenvalues(np.diag([3, -1 + 2j, 7]))
    np.testing.assert_allclose(w, [-1 + 2j, 3, 7], atol=1e-14)


def test_companion_matrix(backend):
    w = eigenvalues(np.array([[0.0, -2.0], [1.0, 3.0]]))
    np.testing.assert_allclose(w, [1, 2], atol=1e-13)
    assert w.sum() == pytest.approx(3.0)
    assert np.prod(w) == pytest.approx(2.0)


def test_empty_and_scalar():
    assert eigenvalues(np.zeros((0, 0))).size == 0
    np.testing.assert_array_equal(eigenvalues([[2 - 1j]]), [2 - 1j])


def test_jordan_block_and_zero_matrix(backend):
    J = np.eye(6, k=1) + 0.5 * np.eye(6)
    np.testing.assert_allclose(eigenvalues(J), 0.5, atol=1e-2)
    assert not eigenvalues(np.zeros((5, 5))).any()


def test_bad_inputs():
    with pytest.raises(ValueError):
        eigenvalues(np.zeros((2, 3)))
    with pytest.raises(NonFinite):
        eigenvalues(np.array([[np.inf, 0], [0, 1]]))


def test_iteration_budget_reported():
    rng = np.random.default_rng(3)
    with pytest.raises(NoConvergence) as info:
        eigenvalues(_random_complex(rng, 30), max_iter=0)
    lo, hi = info.value.block
    assert 0 <= lo <= hi < 30


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20, 50])
def test_matches_lapack(backend, n):
    rng = np.random.default_rng(n)
    A = _random_complex(rng, n)
    assert _match(eigenvalues(A), np.linalg.eigvals(A)) <= 1e-10 * np.linalg.norm(A)


def test_backends_agree(monkeypatch):
    rng = np.random.default_rng(11)
    A = _random_complex(rng, 40)
    fast = eigenvalues(A)
    monkeypatch.setenv("PSEUDOSPEC_DISABLE_NUMBA", "1")
    slow = eigenvalues(A)
    assert _match(fast, slow) <= 1e-11 * np.linalg.norm(A)


def test_badly_scaled_matrix_is_balanced():
    rng = np.random.default_rng(5)
    D = np.diag(10.0 ** rng.uniform(-6, 6, 12))
    B = _random_complex(rng, 12)
    A = D @ B @ np.linalg.inv(D)
    w = eigenvalues(A)
    assert _match(w, np.linalg.eigvals(B)) <= 1e-8 * np.linalg.norm(B)


SEEDS = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(SEEDS, st.integers(1, 50))
def test_trace_and_determinant(seed, n):
    rng = np.random.default_rng(seed)
    A = _random_complex(rng, n)
    w = eigenvalues(A)
    tr = np.trace(A)
    assert abs(w.sum() - tr) <= 1e-9 * max(abs(tr), np.linalg.norm(A))
    sign, logdet = np.linalg.slogdet(A)
    det = sign * np.exp(logdet)
    assert abs(np.prod(w) - det) <= 1e-6 * abs(det)


@settings(max_examples=40, deadline=None)
@given(SEEDS, st.integers(1, 30))
def test_similarity_invariance(seed, n):
    rng = np.random.default_rng(seed)
    A = _random_complex(rng, n)
    # well conditioned P: identity plus a small perturbation
    P = np.eye(n) + 0.2 * _random_complex(rng, n) / math.sqrt(n)
    B = np.linalg.solve(P, A @ P)
    assert _match(eigenvalues(A), eigenvalues(B)) <= 1e-7 * np.linalg.norm(A)


@settings(max_examples=40, deadline=None)
@given(SEEDS, st.integers(1, 50))
def test_hermitian_inputs_give_real_spectrum(seed, n):
    rng = np.random.default_rng(seed)
    M = _random_complex(rng, n)
    A = M + M.conj().T
    w = eigenvalues(A)
    assert np.abs(w.imag).max() <= 1e-10 * np.linalg.norm(A, 2)
    np.testing.assert_allclose(np.sort(w.real), np.linalg.eigvalsh(A), atol=1e-10 * np.linalg.norm(A))


def test_sorted_by_real_then_imag():
    w = eigenvalues(np.diag([2, 1 + 1j, 1 - 1j, 0]))
    np.testing.assert_array_equal(w, [0, 1 - 1j, 1 + 1j, 2])


def test_eigenvector_by_inverse_iteration():
    rng = np.random.default_rng(2)
    A = _random_complex(rng, 25)
    for lam in eigenvalues(A)[:5]:
        v = eigenvector(A, lam)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        assert np.linalg.norm(A @ v - lam * v) <= 1e-9 * np.linalg.norm(A)


# --- spectrum report ------------------------------------------------------------


def test_report_partition_example():
    rep = spectrum_report([1, 2 + 1e-12j, 5 - 0.9j], im_threshold=1e-6, energy_ceiling=10)
    np.testing.assert_array_equal(rep.real_subset, [1, 2 + 1e-12j])
    np.testing.assert_array_equal(rep.complex_subset, [5 - 0.9j])
    assert rep.above_ceiling.size == 0


def test_report_empty():
    rep = spectrum_report([])
    assert rep.eigenvalues.size == rep.real_subset.size == rep.complex_subset.size == 0
    assert rep.max_abs_imag_real_subset == 0.0


def test_report_ceiling_and_threshold():
    rep = spectrum_report([0, 3 + 0.1j, 20 + 5j], im_threshold=0.2, energy_ceiling=5)
    assert rep.above_ceiling.tolist() == [20 + 5j]
    assert rep.max_abs_imag_real_subset == pytest.approx(0.1)
    d = rep.to_dict()
    assert d["above_ceiling_count"] == 1
    assert d["complex"] == []
    with pytest.raises(ValueError):
        spectrum_report([1], im_threshold=0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=100, allow_nan=False), max_size=30),
       st.floats(1e-6, 10), st.floats(-50, 50))
def test_report_partitions_below_ceiling(eigs, thr, ceiling):
    rep = spectrum_report(eigs, thr, ceiling)
    assert rep.real_subset.size + rep.complex_subset.size + rep.above_ceiling.size == len(eigs)
    assert np.all(np.abs(rep.real_subset.imag) <= thr)
    assert np.all(np.abs(rep.complex_subset.imag) > thr)
