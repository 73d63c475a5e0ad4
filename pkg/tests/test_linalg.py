import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tqfi import linalg
from tqfi.errors import DimensionMismatch, NonHermitianInput, NotPSD

from conftest import random_hermitian, random_psd


def test_identity_eigenvalues():
    spec = linalg.eigh(np.eye(2))
    np.testing.assert_allclose(spec.eigenvalues, [1.0, 1.0])


def test_diagonal_sorted_descending():
    spec = linalg.eigh(np.diag([0.3, 0.7]))
    np.testing.assert_allclose(spec.eigenvalues, [0.7, 0.3])
    np.testing.assert_allclose(np.abs(spec.eigenvectors), [[0, 1], [1, 0]], atol=1e-15)


@pytest.mark.parametrize("d", [1, 2, 6, 16])
def test_eigh_reconstructs(rng, d):
    h = random_hermitian(rng, d)
    spec = linalg.eigh(h)
    v = spec.eigenvectors
    assert np.max(np.abs(v.conj().T @ v - np.eye(d))) <= 1e-10
    assert np.max(np.abs(spec.reconstruct() - h)) <= 1e-10
    assert np.all(np.diff(spec.eigenvalues) <= 0)


def test_eigh_phase_convention(rng):
    v = linalg.eigh(random_hermitian(rng, 5)).eigenvectors
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, np.arange(5)]
    np.testing.assert_allclose(pivots.imag, 0, atol=1e-15)
    assert np.all(pivots.real > 0)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        linalg.eigh(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros(3), np.array([[np.nan, 0], [0, 1]])])
def test_as_square_rejects(bad):
    with pytest.raises(DimensionMismatch):
        linalg.as_square(bad)


def test_degeneracy_indicator():
    spec = linalg.eigh(np.diag([0.4, 0.4, 0.2]))
    assert spec.cut_is_degenerate(1)
    assert not spec.cut_is_degenerate(2)
    assert list(spec.degenerate_pairs()) == [True, False]


def test_psd_sqrt_examples():
    np.testing.assert_allclose(linalg.psd_sqrt(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(linalg.psd_sqrt(np.diag([4.0, 1.0])), np.diag([2.0, 1.0]))


def test_psd_sqrt_random(rng):
    p = random_psd(rng, 5)
    s = linalg.psd_sqrt(p)
    assert np.max(np.abs(s @ s - p)) <= 1e-9


def test_psd_sqrt_clamps_roundoff_and_rejects_negative():
    tiny = np.diag([1.0, -1e-13])
    np.testing.assert_allclose(linalg.psd_sqrt(tiny), np.diag([1.0, 0.0]))
    with pytest.raises(NotPSD):
        linalg.psd_sqrt(np.diag([1.0, -1e-3]))


def test_trace_norm_examples(rng):
    assert linalg.trace_norm(np.zeros((3, 3))) == 0.0
    assert linalg.trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0, abs=1e-15)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    oracle = np.linalg.svd(a, compute_uv=False).sum()
    assert abs(linalg.trace_norm(a) - oracle) <= 1e-10


def test_trace_norm_is_a_norm(rng):
    for _ in range(50):
        a, b = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) for _ in range(2))
        c = complex(rng.standard_normal(), rng.standard_normal())
        assert abs(linalg.trace_norm(c * a) - abs(c) * linalg.trace_norm(a)) <= 1e-10
        assert linalg.trace_norm(a) + linalg.trace_norm(b) - linalg.trace_norm(a + b) >= -1e-10


def test_expm_examples():
    np.testing.assert_allclose(linalg.expm_unitary(np.diag([1.0, 2.0]), 0.0), np.eye(2))
    u = linalg.expm_unitary(np.diag([1.0, 2.0]), np.pi)
    np.testing.assert_allclose(u, np.diag([np.exp(-1j * np.pi), np.exp(-2j * np.pi)]), atol=1e-15)


def test_expm_matches_scipy(rng):
    from scipy.linalg import expm

    g = random_hermitian(rng, 5)
    u = linalg.expm_unitary(g, 0.3)
    assert np.max(np.abs(u @ u.conj().T - np.eye(5))) <= 1e-10
    assert np.max(np.abs(u - expm(-0.3j * g))) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.floats(-3, 3, allow_nan=False),
    st.floats(-3, 3, allow_nan=False),
)
def test_expm_group_law(seed, a, b):
    g = random_hermitian(np.random.default_rng(seed), 4)
    lhs = linalg.expm_unitary(g, a) @ linalg.expm_unitary(g, b)
    assert np.max(np.abs(lhs - linalg.expm_unitary(g, a + b))) <= 1e-9


def test_compositions(rng):
    np.testing.assert_array_equal(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    np.testing.assert_array_equal(linalg.direct_sum([np.diag([1.0]), np.diag([2.0, 3.0])]), np.diag([1.0, 2, 3]))
    a, b = random_hermitian(rng, 2), random_hermitian(rng, 3)
    assert linalg.hermiticity_error(linalg.kron(a, b)) <= 1e-14
    ks = linalg.kron_sum(a, b)
    np.testing.assert_allclose(
        linalg.expm_unitary(ks, 0.7),
        np.kron(linalg.expm_unitary(a, 0.7), linalg.expm_unitary(b, 0.7)),
        atol=1e-12,
    )
