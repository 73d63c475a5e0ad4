import json
import warnings

import numpy as np
import pytest

from tqfi import states
from tqfi.errors import (
    DegenerateCut,
    DimensionMismatch,
    InputError,
    InstanceSchemaError,
    InvalidRank,
    NonHermitianInput,
    NotPSD,
    TraceExceedsOne,
)
from tqfi.states import DensityMatrix, SubNormalizedState, UnitaryFamily

from conftest import qutrit_kernel_instance


def test_density_matrix_validation():
    DensityMatrix.from_matrix(np.diag([0.5, 0.5]))
    with pytest.raises(InputError):
        DensityMatrix.from_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(NotPSD):
        DensityMatrix.from_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(NonHermitianInput):
        DensityMatrix.from_matrix(np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_subnormalized_validation():
    s = SubNormalizedState.from_matrix(np.diag([0.3, 0.2]))
    assert s.trace_value == pytest.approx(0.5)
    with pytest.raises(TraceExceedsOne):
        SubNormalizedState.from_matrix(np.diag([0.8, 0.3]))
    with pytest.raises(NotPSD):
        SubNormalizedState.from_matrix(np.diag([0.3, -0.1]))


def test_family_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        UnitaryFamily.from_matrices(np.eye(2) / 2, np.eye(3))


def test_evolve_theta_zero_returns_probe():
    fam = states.random_family(3, 2, 1)
    assert states.evolve(fam, 0.0) is fam.probe


def test_identity_generator_is_trivial():
    fam = UnitaryFamily(states.random_density(3, 3, 2), np.eye(3))
    np.testing.assert_allclose(states.evolve(fam, 1.3).matrix, fam.probe.matrix, atol=1e-14)


@pytest.mark.parametrize("theta", [0.7, -2.1, 10.0])
def test_evolve_preserves_spectrum(theta):
    fam = states.random_family(5, 3, 3)
    out = states.evolve(fam, theta)
    np.testing.assert_allclose(np.linalg.eigvalsh(out.matrix)[::-1], fam.eigenvalues, atol=1e-10)
    assert out.trace == pytest.approx(1.0, abs=1e-10)
    assert out.purity == pytest.approx(fam.probe.purity, abs=1e-10)
    v = out.spectrum.eigenvectors
    assert np.max(np.abs(out.matrix @ v - v * fam.eigenvalues)) <= 1e-10


def test_rank_examples():
    assert DensityMatrix.from_matrix(np.diag([1.0, 0, 0])).rank == 1
    assert DensityMatrix.from_matrix(np.eye(4) / 4).rank == 4
    assert states.random_density(5, 3, 0).rank == 3
    assert states.random_density(6, 3, 11).rank == 3


def test_random_density_properties():
    pure = states.random_density(2, 1, 4)
    assert pure.purity == pytest.approx(1.0, abs=1e-10)
    a, b = states.random_density(4, 2, 9), states.random_density(4, 2, 9)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    with pytest.raises(InvalidRank):
        states.random_density(3, 4, 0)


def test_random_unitary_and_generator():
    u = states.random_unitary(5, 3)
    assert np.max(np.abs(u @ u.conj().T - np.eye(5))) <= 1e-12
    g = states.random_generator(5, 3)
    np.testing.assert_allclose(g, g.conj().T)


def test_truncate_full_rank_zero_shift():
    fam = states.random_family(4, 4, 5)
    pair = states.truncate_pair(fam, 0.4, 0.0, 4)
    rho = states.evolve(fam, 0.4).matrix
    np.testing.assert_allclose(pair.exact_truncated.matrix, rho, atol=1e-12)
    np.testing.assert_allclose(pair.error_truncated.matrix, rho, atol=1e-12)
    assert pair.exact_truncated.trace_value == pytest.approx(1.0)


def test_truncate_qutrit_example():
    rho, g = qutrit_kernel_instance()
    fam = UnitaryFamily.from_matrices(rho, g)
    pair = states.truncate_pair(fam, 0.0, 0.0, 1)
    np.testing.assert_allclose(pair.kept_eigenvalues, [0.7])
    assert pair.exact_truncated.trace_value == pytest.approx(0.7)
    np.testing.assert_allclose(pair.error_truncated.matrix, pair.exact_truncated.matrix, atol=1e-15)


def test_error_trace_matches_overlaps():
    fam = states.random_family(5, 4, 6)
    traces = []
    for m in range(1, 6):
        pair = states.truncate_pair(fam, 0.3, 0.05, m)
        rho_shift = states.evolve(fam, 0.35).matrix
        v = pair.kept_vectors
        overlaps = np.einsum("ij,ik,kj->", v.conj(), rho_shift, v).real
        assert pair.error_truncated.trace_value == pytest.approx(overlaps, abs=1e-12)
        assert pair.error_truncated.trace_value <= 1 + 1e-10
        traces.append(pair.exact_truncated.trace_value)
    assert np.all(np.diff(traces) >= 0)


def test_degenerate_cut_warns():
    fam = UnitaryFamily.from_matrices(np.diag([0.4, 0.4, 0.2]), np.eye(3))
    with pytest.warns(DegenerateCut):
        pair = states.truncate_pair(fam, 0.0, 0.01, 1)
    assert pair.degenerate_cut
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert not states.truncate_pair(fam, 0.0, 0.01, 2).degenerate_cut


def test_zero_eigenvalue_ties_are_not_degenerate():
    fam = UnitaryFamily.from_matrices(np.diag([0.6, 0.4, 0, 0]), np.eye(4))
    assert not states.cut_is_degenerate(fam.probe, 2)
    assert not states.cut_is_degenerate(fam.probe, 3)


def test_instance_round_trip(tmp_path):
    fam = states.random_family(4, 2, 7)
    path = tmp_path / "inst.json"
    states.save_instance(path, fam, 0.25)
    back, theta = states.load_instance(path)
    np.testing.assert_array_equal(back.probe.matrix, fam.probe.matrix)
    np.testing.assert_array_equal(back.generator, fam.generator)
    assert theta == 0.25


@pytest.mark.parametrize(
    "payload",
    [
        [],
        {"d": 2, "rho": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
        {"d": 2, "rho": [[1, 0], [0, 0]], "generator": [[1, 0], [0, 1]]},
        {"d": "2", "rho": [], "generator": []},
        {"d": 1, "rho": [[[1, 0]]], "generator": [[[1, 0]]], "theta": "x"},
    ],
)
def test_instance_schema_errors(payload):
    with pytest.raises(InstanceSchemaError):
        states.instance_from_dict(payload)


def test_load_rejects_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    with pytest.raises(InstanceSchemaError):
        states.load_instance(p)
    p.write_text(json.dumps({"d": 1, "rho": [[[2, 0]]], "generator": [[[0, 0]]]}))
    with pytest.raises(InputError):
        states.load_instance(p)
