"""Fidelity, generalized fidelity and the distances built on it.

The trace-norm term ``||sqrt(tau) sqrt(sigma)||_1`` is evaluated on the
supports of the two operators: with ``tau = U_t D_t U_t^H`` restricted to its
nonzero eigenvalues, the singular values of ``D_t^{1/2} U_t^H U_s D_s^{1/2}``
are those of ``sqrt(tau) sqrt(sigma)``. Summing singular values directly
avoids taking square roots of round-off sized eigenvalues, which would
otherwise put errors of order 1e-8 into ``1 - F``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotPSD, TraceExceedsOne
from .linalg import dagger
from .states import (
    RANK_TOL,
    TRACE_TOL,
    DensityMatrix,
    SubNormalizedState,
    TruncatedPair,
    UnitaryFamily,
    truncate_pair,
)

# below this trace deficit the geometric-mean term is taken to be exactly zero
DEFICIT_ZERO = 1e-12


def _matrix(x) -> np.ndarray:
    if isinstance(x, (DensityMatrix, SubNormalizedState)):
        return x.matrix
    return linalg.as_square(x)


def _scaled_support(x) -> tuple[np.ndarray, float]:
    """Return ``U D^{1/2}`` on the support of ``x``, and its trace."""
    if isinstance(x, DensityMatrix):
        spec = x.spectrum
    else:
        spec = linalg.eigh(_matrix(x))
    vals = spec.eigenvalues
    scale = spec.scale
    if vals.size and vals[-1] < -linalg.PSD_TOL * max(scale, 1e-300):
        raise NotPSD(f"state has eigenvalue {vals[-1]:.3e}")
    keep = vals > RANK_TOL * scale
    factor = spec.eigenvectors[:, keep] * np.sqrt(vals[keep])
    trace = float(np.sum(np.clip(vals, 0.0, None)))
    return factor, trace


def _check_dims(a, b):
    da, db = _matrix(a).shape[0], _matrix(b).shape[0]
    if da != db:
        raise DimensionMismatch(f"dimensions differ: {da} vs {db}")


def sqrt_product_norm(tau, sigma) -> float:
    """``||sqrt(tau) sqrt(sigma)||_1`` for PSD arguments."""
    _check_dims(tau, sigma)
    ft, _ = _scaled_support(tau)
    fs, _ = _scaled_support(sigma)
    if ft.shape[1] == 0 or fs.shape[1] == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(dagger(ft) @ fs, compute_uv=False)))


def fidelity(rho1, rho2, form: str = "symmetric") -> float:
    """Standard (root) fidelity of two normalized states.

    ``form="symmetric"`` evaluates ``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`` in
    the eigenbasis of ``rho1``; ``form="sqrt_product"`` evaluates
    ``||sqrt(rho1) sqrt(rho2)||_1``. The two agree for valid input.
    """
    _check_dims(rho1, rho2)
    if form == "sqrt_product":
        return min(sqrt_product_norm(rho1, rho2), 1.0)
    if form != "symmetric":
        raise ValueError(f"unknown fidelity form {form!r}")
    f1, _ = _scaled_support(rho1)
    inner = linalg.hermitize(dagger(f1) @ _matrix(rho2) @ f1)
    vals = np.linalg.eigvalsh(inner)
    return min(float(np.sum(np.sqrt(np.clip(vals, 0.0, None)))), 1.0)


def _order_key(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a).tobytes()


def generalized_fidelity(tau, sigma) -> float:
    """``||sqrt(tau) sqrt(sigma)||_1 + sqrt((1 - Tr tau)(1 - Tr sigma))``.

    Symmetric in its arguments bit for bit: the pair is put in a canonical
    order before evaluation.
    """
    _check_dims(tau, sigma)
    a, b = _matrix(tau), _matrix(sigma)
    if _order_key(b) < _order_key(a):
        tau, sigma, a, b = sigma, tau, b, a
    fa, tra = _scaled_support(tau)
    fb, trb = _scaled_support(sigma)
    for tr in (tra, trb):
        if tr > 1.0 + TRACE_TOL:
            raise TraceExceedsOne(f"trace {tr!r} exceeds 1")
    if np.array_equal(a, b):
        return 1.0
    if fa.shape[1] == 0 or fb.shape[1] == 0:
        overlap = 0.0
    else:
        overlap = float(np.sum(np.linalg.svd(dagger(fa) @ fb, compute_uv=False)))
    return min(overlap + _deficit_term(tra, trb), 1.0)


def _deficit_term(tr_a: float, tr_b: float) -> float:
    da, db = 1.0 - tr_a, 1.0 - tr_b
    if da < DEFICIT_ZERO or db < DEFICIT_ZERO:
        return 0.0
    return float(np.sqrt(da * db))


@dataclass(frozen=True)
class TOperator:
    """The m x m operator whose root trace is the truncated overlap term."""

    matrix: np.ndarray
    basis_labels: tuple[int, ...]

    def sqrt_trace(self) -> float:
        vals = np.linalg.eigvalsh(self.matrix)
        scale = max(float(np.max(np.abs(vals))), 1e-300) if vals.size else 1.0
        if vals.size and vals[0] < -linalg.PSD_TOL * scale:
            raise NotPSD(f"T operator has eigenvalue {vals[0]:.3e}")
        return float(np.sum(np.sqrt(np.clip(vals, 0.0, None))))


def t_operator(pair: TruncatedPair, error_state: DensityMatrix | None = None) -> TOperator:
    """``T_ij = sqrt(l_i l_j) <l_i(t)| rho_{t+d} |l_j(t)>`` over the kept indices."""
    if error_state is None:
        error_state = pair.error_state
    rho_err = _matrix(error_state)
    v = pair.kept_vectors
    root = np.sqrt(np.clip(pair.kept_eigenvalues, 0.0, None))
    t = root[:, None] * (dagger(v) @ rho_err @ v) * root[None, :]
    return TOperator(linalg.hermitize(t), tuple(range(pair.projector_rank)))


def truncated_pair_fidelity(pair: TruncatedPair) -> float:
    """Generalized fidelity of a truncated pair through its T operator."""
    overlap = t_operator(pair).sqrt_trace()
    return overlap + _deficit_term(
        pair.exact_truncated.trace_value, pair.error_truncated.trace_value
    )


def generalized_fidelity_truncated(
    family: UnitaryFamily, theta: float, delta: float, m: int
) -> float:
    return truncated_pair_fidelity(truncate_pair(family, theta, delta, m))


def bures_sq(tau, sigma) -> float:
    return max(2.0 * (1.0 - generalized_fidelity(tau, sigma)), 0.0)


def bures(tau, sigma) -> float:
    return float(np.sqrt(bures_sq(tau, sigma)))


def angular_distance(tau, sigma) -> float:
    return float(np.arccos(np.clip(generalized_fidelity(tau, sigma), 0.0, 1.0)))


def purified_distance(tau, sigma) -> float:
    return float(np.sqrt(max(1.0 - generalized_fidelity(tau, sigma), 0.0)))
