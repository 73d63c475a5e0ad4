"""Kraus-form CPTP and CPTNI maps, mostly as adversarial test inputs."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatch, InputError, NotAProjector
from .linalg import dagger, hermitize
from .states import SubNormalizedState, _ginibre, _rng

COMPLETENESS_TOL = 1e-10


class TraceClass(str, enum.Enum):
    PRESERVING = "preserving"
    NON_INCREASING = "non_increasing"


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus_operators: tuple
    trace_class: TraceClass = TraceClass.NON_INCREASING

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=np.complex128) for k in self.kraus_operators)
        if not ops:
            raise InputError("a channel needs at least one Kraus operator")
        d_in = ops[0].shape[1]
        if any(k.ndim != 2 or k.shape[1] != d_in for k in ops):
            raise DimensionMismatch("Kraus operators must share the input dimension")
        d_out = ops[0].shape[0]
        if any(k.shape[0] != d_out for k in ops):
            raise DimensionMismatch("Kraus operators must share the output dimension")
        object.__setattr__(self, "kraus_operators", ops)
        object.__setattr__(self, "trace_class", TraceClass(self.trace_class))
        gap = np.eye(d_in) - self.completeness()
        if self.trace_class is TraceClass.PRESERVING:
            err = float(np.max(np.abs(gap)))
            if err > COMPLETENESS_TOL:
                raise InputError(f"sum K^H K differs from identity by {err:.3e}")
        elif np.linalg.eigvalsh(gap)[0] < -COMPLETENESS_TOL:
            raise InputError("sum K^H K exceeds the identity")

    @property
    def input_dim(self) -> int:
        return self.kraus_operators[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.kraus_operators[0].shape[0]

    def completeness(self) -> np.ndarray:
        return hermitize(sum(dagger(k) @ k for k in self.kraus_operators))

    def __call__(self, state):
        return apply(self, state)


def apply(channel: KrausChannel, state) -> SubNormalizedState:
    """``sum_k K_k tau K_k^H``."""
    mat = state.matrix if hasattr(state, "matrix") else np.asarray(state, dtype=np.complex128)
    if mat.shape != (channel.input_dim, channel.input_dim):
        raise DimensionMismatch(
            f"state has shape {mat.shape}, channel expects dimension {channel.input_dim}"
        )
    out = hermitize(sum(k @ mat @ dagger(k) for k in channel.kraus_operators))
    return SubNormalizedState(out, float(np.trace(out).real))


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel((np.eye(d),), TraceClass.PRESERVING)


def projector_channel(pi) -> KrausChannel:
    """``tau -> Pi tau Pi`` for an orthogonal projector ``Pi``."""
    p = linalg.as_square(pi, "projector")
    err = max(linalg.hermiticity_error(p), float(np.max(np.abs(p @ p - p))))
    if err > COMPLETENESS_TOL:
        raise NotAProjector(f"operator is not an orthogonal projector (residual {err:.3e})")
    p = hermitize(p)
    trace_class = (
        TraceClass.PRESERVING
        if np.allclose(p, np.eye(p.shape[0]), atol=COMPLETENESS_TOL)
        else TraceClass.NON_INCREASING
    )
    return KrausChannel((p,), trace_class)


def random_cptp(d: int, seed, n_kraus: int | None = None) -> KrausChannel:
    """Random channel from a random isometry ``C^d -> C^d (x) C^k``.

    The isometry comes from orthonormalizing the columns of a ``dk x d``
    complex Gaussian; its ``d x d`` blocks are the Kraus operators.
    """
    rng = _rng(seed)
    k = int(rng.integers(1, d + 1)) if n_kraus is None else n_kraus
    q, r = np.linalg.qr(_ginibre(rng, d * k, d))
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    ops = tuple(q[i * d : (i + 1) * d, :] for i in range(k))
    return KrausChannel(ops, TraceClass.PRESERVING)


def random_cptni(d: int, seed) -> KrausChannel:
    """A random CPTP map followed by a loss.

    The loss is either a projector onto a random proper subspace (a lossy
    subspace) or a scalar contraction ``sqrt(c)`` on every Kraus operator with
    ``c`` uniform in ``(0, 1]`` (a detector that fires with probability ``c``).
    """
    rng = _rng(seed)
    base = random_cptp(d, rng)
    if d > 1 and rng.random() < 0.5:
        s = int(rng.integers(1, d))
        q, _ = np.linalg.qr(_ginibre(rng, d, s))
        p = q @ dagger(q)
        ops = tuple(p @ k for k in base.kraus_operators)
    else:
        c = 1.0 - rng.random()  # (0, 1]
        ops = tuple(np.sqrt(c) * k for k in base.kraus_operators)
    return KrausChannel(ops, TraceClass.NON_INCREASING)


def contraction(channel: KrausChannel, factor: float) -> KrausChannel:
    """Scale every Kraus operator by ``factor`` (``|factor| <= 1``)."""
    if abs(factor) > 1:
        raise InputError("contraction factor must not exceed 1 in magnitude")
    return KrausChannel(
        tuple(factor * k for k in channel.kraus_operators), TraceClass.NON_INCREASING
    )
