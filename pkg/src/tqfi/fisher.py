"""Quantum Fisher information and its truncated lower bound.

Routes provided for the full QFI:

* ``sld``: build the symmetric logarithmic derivative ``J`` and return
  ``Tr[J^2 rho_theta]``;
* ``eigenbasis``: the spectral sum over probe eigenpairs;
* ``finite_difference``: ``8 (1 - F(rho_t, rho_{t+d})) / d^2`` extrapolated
  to ``d -> 0``.

Routes for the truncated QFI (TQFI) at cut ``m``:

* ``closed_form``: spectral sum restricted to the kept indices. Valid only
  for ``m < rank``; at ``m >= rank`` the trace-deficit term of the
  generalized fidelity vanishes identically and the limit equals the full QFI
  instead, so :func:`tqfi` dispatches there;
* ``tsld``: ``Tr[L^2 tau_theta]`` with the truncated SLD ``L``;
* ``finite_difference``: the generalized-fidelity limit, the defining route.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateCut,
    DeltaTooLarge,
    InvalidRank,
    NonConvergent,
    NumericalError,
    TruncationNotStrict,
)
from .fidelity import DEFICIT_ZERO, fidelity, generalized_fidelity, truncated_pair_fidelity
from .linalg import dagger, hermitize
from .states import UnitaryFamily, cut_is_degenerate, evolve, truncate_pair

DEFAULT_DELTAS = (1e-2, 5e-3, 2.5e-3)
PAIR_TOL = 1e-12  # relative floor on l_i + l_j
GUARD_FRACTION = 0.01  # delta^2 <= GUARD_FRACTION * (1 - kept trace)
FD_RTOL = 1e-4
FD_ATOL = 1e-6
FORM_AGREEMENT_TOL = 1e-10


class Method(str, enum.Enum):
    SLD = "sld"
    EIGENBASIS = "eigenbasis"
    CLOSED_FORM = "closed_form"
    TSLD = "tsld"
    FINITE_DIFFERENCE = "finite_difference"


@dataclass(frozen=True)
class FisherResult:
    value: float
    method: Method
    m: int | None = None  # None means no truncation
    degenerate_flag: bool = False
    uncertainty: float | None = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method.value,
            "m": "full" if self.m is None else self.m,
            "degenerate_flag": self.degenerate_flag,
            "uncertainty": self.uncertainty,
        }


@dataclass(frozen=True)
class SLDOperator:
    matrix: np.ndarray
    truncation: int | None = None


# -- spectral sums -----------------------------------------------------------


def _valid_pairs(lam: np.ndarray, scale: float) -> np.ndarray:
    s = lam[:, None] + lam[None, :]
    return s > PAIR_TOL * scale


def spectral_sums(lam: np.ndarray, g_eig: np.ndarray, scale: float | None = None) -> tuple[float, float]:
    """Both algebraic forms of ``sum_ij f(l_i, l_j) |G_ij|^2`` over the given indices.

    Returns ``(difference_form, two_sum_form)`` where the first is
    ``2 sum (l_i - l_j)^2 / (l_i + l_j) |G_ij|^2`` and the second is
    ``4 sum l_i |G_ij|^2 - 8 sum l_i l_j / (l_i + l_j) |G_ij|^2``. Pairs
    with ``l_i + l_j`` below ``PAIR_TOL * scale`` are skipped.
    """
    lam = np.asarray(lam, dtype=float)
    if scale is None:
        scale = float(np.max(np.abs(lam))) if lam.size else 1.0
    g2 = np.abs(g_eig) ** 2
    ok = _valid_pairs(lam, scale)
    s = np.where(ok, lam[:, None] + lam[None, :], 1.0)
    diff = lam[:, None] - lam[None, :]
    prod = lam[:, None] * lam[None, :]
    difference_form = 2.0 * float(np.sum(np.where(ok, diff**2 / s, 0.0) * g2))
    two_sum = 4.0 * float(np.sum(lam[:, None] * g2)) - 8.0 * float(
        np.sum(np.where(ok, prod / s, 0.0) * g2)
    )
    return difference_form, two_sum


def _check_forms(a: float, b: float, what: str) -> None:
    if abs(a - b) > FORM_AGREEMENT_TOL * max(1.0, abs(a)):
        raise NumericalError(f"{what}: algebraic forms disagree ({a!r} vs {b!r})")


def subspace_tqfi(lam: np.ndarray, g_eig: np.ndarray, kept) -> float:
    """TQFI of a truncation onto an arbitrary set of probe eigenvectors.

    ``lam`` and ``g_eig`` describe the probe in its eigenbasis; ``kept``
    selects the retained eigenvectors (a boolean mask or index list). When the
    retained weight is one, the trace-deficit term is identically zero and
    the limit is the full QFI; otherwise it is the restricted spectral sum.
    Unlike :func:`tqfi_closed` the kept set need not be the top eigenvalues,
    which is what tensor products and direct sums of truncations produce.
    """
    lam = np.asarray(lam, dtype=float)
    idx = np.flatnonzero(kept) if np.asarray(kept).dtype == bool else np.asarray(kept, dtype=int)
    scale = float(np.max(np.abs(lam))) if lam.size else 1.0
    if 1.0 - float(np.sum(lam[idx])) < DEFICIT_ZERO:
        value, check = spectral_sums(lam, g_eig, scale)
    else:
        value, check = spectral_sums(lam[idx], g_eig[np.ix_(idx, idx)], scale)
    _check_forms(value, check, "subspace TQFI")
    return value


# -- SLD and QFI -------------------------------------------------------------


def state_derivative(family: UnitaryFamily, theta: float) -> np.ndarray:
    """``d rho_theta / d theta = i (rho_theta G - G rho_theta)``."""
    rho = evolve(family, theta).matrix
    g = family.generator
    return hermitize(1j * (rho @ g - g @ rho))


def sld(family: UnitaryFamily, theta: float = 0.0) -> SLDOperator:
    state = evolve(family, theta)
    lam = state.spectrum.eigenvalues
    v = state.spectrum.eigenvectors
    deriv = dagger(v) @ state_derivative(family, theta) @ v
    ok = _valid_pairs(lam, state.spectrum.scale)
    s = np.where(ok, lam[:, None] + lam[None, :], 1.0)
    j_eig = np.where(ok, 2.0 * deriv / s, 0.0)
    return SLDOperator(hermitize(v @ j_eig @ dagger(v)), None)


def qfi(
    family: UnitaryFamily,
    theta: float = 0.0,
    method: Method | str = Method.EIGENBASIS,
    deltas: Sequence[float] = DEFAULT_DELTAS,
) -> FisherResult:
    method = Method(method)
    if method is Method.EIGENBASIS:
        value, check = spectral_sums(family.eigenvalues, family.generator_eigenbasis)
        _check_forms(value, check, "QFI")
        return FisherResult(value, method)
    if method is Method.SLD:
        j = sld(family, theta).matrix
        rho = evolve(family, theta).matrix
        return FisherResult(float(np.trace(j @ j @ rho).real), method)
    if method is Method.FINITE_DIFFERENCE:
        base = evolve(family, theta)

        def f(delta):
            return fidelity(base, evolve(family, theta + delta))

        value, err = fidelity_curvature(f, deltas)
        return FisherResult(max(value, 0.0), method, uncertainty=err)
    raise ValueError(f"method {method.value!r} does not compute the full QFI")


# -- truncated QFI -----------------------------------------------------------


def _check_m(family: UnitaryFamily, m: int) -> None:
    if not 1 <= m <= family.dim:
        raise InvalidRank(f"truncation rank m={m} outside [1, {family.dim}]")


def kept_trace(family: UnitaryFamily, m: int) -> float:
    return float(np.sum(family.eigenvalues[:m]))


def tqfi_closed(family: UnitaryFamily, m: int) -> FisherResult:
    _check_m(family, m)
    r = family.rank
    if m >= r:
        raise TruncationNotStrict(
            f"closed form requires m < rank (m={m}, rank={r}); use tqfi() instead"
        )
    lam = family.eigenvalues
    value, check = spectral_sums(lam[:m], family.generator_eigenbasis[:m, :m], float(lam[0]))
    _check_forms(value, check, "TQFI closed form")
    return FisherResult(value, Method.CLOSED_FORM, m, cut_is_degenerate(family.probe, m))


def tsld(family: UnitaryFamily, theta: float, m: int) -> SLDOperator:
    """Truncated SLD in its unitary-family form.

    ``L = 2i sum_{i,j<=m} (l_i - l_j)/(l_i + l_j) <l_i|G|l_j> |l_i(t)><l_j(t)|``.
    """
    _check_m(family, m)
    lam = family.eigenvalues[:m]
    g = family.generator_eigenbasis[:m, :m]
    ok = _valid_pairs(lam, float(family.eigenvalues[0]))
    s = np.where(ok, lam[:, None] + lam[None, :], 1.0)
    coeff = np.where(ok, (lam[:, None] - lam[None, :]) / s, 0.0)
    vt = family.unitary(theta) @ family.probe.spectrum.eigenvectors[:, :m]
    l_eig = 2j * coeff * g
    return SLDOperator(hermitize(vt @ l_eig @ dagger(vt)), m)


def truncated_state(family: UnitaryFamily, theta: float, m: int) -> np.ndarray:
    """``tau_theta = sum_{i<=m} l_i |l_i(t)><l_i(t)|``."""
    lam = family.eigenvalues[:m]
    vt = family.unitary(theta) @ family.probe.spectrum.eigenvectors[:, :m]
    return hermitize((vt * lam) @ dagger(vt))


def truncated_state_derivative(family: UnitaryFamily, theta: float, m: int) -> np.ndarray:
    tau = truncated_state(family, theta, m)
    g = family.generator
    return hermitize(1j * (tau @ g - g @ tau))


def tqfi_tsld(family: UnitaryFamily, theta: float, m: int) -> FisherResult:
    ell = tsld(family, theta, m).matrix
    tau = truncated_state(family, theta, m)
    value = float(np.trace(ell @ ell @ tau).real)
    return FisherResult(value, Method.TSLD, m, cut_is_degenerate(family.probe, m))


def guard_limit(family: UnitaryFamily, m: int) -> float:
    """Largest admissible finite-difference step at cut ``m`` (``inf`` if unguarded)."""
    if m >= family.rank:
        return float("inf")
    return float(np.sqrt(GUARD_FRACTION * max(1.0 - kept_trace(family, m), 0.0)))


def guarded_deltas(family: UnitaryFamily, m: int, base: Sequence[float] = DEFAULT_DELTAS) -> tuple:
    """``base`` scaled down just enough to satisfy the step guard at cut ``m``."""
    limit = guard_limit(family, m)
    factor = min(1.0, limit / max(base))
    return tuple(d * factor for d in base)


def tqfi_fd(
    family: UnitaryFamily,
    theta: float,
    m: int,
    deltas: Sequence[float] = DEFAULT_DELTAS,
) -> FisherResult:
    _check_m(family, m)
    limit = guard_limit(family, m)
    for d in deltas:
        if abs(d) > limit * (1 + 1e-12):
            raise DeltaTooLarge(
                f"delta={d:g} violates delta^2 <= {GUARD_FRACTION} * (1 - kept trace);"
                f" largest admissible step is {limit:.3e}"
            )
    degenerate = cut_is_degenerate(family.probe, m)

    def f(delta):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateCut)
            return truncated_pair_fidelity(truncate_pair(family, theta, delta, m))

    value, err = fidelity_curvature(f, deltas)
    # the limit is nonnegative; a negative extrapolant is round-off around zero
    return FisherResult(max(value, 0.0), Method.FINITE_DIFFERENCE, m, degenerate, err)


def tqfi(family: UnitaryFamily, theta: float, m: int) -> FisherResult:
    """TQFI at cut ``m``: closed form below the rank, the full QFI at or above it."""
    _check_m(family, m)
    if m < family.rank:
        return tqfi_closed(family, m)
    full = qfi(family, theta, Method.EIGENBASIS)
    return FisherResult(full.value, full.method, m, False)


# -- finite differences ------------------------------------------------------


def richardson(steps: Sequence[float], values: Sequence[float]) -> list[np.ndarray]:
    """Neville table for extrapolating ``q(h) = q0 + c1 h^2 + c2 h^4 + ...`` to ``h = 0``.

    Row ``k`` holds the estimates that cancel the first ``k`` even powers.
    Steps must be distinct; any ratios are allowed.
    """
    x = np.asarray(steps, dtype=float) ** 2
    table = [np.asarray(values, dtype=float)]
    for k in range(1, len(x)):
        prev = table[-1]
        ratio = x[:-k] / x[k:]
        table.append(prev[1:] + (prev[1:] - prev[:-1]) / (ratio - 1.0))
    return table


def curvature_quotients(f: Callable[[float], float], deltas: Sequence[float]) -> np.ndarray:
    """``8 (1 - (f(d) + f(-d)) / 2) / d^2`` for each step."""
    out = []
    for d in deltas:
        fsym = 0.5 * (f(d) + f(-d))
        out.append(8.0 * (1.0 - fsym) / d**2)
    return np.array(out)


def fidelity_curvature(
    f: Callable[[float], float],
    deltas: Sequence[float] = DEFAULT_DELTAS,
    rtol: float = FD_RTOL,
    atol: float = FD_ATOL,
) -> tuple[float, float]:
    """Extrapolate ``8 (1 - f(d)) / d^2`` to ``d -> 0``.

    ``f`` is a fidelity as a function of the shift. Returns the extrapolated
    value and an uncertainty estimate, the gap between the final extrapolant
    and the best one of the previous order. Raises :class:`NonConvergent`
    when that gap exceeds ``rtol * |value| + atol``.
    """
    steps = sorted({abs(float(d)) for d in deltas}, reverse=True)
    if not steps or steps[-1] == 0.0:
        raise ValueError("need at least one nonzero step")
    q = curvature_quotients(f, steps)
    table = richardson(steps, q)
    value = float(table[-1][0])
    if len(steps) == 1:
        return value, float("nan")
    uncertainty = abs(value - float(table[-2][-1]))
    if uncertainty > rtol * abs(value) + atol:
        raise NonConvergent(
            f"extrapolation did not settle: last two orders differ by {uncertainty:.3e}"
        )
    return value, uncertainty


def pair_curvature(
    pair_at: Callable[[float], tuple],
    deltas: Sequence[float] = DEFAULT_DELTAS,
    **kwargs,
) -> tuple[float, float]:
    """TQFI of an arbitrary trajectory of sub-normalized state pairs.

    ``pair_at(d)`` returns ``(tau_theta, tau_{theta+d})``; the value is the
    generalized-fidelity curvature of those pairs. This is how the bound is
    evaluated on mixtures, channel outputs and products, which are not
    themselves truncated unitary families.
    """
    return fidelity_curvature(lambda d: generalized_fidelity(*pair_at(d)), deltas, **kwargs)
