"""Randomized property checks for the bound and its supporting results.

Every check draws its instances from ``numpy.random.default_rng([seed, key,
trial])``, so a trial depends only on ``(seed, check, trial index)`` and never
on which other trials ran before it. A trial records one or more *margins*:
for an inequality ``lhs <= rhs`` the margin is ``rhs - lhs``; for an equality
it is ``-|lhs - rhs|``. A trial fails when any margin drops below minus its
tolerance, and ``worst_slack`` is the smallest margin seen.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import channels, fisher, linalg
from .errors import DegenerateCut, DeltaTooLarge, NumericalError
from .fidelity import (
    DEFICIT_ZERO,
    angular_distance,
    bures,
    bures_sq,
    generalized_fidelity,
    truncated_pair_fidelity,
)
from .fisher import DEFAULT_DELTAS, GUARD_FRACTION
from .linalg import dagger, hermitize
from .states import (
    UnitaryFamily,
    cut_is_degenerate,
    random_density,
    random_family,
    random_generator,
    random_unitary,
    truncate_pair,
)

DEFAULT_TOLERANCES = {
    "lemma1.bound": 1e-9,
    "lemma1.equality": 1e-9,
    "routes.tsld": 1e-10,
    "routes.fd_rel": 1e-4,
    "qfi_routes.rel": 1e-6,
    "qfi_routes.pure": 1e-9,
    "lemma3.unitary_invariance": 1e-9,
    "lemma3.convexity": 1e-8,
    "lemma3.cptni_monotonicity": 1e-8,
    "lemma3.product_subadditivity": 1e-8,
    "lemma3.direct_sum_additivity": 1e-8,
    "lemma3.fd_crosscheck_rel": 1e-4,
    "lemma4.symmetry": 0.0,
    "lemma4.identity": 1e-8,
    "lemma4.triangle": 1e-9,
    "lemma4.half_angle": 1e-12,
    "lemma5.coefficients": 1e-8,
    "lemma5.quadratic_rel": 1e-4,
    "prop1.lyapunov": 1e-8,
    "prop1.trace": 1e-10,
    "prop2.trace_formula": 1e-10,
}

# relative floor for comparing finite-difference values against exact ones
FD_FLOOR = 1e-2
MIN_TAIL = 0.02


@dataclass(frozen=True)
class PropertyReport:
    property_id: str
    trials: int
    failures: int
    worst_slack: float
    degenerate_excluded: int
    seed: int

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return asdict(self)


class _Tally:
    def __init__(self, property_id: str, seed: int):
        self.property_id = property_id
        self.seed = seed
        self.trials = 0
        self.failures = 0
        self.excluded = 0
        self.worst = math.inf

    def record(self, margins: Iterable[tuple[float, float]]) -> bool:
        self.trials += 1
        ok = True
        for margin, tol in margins:
            margin = float(margin)
            if not margin >= -tol:  # NaN counts as a failure
                ok = False
            if margin < self.worst or math.isnan(margin):
                self.worst = margin
        if not ok:
            self.failures += 1
        return ok

    def fail(self) -> None:
        self.trials += 1
        self.failures += 1

    def report(self) -> PropertyReport:
        worst = 0.0 if self.worst == math.inf else self.worst
        return PropertyReport(
            self.property_id, self.trials, self.failures, worst, self.excluded, self.seed
        )


def _trial_rng(seed: int, key: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, key, trial])


def _rel_margin(value: float, reference: float, rel: float) -> tuple[float, float]:
    """Margin and tolerance for ``|value - reference| <= rel * max(|reference|, FD_FLOOR)``."""
    return -abs(value - reference), rel * max(abs(reference), FD_FLOOR)


def _tail(family: UnitaryFamily, m: int) -> float:
    return 1.0 - fisher.kept_trace(family, m)


def _pick_cut(rng, family: UnitaryFamily, allow_full: bool = True) -> int | None:
    """A cut ``m`` that is either at the rank or leaves at least ``MIN_TAIL`` out."""
    r = family.rank
    options = [m for m in range(1, r) if _tail(family, m) >= MIN_TAIL]
    if allow_full:
        options.append(r)
    if not options:
        return None
    return int(rng.choice(options))


def _sample_family(rng, dmin: int, dmax: int, rmin: int = 1) -> UnitaryFamily:
    d = int(rng.integers(dmin, dmax + 1))
    r = int(rng.integers(min(rmin, d), d + 1))
    return random_family(d, r, rng)


def _grid_for_tails(tails: Iterable[float], base=DEFAULT_DELTAS) -> tuple:
    """Scale ``base`` so that every positive trace deficit satisfies the step guard."""
    positive = [t for t in tails if t >= DEFICIT_ZERO]
    if not positive:
        return tuple(base)
    limit = math.sqrt(GUARD_FRACTION * min(positive))
    factor = min(1.0, limit / max(base))
    return tuple(d * factor for d in base)


def _trajectory(family: UnitaryFamily, theta: float, m: int) -> Callable[[float], tuple]:
    def pair_at(delta):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateCut)
            p = truncate_pair(family, theta, delta, m)
        return p.exact_truncated.matrix, p.error_truncated.matrix

    return pair_at


# -- Lemma 1 -----------------------------------------------------------------


def check_lemma1(trials: int = 200, dmax: int = 8, seed: int = 0, tol=None) -> PropertyReport:
    """TQFI is nondecreasing in ``m``, bounded by the QFI, and equal to it at the rank."""
    if dmax > 16:
        raise ValueError("dmax must not exceed 16")
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    tb, te = tol["lemma1.bound"], tol["lemma1.equality"]
    tally = _Tally("lemma1", seed)
    for t in range(trials):
        rng = _trial_rng(seed, 1, t)
        d = int(rng.integers(2, dmax + 1))
        r = 1 if t % 10 == 1 else int(rng.integers(1, d + 1))
        family = random_family(d, r, rng)
        if t % 10 == 0:
            family = UnitaryFamily(family.probe, np.eye(d))
        if any(cut_is_degenerate(family.probe, m) for m in range(1, family.rank)):
            tally.excluded += 1
            continue
        theta = float(rng.uniform(0, 2 * np.pi))
        full = fisher.qfi(family, theta).value
        vals = [fisher.tqfi(family, theta, m).value for m in range(1, d + 1)]
        margins = [(v, tb) for v in vals]
        margins += [(b - a, tb) for a, b in zip(vals, vals[1:])]
        margins += [(full - v, tb) for v in vals]
        margins.append((-abs(vals[family.rank - 1] - full), te))
        if t % 10 == 0:
            margins += [(-abs(v), tb) for v in vals + [full]]
        tally.record(margins)
    return tally.report()


# -- route agreement ---------------------------------------------------------


def check_route_agreement(trials: int = 100, dmax: int = 6, seed: int = 0, tol=None) -> PropertyReport:
    """Closed form, truncated SLD and finite differences agree on the same cut.

    Each trial also checks the finite-difference route at ``m = rank``
    against the full QFI, which is what the dispatcher returns there.
    """
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    tally = _Tally("routes", seed)
    for t in range(trials):
        rng = _trial_rng(seed, 2, t)
        family, m = None, None
        for _ in range(50):
            cand = _sample_family(rng, 2, dmax, rmin=2)
            ok = [k for k in range(1, cand.rank) if fisher.guard_limit(cand, k) >= max(DEFAULT_DELTAS)]
            if ok:
                family, m = cand, int(rng.choice(ok))
                break
        if family is None:
            tally.fail()
            continue
        if cut_is_degenerate(family.probe, m):
            tally.excluded += 1
            continue
        theta = float(rng.uniform(0, 2 * np.pi))
        try:
            closed = fisher.tqfi_closed(family, m).value
            via_tsld = fisher.tqfi_tsld(family, theta, m).value
            via_fd = fisher.tqfi_fd(family, theta, m).value
            at_rank = fisher.tqfi_fd(family, theta, family.rank).value
        except NumericalError:
            tally.fail()
            continue
        full = fisher.qfi(family, theta).value
        tally.record(
            [
                (-abs(closed - via_tsld), tol["routes.tsld"]),
                _rel_margin(via_fd, closed, tol["routes.fd_rel"]),
                _rel_margin(via_tsld, via_fd, tol["routes.fd_rel"]),
                _rel_margin(at_rank, full, tol["routes.fd_rel"]),
            ]
        )
    return tally.report()


def check_qfi_routes(trials: int = 100, dmax: int = 8, seed: int = 0, tol=None) -> PropertyReport:
    """SLD, eigenbasis and fidelity-curvature QFI agree; pure probes give 4 Var(G)."""
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    rel = tol["qfi_routes.rel"]
    tally = _Tally("qfi_routes", seed)
    for t in range(trials):
        rng = _trial_rng(seed, 3, t)
        d = int(rng.integers(2, dmax + 1))
        r = 1 if t % 4 == 0 else int(rng.integers(1, d + 1))
        family = random_family(d, r, rng)
        theta = float(rng.uniform(0, 2 * np.pi))
        eig = fisher.qfi(family, theta, "eigenbasis").value
        try:
            fd = fisher.qfi(family, theta, "finite_difference").value
        except NumericalError:
            tally.fail()
            continue
        via_sld = fisher.qfi(family, theta, "sld").value
        scale = max(abs(eig), 1e-12)
        margins = [(-abs(via_sld - eig), rel * scale), (-abs(fd - eig), rel * scale)]
        if family.rank == 1:
            psi = family.probe.spectrum.eigenvectors[:, 0]
            g = family.generator
            mean = np.vdot(psi, g @ psi).real
            var = np.vdot(psi, g @ g @ psi).real - mean**2
            margins.append((-abs(eig - 4 * var), tol["qfi_routes.pure"]))
        tally.record(margins)
    return tally.report()


# -- Lemma 3 -----------------------------------------------------------------


def _lemma3_unitary(trials, seed, tol) -> PropertyReport:
    tally = _Tally("lemma3.unitary_invariance", seed)
    for t in range(trials):
        rng = _trial_rng(seed, 31, t)
        family = _sample_family(rng, 2, 5)
        m = _pick_cut(rng, family) or family.rank
        if cut_is_degenerate(family.probe, m):
            tally.excluded += 1
            continue
        d = family.dim
        v = np.eye(d) if t % 10 == 0 else random_unitary(d, rng)
        rotated = UnitaryFamily.from_matrices(
            hermitize(v @ family.probe.matrix @ dagger(v)), v @ family.generator @ dagger(v)
        )
        theta = float(rng.uniform(0, 2 * np.pi))
        a = fisher.tqfi(family, theta, m).value
        b = fisher.tqfi(rotated, theta, m).value
        tally.record([(-abs(a - b), tol)])
    return tally.report()


def _lemma3_convexity(trials, seed, tol) -> PropertyReport:
    """Convexity in the state, with every term evaluated by finite differences."""
    tally = _Tally("lemma3.convexity", seed)
    qs = (0.0, 0.25, 0.5, 0.75, 1.0)
    for t in range(trials):
        rng = _trial_rng(seed, 32, t)
        d = int(rng.integers(2, 5))
        g = random_generator(d, rng)
        fams = [UnitaryFamily(random_density(d, int(rng.integers(1, d + 1)), rng), g) for _ in range(2)]
        cuts = [_pick_cut(rng, f) or f.rank for f in fams]
        if any(cut_is_degenerate(f.probe, m) for f, m in zip(fams, cuts)):
            tally.excluded += 1
            continue
        theta = float(rng.uniform(0, 2 * np.pi))
        tails = [_tail(f, m) for f, m in zip(fams, cuts)]
        grid = _grid_for_tails(tails + [q * tails[0] + (1 - q) * tails[1] for q in qs])
        tau, xi = (_trajectory(f, theta, m) for f, m in zip(fams, cuts))
        try:
            i_tau = fisher.pair_curvature(tau, grid)[0]
            i_xi = fisher.pair_curvature(xi, grid)[0]
            margins = []
            for q in qs:

                def mixed(delta, q=q):
                    (a0, a1), (b0, b1) = tau(delta), xi(delta)
                    return q * a0 + (1 - q) * b0, q * a1 + (1 - q) * b1

                i_mix = fisher.pair_curvature(mixed, grid)[0]
                margins.append((q * i_tau + (1 - q) * i_xi - i_mix, tol))
        except NumericalError:
            tally.fail()
            continue
        tally.record(margins)
    return tally.report()


def _lemma3_cptni(trials, seed, tol) -> PropertyReport:
    tally = _Tally("lemma3.cptni_monotonicity", seed)
    for t in range(trials):
        rng = _trial_rng(seed, 33, t)
        family = _sample_family(rng, 2, 4)
        m = _pick_cut(rng, family) or family.rank
        if cut_is_degenerate(family.probe, m):
            tally.excluded += 1
            continue
        d = family.dim
        theta = float(rng.uniform(0, 2 * np.pi))
        traj = _trajectory(family, theta, m)
        channel = None
        for _ in range(50):
            kind = t % 4
            if t % 10 == 0:
                channel = channels.identity_channel(d)
            elif kind == 0:
                channel = channels.random_cptp(d, rng)
            elif kind == 1:
                q, _ = np.linalg.qr(random_unitary(d, rng)[:, : int(rng.integers(1, d + 1))])
                channel = channels.projector_channel(q @ dagger(q))
            else:
                channel = channels.random_cptni(d, rng)
            out_tail = 1.0 - channels.apply(channel, traj(0.0)[0]).trace_value
            if out_tail < DEFICIT_ZERO or out_tail >= 1e-3:
                break
        tail = _tail(family, m)
        grid = _grid_for_tails([tail, out_tail])

        def mapped(delta):
            a, b = traj(delta)
            return channels.apply(channel, a).matrix, channels.apply(channel, b).matrix

        try:
            before = fisher.pair_curvature(traj, grid)[0]
            after = fisher.pair_curvature(mapped, grid)[0]
        except NumericalError:
            tally.fail()
            continue
        tally.record([(before - after, tol)])
    return tally.report()


def _eigen_data(family: UnitaryFamily):
    spec = family.probe.spectrum
    return spec.eigenvalues, spec.eigenvectors, family.generator_eigenbasis


def _sample_factor(
    rng, dmin, dmax, full_rank_only=False, allow_full=True
) -> tuple[UnitaryFamily, int]:
    if full_rank_only:
        d = int(rng.integers(dmin, dmax + 1))
        family = random_family(d, d, rng)
        return family, d
    while True:
        family = _sample_family(rng, dmin, dmax, rmin=1 if allow_full else 2)
        m = _pick_cut(rng, family, allow_full)
        if m is not None:
            return family, m


def _lemma3_product(trials, seed, tol, fd_rel) -> PropertyReport:
    """Sub-additivity over a bipartite product with Kronecker-sum generator."""
    tally = _Tally("lemma3.product_subadditivity", seed)
    for t in range(trials):
        rng = _trial_rng(seed, 34, t)
        f1, m1 = _sample_factor(rng, 2, 4)
        f2, m2 = _sample_factor(rng, 2, 4, full_rank_only=(t % 5 == 0))
        if t % 5 == 0:
            # commuting generator: trace-one factor with no Fisher content
            lam2, v2, _ = _eigen_data(f2)
            g2 = v2 @ np.diag(rng.standard_normal(f2.dim)) @ dagger(v2)
            f2 = UnitaryFamily(f2.probe, g2)
        if cut_is_degenerate(f1.probe, m1) or cut_is_degenerate(f2.probe, m2):
            tally.excluded += 1
            continue
        theta = float(rng.uniform(0, 2 * np.pi))
        lam1, v1, g1 = _eigen_data(f1)
        lam2, v2, g2 = _eigen_data(f2)
        lam = np.kron(lam1, lam2)
        g_eig = linalg.kron_sum(g1, g2)
        kept = np.kron(np.arange(f1.dim) < m1, np.arange(f2.dim) < m2).astype(bool)
        lhs = fisher.subspace_tqfi(lam, g_eig, kept)
        rhs = fisher.tqfi(f1, theta, m1).value + fisher.tqfi(f2, theta, m2).value

        tr1, tr2 = _trajectory(f1, theta, m1), _trajectory(f2, theta, m2)

        def product(delta):
            (a0, a1), (b0, b1) = tr1(delta), tr2(delta)
            return np.kron(a0, b0), np.kron(a1, b1)

        grid = _grid_for_tails([1.0 - float(np.sum(lam[kept]))])
        try:
            lhs_fd = fisher.pair_curvature(product, grid)[0]
        except NumericalError:
            tally.fail()
            continue
        tally.record([(rhs - lhs, tol), _rel_margin(lhs_fd, lhs, fd_rel)])
    return tally.report()


def _lemma3_direct_sum(trials, seed, tol, fd_rel) -> PropertyReport:
    """Additivity over direct sums with block generator and weights ``mu_k``."""
    tally = _Tally("lemma3.direct_sum_additivity", seed)
    for t in range(trials):
        rng = _trial_rng(seed, 35, t)
        single = t % 5 == 0
        k = 1 if single else int(rng.integers(1, 4))
        total = 1.0 if single or t % 2 == 0 else 0.6
        mu = total * rng.dirichlet(np.ones(k))
        blocks = []
        for _ in range(k):
            # Each block is either a strict cut or a full-rank state kept whole.
            # A block cut exactly at a rank below its dimension is excluded: its
            # own TQFI is the full QFI, support-kernel terms included, while
            # inside a direct sum with a trace deficit those terms drop out.
            whole = bool(rng.random() < 0.3)
            blocks.append(_sample_factor(rng, 2, 3, full_rank_only=whole, allow_full=False))
        if any(cut_is_degenerate(f.probe, m) for f, m in blocks):
            tally.excluded += 1
            continue
        theta = float(rng.uniform(0, 2 * np.pi))
        lam = np.concatenate([w * f.eigenvalues for w, (f, _) in zip(mu, blocks)])
        g_eig = linalg.direct_sum([f.generator_eigenbasis for f, _ in blocks])
        kept = np.concatenate([np.arange(f.dim) < m for f, m in blocks])
        lhs = fisher.subspace_tqfi(lam, g_eig, kept)
        rhs = sum(w * fisher.tqfi(f, theta, m).value for w, (f, m) in zip(mu, blocks))
        trajs = [_trajectory(f, theta, m) for f, m in blocks]

        def summed(delta):
            parts = [tr(delta) for tr in trajs]
            return (
                linalg.direct_sum([w * p[0] for w, p in zip(mu, parts)]),
                linalg.direct_sum([w * p[1] for w, p in zip(mu, parts)]),
            )

        grid = _grid_for_tails([1.0 - float(np.sum(lam[kept]))])
        try:
            lhs_fd = fisher.pair_curvature(summed, grid)[0]
        except NumericalError:
            tally.fail()
            continue
        tally.record([(-abs(lhs - rhs), tol), _rel_margin(lhs_fd, lhs, fd_rel)])
    return tally.report()


def check_lemma3(trials: int = 100, seed: int = 0, tol=None) -> list[PropertyReport]:
    """The five structural properties, one report each."""
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    fd_rel = tol["lemma3.fd_crosscheck_rel"]
    return [
        _lemma3_unitary(trials, seed, tol["lemma3.unitary_invariance"]),
        _lemma3_convexity(trials, seed, tol["lemma3.convexity"]),
        _lemma3_cptni(trials, seed, tol["lemma3.cptni_monotonicity"]),
        _lemma3_product(trials, seed, tol["lemma3.product_subadditivity"], fd_rel),
        _lemma3_direct_sum(trials, seed, tol["lemma3.direct_sum_additivity"], fd_rel),
    ]


# -- Lemma 4 -----------------------------------------------------------------


def _random_subnormalized(rng, d: int) -> np.ndarray:
    r = int(rng.integers(1, d + 1))
    weight = 1.0 if rng.random() < 0.2 else float(1.0 - rng.random())
    return weight * random_density(d, r, rng).matrix


def check_lemma4(trials: int = 500, seed: int = 0, tol=None) -> PropertyReport:
    """Metric axioms of the generalized Bures distance over random triples."""
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    tally = _Tally("lemma4", seed)
    for t in range(trials):
        rng = _trial_rng(seed, 4, t)
        d = int(rng.integers(2, 7))
        near = False
        if t % 25 == 0:
            half0 = np.zeros((d, d), complex)
            half0[0, 0] = 0.5
            half1 = np.zeros((d, d), complex)
            half1[1, 1] = 0.5
            states = [half0, half1, half0.copy()]
        else:
            states = [_random_subnormalized(rng, d) for _ in range(3)]
            if t % 5 == 0:
                eps = 10.0 ** rng.uniform(-9, -4)
                states[1] = (1 - eps) * states[0] + eps * states[1]
                near = True
        margins = []
        for a in states:
            margins.append((-bures(a, a), tol["lemma4.identity"]))
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                a, b = states[i], states[j]
                fab, fba = generalized_fidelity(a, b), generalized_fidelity(b, a)
                margins.append((-abs(fab - fba), tol["lemma4.symmetry"]))
                b_ab = bures(a, b)
                # |a - b|_max <= |a - b|_1 <= 2 P(a, b) = sqrt(2) B*(a, b)
                gap = float(np.max(np.abs(a - b)))
                margins.append((math.sqrt(2) * b_ab - gap, tol["lemma4.identity"]))
                half = 4 * math.sin(angular_distance(a, b) / 2) ** 2
                margins.append((-abs(bures_sq(a, b) - half), tol["lemma4.half_angle"]))
        # B* is only resolved to about 1e-8 near zero (1 - F* carries
        # round-off of order 1e-16), so near-coincident pairs probe the
        # identity axiom but cannot probe the triangle inequality at 1e-9.
        for i, j, k in [] if near else [(0, 2, 1), (0, 1, 2), (1, 2, 0)]:
            a, c, b = states[i], states[j], states[k]
            margins.append((bures(a, b) + bures(b, c) - bures(a, c), tol["lemma4.triangle"]))
        tally.record(margins)
    return tally.report()


# -- Lemma 5 -----------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureProfile:
    """Generalized Bures distance of a truncated pair along a step grid."""

    deltas: np.ndarray
    bures_sq: np.ndarray  # at +delta
    quotients: np.ndarray  # 4 B*^2 / delta^2
    reference: float  # the TQFI at this cut
    errors: np.ndarray  # |quotient - reference|
    ratios: np.ndarray  # errors[k+1] / errors[k]
    coefficients: np.ndarray  # polynomial fit of B*^2(delta), lowest order first
    linear_constant: float


def curvature_profile(
    family: UnitaryFamily, m: int, deltas=DEFAULT_DELTAS, theta: float = 0.0, fit_degree: int = 4
) -> CurvatureProfile:
    limit = fisher.guard_limit(family, m)
    steps = np.array(sorted({abs(float(d)) for d in deltas}, reverse=True))
    if steps[0] > limit * (1 + 1e-12):
        raise DeltaTooLarge(f"step {steps[0]:g} exceeds the guard limit {limit:.3e}")

    def b2(delta):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateCut)
            f = truncated_pair_fidelity(truncate_pair(family, theta, delta, m))
        return 2.0 * (1.0 - f)

    plus = np.array([b2(d) for d in steps])
    minus = np.array([b2(-d) for d in steps])
    reference = fisher.tqfi(family, theta, m).value
    quotients = 4.0 * plus / steps**2
    errors = np.abs(quotients - reference)
    ratios = errors[1:] / np.where(errors[:-1] > 0, errors[:-1], np.nan)
    xs = np.concatenate([steps, -steps])
    ys = np.concatenate([plus, minus])
    degree = min(fit_degree, len(xs) - 1)
    # rescale the abscissa so the Vandermonde system stays well conditioned
    h = steps[0]
    coeffs = np.polynomial.polynomial.polyfit(xs / h, ys, degree) / h ** np.arange(degree + 1)
    head = steps[: min(2, len(steps))]
    constant = float(np.max(errors[: len(head)] / head))
    return CurvatureProfile(steps, plus, quotients, reference, errors, ratios, coeffs, constant)


def lemma5_margins(profile: CurvatureProfile, tol=None) -> list[tuple[float, float]]:
    """``B*^2(delta) = I* delta^2 / 4 + O(delta^3)`` read off the fitted polynomial."""
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    margins = [(-abs(c), tol["lemma5.coefficients"]) for c in profile.coefficients[:2]]
    margins.append(
        _rel_margin(4.0 * profile.coefficients[2], profile.reference, tol["lemma5.quadratic_rel"])
    )
    return margins


def check_lemma5(family: UnitaryFamily, m: int, delta_grid=DEFAULT_DELTAS, seed: int = 0, tol=None) -> PropertyReport:
    """Curvature of the generalized Bures distance equals a quarter of the TQFI.

    Fits ``B*^2`` over ``+-delta`` and asserts that the constant and linear
    coefficients vanish and that four times the quadratic one is the TQFI.
    """
    tally = _Tally("lemma5", seed)
    try:
        tally.record(lemma5_margins(curvature_profile(family, m, delta_grid), tol))
    except NumericalError:
        tally.fail()
    return tally.report()


def check_lemma5_random(trials: int = 20, seed: int = 0, tol=None) -> PropertyReport:
    tally = _Tally("lemma5", seed)
    for t in range(trials):
        rng = _trial_rng(seed, 5, t)
        family = _sample_family(rng, 2, 5, rmin=2)
        m = _pick_cut(rng, family)
        if m is None:
            m = family.rank
        if cut_is_degenerate(family.probe, m):
            tally.excluded += 1
            continue
        grid = fisher.guarded_deltas(family, m)
        try:
            tally.record(lemma5_margins(curvature_profile(family, m, grid), tol))
        except NumericalError:
            tally.fail()
    return tally.report()


# -- Propositions on the truncated SLD ---------------------------------------

FD_STEP = 1e-5


def check_prop1_prop2(trials: int = 100, seed: int = 0, dmax: int = 6, tol=None) -> PropertyReport:
    """Truncated SLD solves the Lyapunov equation, is traceless against tau, and gives the TQFI.

    The Lyapunov residual is measured on the kept block ``Pi d(tau) Pi``,
    with ``Pi`` the top-m projector at ``theta``: ``d(tau)`` also has blocks
    coupling the kept subspace to its complement whenever ``G`` does, and an
    operator supported on the kept subspace cannot reproduce those.

    The trace formula is compared with the restricted spectral sum. At
    ``m = rank`` that sum is not the dispatcher's value (the full QFI); this
    documented divergence is not counted as a failure.
    """
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    tally = _Tally("prop1_prop2", seed)
    for t in range(trials):
        rng = _trial_rng(seed, 6, t)
        d = int(rng.integers(2, dmax + 1))
        r = 1 if t % 10 == 0 else int(rng.integers(1, d + 1))
        family = random_family(d, r, rng)
        m = int(rng.integers(1, family.rank + 1))
        if cut_is_degenerate(family.probe, m):
            tally.excluded += 1
            continue
        theta = float(rng.uniform(0, 2 * np.pi))
        ell = fisher.tsld(family, theta, m).matrix
        tau = fisher.truncated_state(family, theta, m)
        exact = fisher.truncated_state_derivative(family, theta, m)
        numeric = (
            fisher.truncated_state(family, theta + FD_STEP, m)
            - fisher.truncated_state(family, theta - FD_STEP, m)
        ) / (2 * FD_STEP)
        sym = 0.5 * (ell @ tau + tau @ ell)
        vt = family.unitary(theta) @ family.probe.spectrum.eigenvectors[:, :m]
        proj = vt @ dagger(vt)
        exact = proj @ exact @ proj
        numeric = proj @ numeric @ proj
        lam = family.eigenvalues
        restricted, _ = fisher.spectral_sums(lam[:m], family.generator_eigenbasis[:m, :m], float(lam[0]))
        trace_form = float(np.trace(ell @ ell @ tau).real)
        tally.record(
            [
                (-float(np.max(np.abs(exact - sym))), tol["prop1.lyapunov"]),
                (-float(np.max(np.abs(numeric - sym))), tol["prop1.lyapunov"]),
                (-abs(complex(np.trace(ell @ tau))), tol["prop1.trace"]),
                (-abs(trace_form - restricted), tol["prop2.trace_formula"] * max(1.0, abs(restricted))),
            ]
        )
    return tally.report()


# -- suite -------------------------------------------------------------------


@dataclass
class SuiteConfig:
    """Trial counts, dimension cap, seed and tolerance overrides.

    ``trials`` set to an integer overrides every per-check count; ``None``
    keeps the defaults below.
    """

    trials: int | None = None
    dmax: int = 8
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    lemma1_trials: int = 200
    route_trials: int = 100
    qfi_route_trials: int = 100
    lemma3_trials: int = 100
    lemma4_trials: int = 500
    lemma5_trials: int = 20
    prop_trials: int = 100

    @classmethod
    def from_dict(cls, data: dict) -> "SuiteConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        bad = set(cfg.tolerances) - set(DEFAULT_TOLERANCES)
        if bad:
            raise ValueError(f"unknown tolerance names: {sorted(bad)}")
        return cfg

    def count(self, name: str) -> int:
        return self.trials if self.trials is not None else getattr(self, name)


def run_suite(config: SuiteConfig | None = None) -> list[PropertyReport]:
    cfg = config or SuiteConfig()
    if cfg.trials == 0:
        return []
    tol = {**DEFAULT_TOLERANCES, **cfg.tolerances}
    seed = cfg.seed
    reports = [
        check_lemma1(cfg.count("lemma1_trials"), min(cfg.dmax, 16), seed, tol),
        check_route_agreement(cfg.count("route_trials"), min(cfg.dmax, 6), seed, tol),
        check_qfi_routes(cfg.count("qfi_route_trials"), min(cfg.dmax, 16), seed, tol),
    ]
    reports += check_lemma3(cfg.count("lemma3_trials"), seed, tol)
    reports.append(check_lemma4(cfg.count("lemma4_trials"), seed, tol))
    reports.append(check_lemma5_random(cfg.count("lemma5_trials"), seed, tol))
    reports.append(check_prop1_prop2(cfg.count("prop_trials"), seed, min(cfg.dmax, 6), tol))
    return reports


def all_passed(reports: Iterable[PropertyReport]) -> bool:
    return all(r.passed for r in reports)
