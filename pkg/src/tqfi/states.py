"""States, unitary families, truncation and random instances."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import linalg
from .errors import (
    DegenerateCut,
    DimensionMismatch,
    InputError,
    InstanceSchemaError,
    InvalidRank,
    NotPSD,
    TraceExceedsOne,
)
from .linalg import Spectrum, dagger, hermitize

TRACE_TOL = 1e-10
RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A normalized state with its spectral decomposition cached."""

    matrix: np.ndarray
    spectrum: Spectrum
    rank_tolerance: float = RANK_TOL

    @classmethod
    def from_matrix(cls, rho, rank_tolerance: float = RANK_TOL) -> "DensityMatrix":
        mat = linalg.check_hermitian(rho, name="density matrix")
        tr = float(np.trace(mat).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InputError(f"density matrix trace is {tr!r}, expected 1")
        spec = linalg.eigh(mat)
        if spec.eigenvalues[-1] < -linalg.PSD_TOL:
            raise NotPSD(f"density matrix has eigenvalue {spec.eigenvalues[-1]:.3e}")
        return cls(mat, spec, rank_tolerance)

    @classmethod
    def from_spectrum(cls, eigenvalues, eigenvectors, rank_tolerance: float = RANK_TOL):
        spec = Spectrum(np.asarray(eigenvalues, dtype=float), np.asarray(eigenvectors))
        return cls(spec.reconstruct(), spec, rank_tolerance)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def purity(self) -> float:
        return float(np.sum(self.spectrum.eigenvalues**2))

    @property
    def rank(self) -> int:
        return rank_of(self)


@dataclass(frozen=True, eq=False)
class SubNormalizedState:
    """A PSD operator with trace at most one."""

    matrix: np.ndarray
    trace_value: float

    @classmethod
    def from_matrix(cls, tau, check: bool = True) -> "SubNormalizedState":
        mat = linalg.check_hermitian(tau, name="sub-normalized state")
        tr = float(np.trace(mat).real)
        if check:
            if tr > 1.0 + TRACE_TOL:
                raise TraceExceedsOne(f"trace {tr!r} exceeds 1")
            lo = np.linalg.eigvalsh(mat)[0] if mat.size else 0.0
            if lo < -linalg.PSD_TOL * max(1.0, abs(tr)):
                raise NotPSD(f"smallest eigenvalue {lo:.3e} is negative")
        return cls(mat, tr)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class UnitaryFamily:
    """The states ``W(t) rho W(t)^H`` with ``W(t) = exp(-i t G)``."""

    probe: DensityMatrix
    generator: np.ndarray

    def __post_init__(self):
        gen = linalg.check_hermitian(self.generator, name="generator")
        if gen.shape[0] != self.probe.dim:
            raise DimensionMismatch(
                f"probe has dimension {self.probe.dim}, generator {gen.shape[0]}"
            )
        object.__setattr__(self, "generator", gen)

    @classmethod
    def from_matrices(cls, rho, generator) -> "UnitaryFamily":
        return cls(DensityMatrix.from_matrix(rho), generator)

    @property
    def dim(self) -> int:
        return self.probe.dim

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.probe.spectrum.eigenvalues

    @cached_property
    def generator_eigenbasis(self) -> np.ndarray:
        """Matrix elements ``<l_i|G|l_j>`` in the probe eigenbasis."""
        v = self.probe.spectrum.eigenvectors
        return dagger(v) @ self.generator @ v

    @property
    def rank(self) -> int:
        return self.probe.rank

    def unitary(self, theta: float) -> np.ndarray:
        return linalg.expm_unitary(self.generator, theta)


@dataclass(frozen=True, eq=False)
class TruncatedPair:
    """Exact and error states projected on the top-m eigenspace of the exact one."""

    exact_truncated: SubNormalizedState
    error_truncated: SubNormalizedState
    projector_rank: int
    kept_eigenvalues: np.ndarray
    kept_vectors: np.ndarray
    base_theta: float
    shift: float
    degenerate_cut: bool = False
    error_state: DensityMatrix | None = field(default=None, repr=False)

    @property
    def projector(self) -> np.ndarray:
        v = self.kept_vectors
        return v @ dagger(v)


def evolve(family: UnitaryFamily, theta: float) -> DensityMatrix:
    """Return ``rho_theta``; its eigenvectors are ``W(theta)|l_i>`` by construction."""
    if theta == 0.0:
        return family.probe
    w = family.unitary(theta)
    spec = family.probe.spectrum
    vecs = w @ spec.eigenvectors
    mat = hermitize(w @ family.probe.matrix @ dagger(w))
    return DensityMatrix(mat, Spectrum(spec.eigenvalues.copy(), vecs), family.probe.rank_tolerance)


def rank_of(rho: DensityMatrix) -> int:
    vals = rho.spectrum.eigenvalues
    if vals.size == 0 or vals[0] <= 0:
        return 0
    return int(np.count_nonzero(vals > rho.rank_tolerance * vals[0]))


def cut_is_degenerate(rho: DensityMatrix, m: int) -> bool:
    """Whether the top-m projector of ``rho`` is ambiguous.

    Ties among eigenvalues that are zero (beyond the rank) do not count: any
    choice of kernel vectors gives the same truncated states up to a unitary
    on the kernel, which leaves every fidelity unchanged.
    """
    if m >= rank_of(rho):
        return False
    return rho.spectrum.cut_is_degenerate(m)


def truncate_pair(family: UnitaryFamily, theta: float, delta: float, m: int) -> TruncatedPair:
    d = family.dim
    if not 1 <= m <= d:
        raise InvalidRank(f"truncation rank m={m} outside [1, {d}]")
    base = evolve(family, theta)
    shifted = evolve(family, theta + delta)
    lam = base.spectrum.eigenvalues[:m].copy()
    vecs = base.spectrum.eigenvectors[:, :m]
    exact = hermitize((vecs * lam) @ dagger(vecs))
    proj = vecs @ dagger(vecs)
    error = hermitize(proj @ shifted.matrix @ proj)
    degenerate = cut_is_degenerate(base, m)
    if degenerate:
        warnings.warn(
            f"eigenvalues {m} and {m + 1} tie; top-{m} projector is not unique",
            DegenerateCut,
            stacklevel=2,
        )
    return TruncatedPair(
        exact_truncated=SubNormalizedState(exact, float(np.sum(lam))),
        error_truncated=SubNormalizedState(error, float(np.trace(error).real)),
        projector_rank=m,
        kept_eigenvalues=lam,
        kept_vectors=vecs,
        base_theta=float(theta),
        shift=float(delta),
        degenerate_cut=degenerate,
        error_state=shifted,
    )


# -- random instances -------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_density(d: int, r: int, seed) -> DensityMatrix:
    """``A A^H / Tr[A A^H]`` for a ``d x r`` complex Gaussian ``A``; rank ``r`` a.s."""
    if not 1 <= r <= d:
        raise InvalidRank(f"rank {r} outside [1, {d}]")
    a = _ginibre(_rng(seed), d, r)
    rho = a @ dagger(a)
    rho = hermitize(rho / np.trace(rho).real)
    return DensityMatrix(rho, linalg.eigh(rho))


def random_generator(d: int, seed) -> np.ndarray:
    """Hermitian part of a complex Gaussian, scaled so the spectrum is O(1)."""
    a = _ginibre(_rng(seed), d, d)
    return hermitize(a) / np.sqrt(d)


def random_unitary(d: int, seed) -> np.ndarray:
    """Haar unitary: QR of a complex Gaussian with the R-diagonal phases removed."""
    q, r = np.linalg.qr(_ginibre(_rng(seed), d, d))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_family(d: int, r: int, seed) -> UnitaryFamily:
    rng = _rng(seed)
    rho = random_density(d, r, rng)
    return UnitaryFamily(rho, random_generator(d, rng))


# -- instance files ---------------------------------------------------------


def _decode_matrix(raw, d: int, name: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InstanceSchemaError(f"{name}: expected a d x d array of [re, im] pairs") from exc
    if arr.shape != (d, d, 2):
        raise InstanceSchemaError(f"{name}: expected shape ({d}, {d}, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _encode_matrix(mat: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat)]


def instance_from_dict(data: dict) -> tuple[UnitaryFamily, float]:
    if not isinstance(data, dict):
        raise InstanceSchemaError("instance must be a JSON object")
    missing = {"d", "rho", "generator"} - set(data)
    if missing:
        raise InstanceSchemaError(f"instance is missing fields: {sorted(missing)}")
    d = data["d"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise InstanceSchemaError(f"d must be a positive integer, got {d!r}")
    theta = data.get("theta", 0.0)
    if not isinstance(theta, (int, float)) or isinstance(theta, bool):
        raise InstanceSchemaError(f"theta must be a real number, got {theta!r}")
    rho = _decode_matrix(data["rho"], d, "rho")
    gen = _decode_matrix(data["generator"], d, "generator")
    family = UnitaryFamily(DensityMatrix.from_matrix(rho), gen)
    return family, float(theta)


def instance_to_dict(family: UnitaryFamily, theta: float = 0.0) -> dict:
    return {
        "d": family.dim,
        "rho": _encode_matrix(family.probe.matrix),
        "generator": _encode_matrix(family.generator),
        "theta": float(theta),
    }


def load_instance(path) -> tuple[UnitaryFamily, float]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceSchemaError(f"{path}: not valid JSON ({exc})") from exc
    return instance_from_dict(data)


def save_instance(path, family: UnitaryFamily, theta: float = 0.0) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(family, theta), indent=1) + "\n")
