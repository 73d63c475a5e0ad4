"""Dense complex matrix kernel.

Everything here works on plain ``numpy`` arrays. Hermitian-producing routines
re-symmetrize their output as ``(A + A^H) / 2`` so floating-point drift never
leaks a non-Hermitian part into later eigendecompositions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NonHermitianInput, NotPSD

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
DEGENERACY_TOL = 1e-10


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def as_square(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} has non-finite entries")
    return arr


def hermiticity_error(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def check_hermitian(a, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a re-symmetrized complex array, or raise."""
    arr = as_square(a, name)
    err = hermiticity_error(arr)
    if err > tol:
        raise NonHermitianInput(f"{name} is not Hermitian (max |A - A^H| = {err:.3e})")
    return hermitize(arr)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending, with eigenvectors as matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.dim else 0.0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return hermitize((v * self.eigenvalues) @ dagger(v))

    def degenerate_pairs(self, tol: float = DEGENERACY_TOL) -> np.ndarray:
        """Boolean mask ``g`` with ``g[k]`` set when eigenvalues k and k+1 tie."""
        gaps = -np.diff(self.eigenvalues)
        return gaps < tol * max(self.scale, np.finfo(float).tiny)

    def cut_is_degenerate(self, m: int, tol: float = DEGENERACY_TOL) -> bool:
        """True when the span of the first ``m`` eigenvectors is not unique."""
        if m <= 0 or m >= self.dim:
            return False
        return bool(self.degenerate_pairs(tol)[m - 1])


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column made real positive
    idx = np.argmax(np.abs(vecs) > np.abs(vecs).max(axis=0) * (1 - 1e-8), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    phases = pivots / np.abs(pivots)
    return vecs / phases


def eigh(h, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Hermitian eigendecomposition with descending eigenvalues.

    Eigenvector phases are fixed so that the largest component of every
    column is real and positive, which makes the output a deterministic
    function of the input for non-degenerate spectra.
    """
    arr = check_hermitian(h, tol)
    vals, vecs = np.linalg.eigh(arr)
    vals = vals[::-1].copy()
    vecs = _fix_phases(vecs[:, ::-1])
    return Spectrum(vals, vecs)


def psd_sqrt(p, tol: float = PSD_TOL) -> np.ndarray:
    """Unique PSD square root; eigenvalues in ``[-tol*lmax, 0)`` are clamped."""
    spec = eigh(p)
    floor = -tol * max(spec.scale, np.finfo(float).tiny)
    if spec.dim and spec.eigenvalues[-1] < floor:
        raise NotPSD(f"smallest eigenvalue {spec.eigenvalues[-1]:.3e} below {floor:.3e}")
    roots = np.sqrt(np.clip(spec.eigenvalues, 0.0, None))
    return hermitize((spec.eigenvectors * roots) @ dagger(spec.eigenvectors))


def trace_norm(a) -> float:
    """``Tr sqrt(A A^H)``, evaluated as the sum of singular values."""
    arr = as_square(a)
    if arr.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(arr, compute_uv=False)))


def expm_unitary(g, angle: float) -> np.ndarray:
    """``exp(-i * angle * G)`` for Hermitian ``G`` through its eigenbasis."""
    spec = eigh(g)
    phases = np.exp(-1j * angle * spec.eigenvalues)
    v = spec.eigenvectors
    return (v * phases) @ dagger(v)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def kron_sum(a, b) -> np.ndarray:
    """``A (x) I + I (x) B``, the generator of ``exp(A) (x) exp(B)``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    return np.kron(a, np.eye(b.shape[0])) + np.kron(np.eye(a.shape[0]), b)


def direct_sum(blocks: Sequence) -> np.ndarray:
    arrs = [np.atleast_2d(np.asarray(b, dtype=np.complex128)) for b in blocks]
    return scipy.linalg.block_diag(*arrs).astype(np.complex128)
