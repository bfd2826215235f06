"""Dense complex linear algebra shared by the rest of the package.

Everything here works on plain ``numpy`` arrays.  The bipartite helpers use
the index rule ``r(n, p) = n + p * n_l``: the L factor is the fastest-varying
index, so an operator ``A_L (x) A_S`` in that layout is ``np.kron(A_S, A_L)``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NonZeroTrace,
    NotHermitian,
    NotUnitary,
)

_BASE_TOLERANCES = {
    "hermitian": 1e-10,
    "unitary": 1e-10,
    "reassembly": 1e-10,
    "trace": 1e-12,
    "rank": 1e-9,
    "generator_trace": 1e-9,
    "probability": 1e-12,
    "normalization": 1e-10,
    "director": 1e-12,
    "commute": 1e-9,
    "condition": 1e-12,
}


def tolerance(name: str) -> float:
    """Return the named tolerance, scaled by ``QP_TOLERANCE_SCALE`` (default 1)."""
    scale = float(os.environ.get("QP_TOLERANCE_SCALE", "1") or 1)
    return _BASE_TOLERANCES[name] * scale


def as_square(M, name="matrix") -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    return A


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def max_abs(A) -> float:
    A = np.asarray(A)
    return float(np.max(np.abs(A))) if A.size else 0.0


def is_hermitian(H, tol=None) -> bool:
    H = np.asarray(H)
    tol = tolerance("hermitian") if tol is None else tol
    return max_abs(H - dagger(H)) <= tol


def is_unitary(U, tol=None) -> bool:
    U = np.asarray(U)
    tol = tolerance("unitary") if tol is None else tol
    return max_abs(U @ dagger(U) - np.eye(U.shape[0])) <= tol


def check_hermitian(H, name="matrix") -> np.ndarray:
    H = as_square(H, name)
    err = max_abs(H - dagger(H))
    if err > tolerance("hermitian"):
        raise NotHermitian(f"{name} is not Hermitian (max |H - H^+| = {err:.3e})",
                           invariant="hermitian")
    return (H + dagger(H)) / 2


def check_unitary(U, name="matrix") -> np.ndarray:
    U = as_square(U, name)
    err = max_abs(U @ dagger(U) - np.eye(U.shape[0]))
    if err > tolerance("unitary"):
        raise NotUnitary(f"{name} is not unitary (max |UU^+ - I| = {err:.3e})",
                         invariant="unitary")
    return U


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its first largest-magnitude component is real and >= 0."""
    mags = np.abs(v)
    top = mags.max()
    if top == 0:
        return v
    # ties within rounding noise resolve to the lowest index
    k = int(np.flatnonzero(mags >= top * (1 - 1e-12))[0])
    return v * (abs(v[k]) / v[k])


def _lex_key(v: np.ndarray):
    parts = np.round(np.column_stack([v.real, v.imag]).ravel(), 9)
    return tuple(parts.tolist())


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (descending) and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def projectors(self) -> list[np.ndarray]:
        V = self.eigenvectors
        return [np.outer(V[:, k], V[:, k].conj()) for k in range(self.dim)]

    def reassemble(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ dagger(V)


def hermitian_eig(H) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    Eigenvalues come out in descending order; degenerate groups are ordered
    by descending lexicographic order of their phase-fixed eigenvectors.
    """
    H = check_hermitian(H)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc
    w = w[::-1]
    V = V[:, ::-1]
    vecs = [fix_phase(V[:, k]) for k in range(len(w))]

    scale = max(1.0, float(np.max(np.abs(w))) if len(w) else 1.0)
    order = []
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and w[start] - w[stop] <= 1e-10 * scale:
            stop += 1
        group = list(range(start, stop))
        if len(group) > 1:
            group.sort(key=lambda k: _lex_key(vecs[k]), reverse=True)
        order.extend(group)
        start = stop
    eigenvalues = np.array([w[k] for k in order], dtype=float)
    eigenvectors = np.column_stack([vecs[k] for k in order])
    return SpectralDecomposition(eigenvalues, eigenvectors)


def unitary_from_generator(J) -> np.ndarray:
    """``exp(iJ)`` for a traceless Hermitian generator, through its spectrum."""
    J = check_hermitian(J, "generator")
    tr = np.trace(J)
    if abs(tr) > tolerance("generator_trace"):
        raise NonZeroTrace(f"generator trace is {tr:.3e}, expected 0",
                           invariant="traceless")
    dec = hermitian_eig(J)
    V = dec.eigenvectors
    return (V * np.exp(1j * dec.eigenvalues)) @ dagger(V)


def _unitary_spectrum(U: np.ndarray):
    # complex Schur form of a normal matrix is diagonal with unitary Z,
    # which stays orthonormal inside degenerate eigenspaces
    try:
        T, Z = scipy.linalg.schur(U, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover
        raise ConvergenceFailure(str(exc)) from exc
    return np.diag(T), Z


def unitary_eigenphases(U) -> tuple[np.ndarray, np.ndarray]:
    """Trace-fixed eigenphases of ``U`` and the matching eigenvector columns.

    Phases are principal arguments in (-pi, pi], then shifted uniformly by
    minus their mean so they sum to zero (this removes a global phase).
    """
    U = check_unitary(U)
    lam, Z = _unitary_spectrum(U)
    phases = np.angle(lam)
    phases[phases <= -np.pi + 1e-12] = np.pi
    phases = phases - phases.mean()
    return phases, Z


def generator_from_unitary(U) -> np.ndarray:
    """Traceless Hermitian ``J`` with ``exp(iJ) = U`` up to a global phase."""
    phases, Z = unitary_eigenphases(U)
    J = (Z * phases) @ dagger(Z)
    return (J + dagger(J)) / 2


def kron(A, B) -> np.ndarray:
    """Standard Kronecker product (first argument is the slow index)."""
    return np.kron(np.asarray(A), np.asarray(B))


def partial_trace(M, keep: str, n_l: int, n_s: int) -> np.ndarray:
    """Reduce an ``(n_l*n_s)``-dimensional operator to one factor.

    ``keep`` is ``"L"`` or ``"S"``.  Composite index ``r = n + p * n_l`` with
    ``n`` the L index and ``p`` the S index.
    """
    M = as_square(M)
    if M.shape[0] != n_l * n_s:
        raise DimensionMismatch(
            f"operator of dim {M.shape[0]} does not factor as {n_l} x {n_s}")
    T = M.reshape(n_s, n_l, n_s, n_l)
    if keep == "L":
        return np.einsum("pnpm->nm", T)
    if keep == "S":
        return np.einsum("pnqn->pq", T)
    raise ValueError(f"keep must be 'L' or 'S', got {keep!r}")
