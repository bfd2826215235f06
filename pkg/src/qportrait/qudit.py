"""Single qudit: states, observables, resolutions of identity, phase portraits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import numkernel as nk
from .errors import (
    CoarseProjector,
    DimensionMismatch,
    DirectorTooLong,
    InvalidState,
    ValidationError,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def as_matrix(X) -> np.ndarray:
    """Return the complex matrix behind a state, observable or array."""
    if isinstance(X, (DensityMatrix, Observable)):
        return X.matrix
    return nk.as_square(X)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unit-trace positive semidefinite Hermitian matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InvalidState(f"density matrix must be square, got {M.shape}",
                               invariant="square")
        herr = nk.max_abs(M - nk.dagger(M))
        if herr > nk.tolerance("hermitian"):
            raise InvalidState(f"density matrix not Hermitian ({herr:.3e})",
                               invariant="hermitian")
        M = (M + nk.dagger(M)) / 2
        tr = np.trace(M).real
        if abs(tr - 1) > nk.tolerance("normalization"):
            raise InvalidState(f"density matrix trace is {tr!r}", invariant="unit_trace")
        lo = np.linalg.eigvalsh(M).min()
        if lo < -nk.tolerance("hermitian"):
            raise InvalidState(f"density matrix has eigenvalue {lo:.3e} < 0",
                               invariant="positive_semidefinite")
        object.__setattr__(self, "matrix", _readonly(M))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, psi) -> "DensityMatrix":
        v = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        return cls(np.eye(n) / n)

    @classmethod
    def mixture(cls, weights: Sequence[float], states) -> "DensityMatrix":
        mats = [s.projector if isinstance(s, PureState) else as_matrix(s) for s in states]
        return cls(sum(w * M for w, M in zip(weights, mats)))

    def eigenvalues(self) -> np.ndarray:
        return nk.hermitian_eig(self.matrix).eigenvalues

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian matrix representing a measuring device."""

    matrix: np.ndarray

    def __post_init__(self):
        M = nk.check_hermitian(self.matrix, "observable")
        object.__setattr__(self, "matrix", _readonly(M))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector; a point of the qudit phase space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise InvalidState("zero vector is not a state", invariant="unit_norm")
        v = v / norm
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    @property
    def projector(self) -> np.ndarray:
        v = self.amplitudes
        return np.outer(v, v.conj())

    def same_point(self, other: "PureState", tol=1e-10) -> bool:
        """Equality up to global phase."""
        return nk.max_abs(self.projector - other.projector) <= tol


def _as_vector(psi) -> np.ndarray:
    if isinstance(psi, PureState):
        return psi.amplitudes
    return PureState(psi).amplitudes


@dataclass(frozen=True, eq=False)
class ResolutionOfIdentity:
    """Ordered, mutually orthogonal projectors summing to the identity.

    When every projector has rank one the phase-fixed generating vectors are
    kept in ``vectors`` (columns), otherwise ``vectors`` is ``None``.
    """

    projectors: tuple
    vectors: np.ndarray | None = field(default=None)

    def __post_init__(self):
        projs = tuple(_readonly(P) for P in self.projectors)
        if not projs:
            raise ValidationError("empty resolution of identity", invariant="nonempty")
        n = projs[0].shape[0]
        for P in projs:
            if P.shape != (n, n):
                raise DimensionMismatch("projectors of different dimension")
            if nk.max_abs(P - nk.dagger(P)) > nk.tolerance("hermitian"):
                raise ValidationError("projector not Hermitian", invariant="hermitian")
        for i, P in enumerate(projs):
            if nk.max_abs(P @ P - P) > 1e-9:
                raise ValidationError(f"projector {i} not idempotent", invariant="idempotent")
            for j in range(i + 1, len(projs)):
                if nk.max_abs(P @ projs[j]) > 1e-9:
                    raise ValidationError(f"projectors {i},{j} not orthogonal",
                                          invariant="orthogonal")
        if nk.max_abs(sum(projs) - np.eye(n)) > nk.tolerance("normalization"):
            raise ValidationError("projectors do not sum to identity", invariant="complete")
        object.__setattr__(self, "projectors", projs)
        if self.vectors is not None:
            object.__setattr__(self, "vectors", _readonly(self.vectors))
        elif all(abs(np.trace(P).real - 1) < 1e-9 for P in projs):
            cols = []
            for P in projs:
                k = int(np.argmax(np.linalg.norm(P, axis=0)))
                v = P[:, k] / np.linalg.norm(P[:, k])
                cols.append(nk.fix_phase(v))
            object.__setattr__(self, "vectors", _readonly(np.column_stack(cols)))

    @classmethod
    def from_vectors(cls, V) -> "ResolutionOfIdentity":
        """Rank-one resolution from an orthonormal set of columns."""
        V = nk.as_square(V, "basis")
        if nk.max_abs(nk.dagger(V) @ V - np.eye(V.shape[0])) > 1e-10:
            raise ValidationError("basis vectors are not orthonormal", invariant="orthonormal")
        V = np.column_stack([nk.fix_phase(V[:, k]) for k in range(V.shape[1])])
        projs = tuple(np.outer(V[:, k], V[:, k].conj()) for k in range(V.shape[1]))
        return cls(projs, V)

    @classmethod
    def computational(cls, n: int) -> "ResolutionOfIdentity":
        return cls.from_vectors(np.eye(n))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def ranks(self) -> list[int]:
        return [int(round(np.trace(P).real)) for P in self.projectors]

    @property
    def is_rank_one(self) -> bool:
        return self.vectors is not None

    def __len__(self):
        return len(self.projectors)

    def __iter__(self):
        return iter(self.projectors)

    def __getitem__(self, k):
        return self.projectors[k]

    def transformed(self, U) -> "ResolutionOfIdentity":
        """The resolution ``{U P U^+}``, same order."""
        U = nk.as_square(U)
        if self.vectors is not None:
            return ResolutionOfIdentity.from_vectors(U @ self.vectors)
        return ResolutionOfIdentity(tuple(U @ P @ nk.dagger(U) for P in self.projectors))

    def same_as(self, other: "ResolutionOfIdentity", tol=1e-9) -> bool:
        """Projector-wise equality (order matters)."""
        return len(self) == len(other) and all(
            nk.max_abs(P - Q) <= tol for P, Q in zip(self.projectors, other.projectors))


def resolution_of_identity(X) -> ResolutionOfIdentity:
    """Rank-one projectors onto the eigenvectors of ``X``, by descending eigenvalue."""
    dec = nk.hermitian_eig(as_matrix(X))
    return ResolutionOfIdentity.from_vectors(dec.eigenvectors)


@dataclass(frozen=True, eq=False)
class PauliBasis:
    """Orthogonal Hermitian basis ``beta_p`` with norms ``M_p = tr(beta_p^2)``.

    Index rule ``p = n + m*N``: ``n < m`` gives ``sigma_x^{(n,m)}``, ``n > m``
    gives ``sigma_y^{(n,m)} = i|n><m| - i|m><n|``, and the diagonal ``n = m``
    slots hold the identity (``p = 0``) and the diagonal generalized
    Gell-Mann matrices ``sqrt(2/(m(m+1))) diag(1,...,1,-m,0,...,0)``.
    """

    dim: int
    matrices: np.ndarray
    norms: np.ndarray

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, p):
        return self.matrices[p]

    def index(self, n: int, m: int) -> int:
        return n + m * self.dim

    def coefficients(self, A) -> np.ndarray:
        """Expansion coefficients ``A_p = tr(beta_p A) / M_p`` (real for Hermitian A)."""
        A = as_matrix(A)
        vals = np.einsum("pij,ji->p", self.matrices, A) / self.norms
        return vals.real

    def assemble(self, coeffs) -> np.ndarray:
        return np.einsum("p,pij->ij", np.asarray(coeffs, dtype=complex), self.matrices)

    def state_parameters(self, rho) -> np.ndarray:
        """Deflection parameters ``d_p = tr(beta_p rho)`` for ``p >= 1``."""
        M = as_matrix(rho)
        return np.einsum("pij,ji->p", self.matrices[1:], M).real

    def density_from(self, d) -> np.ndarray:
        """``I/N + sum_p d_p beta_p / M_p`` for parameters ``d`` (length N^2-1)."""
        d = np.asarray(d, dtype=float)
        return np.eye(self.dim) / self.dim + np.einsum(
            "p,pij->ij", d / self.norms[1:], self.matrices[1:])


def ladder(n: int, m: int, dim: int) -> np.ndarray:
    """Transfer matrix ``|n><m|``."""
    a = np.zeros((dim, dim), dtype=complex)
    a[n, m] = 1
    return a


def build_pauli_basis(N: int) -> PauliBasis:
    if N < 2:
        raise ValidationError(f"Pauli basis needs N >= 2, got {N}")
    mats = np.zeros((N * N, N, N), dtype=complex)
    for m in range(N):
        for n in range(N):
            p = n + m * N
            if n < m:
                mats[p, n, m] = mats[p, m, n] = 1
            elif n > m:
                mats[p, n, m] = 1j
                mats[p, m, n] = -1j
            elif m == 0:
                mats[p] = np.eye(N)
            else:
                diag = np.zeros(N)
                diag[:m] = 1
                diag[m] = -m
                mats[p] = np.diag(diag) * np.sqrt(2 / (m * (m + 1)))
    norms = np.einsum("pij,pji->p", mats, mats).real
    mats.setflags(write=False)
    norms.setflags(write=False)
    return PauliBasis(N, mats, norms)


def expectation(A, rho) -> float:
    """``tr(A rho)`` with the (noise-level) imaginary part dropped."""
    A = as_matrix(A)
    R = as_matrix(rho)
    if A.shape != R.shape:
        raise DimensionMismatch(f"observable {A.shape} vs state {R.shape}")
    return float(np.trace(A @ R).real)


def expectation_spectral(A, rho) -> float:
    """Expectation from eigenvalues of both matrices and their transform matrix.

    ``sum_{k,k'} A_k p_k' |<k;A|k';rho>|^2``.
    """
    A = as_matrix(A)
    R = as_matrix(rho)
    if A.shape != R.shape:
        raise DimensionMismatch(f"observable {A.shape} vs state {R.shape}")
    da = nk.hermitian_eig(A)
    dr = nk.hermitian_eig(R)
    overlaps = np.abs(nk.dagger(da.eigenvectors) @ dr.eigenvectors) ** 2
    return float(da.eigenvalues @ overlaps @ dr.eigenvalues)


def transform_matrix(source: ResolutionOfIdentity, target: ResolutionOfIdentity) -> np.ndarray:
    """Unitary ``U = sum_k |k;target><k;source|`` carrying one resolution onto the other.

    Each target vector's free phase is chosen so that ``<k;source|k;target>``
    is real and non-negative (falling back to the stored phase when the
    overlap vanishes), which makes ``U`` the identity for equal resolutions.
    """
    if source.dim != target.dim or len(source) != len(target):
        raise DimensionMismatch("resolutions of identity differ in size")
    for name, roi in (("source", source), ("target", target)):
        if not roi.is_rank_one:
            raise CoarseProjector(f"{name} resolution has projectors of rank {roi.ranks}")
    S = source.vectors
    T = np.array(target.vectors)
    for k in range(T.shape[1]):
        ov = np.vdot(S[:, k], T[:, k])
        if abs(ov) > 1e-9:
            T[:, k] *= abs(ov) / ov
    return T @ nk.dagger(S)


def phase_portrait_value(rho, psi) -> float:
    """Probability ``<psi|rho|psi>`` that the counter of ``psi`` fires."""
    R = as_matrix(rho)
    v = _as_vector(psi)
    if len(v) != R.shape[0]:
        raise DimensionMismatch(f"state dim {R.shape[0]} vs point dim {len(v)}")
    val = float(np.vdot(v, R @ v).real)
    return min(max(val, 0.0), 1.0)


def portrait_distribution(rho, roi: ResolutionOfIdentity) -> np.ndarray:
    """Probabilities ``tr(P_k rho)`` over a resolution of identity."""
    R = as_matrix(rho)
    if roi.dim != R.shape[0]:
        raise DimensionMismatch(f"state dim {R.shape[0]} vs resolution dim {roi.dim}")
    p = np.array([np.trace(P @ R).real for P in roi.projectors])
    return clamp_probabilities(p)


def clamp_probabilities(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    eps = nk.tolerance("probability")
    if np.any(p < -eps):
        raise InvalidState(f"negative probability {p.min():.3e}", invariant="positive_semidefinite")
    p = np.where(p < 0, 0.0, p)
    if abs(p.sum() - 1) > nk.tolerance("normalization"):
        raise InvalidState(f"probabilities sum to {p.sum()!r}", invariant="unit_trace")
    return p


# -- qubit specializations ---------------------------------------------------

def _director(v, name="director") -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.shape != (3,):
        raise DimensionMismatch(f"{name} must be a real 3-vector, got shape {v.shape}")
    return v


def qubit_density(d) -> DensityMatrix:
    """``I/2 + d.sigma/2`` for a director of length at most one."""
    d = _director(d)
    if np.linalg.norm(d) > 1 + 1e-12:
        raise DirectorTooLong(f"|d| = {np.linalg.norm(d):.6g} > 1", invariant="director_length")
    return DensityMatrix(0.5 * np.eye(2) + 0.5 * sum(c * s for c, s in zip(d, PAULI)))


def bloch_vector(rho) -> np.ndarray:
    """Director ``(tr(sigma_x rho), tr(sigma_y rho), tr(sigma_z rho))`` of a qubit."""
    R = as_matrix(rho)
    if R.shape != (2, 2):
        raise DimensionMismatch(f"qubit state expected, got dim {R.shape[0]}")
    return np.array([np.trace(s @ R).real for s in PAULI])


def qubit_counter_state(m) -> PureState:
    """Pure qubit state whose director is the unit vector ``m``."""
    m = _director(m)
    nrm = np.linalg.norm(m)
    if abs(nrm - 1) > nk.tolerance("director"):
        raise DimensionMismatch(f"counter director must be unit, |m| = {nrm!r}")
    theta = np.arccos(np.clip(m[2], -1, 1))
    phi = np.arctan2(m[1], m[0])
    return PureState(np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)]))


def qubit_roi(m) -> ResolutionOfIdentity:
    """Counter pair ``(I +/- m.sigma)/2`` as a resolution of identity."""
    up = qubit_counter_state(m).amplitudes
    down = qubit_counter_state(-np.asarray(m, dtype=float)).amplitudes
    return ResolutionOfIdentity.from_vectors(np.column_stack([up, down]))


def qubit_portrait(rho, m) -> float:
    """``1/2 + d.m/2``: portrait of a qubit at the counter director ``m``."""
    m = _director(m)
    if abs(np.linalg.norm(m) - 1) > nk.tolerance("director"):
        raise DimensionMismatch(f"counter director must be unit, |m| = {np.linalg.norm(m)!r}")
    return float(0.5 + 0.5 * bloch_vector(rho) @ m)
