"""Qudit pairs: layout, local and conditional states, entanglement verdicts.

Particles are called ``L`` and ``S``.  The composite index of ``|n>_L |p>_S``
is ``r(n, p) = n + p * n_l``.  For qubit pairs, qubit 0 is ``L`` and qubit 1
is ``S``, matching the bit-0-fastest convention of :mod:`qportrait.multiqubit`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import numkernel as nk
from .errors import DimensionMismatch, ValidationError, ZeroProbabilityCondition
from .qudit import (
    DensityMatrix,
    PureState,
    ResolutionOfIdentity,
    as_matrix,
    build_pauli_basis,
    ladder,
)


@dataclass(frozen=True)
class BipartiteLayout:
    n_l: int
    n_s: int

    def __post_init__(self):
        if self.n_l < 1 or self.n_s < 1:
            raise ValidationError(f"bad layout {self.n_l}x{self.n_s}")

    @classmethod
    def parse(cls, text: str) -> "BipartiteLayout":
        try:
            a, b = text.lower().split("x")
            return cls(int(a), int(b))
        except ValueError:
            raise ValidationError(f"layout must look like 'NLxNS', got {text!r}") from None

    @property
    def dim(self) -> int:
        return self.n_l * self.n_s

    def index(self, n: int, p: int) -> int:
        if not (0 <= n < self.n_l and 0 <= p < self.n_s):
            raise IndexError(f"({n}, {p}) outside {self.n_l}x{self.n_s}")
        return n + p * self.n_l

    def split(self, r: int) -> tuple[int, int]:
        return r % self.n_l, r // self.n_l

    def product(self, A_l, A_s) -> np.ndarray:
        """Operator ``A_L (x) A_S`` in this layout."""
        return np.kron(np.asarray(A_s), np.asarray(A_l))

    def ket(self, n: int, p: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(n, p)] = 1
        return v

    def embed(self, A, which: str) -> np.ndarray:
        if which == "L":
            return self.product(A, np.eye(self.n_s))
        if which == "S":
            return self.product(np.eye(self.n_l), A)
        raise ValueError(f"which must be 'L' or 'S', got {which!r}")

    def check(self, M) -> np.ndarray:
        M = as_matrix(M)
        if M.shape[0] != self.dim:
            raise DimensionMismatch(f"dim {M.shape[0]} does not factor as {self.n_l}x{self.n_s}")
        return M

    @cached_property
    def local_bases(self):
        return build_pauli_basis(self.n_l), build_pauli_basis(self.n_s)


QUBIT_PAIR = BipartiteLayout(2, 2)


def _other(which: str) -> str:
    if which not in ("L", "S"):
        raise ValueError(f"which must be 'L' or 'S', got {which!r}")
    return "S" if which == "L" else "L"


def coarse_local_projectors(roi: ResolutionOfIdentity, layout: BipartiteLayout):
    """Group a composite rank-one resolution into ``(R_L, R_S)`` coarse projectors."""
    if roi.dim != layout.dim or len(roi) != layout.dim:
        raise DimensionMismatch(f"need {layout.dim} projectors of dim {layout.dim}")
    P = roi.projectors
    R_l = [sum(P[layout.index(n, p)] for p in range(layout.n_s)) for n in range(layout.n_l)]
    R_s = [sum(P[layout.index(n, p)] for n in range(layout.n_l)) for p in range(layout.n_s)]
    return R_l, R_s


def product_roi(roi_l: ResolutionOfIdentity, roi_s: ResolutionOfIdentity) -> ResolutionOfIdentity:
    """Composite resolution ``P_{r(n,p)} = P_n^L (x) P_p^S``."""
    layout = BipartiteLayout(roi_l.dim, roi_s.dim)
    if roi_l.is_rank_one and roi_s.is_rank_one:
        cols = [None] * layout.dim
        for n in range(layout.n_l):
            for p in range(layout.n_s):
                cols[layout.index(n, p)] = np.kron(roi_s.vectors[:, p], roi_l.vectors[:, n])
        return ResolutionOfIdentity.from_vectors(np.column_stack(cols))
    projs = [None] * layout.dim
    for n, Pl in enumerate(roi_l.projectors):
        for p, Ps in enumerate(roi_s.projectors):
            projs[layout.index(n, p)] = layout.product(Pl, Ps)
    return ResolutionOfIdentity(tuple(projs))


@dataclass(frozen=True, eq=False)
class PairCoefficients:
    """Deflection parameters of a composite state in the product Pauli basis.

    ``d_l[n-1] = <B_n^L>``, ``d_s[p-1] = <B_p^S>`` and
    ``d_cross[n-1, p-1] = <B_n^L B_p^S>``, with ``B`` the local
    :class:`~qportrait.qudit.PauliBasis` elements embedded in the layout.
    """

    layout: BipartiteLayout
    d_l: np.ndarray
    d_s: np.ndarray
    d_cross: np.ndarray

    def density(self) -> np.ndarray:
        bl, bs = self.layout.local_bases
        N = self.layout.dim
        ml, ms = bl.norms[1:], bs.norms[1:]
        c = np.zeros((len(bl), len(bs)))
        c[0, 0] = 1 / N
        c[1:, 0] = self.d_l / (ml * self.layout.n_s)
        c[0, 1:] = self.d_s / (self.layout.n_l * ms)
        c[1:, 1:] = self.d_cross / np.outer(ml, ms)
        # sum_{n,p} c[n,p] beta_n^L (x) beta_p^S in the (S slow, L fast) layout
        T = np.einsum("np,nij,pkl->kilj", c, bl.matrices, bs.matrices)
        return T.reshape(N, N)

    # qubit-pair views, axes ordered (x, y, z)
    def _qubit_axes(self):
        if (self.layout.n_l, self.layout.n_s) != (2, 2):
            raise DimensionMismatch("qubit-pair view needs a 2x2 layout")
        b = self.layout.local_bases[0]
        # beta index of sigma_x, sigma_y, sigma_z in the N=2 Pauli basis
        return [b.index(0, 1) - 1, b.index(1, 0) - 1, b.index(1, 1) - 1]

    @property
    def d0(self) -> np.ndarray:
        return self.d_l[self._qubit_axes()]

    @property
    def d1(self) -> np.ndarray:
        return self.d_s[self._qubit_axes()]

    @property
    def d_ab(self) -> np.ndarray:
        ax = self._qubit_axes()
        return self.d_cross[np.ix_(ax, ax)]


def pair_coefficients(rho, layout: BipartiteLayout = QUBIT_PAIR) -> PairCoefficients:
    M = layout.check(rho)
    bl, bs = layout.local_bases
    T = M.reshape(layout.n_s, layout.n_l, layout.n_s, layout.n_l)
    # tr[(beta_n^L (x) beta_p^S) rho]
    c = np.einsum("nji,plk,kilj->np", bl.matrices, bs.matrices, T).real
    return PairCoefficients(layout, c[1:, 0], c[0, 1:], c[1:, 1:])


def local_density(rho, layout: BipartiteLayout = QUBIT_PAIR, which: str = "L") -> DensityMatrix:
    M = layout.check(rho)
    return DensityMatrix(nk.partial_trace(M, which, layout.n_l, layout.n_s))


def conditional_state(rho, layout: BipartiteLayout, measured: str, outcome) -> DensityMatrix:
    """State of the unmeasured particle after ``measured`` registers ``outcome``.

    Computed by wrapping with ``P_phi (x) I``, tracing out the measured
    particle and normalizing.
    """
    M = layout.check(rho)
    other = _other(measured)
    phi = outcome if isinstance(outcome, PureState) else PureState(outcome)
    P = layout.embed(phi.projector, measured)
    prob = float(np.trace(P @ M).real)
    if prob <= nk.tolerance("condition"):
        raise ZeroProbabilityCondition(f"conditioning outcome has probability {prob:.3e}")
    reduced = nk.partial_trace(P @ M @ P, other, layout.n_l, layout.n_s) / prob
    return DensityMatrix(reduced)


def _unit(m, name="counter director") -> np.ndarray:
    m = np.asarray(m, dtype=float).ravel()
    if m.shape != (3,) or abs(np.linalg.norm(m) - 1) > nk.tolerance("director"):
        raise ValidationError(f"{name} must be a unit 3-vector, got {m}")
    return m


def conditional_director(rho, m, which: int = 0) -> np.ndarray:
    """Effective director of qubit ``which`` when the other qubit's counter is ``m``.

    ``(d^w + D m) / (1 + m . d^o)`` with ``D`` the second-moment matrix
    oriented so its rows belong to qubit ``which``.
    """
    c = pair_coefficients(rho, QUBIT_PAIR)
    m = _unit(m)
    if which == 0:
        own, oth, D = c.d0, c.d1, c.d_ab
    elif which == 1:
        own, oth, D = c.d1, c.d0, c.d_ab.T
    else:
        raise ValueError("which must be 0 or 1")
    den = 1 + m @ oth
    if den <= 2 * nk.tolerance("condition"):
        raise ZeroProbabilityCondition(f"counter outcome has probability {den / 2:.3e}")
    return (own + D @ m) / den


class EntanglementClass(enum.Enum):
    SEPARABLE = "Separable"
    CLASSICALLY_CORRELATED = "ClassicallyCorrelated"
    LIGHT = "LightEntanglement"
    TOTAL = "TotalEntanglement"

    def __str__(self):
        return self.value

    @property
    def entangled(self) -> bool:
        return self in (EntanglementClass.LIGHT, EntanglementClass.TOTAL)


_RANK_TO_CLASS = {
    0: EntanglementClass.SEPARABLE,
    1: EntanglementClass.CLASSICALLY_CORRELATED,
    2: EntanglementClass.LIGHT,
    3: EntanglementClass.TOTAL,
}


@dataclass(frozen=True)
class EntanglementVerdict:
    verdict: EntanglementClass
    covariance_rank: int
    singular_values: tuple
    covariance: np.ndarray
    d0: np.ndarray
    d1: np.ndarray


def covariance_matrix(rho) -> np.ndarray:
    """``c_ab = d_ab - d_a^0 d_b^1`` of a qubit pair."""
    c = pair_coefficients(rho, QUBIT_PAIR)
    return c.d_ab - np.outer(c.d0, c.d1)


def classify_entanglement(rho, rank_tol=None) -> EntanglementVerdict:
    """Covariance-rank verdict for a qubit pair."""
    M = as_matrix(rho)
    if M.shape != (4, 4):
        raise DimensionMismatch(f"qubit pair (dim 4) expected, got dim {M.shape[0]}")
    c = pair_coefficients(M, QUBIT_PAIR)
    cov = c.d_ab - np.outer(c.d0, c.d1)
    sv = np.linalg.svd(cov, compute_uv=False)
    rel = nk.tolerance("rank") if rank_tol is None else rank_tol
    if sv[0] < 1e-12:
        rank = 0
    else:
        rank = int(np.sum(sv > rel * sv[0]))
    return EntanglementVerdict(_RANK_TO_CLASS[rank], rank, tuple(sv.tolist()), cov, c.d0, c.d1)


def canonical_entangled_basis(psi: float, phi: float) -> list[PureState]:
    """Two-angle entangled basis of a qubit pair; ``(0, 0)`` is the product basis.

    Kets are written ``|ab>`` with ``a`` the qubit-0 (L) value.
    """
    k = QUBIT_PAIR.ket
    c, s = np.cos(psi), np.sin(psi)
    cf, sf = np.cos(phi), np.sin(phi)
    return [
        PureState(c * k(0, 0) + s * k(1, 1)),
        PureState(cf * k(0, 1) + sf * k(1, 0)),
        PureState(-sf * k(0, 1) + cf * k(1, 0)),
        PureState(-s * k(0, 0) + c * k(1, 1)),
    ]


def entangling_generator(alpha: complex, layout: BipartiteLayout = QUBIT_PAIR,
                         modes=(0, 1)) -> np.ndarray:
    """``alpha a_L a_S^+ + alpha* a_L^+ a_S`` with ``a = |n><m|`` for ``modes=(n, m)``."""
    n, m = modes
    a_l = ladder(n, m, layout.n_l)
    a_s = ladder(n, m, layout.n_s)
    X = layout.product(a_l, a_s.conj().T)
    return alpha * X + np.conj(alpha) * X.conj().T


def entangling_unitary(alpha: complex, layout: BipartiteLayout = QUBIT_PAIR,
                       modes=(0, 1)) -> np.ndarray:
    """Closed-form exponential of :func:`entangling_generator`.

    Mixes ``|n m>`` with ``|m n>`` (L value first) and leaves every other
    product basis vector alone.
    """
    n, m = modes
    a = abs(alpha)
    if a == 0:
        return np.eye(layout.dim, dtype=complex)
    Pl = [ladder(n, n, layout.n_l), ladder(m, m, layout.n_l)]
    Ps = [ladder(n, n, layout.n_s), ladder(m, m, layout.n_s)]
    block = layout.product(Pl[0], Ps[1]) + layout.product(Pl[1], Ps[0])
    X = layout.product(ladder(n, m, layout.n_l), ladder(n, m, layout.n_s).conj().T)
    phase = alpha / a
    return (np.eye(layout.dim) + (np.cos(a) - 1) * block
            + 1j * np.sin(a) * (phase * X + np.conj(phase) * X.conj().T))


class TransformClass(enum.Enum):
    STABILIZER = "Stabilizer"
    LOCAL = "Local"
    ENTANGLING = "Entangling"

    def __str__(self):
        return self.value


def is_diagonal(U, tol=None) -> bool:
    U = np.asarray(U)
    tol = nk.tolerance("commute") if tol is None else tol
    return nk.max_abs(U - np.diag(np.diag(U))) <= tol


def realign(U, layout: BipartiteLayout) -> np.ndarray:
    """Operator-Schmidt matrix: ``U = A_L (x) A_S`` iff this has rank one."""
    T = np.asarray(U).reshape(layout.n_s, layout.n_l, layout.n_s, layout.n_l)
    # rows: (i_L, j_L), cols: (i_S, j_S)
    return T.transpose(1, 3, 0, 2).reshape(layout.n_l ** 2, layout.n_s ** 2)


def generator_cross_coefficients(U, layout: BipartiteLayout) -> np.ndarray:
    """Cross coefficients ``J_{n,p}`` of the principal generator of ``U``."""
    J = nk.generator_from_unitary(U)
    bl, bs = layout.local_bases
    T = J.reshape(layout.n_s, layout.n_l, layout.n_s, layout.n_l)
    c = np.einsum("nji,plk,kilj->np", bl.matrices, bs.matrices, T).real
    return c[1:, 1:] / np.outer(bl.norms[1:], bs.norms[1:])


def classify_transform(U, layout: BipartiteLayout = QUBIT_PAIR) -> TransformClass:
    """Stabilizer of the computational resolution, local, or entangling.

    Locality is decided by factorization (operator-Schmidt rank one), which
    is exactly the existence of a generator without cross terms and does
    not depend on the branch of the logarithm.
    """
    U = nk.check_unitary(layout.check(U))
    if is_diagonal(U):
        return TransformClass.STABILIZER
    sv = np.linalg.svd(realign(U, layout), compute_uv=False)
    if sv[1:].max(initial=0.0) <= nk.tolerance("commute") * sv[0]:
        return TransformClass.LOCAL
    return TransformClass.ENTANGLING
