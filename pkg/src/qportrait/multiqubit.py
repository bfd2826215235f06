"""Systems of ``p`` qubits with ``N = 2**p`` levels.

Basis index ``k = b_0 + 2 b_1 + ... + 2**(p-1) b_{p-1}``: qubit 0 is the
fastest-varying bit.  Pauli coefficients are held in a ``(4,)*p`` tensor
indexed by one axis label per qubit (0 = identity, 1..3 = x, y, z), with the
entry at all-zero equal to one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import numkernel as nk
from .composite import TransformClass, is_diagonal
from .errors import (
    BadDirector,
    DimensionMismatch,
    EmptySubset,
    IndexOutOfRange,
    LengthMismatch,
    MissingSetting,
    ShotCountZero,
    ZeroProbabilityCondition,
)
from .measurement import FrequencyTable, split_streams
from .qudit import PAULI, DensityMatrix, ResolutionOfIdentity, as_matrix, qubit_counter_state

AXES = "xyz"
AXIS_VECTORS = {"x": np.array([1.0, 0, 0]), "y": np.array([0, 1.0, 0]), "z": np.array([0, 0, 1.0])}
_PAULI4 = np.stack([np.eye(2, dtype=complex), *PAULI])
_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def n_qubits(dim: int) -> int:
    p = int(round(np.log2(dim))) if dim > 0 else -1
    if p < 1 or 2 ** p != dim:
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return p


def bit_of(k: int, q: int, p: int | None = None) -> int:
    if k < 0 or q < 0 or (p is not None and (k >= 2 ** p or q >= p)):
        raise IndexOutOfRange(f"index {k} / qubit {q} out of range for p={p}")
    return (k >> q) & 1


def bits(k: int, p: int) -> tuple[int, ...]:
    """``(b_0, ..., b_{p-1})``."""
    if not 0 <= k < 2 ** p:
        raise IndexOutOfRange(f"index {k} out of range for p={p}")
    return tuple((k >> q) & 1 for q in range(p))


def index_set(q: int, p: int) -> np.ndarray:
    """Indices whose bit ``q`` is zero."""
    if not 0 <= q < p:
        raise IndexOutOfRange(f"qubit {q} out of range for p={p}")
    k = np.arange(2 ** p)
    return k[((k >> q) & 1) == 0]


@dataclass(frozen=True, eq=False)
class QubitSubalgebra:
    """Pauli matrices of qubit ``q`` inside the ``2**p``-level system."""

    q: int
    p: int
    sigma: tuple
    projector: np.ndarray
    lower: np.ndarray

    @property
    def raise_(self) -> np.ndarray:
        return self.lower.conj().T


def qubit_subalgebra(q: int, p: int) -> QubitSubalgebra:
    """Build ``Sigma_{1,2,3}`` of qubit ``q`` from its index set.

    ``Pi = sum_{k in k_q} |k><k|`` and ``A = sum_{k in k_q} |k><k+2^q|``;
    signs follow the ordinary Pauli matrices, ``Sigma_3 = 2 Pi - I``.
    """
    ks = index_set(q, p)
    N = 2 ** p
    Pi = np.zeros((N, N), dtype=complex)
    Pi[ks, ks] = 1
    A = np.zeros((N, N), dtype=complex)
    A[ks, ks + 2 ** q] = 1
    Ad = A.conj().T
    s1 = A + Ad
    s2 = -1j * A + 1j * Ad
    s3 = 2 * Pi - np.eye(N)
    return QubitSubalgebra(q, p, (s1, s2, s3), Pi, A)


def local_operator(op, q: int, p: int) -> np.ndarray:
    """Single-qubit operator ``op`` acting on qubit ``q``."""
    return np.kron(np.kron(np.eye(2 ** (p - 1 - q)), op), np.eye(2 ** q))


def product_operator(ops) -> np.ndarray:
    """``ops[0]`` on qubit 0, ``ops[1]`` on qubit 1, ...; a Kronecker product."""
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(op, out)
    return out


def projector_from_bits(k: int, p: int) -> np.ndarray:
    """``prod_q (I + (-1)^{b_q} Sigma_3^{(q)}) / 2``."""
    b = bits(k, p)
    N = 2 ** p
    out = np.eye(N, dtype=complex)
    for q in range(p):
        s3 = qubit_subalgebra(q, p).sigma[2]
        out = out @ ((np.eye(N) + (-1) ** b[q] * s3) / 2)
    return out


@dataclass(frozen=True, eq=False)
class CounterConfiguration:
    """One unit director per qubit; row ``q`` belongs to qubit ``q``."""

    directors: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.directors, dtype=float)
        if D.ndim != 2 or D.shape[1] != 3 or D.shape[0] < 1:
            raise BadDirector(f"directors must have shape (p, 3), got {D.shape}")
        norms = np.linalg.norm(D, axis=1)
        if np.any(np.abs(norms - 1) > nk.tolerance("director")):
            raise BadDirector(f"directors must be unit vectors, norms {norms}",
                              invariant="unit_director")
        D = D.copy()
        D.setflags(write=False)
        object.__setattr__(self, "directors", D)

    @classmethod
    def from_axes(cls, axes: str) -> "CounterConfiguration":
        """``"xzy"`` puts qubit 0 along x, qubit 1 along z, qubit 2 along y."""
        try:
            return cls(np.array([AXIS_VECTORS[a] for a in axes.lower()]))
        except KeyError:
            raise BadDirector(f"axes must use only x, y, z: {axes!r}") from None

    @property
    def p(self) -> int:
        return self.directors.shape[0]

    def flipped(self, k: int) -> "CounterConfiguration":
        signs = np.array([(-1) ** b for b in bits(k, self.p)])
        return CounterConfiguration(self.directors * signs[:, None])


def _as_config(M) -> CounterConfiguration:
    if isinstance(M, CounterConfiguration):
        return M
    if isinstance(M, str):
        return CounterConfiguration.from_axes(M)
    return CounterConfiguration(M)


def product_counter(M) -> np.ndarray:
    """``2^-p prod_q (I + m_q . Sigma^{(q)})``."""
    M = _as_config(M)
    ops = [(np.eye(2) + sum(c * s for c, s in zip(m, PAULI))) / 2 for m in M.directors]
    return product_operator(ops)


def counter_roi(M) -> ResolutionOfIdentity:
    """The ``2^p`` counters with directors sign-flipped by the bits of ``k``."""
    M = _as_config(M)
    up = [qubit_counter_state(m).amplitudes for m in M.directors]
    down = [qubit_counter_state(-m).amplitudes for m in M.directors]
    cols = []
    for k in range(2 ** M.p):
        b = bits(k, M.p)
        v = np.ones(1, dtype=complex)
        for q in range(M.p):
            v = np.kron(down[q] if b[q] else up[q], v)
        cols.append(v)
    return ResolutionOfIdentity.from_vectors(np.column_stack(cols))


# -- Pauli coefficients ------------------------------------------------------

def _term_order(p: int):
    """All non-identity axis tuples: subset size, then lexicographic on (qubit, axis)."""
    terms = [a for a in itertools.product(range(4), repeat=p) if any(a)]

    def key(a):
        support = [(q, x) for q, x in enumerate(a) if x]
        return (len(support), support)

    return sorted(terms, key=key)


@dataclass(frozen=True, eq=False)
class PauliCoefficients:
    """Expectations ``d`` of all Pauli strings of a ``p``-qubit state."""

    tensor: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.tensor, dtype=float)
        if T.ndim < 1 or any(s != 4 for s in T.shape):
            raise DimensionMismatch(f"coefficient tensor must be (4,)*p, got {T.shape}")
        T = T.copy()
        T.setflags(write=False)
        object.__setattr__(self, "tensor", T)

    @property
    def p(self) -> int:
        return self.tensor.ndim

    @staticmethod
    def key(term) -> tuple[int, ...]:
        """Normalize ``{q: axis}``, ``((q, axis), ...)`` or ``"0:z,1:x"``."""
        if isinstance(term, str):
            term = [t.split(":") for t in term.split(",") if t]
            term = [(int(q), a) for q, a in term]
        elif isinstance(term, Mapping):
            term = list(term.items())
        return tuple(sorted((int(q), a if isinstance(a, int) else AXES.index(a) + 1)
                            for q, a in term))

    def __getitem__(self, term) -> float:
        idx = [0] * self.p
        for q, a in self.key(term):
            idx[q] = a
        return float(self.tensor[tuple(idx)])

    def items(self):
        """``(label, value)`` pairs in report order, e.g. ``("0:z,1:z", 1.0)``."""
        for a in _term_order(self.p):
            label = ",".join(f"{q}:{AXES[x - 1]}" for q, x in enumerate(a) if x)
            yield label, float(self.tensor[a])

    def vector(self) -> np.ndarray:
        return np.array([v for _, v in self.items()])

    def single(self, q: int) -> np.ndarray:
        """Local director of qubit ``q``."""
        idx = [0] * self.p
        out = []
        for a in (1, 2, 3):
            idx[q] = a
            out.append(self.tensor[tuple(idx)])
        return np.array(out)


def _contract_pauli(M: np.ndarray, p: int) -> np.ndarray:
    # d[a_0..a_{p-1}] = tr(prod_q sigma_{a_q}^{(q)} M); tensor axis q <-> qubit q
    T = M.reshape((2,) * (2 * p))
    L = _LETTERS
    rows = [L[p - 1 - q] for q in range(p)]           # row axis of qubit q
    cols = [L[2 * p - 1 - q] for q in range(p)]
    outs = [L[2 * p + q] for q in range(p)]
    subs = [L[:2 * p]] + [outs[q] + cols[q] + rows[q] for q in range(p)]
    expr = ",".join(subs) + "->" + "".join(outs)
    return np.einsum(expr, T, *([_PAULI4] * p), optimize="greedy")


def pauli_coefficients(rho) -> PauliCoefficients:
    M = as_matrix(rho)
    p = n_qubits(M.shape[0])
    return PauliCoefficients(_contract_pauli(M, p).real)


def operator_from_coefficients(tensor) -> np.ndarray:
    """``2^-p sum_a d_a prod_q sigma_{a_q}^{(q)}``."""
    T = np.asarray(tensor, dtype=complex)
    p = T.ndim
    L = _LETTERS
    rows = [L[p - 1 - q] for q in range(p)]
    cols = [L[2 * p - 1 - q] for q in range(p)]
    ins = [L[2 * p + q] for q in range(p)]
    expr = "".join(ins) + "," + ",".join(ins[q] + rows[q] + cols[q] for q in range(p))
    expr += "->" + L[:2 * p]
    out = np.einsum(expr, T, *([_PAULI4] * p), optimize="greedy")
    return out.reshape(2 ** p, 2 ** p) / 2 ** p


def density_from_coefficients(c) -> DensityMatrix:
    T = c.tensor if isinstance(c, PauliCoefficients) else np.asarray(c)
    return DensityMatrix(operator_from_coefficients(T))


def partial_density(rho, subset) -> DensityMatrix:
    """Reduced state of the qubits in ``subset``, renumbered in ascending order.

    Keeps the coefficients supported inside the subset and renormalizes,
    without ever forming a partial trace.
    """
    c = rho if isinstance(rho, PauliCoefficients) else pauli_coefficients(rho)
    keep = sorted(set(int(q) for q in subset))
    if not keep:
        raise EmptySubset("subset of qubits must be non-empty")
    if keep[0] < 0 or keep[-1] >= c.p:
        raise IndexOutOfRange(f"subset {keep} out of range for p={c.p}")
    idx = tuple(slice(None) if q in keep else 0 for q in range(c.p))
    return density_from_coefficients(c.tensor[idx])


# -- portraits ---------------------------------------------------------------

def multiqubit_portrait(rho, M) -> float:
    """``tr(rho Pi(M))`` for the product counter ``M``."""
    return float(np.trace(as_matrix(rho) @ product_counter(M)).real)


def portrait_from_coefficients(c: PauliCoefficients, M) -> float:
    """Portrait as a multilinear polynomial in the counter directors."""
    M = _as_config(M)
    if M.p != c.p:
        raise DimensionMismatch(f"{M.p} directors for {c.p} qubits")
    T = c.tensor
    for q in range(c.p):
        T = np.tensordot(np.concatenate([[1.0], M.directors[q]]), T, axes=([0], [0]))
    return float(T) / 2 ** c.p


def counter_distribution(rho, M) -> np.ndarray:
    """Probabilities over :func:`counter_roi` outcomes ``k = 0 .. 2^p - 1``."""
    M = _as_config(M)
    R = as_matrix(rho)
    if R.shape[0] != 2 ** M.p:
        raise DimensionMismatch(f"{M.p} directors for a state of dim {R.shape[0]}")
    c = pauli_coefficients(R)
    p = np.array([portrait_from_coefficients(c, M.flipped(k)) for k in range(2 ** M.p)])
    p[np.abs(p) < 1e-15] = 0.0
    return np.clip(p, 0.0, None)


def effective_director(rho, q: int, others) -> np.ndarray:
    """Conditional local director of qubit ``q`` given counters on all other qubits.

    ``others`` lists the directors of qubits ``0..p-1`` without ``q``, in
    ascending order.  The result is the ratio of the two multilinear sums
    built from the coefficients with and without an axis on qubit ``q``.
    """
    c = rho if isinstance(rho, PauliCoefficients) else pauli_coefficients(rho)
    others = np.asarray(others, dtype=float).reshape(-1, 3)
    if len(others) != c.p - 1:
        raise LengthMismatch(f"need {c.p - 1} counter directors, got {len(others)}")
    if not 0 <= q < c.p:
        raise IndexOutOfRange(f"qubit {q} out of range for p={c.p}")
    norms = np.linalg.norm(others, axis=1)
    if np.any(np.abs(norms - 1) > nk.tolerance("director")):
        raise BadDirector(f"counter directors must be unit vectors, norms {norms}")
    rest = [r for r in range(c.p) if r != q]
    T = c.tensor
    # contract from the highest axis down so lower axis positions stay put
    for r, m in reversed(list(zip(rest, others))):
        T = np.tensordot(T, np.concatenate([[1.0], m]), axes=([r], [0]))
    den = T[0]
    if den <= nk.tolerance("condition") * 2 ** (c.p - 1):
        raise ZeroProbabilityCondition(f"conditioning counters fire with probability "
                                       f"{den / 2 ** (c.p - 1):.3e}")
    return T[1:] / den


def conditional_qubit_state(rho, q: int, others) -> DensityMatrix:
    """State of qubit ``q`` after the other qubits' counters all fire."""
    R = as_matrix(rho)
    p = n_qubits(R.shape[0])
    others = np.asarray(others, dtype=float).reshape(-1, 3)
    ops = []
    it = iter(others)
    for r in range(p):
        ops.append(np.eye(2) if r == q else qubit_counter_state(next(it)).projector)
    P = product_operator(ops)
    W = P @ R @ P
    prob = np.trace(W).real
    if prob <= nk.tolerance("condition"):
        raise ZeroProbabilityCondition(f"conditioning probability {prob:.3e}")
    L = _LETTERS
    rows = [L[p - 1 - r] for r in range(p)]
    cols = [L[p - 1 - r] if r != q else "Z" for r in range(p)]
    expr = "".join(reversed(rows)) + "".join(reversed(cols)) + "->" + rows[q] + "Z"
    red = np.einsum(expr, (W / prob).reshape((2,) * (2 * p)))
    return DensityMatrix(red)


# -- reconstruction ----------------------------------------------------------

def all_settings(p: int) -> list[str]:
    return ["".join(a) for a in itertools.product(AXES, repeat=p)]


def exact_tables(rho) -> dict[str, np.ndarray]:
    """Analytic counter distributions for all ``3^p`` axis settings."""
    p = n_qubits(as_matrix(rho).shape[0])
    return {s: counter_distribution(rho, s) for s in all_settings(p)}


def simulate_tables(rho, shots: int, seed) -> dict[str, FrequencyTable]:
    """Sampled frequency tables, one independent sub-stream per setting.

    Streams are assigned in lexicographic setting order, so the result is
    fixed by ``(rho, shots, seed)``.
    """
    if shots < 1:
        raise ShotCountZero(f"shots must be >= 1, got {shots}")
    R = as_matrix(rho)
    p = n_qubits(R.shape[0])
    settings = all_settings(p)
    streams = split_streams(seed, len(settings))
    out = {}
    for s, rng in zip(settings, streams):
        probs = counter_distribution(R, s)
        probs = probs / probs.sum()
        out[s] = FrequencyTable(rng.multinomial(shots, probs))
    return out


@dataclass(frozen=True, eq=False)
class Reconstruction:
    matrix: np.ndarray
    coefficients: PauliCoefficients
    min_eigenvalue: float
    repaired: bool

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.matrix)


def _parity_signs(p: int) -> np.ndarray:
    # signs[k, a] = prod_{q: a_q != 0} (-1)^{b_q(k)} over support patterns a in {0,1}^p
    k = np.arange(2 ** p)
    out = np.ones((2 ** p,) + (2,) * p)
    for a in itertools.product((0, 1), repeat=p):
        s = np.ones(2 ** p)
        for q in range(p):
            if a[q]:
                s = s * (1 - 2 * ((k >> q) & 1))
        out[(slice(None),) + a] = s
    return out


def reconstruct_state(tables: Mapping, psd_repair: bool = False) -> Reconstruction:
    """Linear inversion from counter statistics of all ``3^p`` axis settings.

    ``tables`` maps an axis string (character ``q`` is qubit ``q``) to a
    :class:`FrequencyTable` or to a probability vector of length ``2^p``.
    Each coefficient pools every setting whose axes agree on its support,
    weighted by shot count.
    """
    if not tables:
        raise MissingSetting("no settings supplied")
    p = len(next(iter(tables)))
    settings = all_settings(p)
    missing = [s for s in settings if s not in tables]
    if missing:
        raise MissingSetting(f"missing {len(missing)} of {len(settings)} settings, "
                             f"first: {missing[0]}")
    signs = _parity_signs(p)
    T = np.zeros((4,) * p)
    W = np.zeros((4,) * p)
    for s in settings:
        t = tables[s]
        if isinstance(t, FrequencyTable):
            if t.shots == 0:
                raise ShotCountZero(f"setting {s} has no registered shots")
            nu, weight = t.frequencies, float(t.shots)
        else:
            nu, weight = np.asarray(t, dtype=float), 1.0
        if len(nu) != 2 ** p:
            raise DimensionMismatch(f"setting {s}: {len(nu)} outcomes, expected {2 ** p}")
        # expectation of each sign pattern over this setting
        ev = np.tensordot(nu, signs, axes=([0], [0]))
        axis = [AXES.index(ch) + 1 for ch in s]
        for a in itertools.product((0, 1), repeat=p):
            idx = tuple(axis[q] if a[q] else 0 for q in range(p))
            T[idx] += weight * ev[a]
            W[idx] += weight
    T = T / W
    T[(0,) * p] = 1.0
    M = operator_from_coefficients(T)
    M = (M + M.conj().T) / 2
    w, V = np.linalg.eigh(M)
    repaired = False
    if psd_repair and w.min() < 0:
        w = np.clip(w, 0, None)
        w = w / w.sum()
        M = (V * w) @ V.conj().T
        T = pauli_coefficients(M).tensor
        repaired = True
    return Reconstruction(M, PauliCoefficients(T), float(w.min()), repaired)


# -- transformations ---------------------------------------------------------

def pair_partner(k: int, p: int) -> int:
    return 2 ** p - 1 - k


def max_entangling_generator(j, phi) -> np.ndarray:
    j = np.asarray(j, dtype=float).ravel()
    phi = np.asarray(phi, dtype=float).ravel()
    if len(j) != len(phi):
        raise LengthMismatch(f"{len(j)} amplitudes vs {len(phi)} phases")
    p = n_qubits(2 * len(j))
    J = np.zeros((2 ** p, 2 ** p), dtype=complex)
    for k in range(len(j)):
        kb = pair_partner(k, p)
        J[kb, k] = j[k] * np.exp(1j * phi[k])
        J[k, kb] = j[k] * np.exp(-1j * phi[k])
    return J


def max_entangling_unitary(j, phi) -> np.ndarray:
    """Rotation inside every pair ``(|k>, |2^p-1-k>)``, closed form.

    A pair with ``j_k = 0`` is left untouched (the limit of ``sin j / j``).
    """
    J = max_entangling_generator(j, phi)
    j = np.asarray(j, dtype=float).ravel()
    N = J.shape[0]
    p = n_qubits(N)
    U = np.zeros((N, N), dtype=complex)
    for k in range(len(j)):
        kb = pair_partner(k, p)
        c = np.cos(j[k])
        sinc = np.sinc(j[k] / np.pi)  # sin(j)/j, 1 at j = 0
        for a in (k, kb):
            U[a, a] = c
        U[kb, k] = 1j * sinc * J[kb, k]
        U[k, kb] = 1j * sinc * J[k, kb]
    return U


def is_product_unitary(U, tol=None) -> bool:
    """True when ``U`` factors into single-qubit unitaries."""
    U = np.asarray(U)
    p = n_qubits(U.shape[0])
    tol = nk.tolerance("commute") if tol is None else tol
    T = U.reshape((2,) * (2 * p))
    for q in range(p):
        r, c = p - 1 - q, 2 * p - 1 - q
        rest = [a for a in range(2 * p) if a not in (r, c)]
        mat = T.transpose([r, c] + rest).reshape(4, -1)
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv[1:].max(initial=0.0) > tol * sv[0]:
            return False
    return True


def classify_multiqubit_transform(U) -> TransformClass:
    U = nk.check_unitary(U)
    n_qubits(U.shape[0])
    if is_diagonal(U):
        return TransformClass.STABILIZER
    if is_product_unitary(U):
        return TransformClass.LOCAL
    return TransformClass.ENTANGLING


def generator_weights(U) -> dict[int, float]:
    """Squared weight of the principal generator's Pauli terms, by term order."""
    J = nk.generator_from_unitary(U)
    p = n_qubits(J.shape[0])
    T = _contract_pauli(J, p).real / 2 ** p
    out: dict[int, float] = {}
    for a in itertools.product(range(4), repeat=p):
        order = sum(1 for x in a if x)
        out[order] = out.get(order, 0.0) + float(T[a] ** 2)
    return out
