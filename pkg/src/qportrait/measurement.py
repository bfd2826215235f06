"""Acts and series of projective measurement, reduction and entropy.

Randomness is always an explicit argument: pass a ``numpy.random.Generator``
or an integer seed.  A series of ``K`` acts draws ``K`` uniforms from the
stream, so a series equals ``K`` consecutive single acts on the same stream.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import numkernel as nk
from .errors import (
    CoarseProjector,
    DimensionMismatch,
    NotNormalized,
    ParseError,
    ShotCountZero,
    ValidationError,
    ZeroProbabilityOutcome,
)
from .qudit import (
    DensityMatrix,
    ResolutionOfIdentity,
    as_matrix,
    portrait_distribution,
    resolution_of_identity,
    transform_matrix,
)


def make_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def split_streams(seed, n: int) -> list[np.random.Generator]:
    """Independent sub-streams derived from one seed (stable for a given ``n``)."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in ss.spawn(n)]


def _sample(probs: np.ndarray, rng: np.random.Generator, size=None):
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(probs) - 1)


@dataclass(frozen=True, eq=False)
class FrequencyTable:
    """Outcome counts of a series; missed shots are counted but excluded."""

    counts: np.ndarray
    misses: int = 0

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 1 or np.any(c < 0):
            raise ValidationError("counts must be a 1-d array of non-negative integers")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    @property
    def exact_frequencies(self) -> list[Fraction]:
        K = self.shots
        if K == 0:
            raise ShotCountZero("frequency table has no registered shots")
        return [Fraction(int(c), K) for c in self.counts]

    @property
    def frequencies(self) -> np.ndarray:
        K = self.shots
        if K == 0:
            raise ShotCountZero("frequency table has no registered shots")
        return self.counts / K

    def __add__(self, other: "FrequencyTable") -> "FrequencyTable":
        if len(self.counts) != len(other.counts):
            raise DimensionMismatch("frequency tables of different length")
        return FrequencyTable(self.counts + other.counts, self.misses + other.misses)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Outcome indices of a series, in order.  ``-1`` marks a missed shot."""

    outcomes: np.ndarray
    settings_id: str
    n_outcomes: int
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        o = np.asarray(self.outcomes, dtype=np.int64).ravel()
        if np.any(o >= self.n_outcomes) or np.any(o < -1):
            raise ValidationError("outcome index out of range", invariant="outcome_range")
        o.setflags(write=False)
        object.__setattr__(self, "outcomes", o)

    @property
    def shots(self) -> int:
        return len(self.outcomes)

    def table(self) -> FrequencyTable:
        hits = self.outcomes[self.outcomes >= 0]
        counts = np.bincount(hits, minlength=self.n_outcomes)
        return FrequencyTable(counts, int(np.sum(self.outcomes < 0)))

    def to_text(self) -> str:
        buf = io.StringIO()
        seed = "none" if self.seed is None else str(self.seed)
        buf.write(f"# roi={self.settings_id} shots={self.shots} seed={seed}\n")
        for k in self.outcomes:
            buf.write("miss\n" if k < 0 else f"{k}\n")
        return buf.getvalue()

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="ascii")

    @classmethod
    def from_text(cls, text: str, source="<string>", n_outcomes=None) -> "MeasurementRecord":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ParseError("missing '# roi=... shots=... seed=...' header", source, 1)
        header = {}
        for tok in lines[0][1:].split():
            if "=" not in tok:
                raise ParseError(f"bad header token {tok!r}", source, 1)
            key, val = tok.split("=", 1)
            header[key] = val
        for key in ("roi", "shots", "seed"):
            if key not in header:
                raise ParseError(f"header lacks '{key}='", source, 1)
        try:
            shots = int(header["shots"])
            seed = None if header["seed"] == "none" else int(header["seed"])
            if "outcomes" in header:
                n_outcomes = int(header["outcomes"])
        except ValueError as exc:
            raise ParseError(f"bad header value: {exc}", source, 1) from None
        outcomes = []
        for lineno, line in enumerate(lines[1:], start=2):
            s = line.strip()
            if not s:
                continue
            if s == "miss":
                outcomes.append(-1)
                continue
            try:
                k = int(s)
            except ValueError:
                raise ParseError(f"expected an outcome index, got {s!r}", source, lineno) from None
            if k < 0 or (n_outcomes is not None and k >= n_outcomes):
                raise ParseError(f"outcome {k} out of range", source, lineno)
            outcomes.append(k)
        if len(outcomes) != shots:
            raise ParseError(f"header says shots={shots} but {len(outcomes)} outcomes follow",
                             source, len(lines))
        if n_outcomes is None:
            n_outcomes = max(outcomes, default=-1) + 1
        return cls(np.array(outcomes, dtype=np.int64), header["roi"], n_outcomes, seed)

    @classmethod
    def load(cls, path, n_outcomes=None) -> "MeasurementRecord":
        path = Path(path)
        return cls.from_text(path.read_text(encoding="ascii"), str(path), n_outcomes)


def _roi_for(A) -> ResolutionOfIdentity:
    if isinstance(A, ResolutionOfIdentity):
        return A
    return resolution_of_identity(A)


def _post_state(R: np.ndarray, P: np.ndarray, pk: float, rank_one: bool) -> DensityMatrix:
    if rank_one:
        return DensityMatrix(P)
    return DensityMatrix(P @ R @ P / pk)


def measure_act(rho, roi: ResolutionOfIdentity, rng=None):
    """One act: sample an outcome by the Born rule and apply the Lueders update.

    Returns ``(index, post_state)``.
    """
    R = as_matrix(rho)
    probs = portrait_distribution(R, roi)
    k = int(_sample(probs, make_rng(rng)))
    if probs[k] < 1e-15:
        raise ZeroProbabilityOutcome(f"sampled outcome {k} has probability {probs[k]:.3e}")
    P = roi.projectors[k]
    return k, _post_state(R, P, probs[k], roi.ranks[k] == 1)


def post_measurement_states(rho, roi: ResolutionOfIdentity):
    """All Lueders branches ``(p_k, rho_k)``; ``rho_k`` is ``None`` when ``p_k`` vanishes."""
    R = as_matrix(rho)
    probs = portrait_distribution(R, roi)
    out = []
    for k, P in enumerate(roi.projectors):
        if probs[k] < 1e-15:
            out.append((probs[k], None))
        else:
            out.append((probs[k], _post_state(R, P, probs[k], roi.ranks[k] == 1)))
    return out


@dataclass(frozen=True, eq=False)
class SeriesResult:
    record: MeasurementRecord
    table: FrequencyTable
    averaged: DensityMatrix

    def __iter__(self):
        return iter((self.record, self.table, self.averaged))


def averaged_matrix(table: FrequencyTable, roi: ResolutionOfIdentity) -> DensityMatrix:
    nu = table.frequencies
    return DensityMatrix(sum(f * P for f, P in zip(nu, roi.projectors)))


def measure_series(rho, roi: ResolutionOfIdentity, shots: int, rng=None,
                   settings_id="roi", seed=None) -> SeriesResult:
    """``shots`` independent acts on fresh copies of ``rho``.

    ``seed`` is only recorded in the record header; pass the stream via ``rng``
    (an int ``rng`` is used as both).
    """
    if shots < 1:
        raise ShotCountZero(f"shots must be >= 1, got {shots}")
    if seed is None and isinstance(rng, (int, np.integer)):
        seed = int(rng)
    probs = portrait_distribution(as_matrix(rho), roi)
    idx = _sample(probs, make_rng(rng), shots)
    if np.any(probs[idx] < 1e-15):
        raise ZeroProbabilityOutcome("sampled an outcome of vanishing probability")
    record = MeasurementRecord(idx, settings_id, len(roi), seed)
    table = record.table()
    return SeriesResult(record, table, averaged_matrix(table, roi))


def measure_series_partitioned(rho, roi: ResolutionOfIdentity, shots: int, seed: int,
                               parts: int, max_workers=None) -> FrequencyTable:
    """Split a series over ``parts`` independent sub-streams and merge counts.

    The result depends only on ``(seed, parts)``, never on scheduling.
    """
    if shots < 1:
        raise ShotCountZero(f"shots must be >= 1, got {shots}")
    sizes = [shots // parts + (1 if i < shots % parts else 0) for i in range(parts)]
    streams = split_streams(seed, parts)
    probs = portrait_distribution(as_matrix(rho), roi)

    def run(i):
        if sizes[i] == 0:
            return FrequencyTable(np.zeros(len(roi), dtype=np.int64))
        idx = _sample(probs, streams[i], sizes[i])
        return FrequencyTable(np.bincount(idx, minlength=len(roi)))

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        tables = list(pool.map(run, range(parts)))
    total = tables[0]
    for t in tables[1:]:
        total = total + t
    return total


def reduced_density(rho, A) -> DensityMatrix:
    """``sum_k p_k P_k[A]``: expectation of the series-averaged matrix."""
    roi = _roi_for(A)
    probs = portrait_distribution(as_matrix(rho), roi)
    return DensityMatrix(sum(p * P for p, P in zip(probs, roi.projectors)))


@dataclass(frozen=True)
class ReductionMeasure:
    """Generator norm of the transform between two resolutions of identity."""

    value: float
    nonzero_phases: int
    phases: tuple

    def __float__(self):
        return self.value


def reduction_measure(source: ResolutionOfIdentity, target: ResolutionOfIdentity) -> ReductionMeasure:
    """``sqrt(sum phi_n^2)`` over the trace-fixed eigenphases of the transform matrix.

    The value depends on the principal branch and on the phase convention of
    :func:`qportrait.qudit.transform_matrix`; it is a pseudo-metric on pairs
    of resolutions, not a metric.
    """
    if not (source.is_rank_one and target.is_rank_one):
        raise CoarseProjector("reduction measure needs rank-one resolutions of identity")
    U = transform_matrix(source, target)
    # equal resolutions give U = I up to rounding of their stored vectors
    if nk.max_abs(U - np.eye(U.shape[0])) <= 1e-12:
        phases = np.zeros(U.shape[0])
    else:
        phases, _ = nk.unitary_eigenphases(U)
        phases = np.sort(phases)[::-1]
    value = float(np.sqrt(np.sum(phases ** 2)))
    return ReductionMeasure(value, int(np.sum(np.abs(phases) > 1e-9)), tuple(phases.tolist()))


def measurement_entropy(p) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-9:
        raise NotNormalized(f"not a probability vector (sum={p.sum()!r}, min={p.min()!r})")
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def binary_entropy(x: float) -> float:
    return measurement_entropy([x, 1 - x])


def state_entropy(rho) -> float:
    """Entropy of the eigenvalue distribution of ``rho`` (von Neumann, bits)."""
    w = np.linalg.eigvalsh(as_matrix(rho))
    w = np.clip(w, 0, None)
    return measurement_entropy(w / w.sum())
