"""Flat-file formats: state files, settings files and text tables.

All floats are written with :func:`fmt`, so output bytes depend only on the
numbers, never on locale or platform repr.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .composite import BipartiteLayout
from .errors import DimensionMismatch, ParseError, ValidationError
from .qudit import DensityMatrix


def fmt(x: float) -> str:
    """Canonical 12-significant-digit scientific form; ``-0`` prints as ``0``."""
    x = float(x)
    if x == 0.0:
        x = 0.0
    return format(x, ".11e")


@dataclass(frozen=True)
class Layout:
    """Either a bipartite split ``n_l x n_s`` or a register of ``p`` qubits."""

    bipartite: BipartiteLayout | None = None
    qubits: int | None = None

    @classmethod
    def parse(cls, value) -> "Layout":
        if isinstance(value, int):
            return cls(qubits=value)
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return cls(bipartite=BipartiteLayout(int(value[0]), int(value[1])))
        if isinstance(value, dict) and "p" in value:
            return cls(qubits=int(value["p"]))
        if isinstance(value, str):
            text = value.strip().lower()
            if text.startswith("p="):
                try:
                    return cls(qubits=int(text[2:]))
                except ValueError:
                    pass
            else:
                return cls(bipartite=BipartiteLayout.parse(text))
        raise ValidationError(f"layout must be 'NLxNS' or 'p=K', got {value!r}",
                              invariant="layout")

    @property
    def dim(self) -> int:
        return self.bipartite.dim if self.bipartite else 2 ** self.qubits

    def to_json(self):
        if self.bipartite:
            return [self.bipartite.n_l, self.bipartite.n_s]
        return self.qubits

    def __str__(self):
        if self.bipartite:
            return f"{self.bipartite.n_l}x{self.bipartite.n_s}"
        return f"p={self.qubits}"


def _load_json(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, str(path), exc.lineno) from None


def _matrix_from(obj, path, what: str) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError(f"{what} file must hold a JSON object", str(path), 1)
    for key in ("dim", "re", "im"):
        if key not in obj:
            raise ParseError(f"missing field '{key}'", str(path), invariant="fields")
    try:
        dim = int(obj["dim"])
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"non-numeric matrix entry: {exc}", str(path), invariant="numeric") from None
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise DimensionMismatch(f"{path}: re/im must be {dim}x{dim}, got {re.shape} and {im.shape}",
                                invariant="shape")
    return re + 1j * im


def read_matrix(path) -> np.ndarray:
    """Any square complex matrix in state-file layout (used for unitaries)."""
    return _matrix_from(_load_json(path), path, "matrix")


def read_state(path) -> tuple[DensityMatrix, Layout | None]:
    obj = _load_json(path)
    M = _matrix_from(obj, path, "state")
    layout = None
    if obj.get("layout") is not None:
        layout = Layout.parse(obj["layout"])
        if layout.dim != M.shape[0]:
            raise DimensionMismatch(f"{path}: layout {layout} does not match dim {M.shape[0]}",
                                    invariant="layout")
    return DensityMatrix(M), layout


def state_text(M, layout: Layout | None = None) -> str:
    M = np.asarray(M, dtype=complex)

    def rows(A):
        return "[\n" + ",\n".join("    [" + ", ".join(fmt(x) for x in r) + "]" for r in A) + "\n  ]"

    parts = [f'  "dim": {M.shape[0]}']
    if layout is not None:
        parts.append(f'  "layout": {json.dumps(layout.to_json())}')
    parts.append(f'  "re": {rows(M.real)}')
    parts.append(f'  "im": {rows(M.imag)}')
    return "{\n" + ",\n".join(parts) + "\n}\n"


def write_state(path, M, layout: Layout | None = None) -> None:
    Path(path).write_text(state_text(M, layout), encoding="ascii")


@dataclass(frozen=True)
class Setting:
    axes: str
    shots: int
    seed: int


def parse_settings(text: str, source="<string>") -> list[Setting]:
    """Lines ``axes=<xyz...> shots=<K> seed=<s>``; ``#`` starts a comment."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = {}
        for tok in line.split():
            if "=" not in tok:
                raise ParseError(f"expected key=value, got {tok!r}", source, lineno)
            k, v = tok.split("=", 1)
            fields[k] = v
        try:
            axes = fields["axes"].lower()
            shots, seed = int(fields["shots"]), int(fields["seed"])
        except KeyError as exc:
            raise ParseError(f"missing {exc.args[0]}=", source, lineno) from None
        except ValueError as exc:
            raise ParseError(str(exc), source, lineno) from None
        if not axes or set(axes) - set("xyz"):
            raise ParseError(f"axes must use x, y, z only: {axes!r}", source, lineno)
        out.append(Setting(axes, shots, seed))
    return out


def read_settings(path) -> list[Setting]:
    path = Path(path)
    return parse_settings(path.read_text(encoding="ascii"), str(path))


def settings_text(settings) -> str:
    return "".join(f"axes={s.axes} shots={s.shots} seed={s.seed}\n" for s in settings)


def coefficient_report(coeffs, truth=None) -> str:
    """``S=<qubit:axis,...> d=<value>`` lines, optionally with ``err=`` against ``truth``."""
    lines = []
    ref = dict(truth.items()) if truth is not None else None
    for label, value in coeffs.items():
        line = f"S={label} d={fmt(value)}"
        if ref is not None:
            line += f" err={fmt(abs(value - ref[label]))}"
        lines.append(line)
    return "\n".join(lines) + "\n"
