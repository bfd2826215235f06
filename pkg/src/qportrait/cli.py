"""Command-line front end: ``qportrait <verb> [options]``.

Verbs: ``portrait``, ``measure``, ``reconstruct``, ``classify``, ``reduction``.
Exit status is 0 on success, 2 for invalid input and 3 when a numerical
precondition fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import composite as co
from . import multiqubit as mq
from .errors import DimensionMismatch, NumericalPreconditionError, ParseError, ValidationError
from .io import (
    Layout,
    Setting,
    coefficient_report,
    fmt,
    read_matrix,
    read_settings,
    read_state,
    settings_text,
    write_state,
)
from .measurement import (
    MeasurementRecord,
    measure_series,
    measurement_entropy,
    reduction_measure,
)
from .qudit import (
    ResolutionOfIdentity,
    as_matrix,
    bloch_vector,
    portrait_distribution,
    qubit_portrait,
    resolution_of_identity,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def parse_roi(spec: str, dim: int, rho=None) -> ResolutionOfIdentity:
    """``computational``, ``fourier``, ``state`` (eigenbasis of ``rho``) or ``axes:<xyz...>``."""
    if spec == "computational":
        return ResolutionOfIdentity.computational(dim)
    if spec == "fourier":
        k = np.arange(dim)
        return ResolutionOfIdentity.from_vectors(np.exp(2j * np.pi * np.outer(k, k) / dim) / np.sqrt(dim))
    if spec == "state":
        if rho is None:
            raise ValidationError("roi 'state' needs --state", invariant="roi")
        return resolution_of_identity(as_matrix(rho))
    if spec.startswith("axes:"):
        axes = spec[5:]
        if 2 ** len(axes) != dim:
            raise DimensionMismatch(f"{len(axes)} axes do not fit dimension {dim}")
        return mq.counter_roi(axes)
    raise ValidationError(f"unknown roi spec {spec!r}", invariant="roi")


def _emit(lines, out) -> None:
    text = "".join(line + "\n" for line in lines)
    if out:
        Path(out).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)


def _load(args):
    rho, layout = read_state(args.state)
    if args.layout:
        given = Layout.parse(args.layout)
        if given.dim != rho.dim:
            raise DimensionMismatch(f"layout {given} does not match state dim {rho.dim}",
                                    invariant="layout")
        layout = given
    return rho, layout


def _bits(k: int, p: int) -> str:
    # character q is the bit of qubit q, matching the order of --axes
    return "".join(str((k >> q) & 1) for q in range(p))


def _perpendicular(d: np.ndarray) -> np.ndarray:
    ref = np.array([1.0, 0, 0]) if abs(d[0]) < 0.9 else np.array([0, 1.0, 0])
    e = ref - (ref @ d) * d
    return e / np.linalg.norm(e)


def cmd_portrait(args) -> int:
    rho, _ = _load(args)
    if args.sweep is not None:
        if rho.dim != 2:
            raise DimensionMismatch("a theta sweep needs a qubit state (dim 2)")
        d = bloch_vector(rho)
        n = np.linalg.norm(d)
        axis = d / n if n > 1e-12 else np.array([0, 0, 1.0])
        perp = _perpendicular(axis)
        lines = ["# theta p"]
        for theta in np.linspace(0.0, np.pi, args.sweep + 1):
            m = np.cos(theta) * axis + np.sin(theta) * perp
            lines.append(f"{fmt(theta)} {fmt(qubit_portrait(rho, m / np.linalg.norm(m)))}")
        _emit(lines, args.out)
        return EXIT_OK
    if args.axes:
        p = len(args.axes)
        if 2 ** p != rho.dim:
            raise DimensionMismatch(f"{p} axes do not fit dimension {rho.dim}")
        probs = mq.counter_distribution(rho, args.axes)
        lines = [f"# axes={args.axes}"]
        lines += [f"k={k} bits={_bits(k, p)} p={fmt(v)}" for k, v in enumerate(probs)]
    else:
        roi = parse_roi(args.roi or "computational", rho.dim, rho)
        probs = portrait_distribution(rho, roi)
        lines = [f"# roi={args.roi or 'computational'}"]
        lines += [f"k={k} p={fmt(v)}" for k, v in enumerate(probs)]
    _emit(lines, args.out)
    return EXIT_OK


def _setting_seeds(seed: int, n: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def _run_setting(rho, s: Setting, outdir: Path) -> list[str]:
    roi = mq.counter_roi(s.axes)
    res = measure_series(rho, roi, s.shots, np.random.default_rng(s.seed),
                         settings_id=f"axes:{s.axes}", seed=s.seed)
    res.record.save(outdir / f"{s.axes}.rec")
    return [f"axes={s.axes} " + " ".join(str(c) for c in res.table.counts)]


def cmd_measure(args) -> int:
    rho, _ = _load(args)
    if args.settings or args.axes == "all":
        if not args.out:
            raise ValidationError("a campaign needs --out <directory>", invariant="out")
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        if args.settings:
            settings = read_settings(args.settings)
        else:
            _require(args, "shots", "seed")
            p = mq.n_qubits(rho.dim)
            axes = mq.all_settings(p)
            settings = [Setting(a, args.shots, s)
                        for a, s in zip(axes, _setting_seeds(args.seed, len(axes)))]
        (outdir / "settings.txt").write_text(settings_text(settings), encoding="ascii")
        lines = []
        for s in settings:
            lines += _run_setting(rho, s, outdir)
        sys.stdout.write("".join(line + "\n" for line in lines))
        return EXIT_OK
    _require(args, "shots", "seed")
    spec = f"axes:{args.axes}" if args.axes else (args.roi or "computational")
    roi = parse_roi(spec, rho.dim, rho)
    res = measure_series(rho, roi, args.shots, np.random.default_rng(args.seed),
                         settings_id=spec, seed=args.seed)
    if args.out:
        res.record.save(args.out)
    lines = [f"# roi={spec} shots={args.shots} seed={args.seed}"]
    for k, (c, f) in enumerate(zip(res.table.counts, res.table.frequencies)):
        lines.append(f"k={k} count={c} freq={fmt(f)}")
    sys.stdout.write("".join(line + "\n" for line in lines))
    return EXIT_OK


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise ValidationError(f"--{name} is required for this command", invariant=name)


def _tables_from_records(directory: Path):
    files = sorted(directory.glob("*.rec"))
    if not files:
        raise ParseError("no *.rec record files found", str(directory))
    tables = {}
    for f in files:
        first = f.read_text(encoding="ascii").split("\n", 1)[0]
        roi = next((t[4:] for t in first.split() if t.startswith("roi=")), "")
        if not roi.startswith("axes:"):
            raise ParseError(f"record roi must be 'axes:<xyz...>', got {roi!r}", str(f), 1)
        axes = roi[5:]
        rec = MeasurementRecord.load(f, n_outcomes=2 ** len(axes))
        tables[axes] = rec.table()
    return tables


def cmd_reconstruct(args) -> int:
    truth = None
    layout = None
    if args.records:
        tables = _tables_from_records(Path(args.records))
        if args.state:
            truth, _ = _load(args)
    else:
        _require(args, "state")
        truth, layout = _load(args)
        if args.exact:
            tables = mq.exact_tables(truth)
        else:
            _require(args, "shots", "seed")
            tables = mq.simulate_tables(truth, args.shots, args.seed)
    est = mq.reconstruct_state(tables, psd_repair=args.psd_repair)
    p = est.coefficients.p
    if layout is None or layout.qubits is None:
        layout = Layout(qubits=p)
    ref = mq.pauli_coefficients(truth) if truth is not None else None
    lines = [coefficient_report(est.coefficients, ref).rstrip("\n")]
    lines.append(f"min_eigenvalue={fmt(est.min_eigenvalue)}")
    lines.append(f"psd_repaired={'yes' if est.repaired else 'no'}")
    if ref is not None:
        errs = np.abs(est.coefficients.vector() - ref.vector())
        lines.append(f"max_coefficient_error={fmt(errs.max())}")
        dev = np.abs(est.matrix - as_matrix(truth)).max()
        lines.append(f"max_entry_deviation={fmt(dev)}")
    if args.out:
        write_state(args.out, est.matrix, layout)
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _vec(v) -> str:
    return " ".join(fmt(x) for x in v)


def cmd_classify(args) -> int:
    lines = []
    if args.unitary:
        U = read_matrix(args.unitary)
        layout = Layout.parse(args.layout) if args.layout else None
        if layout is not None and layout.dim != U.shape[0]:
            raise DimensionMismatch(f"layout {layout} does not match unitary dim {U.shape[0]}")
        if layout is None or layout.qubits is not None:
            verdict = mq.classify_multiqubit_transform(U)
        else:
            verdict = co.classify_transform(U, layout.bipartite)
        lines.append(f"transform={verdict}")
    if args.state:
        rho, layout = _load(args)
        if rho.dim != 4 or (layout is not None and layout.bipartite is not None
                            and (layout.bipartite.n_l, layout.bipartite.n_s) != (2, 2)):
            raise DimensionMismatch(f"the covariance verdict needs a qubit pair, got dim {rho.dim}")
        v = co.classify_entanglement(rho)
        lines += [
            f"class={v.verdict}",
            f"covariance_rank={v.covariance_rank}",
            f"singular_values={_vec(v.singular_values)}",
            f"d0={_vec(v.d0)}",
            f"d1={_vec(v.d1)}",
        ]
    if not lines:
        raise ValidationError("classify needs --state and/or --unitary", invariant="input")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_reduction(args) -> int:
    rho, _ = _load(args)
    a = parse_roi(args.roi_a, rho.dim, rho)
    b = parse_roi(args.roi_b, rho.dim, rho)
    red = reduction_measure(a, b)
    ent = measurement_entropy(portrait_distribution(rho, b))
    lines = [
        f"M={fmt(red.value)}",
        f"nonzero_phases={red.nonzero_phases}",
        f"entropy={fmt(ent)}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", help="state file (JSON with dim, re, im, optional layout)")
    common.add_argument("--seed", type=int, help="integer RNG seed")
    common.add_argument("--shots", type=int, help="shots per series / setting")
    common.add_argument("--out", help="output path")
    common.add_argument("--layout", help="NLxNS or p=K")
    common.add_argument("--axes", help="counter axes, one of x/y/z per qubit (qubit 0 first)")

    parser = argparse.ArgumentParser(prog="qportrait", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("portrait", parents=[common], help="outcome probabilities")
    p.add_argument("--roi", help="computational | fourier | state | axes:<xyz...>")
    p.add_argument("--sweep", type=int, metavar="N",
                   help="qubit only: N+1 angles from the state's director to its antipode")
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("measure", parents=[common], help="simulate a measurement series")
    p.add_argument("--roi", help="computational | fourier | state | axes:<xyz...>")
    p.add_argument("--settings", help="settings file; writes one record per line into --out")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("reconstruct", parents=[common], help="linear-inversion tomography")
    p.add_argument("--records", help="directory of *.rec files covering all axis settings")
    p.add_argument("--exact", action="store_true", help="use analytic probabilities")
    p.add_argument("--psd-repair", action="store_true",
                   help="clip negative eigenvalues and renormalize")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("classify", parents=[common], help="entanglement / transform class")
    p.add_argument("--unitary", help="unitary matrix file (same layout as a state file)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("reduction", parents=[common], help="reduction measure and entropy")
    p.add_argument("--roi-a", required=True)
    p.add_argument("--roi-b", required=True)
    p.set_defaults(func=cmd_reduction)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        name = f"[{exc.invariant}] " if getattr(exc, "invariant", None) else ""
        print(f"qportrait: error: {name}{exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalPreconditionError as exc:
        print(f"qportrait: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
