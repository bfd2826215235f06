import json
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from qportrait import cli
from qportrait import multiqubit as mq
from qportrait import qudit as qd
from qportrait.composite import QUBIT_PAIR, entangling_unitary
from qportrait.io import Layout, fmt, parse_settings, read_state, state_text, write_state
from qportrait.errors import ParseError

GOLDEN = Path(__file__).parent / "golden"


def _ghz(p):
    v = np.zeros(2 ** p)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return np.outer(v, v)


@pytest.fixture
def states(tmp_path):
    paths = {}
    paths["bell"] = tmp_path / "bell.json"
    write_state(paths["bell"], _ghz(2), Layout.parse("2x2"))
    paths["ghz"] = tmp_path / "ghz.json"
    write_state(paths["ghz"], _ghz(3), Layout.parse("p=3"))
    paths["q06"] = tmp_path / "q06.json"
    write_state(paths["q06"], qd.qubit_density([0, 0, 0.6]).matrix)
    paths["eq"] = tmp_path / "eq.json"
    write_state(paths["eq"], np.eye(2) / 2)
    k = QUBIT_PAIR.ket
    paths["cc"] = tmp_path / "cc.json"
    write_state(paths["cc"], 0.5 * (np.outer(k(0, 1), k(0, 1)) + np.outer(k(1, 0), k(1, 0))))
    paths["zero"] = tmp_path / "zero.json"
    write_state(paths["zero"], np.diag([1.0, 0, 0, 0]))
    return paths


def run(capsys, *args):
    code = cli.main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def values(text, key):
    out = []
    for line in text.splitlines():
        for tok in line.split():
            if tok.startswith(key + "="):
                out.append(tok.split("=", 1)[1])
    return out


class TestFormatting:
    def test_fmt(self):
        assert fmt(0.5) == "5.00000000000e-01"
        assert fmt(-0.0) == "0.00000000000e+00"
        assert fmt(np.pi) == "3.14159265359e+00"

    def test_state_round_trip(self, tmp_path, rng):
        A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho = A @ A.conj().T
        rho /= np.trace(rho)
        write_state(tmp_path / "s.json", rho)
        back, layout = read_state(tmp_path / "s.json")
        assert layout is None
        assert np.max(np.abs(back.matrix - rho)) < 1e-11
        assert json.loads((tmp_path / "s.json").read_text())["dim"] == 3

    def test_settings_parser(self):
        s = parse_settings("axes=xz shots=10 seed=3\n# comment\n\naxes=zz shots=5 seed=4\n")
        assert [(x.axes, x.shots, x.seed) for x in s] == [("xz", 10, 3), ("zz", 5, 4)]
        with pytest.raises(ParseError) as err:
            parse_settings("axes=xz shots=10 seed=3\naxes=xq shots=1 seed=1\n", "set.txt")
        assert err.value.line == 2


class TestPortrait:
    def test_equilibrium_sweep(self, capsys, states):
        code, out, _ = run(capsys, "portrait", "--state", states["eq"], "--sweep", 8)
        assert code == 0
        assert set(line.split()[1] for line in out.splitlines()[1:]) == {fmt(0.5)}

    def test_sweep_formula(self, capsys, states):
        code, out, _ = run(capsys, "portrait", "--state", states["q06"], "--sweep", 12)
        rows = [tuple(map(float, line.split())) for line in out.splitlines()[1:]]
        assert rows[0] == (0.0, 0.8)
        for theta, p in rows:
            assert p == pytest.approx(0.5 + 0.3 * np.cos(theta), abs=1e-11)

    def test_bell_axes(self, capsys, states):
        code, out, _ = run(capsys, "portrait", "--state", states["bell"], "--axes", "zz")
        assert code == 0
        assert [float(v) for v in values(out, "p")] == [0.5, 0, 0, 0.5]
        assert values(out, "bits") == ["00", "10", "01", "11"]

    def test_roi_spec(self, capsys, states):
        code, out, _ = run(capsys, "portrait", "--state", states["q06"], "--roi", "state")
        assert [float(v) for v in values(out, "p")] == pytest.approx([0.8, 0.2])

    def test_dimension_mismatch(self, capsys, states):
        code, _, err = run(capsys, "portrait", "--state", states["bell"], "--axes", "zzz")
        assert code == 2 and "error" in err

    def test_golden(self, capsys, states):
        _, a, _ = run(capsys, "portrait", "--state", states["ghz"], "--axes", "xxx")
        _, b, _ = run(capsys, "portrait", "--state", states["q06"], "--sweep", 4)
        assert a + b == (GOLDEN / "portrait.txt").read_text()


class TestMeasure:
    def test_bell_frequencies(self, capsys, states, tmp_path):
        K = 10_000
        rec = tmp_path / "bell.rec"
        code, out, _ = run(capsys, "measure", "--state", states["bell"], "--axes", "zz",
                           "--shots", K, "--seed", 42, "--out", rec)
        assert code == 0
        freqs = [float(v) for v in values(out, "freq")]
        for f, p in zip(freqs, [0.5, 0, 0, 0.5]):
            assert abs(f - p) <= 4 * np.sqrt(p * (1 - p) / K)
        first = rec.read_bytes()
        run(capsys, "measure", "--state", states["bell"], "--axes", "zz",
            "--shots", K, "--seed", 42, "--out", rec)
        assert rec.read_bytes() == first

    def test_zero_shots(self, capsys, states):
        code, _, err = run(capsys, "measure", "--state", states["bell"], "--axes", "zz",
                           "--shots", 0, "--seed", 1)
        assert code == 2

    def test_missing_seed(self, capsys, states):
        code, _, err = run(capsys, "measure", "--state", states["bell"], "--shots", 10)
        assert code == 2 and "seed" in err

    def test_eigenstate(self, capsys, states, tmp_path):
        rec = tmp_path / "z.rec"
        code, out, _ = run(capsys, "measure", "--state", states["zero"], "--roi", "computational",
                           "--shots", 50, "--seed", 5, "--out", rec)
        assert values(out, "count") == ["50", "0", "0", "0"]
        assert rec.read_text().splitlines()[1:] == ["0"] * 50

    def test_settings_file(self, capsys, states, tmp_path):
        settings = tmp_path / "settings.txt"
        settings.write_text("".join(f"axes={a} shots=300 seed={i}\n"
                                    for i, a in enumerate(mq.all_settings(2))))
        out_dir = tmp_path / "camp"
        code, out, _ = run(capsys, "measure", "--state", states["bell"], "--settings", settings,
                           "--out", out_dir)
        assert code == 0
        assert len(list(out_dir.glob("*.rec"))) == 9
        code, out, _ = run(capsys, "reconstruct", "--records", out_dir, "--state", states["bell"])
        assert code == 0
        assert float(values(out, "max_coefficient_error")[0]) < 0.3


class TestReconstruct:
    def test_exact(self, capsys, states, tmp_path):
        est = tmp_path / "est.json"
        code, out, _ = run(capsys, "reconstruct", "--state", states["ghz"], "--exact", "--out", est)
        assert code == 0
        assert float(values(out, "max_entry_deviation")[0]) < 1e-10
        assert len(values(out, "S")) == 63
        back, layout = read_state(est)
        assert layout.qubits == 3

    def test_sampled_ghz(self, capsys, states):
        K = 100_000
        code, out, _ = run(capsys, "reconstruct", "--state", states["ghz"], "--shots", K, "--seed", 42)
        assert code == 0
        assert float(values(out, "max_coefficient_error")[0]) <= 5 / np.sqrt(K)

    def test_report_order(self, capsys, states):
        _, out, _ = run(capsys, "reconstruct", "--state", states["bell"], "--exact")
        labels = values(out, "S")
        assert labels[:3] == ["0:x", "0:y", "0:z"] and labels[-1] == "0:z,1:z"

    def test_corrupt_record(self, capsys, states, tmp_path):
        d = tmp_path / "recs"
        run(capsys, "measure", "--state", states["bell"], "--axes", "all", "--shots", 20,
            "--seed", 1, "--out", d)
        bad = d / "xy.rec"
        lines = bad.read_text().splitlines()
        lines[5] = "oops"
        bad.write_text("\n".join(lines) + "\n")
        code, _, err = run(capsys, "reconstruct", "--records", d)
        assert code == 2
        assert "xy.rec:6" in err

    def test_missing_setting(self, capsys, states, tmp_path):
        d = tmp_path / "recs"
        run(capsys, "measure", "--state", states["bell"], "--axes", "all", "--shots", 20,
            "--seed", 1, "--out", d)
        (d / "zz.rec").unlink()
        code, _, err = run(capsys, "reconstruct", "--records", d)
        assert code == 2 and "missing" in err

    def test_psd_repair_flag(self, capsys, states):
        _, out, _ = run(capsys, "reconstruct", "--state", states["ghz"], "--shots", 200,
                        "--seed", 42, "--psd-repair")
        assert values(out, "psd_repaired") == ["yes"]
        assert float(values(out, "min_eigenvalue")[0]) >= 0


class TestClassify:
    @pytest.mark.parametrize("name, verdict, rank", [
        ("bell", "TotalEntanglement", "3"),
        ("zero", "Separable", "0"),
        ("cc", "ClassicallyCorrelated", "1"),
    ])
    def test_states(self, capsys, states, name, verdict, rank):
        code, out, _ = run(capsys, "classify", "--state", states[name])
        assert code == 0
        assert values(out, "class") == [verdict]
        assert values(out, "covariance_rank") == [rank]

    def test_wrong_dimension(self, capsys, states):
        code, _, _ = run(capsys, "classify", "--state", states["ghz"])
        assert code == 2

    def test_unitary(self, capsys, tmp_path):
        path = tmp_path / "u.json"
        path.write_text(state_text(entangling_unitary(np.pi / 4)))
        code, out, _ = run(capsys, "classify", "--unitary", path, "--layout", "2x2")
        assert values(out, "transform") == ["Entangling"]
        local = mq.product_operator([expm(0.3j * qd.SIGMA_X)] * 3)
        path.write_text(state_text(local))
        code, out, _ = run(capsys, "classify", "--unitary", path, "--layout", "p=3")
        assert values(out, "transform") == ["Local"]
        path.write_text(state_text(np.diag([1.0, 2.0])))
        code, _, _ = run(capsys, "classify", "--unitary", path)
        assert code == 2


class TestReduction:
    def test_identical(self, capsys, states):
        _, out, _ = run(capsys, "reduction", "--state", states["q06"], "--roi-a", "axes:z",
                        "--roi-b", "axes:z")
        assert values(out, "M") == [fmt(0.0)]

    def test_z_to_x(self, capsys, states):
        _, out, _ = run(capsys, "reduction", "--state", states["q06"], "--roi-a", "axes:z",
                        "--roi-b", "axes:x")
        assert float(values(out, "M")[0]) == pytest.approx(np.pi / np.sqrt(8), abs=1e-10)
        assert values(out, "nonzero_phases") == ["2"]
        assert float(values(out, "entropy")[0]) == pytest.approx(1.0)

    def test_entropy_column(self, capsys, states):
        from qportrait.measurement import binary_entropy

        _, out, _ = run(capsys, "reduction", "--state", states["q06"], "--roi-a", "axes:x",
                        "--roi-b", "computational")
        assert values(out, "entropy") == [fmt(binary_entropy(0.8))]


class TestValidation:
    def test_named_invariant(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}))
        code, _, err = run(capsys, "portrait", "--state", path)
        assert code == 2 and "[unit_trace]" in err

    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"dim": 2,\n "re": [[1, 0], [0, 0]]\n "im": []}')
        code, _, err = run(capsys, "portrait", "--state", path)
        assert code == 2 and "bad.json:3" in err

    def test_layout_mismatch(self, capsys, states):
        code, _, err = run(capsys, "portrait", "--state", states["bell"], "--layout", "p=3")
        assert code == 2 and "layout" in err

    def test_numerical_exit_code(self, capsys, monkeypatch, states):
        from qportrait.errors import ZeroProbabilityOutcome

        def boom(args):
            raise ZeroProbabilityOutcome("forced")

        monkeypatch.setattr(cli, "cmd_portrait", boom)
        code, _, err = run(capsys, "portrait", "--state", states["eq"])
        assert code == 3 and "numerical" in err

    def test_tolerance_scale(self, capsys, monkeypatch, tmp_path):
        path = tmp_path / "loose.json"
        path.write_text(json.dumps({"dim": 2, "re": [[0.5 + 5e-9, 0], [0, 0.5]],
                                    "im": [[0, 0], [0, 0]]}))
        code, _, _ = run(capsys, "portrait", "--state", path)
        assert code == 2
        monkeypatch.setenv("QP_TOLERANCE_SCALE", "1000")
        code, _, _ = run(capsys, "portrait", "--state", path)
        assert code == 0
