"""Exit-code contract and output determinism of the command-line driver."""

import json
import shutil

from clhavoc.cli import main

from conftest import FIXTURES


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_dumps_canonical_text(capsys):
    code, out, err = run(capsys, "parse", str(FIXTURES / "ring.clsys"))
    assert code == 0
    assert "sid {" in out and "behavior {" in out


def test_parse_error_exit_3(tmp_path, capsys):
    bad = tmp_path / "broken.clsys"
    bad.write_text("behavior { ports in; states q; } sid { A() <- <x.out y.in>; }")
    code, out, err = run(capsys, "parse", str(bad))
    assert code == 3
    assert "expected" in err


def test_missing_file_exit_3(capsys):
    code, _, err = run(capsys, "parse", "no_such_file.clsys")
    assert code == 3


def test_unknown_predicate_exit_3(capsys):
    code, _, err = run(capsys, "check", str(FIXTURES / "ring.clsys"),
                       "--pred", "Nope", "--depth", "2")
    assert code == 3
    assert "Nope" in err


def test_analyze_table(capsys):
    code, out, _ = run(capsys, "analyze", str(FIXTURES / "ring.clsys"))
    assert code == 0
    assert "pcr=n" in out
    assert "metrics:" in out


def test_reduce_gate_exit_2(tmp_path, capsys):
    src = tmp_path / "ring.clsys"
    shutil.copy(FIXTURES / "ring.clsys", src)
    code, out, err = run(capsys, "reduce", str(src), "--pred", "Ring_1_1")
    assert code == 2
    assert "TightnessNotEstablished" in err


def test_reduce_writes_outputs(tmp_path, capsys):
    src = tmp_path / "ring.clsys"
    shutil.copy(FIXTURES / "ring.clsys", src)
    code, out, err = run(capsys, "reduce", str(src), "--pred", "Ring_1_1",
                         "--assume-tight")
    assert code == 0
    reduced = tmp_path / "ring.reduced.clsys"
    manifest = tmp_path / "ring.manifest.json"
    assert reduced.exists() and manifest.exists()
    data = json.loads(manifest.read_text())
    assert data["predicate"] == "Ring_1_1"
    assert data["tightness"] == "assumed"
    code2, out2, _ = run(capsys, "parse", str(reduced))
    assert code2 == 0


def test_reduce_byte_identical_across_runs(tmp_path, capsys):
    texts = []
    for i in range(2):
        d = tmp_path / f"run{i}"
        d.mkdir()
        src = d / "ring.clsys"
        shutil.copy(FIXTURES / "ring.clsys", src)
        code, *_ = run(capsys, "reduce", str(src), "--pred", "Ring_1_1",
                       "--assume-tight")
        assert code == 0
        texts.append(((d / "ring.reduced.clsys").read_text(),
                      (d / "ring.manifest.json").read_text()))
    assert texts[0] == texts[1]


def test_check_ring_positive(capsys, tmp_path):
    src = tmp_path / "ring.clsys"
    shutil.copy(FIXTURES / "ring.clsys", src)
    code, out, _ = run(capsys, "check", str(src), "--pred", "Ring_1_1",
                       "--depth", "4", "--assume-tight")
    assert code == 0
    assert "verdict: InvariantUpToDepth(4)" in out


def test_check_bad_negative(capsys, tmp_path):
    src = tmp_path / "bad.clsys"
    shutil.copy(FIXTURES / "bad.clsys", src)
    code, out, _ = run(capsys, "check", str(src), "--pred", "TH",
                       "--depth", "2", "--assume-tight")
    assert code == 1
    assert "verdict: Counterexample" in out


def test_check_gated_unknown(capsys, tmp_path):
    src = tmp_path / "ring.clsys"
    shutil.copy(FIXTURES / "ring.clsys", src)
    code, out, err = run(capsys, "check", str(src), "--pred", "Ring_1_1",
                         "--depth", "2")
    assert code == 2
    assert "verdict: Unknown" in out


def test_simulate_ring3(capsys):
    code, out, _ = run(capsys, "simulate", str(FIXTURES / "ring.clsys"),
                       "--config", "ring3")
    assert code == 0
    assert out.startswith("reachable: 3")


def test_simulate_loose_config(capsys):
    code, out, _ = run(capsys, "simulate", str(FIXTURES / "misc.clsys"),
                       "--config", "dangling")
    assert code == 0
    assert out.startswith("reachable: 2")
    assert "ghost: idle" in out


def test_simulate_unknown_config(capsys):
    code, _, err = run(capsys, "simulate", str(FIXTURES / "misc.clsys"),
                       "--config", "nope")
    assert code == 3


def test_oracle_ring(capsys, tmp_path):
    src = tmp_path / "ring.clsys"
    shutil.copy(FIXTURES / "ring.clsys", src)
    code, out, _ = run(capsys, "oracle", str(src), "--pred", "Ring_1_1",
                       "--depth", "3", "--assume-tight")
    assert code == 0
    assert "direct: InvariantUpToDepth(3)" in out
    assert "cross-validation: PASS" in out


def test_oracle_bad_counterexample(capsys, tmp_path):
    src = tmp_path / "bad.clsys"
    shutil.copy(FIXTURES / "bad.clsys", src)
    code, out, _ = run(capsys, "oracle", str(src), "--pred", "TH",
                       "--depth", "1", "--assume-tight")
    assert code == 1
    assert "direct: Counterexample" in out


def test_trace_transducer_emits_witnesses(capsys, tmp_path):
    src = tmp_path / "bad.clsys"
    shutil.copy(FIXTURES / "bad.clsys", src)
    code, out, err = run(capsys, "reduce", str(src), "--pred", "TH",
                         "--assume-tight", "--trace-transducer")
    assert code == 0
    assert "trace:" in err
