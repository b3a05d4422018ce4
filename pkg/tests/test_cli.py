from __future__ import annotations

import numpy as np
import pytest

from mnpboot import io
from mnpboot.cli import KEYS, build_parser, main
from mnpboot.spectra import sample_covariance


def test_help_lists_keys(capsys):
    for cmd, keys in KEYS.items():
        with pytest.raises(SystemExit):
            build_parser().parse_args([cmd, "--help"])
        out = capsys.readouterr().out
        for k in keys:
            assert "--" + k.replace("_", "-") in out


def test_simulate_shape_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["simulate", "--model", "two-point", "--n", "100", "--p", "50", "--seed", "3",
                     "--out", str(path)]) == 0
    assert io.read_matrix_csv(a).shape == (100, 50)
    assert a.read_bytes() == b.read_bytes()
    cfg = io.read_config(str(a) + ".config")
    assert cfg["seed"] == "3" and cfg["model"] == "two-point"


def test_simulate_ma_moment(tmp_path):
    path = tmp_path / "ma.csv"
    assert main(["simulate", "--model", "ma:0.05:10", "--n", "20000", "--p", "30", "--seed", "1",
                 "--out", str(path)]) == 0
    off = np.diag(sample_covariance(io.read_matrix_csv(path)), 1)
    # 5 sigma band for the mean of 10 entries with sd about 1/sqrt(n)
    assert abs(off[:10].mean() - 0.05) < 5 / np.sqrt(20000 * 10)


def test_exit_codes(tmp_path, capsys):
    assert main(["simulate", "--model", "banana", "--seed", "1", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["bootstrap", "--n", "100", "--p", "10", "--m", "5", "--seed", "1",
                 "--out", str(tmp_path / "r.jsonl")]) == 2
    assert "m too small" in capsys.readouterr().err
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n")
    assert main(["simulate", "--config", str(cfg), "--seed", "1", "--out", str(tmp_path / "y.csv")]) == 2
    with pytest.raises(SystemExit) as e:
        main(["test", "--projection-resample", "sometimes"])
    assert e.value.code == 2


def test_numerical_exit_code(tmp_path, monkeypatch):
    import mnpboot.cli as cli
    from mnpboot.errors import NumericalError

    def boom(cfg):
        raise NumericalError("no convergence", 0.5)

    monkeypatch.setitem(cli.COMMANDS, "simulate", boom)
    assert main(["simulate", "--seed", "1", "--out", str(tmp_path / "z.csv")]) == 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 40\np = 8\nmodel = identity\nseed = 9\n")
    out = tmp_path / "d.csv"
    assert main(["simulate", "--config", str(cfg), "--p", "6", "--out", str(out)]) == 0
    assert io.read_matrix_csv(out).shape == (40, 6)


def test_missing_seed_printed(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["simulate", "--n", "5", "--p", "3", "--out", str(out)]) == 0
    err = capsys.readouterr().err
    seed = int(err.split("seed = ")[1].split()[0])
    assert io.read_config(str(out) + ".config")["seed"] == str(seed)


def test_bootstrap_outputs(tmp_path):
    out = tmp_path / "run.jsonl"
    assert main(["bootstrap", "--model", "two-point", "--n", "200", "--p", "100", "--m", "40", "--B", "5",
                 "--seed", "2", "--bins", "12", "--out", str(out)]) == 0
    header, recs = io.read_records_jsonl(out)
    assert header["q"] == 20 and header["config"]["q"] == 20 and len(recs) == 5
    hist = io.read_table_csv(tmp_path / "run.hist.csv")
    assert len(hist) == 12
    dens = io.read_table_csv(tmp_path / "run.mp.csv")
    assert len(dens) == 400 and all(float(r["density"]) >= 0 for r in dens)
    assert io.read_csv_header(tmp_path / "run.hist.csv")["q"] == "20"


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@pytest.mark.parametrize("argv", [
    ["simulate", "--model", "toeplitz:0.3", "--n", "50", "--p", "20"],
    ["bootstrap", "--model", "three-block", "--n", "80", "--p", "40", "--m", "20", "--B", "10"],
    ["test", "--model", "identity", "--n", "120", "--p", "30", "--m-rule", "bs", "--B", "30"],
    ["test", "--n", "80", "--p", "20", "--m-rule", "fixed,dk", "--m", "20", "--B", "20", "--n-sim", "4",
     "--r-over-p", "0,10%", "--rho", "0.3", "--timings", "omit", "--out", "table.csv"],
])
def test_workers_determinism(tmp_path, monkeypatch, argv):
    outs = []
    for w in (1, 4):
        d = tmp_path / f"w{w}"
        d.mkdir()
        monkeypatch.chdir(d)
        args = argv + ["--seed", "11", "--workers", str(w)]
        if "--out" not in args:
            args += ["--out", "result" + (".csv" if argv[0] == "simulate" else ".jsonl")]
        assert main(args) == 0
        outs.append(_files(d))
    assert outs[0] == outs[1]


def test_table_columns(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["test", "--n", "80", "--p", "20", "--m-rule", "fixed", "--m", "20", "--B", "20",
                 "--n-sim", "3", "--seed", "1", "--out", str(out)]) == 0
    rows = io.read_table_csv(out)
    assert list(rows[0]) == ["rule", "r_over_p", "rate", "se", "mean_runtime_s"]
    assert float(rows[0]["mean_runtime_s"]) > 0


def test_bench_b0(tmp_path):
    out = tmp_path / "b.jsonl"
    assert main(["bench", "--n", "100", "--p", "50", "--B", "0", "--seed", "1", "--out", str(out)]) == 0
    _, recs = io.read_records_jsonl(out)
    assert [r["phase"] for r in recs] == ["statistic"]
