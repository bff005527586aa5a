import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmlab import cli
from qmlab.io import (
    ConfigError,
    ResultTable,
    parse_config,
    parse_config_text,
    parse_list,
    parse_range,
    read_csv,
    table_from_json,
    table_to_json,
    write_table,
)


# configs and ranges


def test_parse_config_text():
    text = "# sweep\nn = 10\ns=0.5  # spin\n\nb = -3:3:0.5\nn-max = 4\n"
    assert parse_config_text(text) == {"n": "10", "s": "0.5", "b": "-3:3:0.5", "n_max": "4"}


@pytest.mark.parametrize("text", ["n 10", "= 3", "n = 1\nn = 2"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "absent.cfg")


def test_parse_range():
    b = parse_range("-3:3:0.015625")
    assert len(b) == 385 and b[0] == -3 and b[-1] == 3
    assert np.allclose(parse_range("0:1:0.1"), np.linspace(0, 1, 11))
    assert parse_range("2.5").tolist() == [2.5]
    assert len(parse_range("0:1:0.3")) == 4


@pytest.mark.parametrize("text", ["1:0:0.1", "0:1:0", "0:1:-1", "0:1", "a:b:c", "0:inf:1"])
def test_parse_range_errors(text):
    with pytest.raises(ConfigError):
        parse_range(text)


@given(st.integers(-50, 50), st.integers(0, 400), st.sampled_from([0.5, 0.25, 0.1, 0.015625]))
def test_range_includes_grid_endpoint(lo, n, h):
    r = parse_range(f"{lo}:{lo + n * h!r}:{h}")
    assert len(r) == n + 1
    assert r[-1] == pytest.approx(lo + n * h)


def test_parse_list():
    assert parse_list("1, 2 3") == [1.0, 2.0, 3.0]
    assert parse_list("2 -1", int) == [2, -1]
    with pytest.raises(ConfigError):
        parse_list("")
    with pytest.raises(ConfigError):
        parse_list("1 x", int)


def test_resolve_precedence_and_unknown():
    cfg = cli.resolve("spinspace", {"n_max": "12", "f": "5"}, {"f": "7"})
    assert cfg["n_max"] == 12 and cfg["f"] == 7.0 and cfg["bx"] == 1e3
    assert cfg["out"] == "spinspace.csv"
    with pytest.raises(ConfigError):
        cli.resolve("spinspace", {"zeta": "1"}, {})
    with pytest.raises(ConfigError):
        cli.resolve("spinspace", {"n_max": "2.5"}, {})


# tables


def test_table_shape_checked():
    with pytest.raises(ValueError):
        ResultTable(["a", "b"], [[1.0]])
    t = ResultTable(["a", "b"])
    with pytest.raises(ValueError):
        t.append([1, 2, 3])


def test_empty_table_is_header_only(tmp_path):
    p = tmp_path / "e.csv"
    write_table(ResultTable(["b", "gap"]), p)
    assert p.read_text() == "b,gap\n"


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    rows = [[float(b), float(g)] for b, g in zip(rng.normal(size=20), rng.exponential(size=20) * 1e-9)]
    rows.append([1 / 3, np.nextafter(1.0, 2.0)])
    p = tmp_path / "t.csv"
    write_table(ResultTable(["b", "gap"], rows), p)
    cols, back = read_csv(p)
    assert cols == ["b", "gap"] and back == rows
    raw = p.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")


@given(st.lists(st.tuples(st.floats(allow_nan=False, allow_infinity=False), st.integers(-10**6, 10**6)), max_size=8))
def test_json_round_trip(rows):
    t = ResultTable(["x", "k"], [list(r) for r in rows], {"seed": 7, "nested": {"a": [1.5, 2]}})
    back = table_from_json(table_to_json(t))
    assert back == t


def test_json_handles_numpy(tmp_path):
    t = ResultTable(["x"], [[np.float64(0.1)]], {"w": np.array([1.0, 2.0]), "n": np.int64(3), "c": 1 + 2j})
    p = tmp_path / "t.json"
    write_table(t, p)
    d = json.loads(p.read_text())
    assert d["metadata"] == {"c": {"im": 2.0, "re": 1.0}, "n": 3, "w": [1.0, 2.0]}
    assert d["rows"] == [[0.1]]


def test_write_table_bad_format(tmp_path):
    with pytest.raises(ValueError):
        write_table(ResultTable(["a"]), tmp_path / "x", fmt="xml")


# command line


def run_ok(args, capsys):
    code = cli.run(args)
    out = capsys.readouterr()
    assert code == 0, out.err
    return out.out


def test_no_command_and_unknown_command(capsys):
    assert cli.run([]) == 2
    assert cli.run(["frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_config_errors_exit_2(tmp_path, capsys):
    assert cli.run(["pimc-ho", "--zeta", "0", "--out", str(tmp_path / "p")]) == 2
    assert cli.run(["pimc-ho", "--zeta", "1", "--slices", "1", "--out", str(tmp_path / "p")]) == 2
    assert cli.run(["stepwell", "--n-max", "-4", "--out", str(tmp_path / "s.csv")]) == 2
    assert cli.run(["ising-scan", "--s", "0.3"]) == 2
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("zeta = 1\nbogus = 3\n")
    assert cli.run(["pimc-ho", "--config", str(cfg)]) == 2
    assert cli.run(["mc-demo", "--out", str(tmp_path / "nodir" / "x.csv")]) == 2
    assert not list(tmp_path.glob("p_*"))


def test_nonconvergence_exit_3(tmp_path, capsys):
    args = ["gpe-ground", "1d", "--n-max", "40", "--max-iter", "3", "--out", str(tmp_path / "g.csv")]
    assert cli.run(args) == 3
    assert "not converged" in capsys.readouterr().err


def test_magic_field(tmp_path, capsys):
    out = tmp_path / "magic.json"
    summary = run_ok(["magic-field", "--bracket", "0.5", "6", "--out", str(out)], capsys)
    assert "magic-field" in summary
    d = json.loads(out.read_text())
    assert d["columns"] == ["bz", "value"]
    assert d["rows"][0][0] == pytest.approx(3.22895, abs=1e-3)
    assert d["metadata"]["seed"] == cli.pimc.DEFAULT_SEED
    assert d["metadata"]["constants"] == cli.constants.table()


def test_ising_scan_columns(tmp_path, capsys):
    out = tmp_path / "ising.csv"
    run_ok(["ising-scan", "--n", "6", "--b", "-3:3:0.5", "--m", "2", "--out", str(out)], capsys)
    cols, rows = read_csv(out)
    assert "gap" in cols and cols[0] == "b"
    assert len(rows) == 13
    gap = np.array(rows)[:, cols.index("gap")]
    b = np.array(rows)[:, 0]
    assert gap[b == 0][0] < 1e-6


def test_config_file_with_overrides(tmp_path, capsys):
    cfg = tmp_path / "sw.cfg"
    cfg.write_text("omega = 2\nn-max = 8:12:2\n")
    out = tmp_path / "sw.csv"
    run_ok(["stepwell", "--config", str(cfg), "--n-max", "10:14:4", "--out", str(out)], capsys)
    cols, rows = read_csv(out)
    assert [r[0] for r in rows] == [10, 14]
    assert cols == ["n_max", "E_momentum", "deficit_momentum", "E_position", "deficit_position"]


def test_small_commands(tmp_path, capsys):
    run_ok(["hyperfine-levels", "--bz", "0:100:50", "--out", str(tmp_path / "h.csv")], capsys)
    cols, rows = read_csv(tmp_path / "h.csv")
    assert len(cols) == 9 and len(rows) == 3
    run_ok(["dynamics-1d", "--n-max", "24", "--steps", "8", "16", "--out", str(tmp_path / "d.csv")], capsys)
    _, rows = read_csv(tmp_path / "d.csv")
    assert rows[1][1] < rows[0][1] and abs(rows[0][2] - 1) < 1e-9
    run_ok(["twobody", "--n-max", "6", "--g", "0", "5", "--out", str(tmp_path / "t.csv")], capsys)
    _, rows = read_csv(tmp_path / "t.csv")
    assert rows[0][1] == pytest.approx(2.0, abs=1e-8) and rows[1][2] < rows[0][2]
    run_ok(["spinspace", "--out", str(tmp_path / "s.json")], capsys)
    meta = json.loads((tmp_path / "s.json").read_text())["metadata"]
    assert meta["rho_s"][0][1] == pytest.approx(-0.205979, abs=2e-4)
    run_ok(["mc-demo", "--out", str(tmp_path / "m.csv")], capsys)
    run_ok(["gpe-ground", "1d", "--n-max", "30", "--out", str(tmp_path / "g.csv")], capsys)


def test_pimc_outputs_deterministic(tmp_path, capsys):
    args = ["pimc-ho", "--zeta", "1", "--slices", "20", "--sweeps", "2000", "--seed", "7"]
    run_ok(args + ["--out", str(tmp_path / "a")], capsys)
    run_ok(args + ["--out", str(tmp_path / "b")], capsys)
    for suffix in ("_samples.csv", "_hist.csv", "_stats.json"):
        a = (tmp_path / ("a" + suffix)).read_bytes()
        b = (tmp_path / ("b" + suffix)).read_bytes()
        assert a == b
    cols, rows = read_csv(tmp_path / "a_samples.csv")
    assert cols == ["sweep", "bead", "value"] and len(rows) == 2000 * 20
    cols, _ = read_csv(tmp_path / "a_hist.csv")
    assert cols == ["bin_center", "density", "analytic_density"]
    stats = json.loads((tmp_path / "a_stats.json").read_text())
    assert set(stats["metadata"]["acceptance"]) == {"bead", "ring"}
    run_ok(args[:-1] + ["8", "--out", str(tmp_path / "c")], capsys)
    assert (tmp_path / "c_samples.csv").read_bytes() != (tmp_path / "a_samples.csv").read_bytes()


def test_threads_env(monkeypatch):
    monkeypatch.setenv("QMLAB_THREADS", "4")
    assert cli.threads() == 4
    monkeypatch.setenv("QMLAB_THREADS", "zero")
    with pytest.raises(ConfigError):
        cli.threads()
    monkeypatch.delenv("QMLAB_THREADS")
    assert cli.threads() == 1


def test_threaded_scan_matches_serial(tmp_path, capsys, monkeypatch):
    args = ["twobody", "--n-max", "6", "--g", "-1", "0", "2", "4"]
    run_ok(args + ["--out", str(tmp_path / "serial.csv")], capsys)
    monkeypatch.setenv("QMLAB_THREADS", "3")
    run_ok(args + ["--out", str(tmp_path / "pool.csv")], capsys)
    assert (tmp_path / "serial.csv").read_bytes() == (tmp_path / "pool.csv").read_bytes()
