import dataclasses
import json

import numpy as np
import pytest

from fv3 import cli, output, runner
from fv3.physics import PhysicsError
from fv3.scheme2d import Operator2D

ADV1D = """[run]
scenario = advection_1d
[grid]
type = random
n = {n}
seed = 3
[output]
dir = {out}
every = {every}
"""

RIEMANN = """[run]
scenario = riemann_2d
t_end = 0.02
[grid]
n = 24
[output]
format = binary
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_validate_config(tmp_path, capsys):
    ok = write(tmp_path, "[run]\nscenario = vortex\n")
    assert cli.main(["validate-config", ok]) == cli.EXIT_OK
    assert "ok" in capsys.readouterr().out
    bad = write(tmp_path, "[run]\nscenario = vortex\nkernel = h3lz\n", "bad.cfg")
    assert cli.main(["validate-config", bad]) == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 3" in err and "weno3z" in err
    assert cli.main(["validate-config", str(tmp_path / "missing.cfg")]) == cli.EXIT_CONFIG


def test_run_1d_outputs(tmp_path):
    out = tmp_path / "o"
    cfg = write(tmp_path, ADV1D.format(n=50, out=out, every=20))
    assert cli.main(["run", cfg]) == cli.EXIT_OK
    head = (out / "final.csv").read_text().splitlines()
    assert head[0] == "x,q0" and len(head) == 51
    assert (out / "snap_000020.csv").exists()
    m = json.loads((out / "manifest.json").read_text())
    assert m["status"] == "ok" and m["t_final"] == 1.0
    assert m["resolved"]["cfl"] == 0.95 and m["steps"] > 0
    assert "wall_time_s" in m and m["branch_counts"]["h3"] + m["branch_counts"]["h3l"] > 0
    assert (out / "errors.csv").read_text().startswith("N,L1,EOC1,Linf,EOCinf\n50,")


def test_reruns_are_byte_identical(tmp_path):
    dirs = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        cfg = write(tmp_path, ADV1D.format(n=40, out=out, every=0), f"c{k}.cfg")
        assert cli.main(["run", cfg]) == cli.EXIT_OK
        dirs.append(out)
    for name in ("final.csv", "errors.csv"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
    m = [json.loads((d / "manifest.json").read_text()) for d in dirs]
    for k in ("started", "wall_time_s"):
        m[0].pop(k), m[1].pop(k)
    m[0]["config"].pop("out_dir"), m[1]["config"].pop("out_dir")
    m[0]["config"].pop("source"), m[1]["config"].pop("source")
    assert m[0] == m[1]


def test_run_2d_binary(tmp_path):
    cfg = write(tmp_path, RIEMANN)
    out = tmp_path / "rb"
    assert cli.main(["run", cfg, "--out", str(out)]) == cli.EXIT_OK
    xb, yb, v = output.read_binary_2d(out / "final.fv3")
    assert v.shape == (24, 24, 4)
    np.testing.assert_allclose(xb, np.linspace(0, 1, 25), atol=1e-15)
    raw = (out / "final.fv3").read_bytes()
    assert raw[:4] == b"FV3G" and len(raw) == 20 + 8 * 50 + 8 * 24 * 24 * 4


def test_binary_and_csv_round_trip(tmp_path, rng):
    from fv3 import mesh
    g = mesh.build_nonuniform_2d(((-1, 1), (-1, 1)), 7, 5, 0.1, 2, 0.1, 1)
    u = rng.normal(size=(7, 5, 3))
    output.write_binary_2d(tmp_path / "a.fv3", g, u)
    xb, yb, v = output.read_binary_2d(tmp_path / "a.fv3")
    np.testing.assert_array_equal(v, u)
    np.testing.assert_array_equal(xb, g.gx.boundaries)
    np.testing.assert_array_equal(yb, g.gy.boundaries)
    output.write_csv_2d(tmp_path / "a.csv", u)
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "7,5"
    np.testing.assert_array_equal(output.read_csv_2d(tmp_path / "a.csv"), u)
    (tmp_path / "bad.fv3").write_bytes(b"XXXX" + bytes(16))
    with pytest.raises(ValueError):
        output.read_binary_2d(tmp_path / "bad.fv3")


def test_amr_run_writes_blocks(tmp_path):
    cfg = write(tmp_path, "[run]\nscenario = vortex\nt_end = 0.05\n[grid]\ntype = amr\n"
                          "block = 8x8\nlevels = 1..2\ndelta0 = 0.05\n")
    out = tmp_path / "amr"
    assert cli.main(["run", cfg, "--out", str(out)]) == cli.EXIT_OK
    rows = (out / "final" / "forest.csv").read_text().splitlines()
    assert rows[0] == "level,i,j,x0,x1,y0,y1"
    blocks = list((out / "final" / "blocks").glob("L*_*_*.csv"))
    assert len(blocks) == len(rows) - 1
    m = json.loads((out / "manifest.json").read_text())
    assert m["amr"]["leaves"] == len(blocks)


def test_convergence_command(tmp_path, capsys):
    out = tmp_path / "conv"
    cfg = write(tmp_path, "[run]\nscenario = advection_1d\n[grid]\nn = 25, 50\n")
    assert cli.main(["convergence", cfg, "--out", str(out)]) == cli.EXIT_OK
    assert (out / "convergence.csv").read_text().startswith("N,L1,EOC1,Linf,EOCinf\n25,")
    assert "plot" in (out / "convergence.gp").read_text()
    assert len((out / "convergence.dat").read_text().splitlines()) == 3


def test_failure_at_start(tmp_path, monkeypatch, capsys):
    real = runner.scenario_for

    def broken(cfg):
        sc = real(cfg)
        init = sc.initial

        def bad(x, y):
            q = init(x, y)
            return np.where(((x > 0.4) & (x < 0.6) & (y > 0.4) & (y < 0.6))[..., None], -q, q)

        return dataclasses.replace(sc, initial=bad)

    monkeypatch.setattr(runner, "scenario_for", broken)
    cfg = write(tmp_path, RIEMANN)
    out = tmp_path / "f"
    assert cli.main(["run", cfg, "--out", str(out)]) == cli.EXIT_FAILED
    m = json.loads((out / "manifest.json").read_text())
    assert m["status"] == "failed"
    assert m["failure"]["step"] == 0 and m["failure"]["cell"] is not None
    assert "run failed" in capsys.readouterr().err


def test_failure_mid_run(tmp_path, monkeypatch):
    calls = {"n": 0}
    real = Operator2D.__call__

    def flaky(self, u, t=0.0):
        calls["n"] += 1
        if calls["n"] == 7:
            raise PhysicsError("negative density", where=(3, 4))
        return real(self, u, t)

    monkeypatch.setattr(Operator2D, "__call__", flaky)
    cfg = write(tmp_path, RIEMANN)
    out = tmp_path / "g"
    assert cli.main(["run", cfg, "--out", str(out)]) == cli.EXIT_FAILED
    m = json.loads((out / "manifest.json").read_text())
    assert m["failure"]["step"] == 3 and m["failure"]["cell"] == [3, 4]
    assert m["t_final"] > 0 and m["steps"] == 2
    assert (out / "final.fv3").exists()


def test_threads_env(monkeypatch):
    pytest.importorskip("numba")
    monkeypatch.setenv("FV3_THREADS", "1")
    assert cli._threads() == 1
