import json
import os
import subprocess
import sys

import pytest

from bellstrip.cli import EXIT_OK, EXIT_SCOPE, EXIT_USAGE, EXIT_VERIFY, main, parse_eps_range

POCKET = "1,0,1,0;0,0,0,0"
TWO = '{"f_plus": [1, 0, 1, 0], "f_minus": [-1, 0, 0, 0]}'


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_regimes_timeline(capsys):
    code, out, _ = run(["regimes", "--boundary", POCKET], capsys)
    assert code == EXIT_OK
    assert "eps0_plus   = 0.288675134595" in out
    assert "eps1_plus   = 0.290473750966" in out
    assert "simple_right" in out and "one_pocket" in out


def test_regimes_zero_discriminant(capsys):
    code, out, _ = run(["regimes", "--boundary", "1,0,0,0;-1,0,0,0"], capsys)
    assert code == EXIT_OK
    assert "zero discriminant: rectangle regime for all eps" in out


def test_regimes_json(capsys):
    code, out, _ = run(["regimes", "--boundary", TWO, "--format", "json"], capsys)
    d = json.loads(out)
    assert [r["name"] for r in d["criticals"]][-1] == "eps2"
    assert [iv["regime"] for iv in d["intervals"]] == ["simple_right", "two_pockets", "rect_with_herringbones"]


def test_bad_boundary_is_usage_error(capsys):
    code, _, err = run(["regimes", "--boundary", "{not json"], capsys)
    assert code == EXIT_USAGE and "invalid boundary" in err


def test_bad_range(capsys):
    code, _, _ = run(["foliate", "--boundary", POCKET, "--eps-range", "0.4:0.2:0.1"], capsys)
    assert code == EXIT_USAGE
    assert parse_eps_range("0.2:0.4:0.05") == [0.2, 0.25, 0.3, 0.35, 0.4]


def test_missing_subcommand(capsys):
    assert run([], capsys)[0] == EXIT_USAGE


def test_eval_boundary_point(capsys):
    code, out, _ = run(["eval", "--boundary", POCKET, "--eps", "0.35", "--points", "0.5,0.35;0.2,-0.35;0,1"], capsys)
    assert code == EXIT_OK
    rows = [r.split(",") for r in out.strip().splitlines()[1:]]
    assert float(rows[0][2]) == pytest.approx(0.5**3 + 0.5, abs=1e-12)
    assert float(rows[1][2]) == pytest.approx(0.0, abs=1e-12)
    assert rows[2][-1] == "outside_strip"


def test_eval_out_of_scope(capsys):
    code, _, err = run(["eval", "--boundary", "1,0,-1,0;-1,0,0,0", "--eps", "0.3", "--points", "0,0"], capsys)
    assert code == EXIT_SCOPE


def test_verify_exit_codes(capsys):
    assert run(["verify", "--boundary", POCKET, "--eps", "0.35"], capsys)[0] == EXIT_OK
    assert run(["verify", "--boundary", POCKET, "--eps", "0.35", "--corrupt", "0.01"], capsys)[0] == EXIT_VERIFY
    assert run(["verify", "--boundary", POCKET, "--eps", "0.35", "--tol-fd", "1e-15"], capsys)[0] == EXIT_VERIFY
    assert run(["verify", "--boundary", "1,0,1,0;1,0,1,0", "--eps", "0.3"], capsys)[0] == EXIT_SCOPE


def test_plot_leaf_groups(tmp_path, capsys):
    code, _, _ = run(["plot", "--boundary", POCKET, "--eps", "0.29", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    svg = (tmp_path / "foliation_eps=0.29.svg").read_text()
    assert svg.count('<g class="leaf"') == 3
    run(["plot", "--boundary", TWO, "--eps", "0.4", "--overlay", "--out", str(tmp_path)], capsys)
    svg = (tmp_path / "foliation_eps=0.4.svg").read_text()
    assert svg.count('<g class="leaf"') == 5
    assert 'class="level-X1"' in svg


def test_outputs_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        run(["foliate", "--boundary", TWO, "--eps-range", "0.3:0.4:0.05", "--out", str(d)], capsys)
        run(["verify", "--boundary", TWO, "--eps", "0.4", "--format", "json", "--out", str(d)], capsys)
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    assert "spine_ell_plus_eps=0.4.csv" in names
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_parallel_matches_serial(tmp_path):
    env = dict(os.environ)
    outs = []
    for cap in ("1", "3"):
        env["BELLMAN_STRIP_THREADS"] = cap
        d = tmp_path / cap
        subprocess.run([sys.executable, "-m", "bellstrip.cli", "foliate", "--boundary", POCKET,
                        "--eps-range", "0.3:0.5:0.1", "--out", str(d)], check=True, env=env)
        outs.append({p.name: p.read_bytes() for p in d.iterdir()})
    assert outs[0] == outs[1]
