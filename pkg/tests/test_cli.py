from __future__ import annotations

import csv
import math

import pytest

from impulsive import cli
from impulsive.config import ConfigError, load_config


def _write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


CUBIC = """coeffs = [0.0, -2.0, 3.0, -1.0]
x_max = 40.0
omega = 1.0
"""


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_bundled_configs_load():
    c = load_config("cubic")
    assert c.coeffs == (0.0, -2.0, 3.0, -1.0) and c.omega == 1.0 and c.lam == 0.0
    q = load_config("quintic")
    assert q.omega == 0.5 and len(q.coeffs) == 6
    assert q.integrator.rel_tol == 1e-10


@pytest.mark.parametrize(
    "text,match",
    [
        ("coeffs = [0.0, -1.0]\nx_max = 1.0\nomega = 1.0\nbogus = 1\n", "unknown"),
        ("x_max = 1.0\nomega = 1.0\n", "coeffs"),
        ("coeffs = [0.0, 'a']\nx_max = 1.0\nomega = 1.0\n", "finite real"),
        ("coeffs = [0.0, -1.0]\nx_max = -1.0\nomega = 1.0\n", "x_max"),
        ("coeffs = [0.0, -1.0]\nx_max = 1.0\nomega = 0.0\n", "omega"),
        ("coeffs = [0.0, -1.0]\nx_max = 1.0\nomega = 1.0\ngrid_points = 2\n", "grid_points"),
        ("coeffs = [0.0, -1.0]\nx_max = 1.0\nomega = 1.0\n[integrator]\nrel_tol = -1.0\n", "integrator"),
        ("coeffs = [0.0, -1.0\n", "TOML"),
    ],
)
def test_config_errors(tmp_path, text, match):
    with pytest.raises(ConfigError, match=match):
        load_config(_write(tmp_path, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.toml")
    assert cli.main(["validate", str(tmp_path / "nope.toml")]) == 2


def test_validate_ok(capsys):
    assert cli.main(["validate", "cubic"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "linear-part ok (A=-2)"
    assert out[1] == "equilibria ok (k=3)"
    assert any(line.startswith("convexity ok") for line in out)


def test_validate_quintic_warns(capsys):
    assert cli.main(["validate", "quintic"]) == 0
    out = capsys.readouterr().out
    assert "convexity warn" in out and "ratio-extrema ok" in out


def test_validate_failure_exit_code(tmp_path, capsys):
    path = _write(tmp_path, "coeffs = [0.0, -1.0, 1.0]\nx_max = 5.0\nomega = 1.0\n")
    assert cli.main(["validate", path]) == 1
    assert "equilibria fail" in capsys.readouterr().out


def test_hypothesis_failure_blocks_analysis(tmp_path):
    path = _write(tmp_path, "coeffs = [1.0, -1.0, -1.0]\nx_max = 5.0\nomega = 1.0\n")
    assert cli.main(["rmap", path, "--output-dir", str(tmp_path)]) == 1


def test_rmap_and_gmap(tmp_path, capsys):
    assert cli.main(["rmap", "cubic", "--grid-points", "9", "--output-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "rmap.csv")
    assert rows[0] == ["x", "r_omega", "r_omega_prime", "g", "g_prime"]
    assert len(rows) == 10
    assert rows[1][4] == "nan"
    assert float(rows[1][3]) == pytest.approx(math.exp(2) - 1)
    assert cli.main(["gmap", "cubic", "--grid-points", "9", "--omega", "0.5",
                     "--output-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "gmap.csv")
    assert rows[0] == ["x", "g", "g_prime"]
    assert float(rows[1][1]) == pytest.approx(math.exp(1) - 1)
    assert str(tmp_path / "gmap.csv") in capsys.readouterr().out


def test_periodic(tmp_path, capsys):
    assert cli.main(["periodic", "cubic", "--lambda", "-0.1", "--output-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "periodic.csv")
    assert rows[0] == ["lambda", "x0", "stability", "residual", "g_prime"]
    assert [r[2] for r in rows[1:]] == ["asymptotically_stable", "unstable", "asymptotically_stable"]
    assert "3 periodic orbit(s)" in capsys.readouterr().out


def test_periodic_needs_valid_lambda(tmp_path):
    path = _write(tmp_path, CUBIC)
    assert cli.main(["periodic", path, "--output-dir", str(tmp_path)]) == 2
    assert cli.main(["periodic", path, "--lambda", "-1", "--output-dir", str(tmp_path)]) == 2


def test_invalid_omega_override(tmp_path):
    assert cli.main(["rmap", "cubic", "--omega", "0", "--output-dir", str(tmp_path)]) == 2


def test_sweep(tmp_path):
    args = ["sweep", "cubic", "--lambda-min", "-0.5", "--lambda-max", "1", "--n-points", "4",
            "--grid-points", "513", "--output-dir", str(tmp_path)]
    assert cli.main(args) == 0
    rows = _rows(tmp_path / "sweep.csv")
    assert rows[0] == ["lambda", "x0", "stability"]
    assert rows[1] == ["-0.5", "0", "asymptotically_stable"]
    assert cli.main(["sweep", "cubic", "--output-dir", str(tmp_path)]) == 2


def test_regimes(tmp_path, capsys):
    assert cli.main(["regimes", "cubic", "--output-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "regimes.csv")
    assert [r[3] for r in rows[1:]] == ["1", "3", "2"]
    text = (tmp_path / "regimes.txt").read_text()
    assert "gamma=1.26993591" in text
    assert text in capsys.readouterr().out


def test_regimes_rejects_positive_A(tmp_path):
    path = _write(tmp_path, "coeffs = [0.0, 1.0, -1.0]\nx_max = 5.0\nomega = 1.0\n")
    assert cli.main(["regimes", path, "--output-dir", str(tmp_path)]) == 1


def test_simulate(tmp_path, capsys):
    args = ["simulate", "cubic", "--lambda", "0.5", "--x0", "0.8", "--n-pulses", "5",
            "--output-dir", str(tmp_path)]
    assert cli.main(args) == 0
    rows = _rows(tmp_path / "trajectory.csv")
    assert rows[0] == ["t", "x", "is_jump"]
    assert sum(r[2] == "1" for r in rows[1:]) == 10
    pulses = _rows(tmp_path / "pulses.csv")
    assert pulses[0] == ["k", "t", "x_before", "x_after"]
    assert len(pulses) == 6
    assert float(pulses[1][3]) == pytest.approx(1.5 * float(pulses[1][2]))
    assert "fate: completed" in capsys.readouterr().out


def test_simulate_escape_and_bad_x0(tmp_path, capsys):
    args = ["simulate", "cubic", "--omega", "2", "--lambda", "30", "--x0", "1.5", "--n-pulses", "20",
            "--output-dir", str(tmp_path)]
    assert cli.main(args) == 0
    assert "escaped_domain" in capsys.readouterr().out
    args[args.index("1.5")] = "50"
    assert cli.main(args) == 2


def test_omega_scan(tmp_path, capsys):
    x_ref = "1.5"
    args = ["omega-scan", "cubic", "--omega", "2", "--lambda", "-0.3", "--x-ref", x_ref,
            "--output-dir", str(tmp_path)]
    # x_ref must be an orbit
    assert cli.main(args) == 1
    from impulsive.periodic import find_periodic_orbits
    from impulsive.rmap import StroboscopicAnalyzer

    an = StroboscopicAnalyzer(load_config("cubic").vector_field(), 2.0)
    orbit = [o for o in find_periodic_orbits(an, -0.3) if 1 < o.x0 < 2][-1]
    args[args.index(x_ref)] = repr(orbit.x0)
    args += ["--ratio", "0.8", "--floor", "0.5"]
    assert cli.main(args) == 0
    rows = _rows(tmp_path / "omega_scan.csv")
    assert rows[0] == ["omega", "orbit_present", "x_tracked", "fate"]
    assert rows[-1][3] == "converges_to_zero"
    assert "fate: converges_to_zero" in capsys.readouterr().out


def test_omega_scan_zero_lambda(tmp_path):
    assert cli.main(["omega-scan", "cubic", "--lambda", "0", "--x-ref", "1",
                     "--output-dir", str(tmp_path)]) == 1


def test_step_limit_is_numerical_failure(tmp_path):
    path = _write(tmp_path, CUBIC + "[integrator]\nmax_steps = 2\n")
    assert cli.main(["rmap", path, "--output-dir", str(tmp_path)]) == 2


def test_output_deterministic(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["periodic", "quintic", "--lambda", "0", "--output-dir", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "periodic.csv").read_bytes() == (tmp_path / "b" / "periodic.csv").read_bytes()
