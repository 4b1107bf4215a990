import subprocess
import sys

import numpy as np
import pytest

import ldesc.io as fio
from ldesc.cli import (EXIT_IO, EXIT_NO_VALID, EXIT_OK, EXIT_USAGE, PRESETS,
                       parse_args, run)
from ldesc.reference import AnalyticSaddleFlow, oracle_m

SMALL_GRID = "-1:1:11,-1:1:11"


def test_preset_fig1_populates_config():
    config = parse_args(["--preset", "fig1"])
    assert config.field_spec == "saddle(1,1)"
    assert config.tau == 20.0
    assert config.t0 == 0.0
    assert (config.grid.nx, config.grid.ny) == (201, 201)
    assert (config.grid.xmin, config.grid.xmax) == (-1.0, 1.0)
    assert config.method == "rk4-fixed"
    assert config.quantile == 0.0


def test_all_presets_encode_reference_parameters():
    assert set(PRESETS) == {"fig1", "fig2", "fig3a", "fig3b", "fig3c", "fig3d"}
    assert PRESETS["fig1"]["tau"] == 20.0
    assert PRESETS["fig2"]["field"] == "separable(tanh(x))"
    for name in ("fig2", "fig3a", "fig3b", "fig3c", "fig3d"):
        assert PRESETS[name]["tau"] == 10.0
    assert PRESETS["fig3a"]["field"] == "saddle(1,2)"
    assert PRESETS["fig3b"]["field"] == "saddle(1,2)"
    assert PRESETS["fig3c"]["field"] == "saddle(2,1)"
    assert PRESETS["fig3d"]["field"] == "saddle(2,1)"


def test_explicit_flags_override_preset():
    config = parse_args(["--preset", "fig1", "--tau", "5",
                         "--grid", SMALL_GRID])
    assert config.tau == 5.0
    assert config.grid.nx == 11
    assert config.field_spec == "saddle(1,1)"


@pytest.mark.parametrize("argv", [
    [],                                    # no field at all
    ["--field", "saddle(1,1)"],            # tau missing
    ["--tau", "-1", "--field", "saddle(1,1)"],
    ["--tau", "1", "--field", "saddle(1,1)", "--grid", "nonsense"],
    ["--tau", "1", "--field", "saddle(1,1)", "--grid", "-1:1:2,-1:1:2"],
    ["--tau", "1", "--field", "saddle(1,1)", "--quantile", "1.5"],
    ["--tau", "1", "--field", "saddle(1,1)", "--oracle", "zap"],
    ["--unknown-flag"],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        parse_args(argv)
    assert info.value.code == EXIT_USAGE


def test_zero_field_run_writes_all_zero_csv(tmp_path, capsys):
    out = tmp_path / "m.csv"
    config = parse_args(["--dx", "0", "--dy", "0", "--tau", "5",
                         "--grid", SMALL_GRID, "--out-m", str(out)])
    assert run(config) == EXIT_OK
    field = fio.read_csv(out.read_bytes())
    assert np.all(field.values == 0.0)
    assert field.valid.all()
    summary = capsys.readouterr().out
    assert "valid 100.00%" in summary
    assert "wall" in summary


def test_run_writes_all_requested_outputs(tmp_path):
    paths = {name: tmp_path / f"{name}.out"
             for name in ("m", "dx", "dy", "mask", "pgm")}
    config = parse_args([
        "--field", "saddle(1,1)", "--tau", "10", "--grid", SMALL_GRID,
        "--out-m", str(paths["m"]), "--out-dx", str(paths["dx"]),
        "--out-dy", str(paths["dy"]), "--out-mask", str(paths["mask"]),
        "--pgm", str(paths["pgm"]),
    ])
    assert run(config) == EXIT_OK
    for path in paths.values():
        assert path.exists() and path.stat().st_size > 0
    assert paths["pgm"].read_bytes().startswith(b"P5\n11 11\n255\n")
    mask_lines = paths["mask"].read_text().splitlines()
    assert mask_lines[0] == "kind,x,y,jump"
    assert len(mask_lines) > 1


def test_run_is_deterministic(tmp_path):
    outputs = []
    for tag in ("a", "b"):
        path = tmp_path / f"{tag}.csv"
        config = parse_args(["--preset", "fig3a", "--grid", SMALL_GRID,
                             "--out-m", str(path)])
        assert run(config) == EXIT_OK
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_separable_field_run(tmp_path):
    out = tmp_path / "m.csv"
    config = parse_args(["--field", "separable(tanh(x))", "--tau", "2",
                         "--grid", SMALL_GRID, "--out-m", str(out)])
    assert run(config) == EXIT_OK
    assert out.exists()


def test_bad_expression_reports_offset(capsys):
    config = parse_args(["--field", "separable(2*)", "--tau", "1",
                         "--grid", SMALL_GRID])
    assert run(config) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "offset" in err


def test_custom_requires_components(capsys):
    config = parse_args(["--field", "custom", "--tau", "1",
                         "--grid", SMALL_GRID])
    assert run(config) == EXIT_USAGE
    assert "--dx" in capsys.readouterr().err


def test_unwritable_output_exits_4(tmp_path, capsys):
    target = tmp_path / "missing-dir" / "m.csv"
    config = parse_args(["--field", "saddle(1,1)", "--tau", "1",
                         "--grid", SMALL_GRID, "--out-m", str(target)])
    assert run(config) == EXIT_IO
    assert "cannot write" in capsys.readouterr().err


def test_all_invalid_field_exits_3(capsys):
    config = parse_args(["--dx", "log(-1)", "--dy", "0", "--tau", "1",
                         "--grid", "0:1:5,0:1:5".replace("5", "11")])
    assert run(config) == EXIT_NO_VALID
    assert "no grid node" in capsys.readouterr().err


def test_oracle_flag_prints_reference_value(capsys):
    config = parse_args(["--field", "saddle(1,2)", "--tau", "10",
                         "--oracle", "0.3,-0.4"])
    assert run(config) == EXIT_OK
    printed = float(capsys.readouterr().out.strip())
    expected = oracle_m(AnalyticSaddleFlow(1.0, 2.0), (0.3, -0.4), 10.0)
    assert printed == pytest.approx(expected, rel=1e-15)


def test_oracle_flag_requires_saddle(capsys):
    config = parse_args(["--dx", "x", "--dy", "-y", "--tau", "1",
                         "--oracle", "0.1,0.1"])
    assert run(config) == EXIT_USAGE
    assert "saddle" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "ldesc", "--dx", "0", "--dy", "0",
         "--tau", "1", "--grid", "0:1:5,0:1:5", "--out-m", str(out)],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == EXIT_OK, proc.stderr
    assert out.exists()
    assert "valid 100.00%" in proc.stdout
