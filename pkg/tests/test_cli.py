"""Config loading, run orchestration outputs, CLI exit codes."""

import os

import numpy as np
import pytest

from mkg.cli import main
from mkg.config import load_config
from mkg.errors import ParseError, ValidationError
from mkg.lattice import read_snapshot
from mkg.run import CSV_COLUMNS, parse_trace

MINIMAL = """\
[initial_data]
scenario = vacuum
"""

DEMO = """\
[lattice]
dims = 64 1 1
dx = 0.015625

[initial_data]
scenario = interacting_demo

[integrator]
cfl = 0.25
steps = 40

[outputs]
csv_cadence = 4
plots = true

[run]
seed = 3
"""


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_minimal_config_defaults(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL))
    assert cfg.scenario == "vacuum"
    assert cfg.lattice.dims == (64, 1, 1)
    assert cfg.steps == 100
    assert cfg.cfl == 0.25
    assert cfg.stencil_order == 2
    assert cfg.seed == 0


def test_unknown_key_is_parse_error(tmp_path):
    bad = MINIMAL + "\n[potental]\nkind = quartic\n"
    with pytest.raises(ParseError, match="potental"):
        load_config(write(tmp_path, bad))
    bad2 = MINIMAL + "\n[integrator]\nstepz = 7\n"
    with pytest.raises(ParseError, match="integrator.stepz"):
        load_config(write(tmp_path, bad2))


def test_bad_value_is_validation_error(tmp_path):
    bad = "[initial_data]\nscenario = warp_drive\n"
    with pytest.raises(ValidationError, match="scenario"):
        load_config(write(tmp_path, bad))
    bad2 = MINIMAL + "\n[integrator]\nsteps = 0\n"
    with pytest.raises(ValidationError, match="integrator.steps"):
        load_config(write(tmp_path, bad2))


def test_dt_cfl_exclusive(tmp_path):
    bad = MINIMAL + "\n[integrator]\ndt = 0.01\ncfl = 0.5\n"
    with pytest.raises(ValidationError):
        load_config(write(tmp_path, bad))


def test_vacuum_run_zero_trace(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    out = str(tmp_path / "out")
    assert main(["run", "--config", cfg, "--out", out, "--steps", "20"]) == 0
    records = parse_trace(os.path.join(out, "trace.csv"))
    assert all(r.energy_E0 == 0.0 for r in records)
    assert all(r.flat_J == 0.0 for r in records)


def test_trace_header_golden(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    out = str(tmp_path / "out")
    main(["run", "--config", cfg, "--out", out, "--steps", "5"])
    with open(os.path.join(out, "trace.csv")) as fh:
        header = fh.readline().strip()
    assert header == ("t,E0,J,J_envelope,E0_sf,E1_sf,gauss_l2,gauss_linf,"
                      "bianchi_linf,linf_phi,linf_dphi,linf_Dphi,linf_F,"
                      "linf_A,linf_dPsi,l2_E,l2_H,l2_Dphi,l2_phi,l2_V,"
                      "L,M,N,S,X,U,W,G")
    assert header == ",".join(CSV_COLUMNS)


def test_run_outputs_and_roundtrip(tmp_path):
    cfg = write(tmp_path, DEMO)
    out = str(tmp_path / "demo")
    assert main(["run", "--config", cfg, "--out", out]) == 0
    for name in ("trace.csv", "snap_final.mkg", "energy.svg",
                 "flat_energy.svg", "constraints.svg"):
        assert os.path.exists(os.path.join(out, name))
    st, lat = read_snapshot(os.path.join(out, "snap_final.mkg"))
    assert lat.dims == (64, 1, 1)
    assert st.is_finite()
    records = parse_trace(os.path.join(out, "trace.csv"))
    assert len(records) >= 3
    # energy conserved along the run
    e = [r.energy_E0 for r in records]
    assert abs(e[-1] - e[0]) / e[0] < 1e-6


def test_determinism_across_workers(tmp_path):
    cfg = write(tmp_path, DEMO)
    blobs = []
    for i, workers in enumerate((1, 2, 8)):
        out = str(tmp_path / f"w{workers}")
        assert main(["run", "--config", cfg, "--out", out,
                     "--threads", str(workers)]) == 0
        with open(os.path.join(out, "trace.csv"), "rb") as fh:
            blobs.append(fh.read())
    assert blobs[0] == blobs[1] == blobs[2]


def test_check_geometry_cli(tmp_path):
    cfg = write(tmp_path, DEMO)
    assert main(["check-geometry", "--config", cfg]) == 0


def test_check_bounds_cli(tmp_path):
    cfg = write(tmp_path, DEMO)
    out = str(tmp_path / "demo")
    main(["run", "--config", cfg, "--out", out])
    assert main(["check-bounds", "--trace",
                 os.path.join(out, "trace.csv")]) == 0


def test_check_bounds_short_trace(tmp_path):
    path = tmp_path / "trace.csv"
    with open(str(path), "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        fh.write(",".join(["0.0"] * len(CSV_COLUMNS)) + "\n")
        fh.write("0.1," + ",".join(["0.0"] * (len(CSV_COLUMNS) - 1)) + "\n")
    assert main(["check-bounds", "--trace", str(path)]) == 1


def test_kirchhoff_verify_cli():
    assert main(["kirchhoff-verify"]) == 0
    assert main(["kirchhoff-verify", "--order", "8", "--k", "1,0,0",
                 "--r0", "2.0"]) == 0


def test_config_error_exit_code(tmp_path):
    bad = write(tmp_path, MINIMAL + "\n[typo_section]\nx = 1\n")
    assert main(["run", "--config", bad]) == 2


def test_mkg_threads_env(tmp_path, monkeypatch):
    cfg = write(tmp_path, MINIMAL)
    out = str(tmp_path / "envout")
    monkeypatch.setenv("MKG_THREADS", "4")
    assert main(["run", "--config", cfg, "--out", out, "--steps", "3"]) == 0
