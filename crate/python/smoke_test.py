#!/usr/bin/env python3
"""Build the fracwave extension module and exercise it end to end."""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]


def build_extension() -> Path:
    subprocess.run(
        ["cargo", "build", "-p", "fracwave-py"],
        cwd=REPO_ROOT,
        check=True,
    )
    built = REPO_ROOT / "target" / "debug" / "libfracwave.so"
    if not built.exists():
        sys.exit(f"extension library not found at {built}")
    stage = Path(tempfile.mkdtemp(prefix="fracwave_py_"))
    shutil.copy2(built, stage / "fracwave.so")
    return stage


def main() -> None:
    sys.path.insert(0, str(build_extension()))
    import fracwave

    assert "example1_desk" in fracwave.preset_names()

    config = fracwave.Config.preset("example1_desk")
    config.set("time.N", "200")
    assert "N=200" in repr(config)
    config.validate()

    round_trip = fracwave.Config.from_text(config.to_text())
    assert round_trip.to_text() == config.to_text()

    result = config.run()
    assert len(result.t) == 201
    assert result.e_raw[-1] < result.e_raw[0], "energy must decrease under damping"
    assert result.identity_residual() < 1e-10, result.identity_residual()
    assert len(result.x) == len(result.u) == len(result.v) == 201

    bad = fracwave.Config.preset("example1_desk")
    bad.set("fractional.alpha", "1.5")
    try:
        bad.validate()
    except ValueError as e:
        assert "0 < alpha < 1" in str(e)
    else:
        sys.exit("invalid alpha must raise ValueError")

    dt = 0.005
    samples = [i * dt for i in range(201)]
    oracle = fracwave.caputo_derivative(samples, 0.5, 1.0, dt)
    assert abs(oracle - math.erf(1.0)) < 1e-6, oracle

    series = fracwave.diffusive_force_series([1.0] * 201, 0.5, 1.0, 100.0, 20_000, dt)
    rel_err = abs(series[200] - math.erf(1.0)) / math.erf(1.0)
    assert rel_err < 0.02, rel_err

    print("smoke test passed")


if __name__ == "__main__":
    main()
