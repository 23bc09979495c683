"""Smoke test for the kinlab Python extension."""

import json
import math
import tempfile
from pathlib import Path

import kinlab

CONFIG = {
    "grid": {"n": 32},
    "noise": {"kind": "multiplicative", "K": 2, "amplitude": 0.3, "shape": "sin"},
    "solver": {"eta": 0.02, "t_end": 0.1, "snapshots": [0.05]},
    "initial": {"kind": "trig", "mean": 0.1, "terms": [{"k": [1, 0], "sin": 0.5}]},
    "initial_pair": {"kind": "constant", "c": 0.0},
    "ensemble_size": 4,
    "master_seed": 7,
    "checks": {"time_samples": 4},
}


def main():
    grid = kinlab.Grid(32)
    assert len(grid) == 32 and math.isclose(grid.dx, 1 / 32)

    psi = kinlab.Psi(0.2)
    assert math.isclose(psi.psi1(0.05) + psi.psi1(-0.05), 1.0)
    assert math.isclose(psi.psi2(0.0), 0.2 / 6)
    assert psi.upsilon(0.3, 0.1) > 0.0
    assert psi.check(200)["pass"]

    cfg = kinlab.Config.from_json(json.dumps(CONFIG))
    assert cfg.path_seeds()[0] == kinlab.path_seed(7, 0)
    a = cfg.simulate_path(cfg.path_seeds()[0])
    b = cfg.simulate_path(cfg.path_seeds()[0])
    assert a["snapshots"] == b["snapshots"]
    assert len(a["times"]) == 3 and a["times"][0] == 0.0 and math.isclose(a["times"][-1], 0.1)
    assert a["cfl_violations"] == 0

    rep = cfg.run("contraction")
    assert rep["pass"], rep["failures"]
    assert rep["table"]["header"] == ["t", "e_pos_l1", "mc_stderr"]

    with tempfile.TemporaryDirectory() as out:
        cfg.run_and_write("energy", out)
        manifest = json.loads((Path(out) / "energy_manifest.json").read_text())
        assert manifest["status"] == "completed"

    assert cfg.check("gamma")["pass"]
    assert kinlab.oracle("collapse")["pass"]
    assert kinlab.burgers_riemann(1.0, 0.0, 0.4, 1.0) == 1.0

    try:
        kinlab.Config.from_json('{"grid": {"n": 2}}')
    except ValueError:
        pass
    else:
        raise AssertionError("invalid config accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
