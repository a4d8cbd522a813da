#!/usr/bin/env python3
"""Bring up a review service with a small ready-made dataset for the UI
integration test. Prints one JSON line with the manifest paths and a
session config, then serves until killed."""

import argparse
import json
import sys
import tempfile
from pathlib import Path

import numpy as np
import uvicorn

from patternsynth.datafiles import save_dataset
from patternsynth.rdsim import Observation
from patternsynth.service import create_app


def build_fixture(root: Path) -> dict:
    rng = np.random.default_rng(0)
    pos = [Observation(rng.uniform(0.75, 1.0, (8, 8, 1)), meta={"seed": i})
           for i in range(8)]
    neg = [Observation(rng.uniform(0.0, 0.25, (8, 8, 1)), meta={"seed": i})
           for i in range(8)]
    pos_manifest = save_dataset(pos, root / "pos", "+")
    neg_manifest = save_dataset(neg, root / "neg", "-")
    config = {
        "params": {"K": 8, "N": 1, "D": [0.5], "R": [], "dynamics_id": "zero",
                   "observable": [0], "toroidal": False},
        "box": [[0.0, 1.0]],
        "free_params": ["D1"],
        "steady": {"epsilon": None, "T": 2.0, "t_max": 20.0, "dt": 0.1},
        "learner": {"max_depth": 2, "quant_levels": 16, "seed": 0,
                    "optimization_rounds": 1},
        "swarm": {"swarm_size": 3, "iterations": 2, "inertia": 0.7,
                  "cognitive": 1.49, "social": 1.49, "velocity_clamp": 0.2,
                  "seed": 0, "stop_when_positive": False, "workers": 1},
        "x0_seeds": [0, 1],
        "candidate_count": 3,
        "max_iterations": 10,
        "formula_override": "m >= 0.2",
    }
    return {
        "positive_manifest": str(pos_manifest),
        "negative_manifest": str(neg_manifest),
        "config": config,
    }


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, default=8140)
    args = parser.parse_args()
    root = Path(tempfile.mkdtemp(prefix="patternsynth-ui-test-"))
    fixture = build_fixture(root)
    fixture["data_root"] = str(root / "sessions")
    print(json.dumps(fixture), flush=True)
    app = create_app(root / "sessions")
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="error")
    return 0


if __name__ == "__main__":
    sys.exit(main())
