#!/usr/bin/env python3
"""Run every example config under scripts/configs into out/experiments.

Exit code is nonzero if any run fails its asserted invariants.
"""
import json
import pathlib
import sys

from cplab.cli import main

HERE = pathlib.Path(__file__).parent
OUT = HERE.parent / "out" / "experiments"


def run():
    failures = 0
    for cfg_path in sorted((HERE / "configs").glob("*.json")):
        command = json.loads(cfg_path.read_text())["command"]
        code = main([command, "--config", str(cfg_path), "--out", str(OUT)])
        print(f"  {cfg_path.name}: exit {code}")
        if code != 0:
            failures += 1
    print(f"reports in {OUT}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(run())
