#!/usr/bin/env python3
"""Run every built-in scenario and write its outputs under OUT/<id>/.

    python scripts/reproduce_figures.py [--out out] [--only fig4b,fig5c]
"""
import argparse
import json
import time
from pathlib import Path

from dwm.scenarios import SCENARIO_IDS, ScenarioConfig, run_scenario

KEYS = ("bound_count", "bound_energies", "localized_fraction_final", "tail_norm_final",
        "norm_drift_max", "edge_norm_max", "valid")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--only", help="comma list of scenario ids")
    args = ap.parse_args()
    ids = args.only.split(",") if args.only else [s for s in SCENARIO_IDS if s != "custom"]
    for sid in ids:
        t0 = time.perf_counter()
        r = run_scenario(ScenarioConfig(sid, {}, args.out / sid))
        brief = {k: r.summary[k] for k in KEYS if k in r.summary}
        print(f"{sid:6s} {time.perf_counter() - t0:6.1f}s {json.dumps(brief)}")


if __name__ == "__main__":
    main()
