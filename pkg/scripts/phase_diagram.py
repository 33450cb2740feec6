#!/usr/bin/env python3
"""Predicted vs measured number of co-moving bound modes over a (nu, v) grid.

The prediction is 1 + floor(nu*) with the mass-renormalized depth; the
measurement seeds boosted probe modes and counts those that stay in the
co-moving window.  Results go to OUT/sweep.csv and OUT/sweep.json.

    python scripts/phase_diagram.py --nu 0.5:1.5:0.25 --velocity 0:1.8:0.3 --tmax 200
"""
import argparse
from pathlib import Path

from dwm.cli import _floats as grid
from dwm.scenarios import BUILTINS, make_params, sweep, write_sweep
from dwm.spectral import onset_velocity


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nu", default="0.5:1.5:0.25")
    ap.add_argument("--velocity", default="0:1.8:0.3")
    ap.add_argument("--tmax", type=float, default=200.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--predict-only", action="store_true")
    ap.add_argument("--out", type=Path, default=Path("out/phase_diagram"))
    args = ap.parse_args()

    base = make_params({"tmax": args.tmax}, BUILTINS["fig4a"])
    rows = sweep(grid(args.nu), grid(args.velocity), base, workers=args.workers,
                 measure=not args.predict_only)
    write_sweep(rows, args.out)
    print(f"{'nu':>6} {'v':>6} {'nu*':>8} {'pred':>5} {'meas':>5}")
    for r in rows:
        print(f"{r['nu']:6.3f} {r['v']:6.3f} {r.get('nu_star', float('nan')):8.4f} "
              f"{r.get('predicted_bound_count', '-'):>5} {r.get('measured_localized_count', '-'):>5}")
    for nu in sorted({r["nu"] for r in rows}):
        print(f"nu={nu:.3f}: next mode predicted from v={onset_velocity(nu):.4f}")


if __name__ == "__main__":
    main()
