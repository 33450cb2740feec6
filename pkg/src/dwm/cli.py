"""Command line entry point: ``dwm <command> [options]``.

Exit status is 0 on success, 2 when a run is flagged physically invalid
(radiation reached the open lattice edges) and 1 on errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .boost import BeyondCriticalVelocity, dispersion, momentum_potential, momentum_potential_extrema, solve_boost
from .scenarios import (
    SCENARIO_IDS,
    ScenarioConfig,
    ScenarioError,
    make_params,
    run_scenario,
    sweep,
    write_sweep,
    _jsonable,
)

log = logging.getLogger("dwm")


def _formats(value: str) -> frozenset:
    fmts = frozenset(x.strip() for x in value.split(",") if x.strip())
    bad = fmts - {"csv", "json"}
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s): {', '.join(sorted(bad))}")
    return fmts


def _floats(value: str) -> list[float]:
    if ":" in value:
        start, stop, step = (float(x) for x in value.split(":"))
        return list(np.round(np.arange(start, stop + 0.5 * step, step), 12))
    return [float(x) for x in value.split(",") if x.strip()]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--format", type=_formats, default=frozenset({"csv", "json"}), help="comma list of csv,json")
    p.add_argument("--config", type=Path, help="JSON file of parameter overrides (flags win)")


def _physics(p: argparse.ArgumentParser, evolve: bool):
    p.add_argument("--potential", choices=["pt", "harmonic"])
    p.add_argument("--sites", type=int)
    p.add_argument("--nu", type=float)
    p.add_argument("--ratio", type=float, help="a/l")
    p.add_argument("--omega-a2", dest="omega_a2", type=float)
    p.add_argument("--center", type=float, help="well centre at t=0 (sites)")
    if evolve:
        p.add_argument("--velocity", type=float, help="drift speed v/(kappa a)")
        p.add_argument("--init", help="ground, excited or file:<path>")
        p.add_argument("--probe-nu", dest="probe_nu", type=float, help="well whose modes seed the run")
        p.add_argument("--boost-phase", dest="boost_phase", choices=["auto", "none"])
        p.add_argument("--dt", type=float)
        p.add_argument("--tmax", type=float)
        p.add_argument("--stride", type=int)
        p.add_argument("--window", type=float)
        p.add_argument("--adaptive", action="store_true", default=None)
    else:
        p.add_argument("--threshold", type=float)
        p.add_argument("--dump-states", dest="dump_states", help="comma list of eigenvector indices to write")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dwm", description="Bound states of drifting wells on a lattice")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="static spectrum, participation ratios and bound states")
    _common(p)
    _physics(p, evolve=False)

    p = sub.add_parser("evolve", help="time evolution with a drifting well")
    _common(p)
    _physics(p, evolve=True)

    p = sub.add_parser("boost", help="boost phase, gauge frequency and mass ratio")
    p.add_argument("--velocity", type=float, required=True)
    p.add_argument("--nu", type=float, help="also report the effective depth")

    for name, help_ in (("dispersion", "moving-frame dispersion E(k)"), ("wk", "momentum-space potential W(k)")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--velocity", type=float, required=True)
        p.add_argument("--kmin", type=float, default=-2 * np.pi)
        p.add_argument("--kmax", type=float, default=2 * np.pi)
        p.add_argument("--dk", type=float, default=0.01)
        p.add_argument("--out", type=Path, help="CSV path (default stdout)")
        if name == "wk":
            p.add_argument("--extrema", action="store_true", help="print stationary points as JSON instead")

    p = sub.add_parser("figure", help="reproduce a built-in scenario")
    p.add_argument("id", choices=SCENARIO_IDS)
    _common(p)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="parameter override")

    p = sub.add_parser("sweep", help="predicted vs measured bound-mode counts over (nu, v)")
    _common(p)
    p.add_argument("--nu", type=_floats, required=True, help="comma list or start:stop:step")
    p.add_argument("--velocity", type=_floats, required=True, help="comma list or start:stop:step")
    p.add_argument("--tmax", type=float, default=200.0)
    p.add_argument("--ratio", type=float, default=0.2)
    p.add_argument("--predict-only", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _overrides(args, keys) -> dict:
    out = {}
    if getattr(args, "config", None):
        out.update(json.loads(Path(args.config).read_text()))
    for k in keys:
        val = getattr(args, k, None)
        if val is not None:
            out[k] = val
    return out


_SPECTRUM_KEYS = ("potential", "sites", "nu", "ratio", "omega_a2", "center", "threshold")
_EVOLVE_KEYS = ("potential", "sites", "nu", "ratio", "omega_a2", "center", "velocity", "init", "probe_nu",
                "boost_phase", "dt", "tmax", "stride", "window", "adaptive")


def _report(result, out) -> int:
    summary = {k: v for k, v in result.summary.items() if k != "params"}
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    if out is not None:
        log.info("wrote %d files to %s", len(result.files), out)
    return 0 if result.valid else 2


def cmd_spectrum(args) -> int:
    ov = _overrides(args, _SPECTRUM_KEYS)
    ov["mode"] = "spectrum"
    result = run_scenario(ScenarioConfig("custom", ov, args.out, args.format))
    if args.dump_states and args.out is not None:
        from .core import write_state_csv
        for j in (int(x) for x in args.dump_states.split(",")):
            result.files.append(write_state_csv(result.spectrum.state(j), Path(args.out) / f"state_{j}.csv"))
    return _report(result, args.out)


def cmd_evolve(args) -> int:
    ov = _overrides(args, _EVOLVE_KEYS)
    ov["mode"] = "evolve"
    return _report(run_scenario(ScenarioConfig("custom", ov, args.out, args.format)), args.out)


def cmd_figure(args) -> int:
    ov = _overrides(args, ())
    for item in args.set:
        key, _, val = item.partition("=")
        ov[key.strip()] = _parse_value(val.strip())
    out = args.out if args.out is not None else Path("out") / args.id
    return _report(run_scenario(ScenarioConfig(args.id, ov, out, args.format)), out)


def cmd_boost(args) -> int:
    bp = solve_boost(args.velocity)
    data = bp.as_dict()
    if args.nu is not None:
        from .boost import effective_depth
        from .spectral import predicted_bound_count
        data["nu"] = args.nu
        data["nu_star"] = effective_depth(args.nu, bp.mass_ratio)
        data["predicted_bound_count"] = predicted_bound_count(args.nu, args.velocity)
    print(json.dumps(_jsonable(data), indent=2))
    return 0


def _emit_curve(k, values, header, out):
    lines = [header] + [f"{format(a, '.17g')},{format(b, '.17g')}" for a, b in zip(k, values)]
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    return 0


def _kgrid(args):
    if args.dk <= 0 or args.kmax < args.kmin:
        raise ValueError("need dk > 0 and kmax >= kmin")
    n = int(np.floor((args.kmax - args.kmin) / args.dk + 1e-9)) + 1
    return args.kmin + args.dk * np.arange(n)


def cmd_dispersion(args) -> int:
    k = _kgrid(args)
    return _emit_curve(k, dispersion(k, solve_boost(args.velocity)), "k,E", args.out)


def cmd_wk(args) -> int:
    if args.extrema:
        pts = [{"k": e.k, "W": e.w, "kind": e.kind} for e in momentum_potential_extrema(args.velocity)]
        print(json.dumps(pts, indent=2))
        return 0
    k = _kgrid(args)
    return _emit_curve(k, momentum_potential(k, args.velocity), "k,W", args.out)


def cmd_sweep(args) -> int:
    ov = _overrides(args, ())
    ov.update(tmax=args.tmax, ratio=args.ratio, mode="evolve")
    base = make_params(ov)
    rows = sweep(args.nu, args.velocity, base, workers=args.workers, measure=not args.predict_only)
    out = args.out if args.out is not None else Path("out") / "sweep"
    write_sweep(rows, out, args.format)
    print(json.dumps(_jsonable(rows), indent=2))
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "figure": cmd_figure,
    "boost": cmd_boost,
    "dispersion": cmd_dispersion,
    "wk": cmd_wk,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ScenarioError, BeyondCriticalVelocity, ValueError, RuntimeError, OSError) as exc:
        print(f"dwm: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
