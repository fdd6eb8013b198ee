"""Command-line driver.

``mapchaos run`` executes a sweep (named preset or explicit flags) and
``mapchaos check`` runs the invariant suite.  A plain ``key = value`` config
file can seed any run flag; command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import math
import sys

from .backend import active_backend
from .checks import run_invariant_suite
from .dynamics import IntegratorConfig
from .ensemble import SamplingSpec
from .experiments import (
    ADIABATIC_DT,
    MAPPING_DT,
    PRESETS,
    HistogramSpec,
    RunSpec,
    preset_spec,
    run_experiment,
    write_outputs,
)
from .lyapunov import LyapunovConfig
from .model import ModelParams


def _float_list(text: str):
    try:
        return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc


def _float_range(text: str):
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}, expected lo:hi") from exc


# flag name -> (dest, converter); shared by the CLI and the config file
RUN_OPTIONS = {
    "system": ("system", str),
    "coupling": ("coupling", _float_list),
    "theta": ("theta", _float_list),
    "energy": ("energy", float),
    "samples": ("samples", int),
    "segment-time": ("segment_time", float),
    "segments": ("segments", int),
    "dt": ("dt", float),
    "d0": ("d0", float),
    "seed": ("seed", int),
    "gamma": ("gamma", float),
    "omega-x": ("omega_x", float),
    "omega-y": ("omega_y", float),
    "well-distance": ("well_distance", float),
    "depsilon": ("depsilon", float),
    "bins": ("bins", float),
    "range": ("range", _float_range),
    "workers": ("workers", int),
    "out": ("out", str),
    "phase-mode": ("phase_mode", str),
    "metric": ("metric", str),
    "averaging": ("averaging", str),
}

DEFAULTS = {
    "system": "mapping",
    "coupling": None,
    "theta": None,
    "energy": 28.0,
    "samples": 40,
    "segment_time": 24.0,
    "segments": 10,
    "dt": None,  # resolved per system kind
    "d0": 1e-7,
    "seed": 7,
    "gamma": 0.5,
    "omega_x": 1.0,
    "omega_y": math.sqrt(2.0),
    "well_distance": 2.0,
    "depsilon": 0.173,
    "bins": 0.05,
    "range": (-0.2, 2.0),
    "workers": 1,
    "out": None,
    "phase_mode": "random",
    "metric": "standard",
    "averaging": "consecutive",
}


def _read_config(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SystemExit(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, text = line.partition("=")
            key = key.strip()
            if key not in RUN_OPTIONS:
                raise SystemExit(f"{path}:{lineno}: unknown config key {key!r}")
            dest, conv = RUN_OPTIONS[key]
            try:
                values[dest] = conv(text.strip())
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise SystemExit(f"{path}:{lineno}: {exc}") from exc
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapchaos",
        description="Exponent-distribution sweeps for the two-well "
                    "nonadiabatic model and its lower adiabatic reference.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep (preset or explicit flags)")
    run.add_argument("--preset", choices=PRESETS,
                     help="named reproduction run; explicit flags override its settings")
    run.add_argument("--config", help="key = value file mirroring the flags")
    for flag, (dest, conv) in RUN_OPTIONS.items():
        if conv in (str, int, float):
            run.add_argument(f"--{flag}", dest=dest, type=conv, default=None)
        else:
            run.add_argument(f"--{flag}", dest=dest, type=conv, default=None)

    check = sub.add_parser("check", help="run the invariant suite")
    check.add_argument("--quick", action="store_true",
                       help="smaller point and trajectory counts (smoke test)")
    return parser


def _resolve(args) -> dict:
    """defaults < preset < config file < command line"""
    settings = dict(DEFAULTS)
    if args.preset is not None:
        base = preset_spec(args.preset)
        settings["system"] = base.system_kind
        settings["coupling"] = base.j_values
        settings["theta"] = base.theta_values
        settings["dt"] = base.integrator.dt
    if args.config is not None:
        settings.update(_read_config(args.config))
    for dest in (dest for dest, _ in RUN_OPTIONS.values()):
        value = getattr(args, dest)
        if value is not None:
            settings[dest] = value
    if settings["dt"] is None:
        settings["dt"] = MAPPING_DT if settings["system"] == "mapping" else ADIABATIC_DT
    return settings


def _spec_from_settings(s: dict) -> RunSpec:
    lo, hi = s["range"]
    params = ModelParams(
        omega_x=s["omega_x"],
        omega_y=s["omega_y"],
        a=s["well_distance"],
        theta=s["theta"][0] if s["theta"] else ModelParams.theta,
        J=s["coupling"][0] if s["coupling"] else ModelParams.J,
        eps_a=0.0,
        eps_b=s["depsilon"],
        gamma=s["gamma"],
    )
    return RunSpec(
        model=params,
        integrator=IntegratorConfig(dt=s["dt"], t_final=s["segment_time"]),
        lyapunov=LyapunovConfig(
            segment_time=s["segment_time"],
            n_segments=s["segments"],
            d0=s["d0"],
            seed=s["seed"],
            metric=s["metric"],
            averaging=s["averaging"],
        ),
        sampling=SamplingSpec(e0=s["energy"], n_samples=s["samples"],
                              seed=s["seed"], phase_mode=s["phase_mode"]),
        system_kind=s["system"],
        j_values=s["coupling"],
        theta_values=s["theta"],
        histogram=HistogramSpec(bin_width=s["bins"], lo=lo, hi=hi),
        workers=s["workers"],
        output_dir=s["out"],
    )


def _run(args) -> int:
    settings = _resolve(args)
    spec = _spec_from_settings(settings)
    print(f"# backend: {active_backend()}")
    cells = run_experiment(spec)
    for (system, j, th), cell in cells.items():
        s = cell.summary
        mode = s["mode_bin"]
        mode_txt = f"[{mode[0]:.2f},{mode[1]:.2f})" if mode else "n/a"
        med = f"{s['median']:.4f}" if s["median"] is not None else "n/a"
        iqr = f"{s['iqr']:.4f}" if s["iqr"] is not None else "n/a"
        print(f"{system} J={j:g} theta={th:.6g}: median={med} iqr={iqr} "
              f"mode_bin={mode_txt} failed={s['failed']}/{s['n_samples']}")
    if spec.output_dir is not None:
        for path in write_outputs(cells, spec.output_dir):
            print(f"wrote {path}")
    return 0


def _check(args) -> int:
    results = run_invariant_suite(quick=args.quick)
    failed = 0
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        print(f"{tag}  {res.name}: {res.detail}")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed"
          + (f" ({failed} failed)" if failed else ""))
    return 1 if failed else 0


def _merge_dash_values(argv):
    """Join flags with values that start with '-' (e.g. --range -0.2:2.0)
    into --flag=value form so argparse does not read them as options."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--range", "--coupling", "--theta") and i + 1 < len(argv) \
                and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_merge_dash_values(list(argv)))
    if args.command == "run":
        return _run(args)
    return _check(args)


if __name__ == "__main__":
    sys.exit(main())
