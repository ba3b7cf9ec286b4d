"""Command-line entry point: ``pdlsim single|sweep|presets``.

Exit codes: 0 on success, 2 for usage errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .detectors import DetectorSpec
from .errors import DivergentThermalMean, InvalidParameter, InvalidState, PdlSimError, ZeroProbabilityEvent
from .fock import PolarizationQubit
from .metrics import t_h_from_db
from .schemes import SCHEMES, T_STRATEGIES, SchemeConfig
from .sweep import (
    PRESETS,
    build_spec,
    evaluate,
    load_config,
    parse_complex,
    plot_script,
    resolve_output,
    rows_to_csv,
    rows_to_json,
    run_sweep,
    spec_summary,
)

EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _t_value(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--T must be a number or 'auto', got {text!r}") from None


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except InvalidParameter as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_physics_flags(p: argparse.ArgumentParser, sweep: bool) -> None:
    default = None if sweep else argparse.SUPPRESS
    p.add_argument("--pdl-db", type=float, default=default, help="PDL in dB (t_v = 1)")
    p.add_argument("--t-h", type=float, default=default, help="horizontal transmission, instead of --pdl-db")
    p.add_argument("--c1", type=_complex_arg, default=default, help="amplitude of |H> as 're,im'")
    p.add_argument("--c2", type=_complex_arg, default=default, help="amplitude of |V> as 're,im'")
    p.add_argument("--eta", type=float, default=default, help="detector efficiency; ideal detectors if omitted")
    p.add_argument("--dark", type=float, default=default, help="dark-count probability per time step")
    p.add_argument("--T", type=_t_value, default=default, help="correction parameter or 'auto'")
    p.add_argument("--t-strategy", choices=T_STRATEGIES, default=default,
                   help="amplifier gain selection with imperfect detectors")
    p.add_argument("--cutoff", type=int, default=default, help="per-mode Fock cutoff")
    p.add_argument("--out", default=default, help="output path (stdout if omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdlsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    single = sub.add_parser("single", help="evaluate one scheme at one parameter point")
    single.add_argument("--scheme", choices=SCHEMES, required=True)
    _add_physics_flags(single, sweep=False)
    single.add_argument("--format", choices=("json", "csv"), default="json")

    sweep = sub.add_parser("sweep", help="sweep PDL or detector efficiency")
    sweep.add_argument("--preset", choices=sorted(PRESETS))
    sweep.add_argument("--config", help="file of 'key = value' lines")
    sweep.add_argument("--variable", choices=("pdl_db", "eta"))
    sweep.add_argument("--range", nargs=3, metavar=("START", "STOP", "STEPS"))
    sweep.add_argument("--scheme", action="append", choices=SCHEMES, dest="schemes",
                       help="scheme to include (repeatable); default all")
    _add_physics_flags(sweep, sweep=True)
    sweep.add_argument("--format", choices=("csv", "json"))
    sweep.add_argument("--workers", type=int)
    sweep.add_argument("--plot-script", help="also write a gnuplot script for the CSV to this path")

    sub.add_parser("presets", help="list built-in sweep presets")
    return parser


def _single(args) -> int:
    ns = vars(args)
    if "t_h" in ns and "pdl_db" in ns:
        raise InvalidParameter("give either --pdl-db or --t-h, not both")
    t_h = ns["t_h"] if "t_h" in ns else t_h_from_db(ns.get("pdl_db", 0.0))
    qubit = PolarizationQubit(ns.get("c1", 2 ** -0.5), ns.get("c2", 2 ** -0.5))
    detector = "ideal"
    if "eta" in ns:
        detector = DetectorSpec(ns["eta"], ns.get("dark", 0.0))
    elif ns.get("dark", 0.0):
        raise InvalidParameter("--dark needs --eta")
    config = SchemeConfig(qubit, t_h, ns.get("T", "auto"), detector, ns.get("cutoff", 4),
                          ns.get("t_strategy", "balance"))
    record = evaluate(args.scheme, config)
    if args.format == "json":
        text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    else:
        keys = sorted(record)
        text = ",".join(keys) + "\n" + ",".join("" if record[k] is None else repr(record[k]) for k in keys) + "\n"
    _emit(text, ns.get("out"))
    return 0


def _sweep_overrides(args) -> dict:
    o = {}
    if args.preset:
        o["preset"] = args.preset
    if args.variable:
        o["variable"] = args.variable
    if args.range:
        o["start"], o["stop"], o["steps"] = float(args.range[0]), float(args.range[1]), int(args.range[2])
    if args.schemes:
        o["schemes"] = tuple(args.schemes)
    for key in ("pdl_db", "t_h", "c1", "c2", "eta", "dark", "T", "t_strategy", "cutoff", "out",
                "format", "workers"):
        value = getattr(args, key)
        if value is not None:
            o[key] = value
    if o.get("t_h") is not None and o.get("pdl_db") is not None:
        raise InvalidParameter("give either --pdl-db or --t-h, not both")
    return o


def _sweep(args) -> int:
    overrides = _sweep_overrides(args)
    spec = load_config(args.config, overrides) if args.config else build_spec(overrides)
    rows = run_sweep(spec)
    text = rows_to_csv(rows) if spec.format == "csv" else rows_to_json(rows)
    name = f"{args.preset or 'sweep'}.{spec.format}"
    out = resolve_output(spec.out, name)
    _emit(text, out)
    if args.plot_script:
        if out is None:
            raise InvalidParameter("--plot-script needs a CSV written to a file (--out)")
        Path(args.plot_script).write_text(plot_script(out, spec.variable))
    if out is not None:
        print(json.dumps({"rows": len(rows), "out": str(out), "spec": spec_summary(spec)}), file=sys.stderr)
    return 0


def _presets(_args) -> int:
    for name, values in sorted(PRESETS.items()):
        shown = {k: (list(v) if isinstance(v, tuple) else v) for k, v in values.items()}
        print(f"{name}: {json.dumps(shown)}")
    return 0


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"single": _single, "sweep": _sweep, "presets": _presets}[args.command]
    try:
        return handler(args)
    except (InvalidState, DivergentThermalMean, ZeroProbabilityEvent) as exc:
        print(f"pdlsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidParameter, PdlSimError) as exc:
        print(f"pdlsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"pdlsim: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
