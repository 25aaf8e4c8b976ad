"""
Command-line interface
Every data command builds its primary output as text, writes it to stdout or
--output FILE, and records a RunManifest beside output files.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from tentctl import __version__
from tentctl.cantor_stats import cycle_point_cloud, histogram_rows, sample_first_type
from tentctl.config import load_presets, settings
from tentctl.control_design import classify_theta, count_cycles, divisors, theta_from_offset, RegimeOffset
from tentctl.emitters import (
    CYCLE_CSV_HEADER,
    GRAPH_CSV_HEADER,
    HISTOGRAM_CSV_HEADER,
    TRACE_CSV_HEADER,
    cycle_csv_rows,
    to_csv,
    to_json,
    to_jsonl,
)
from tentctl.errors import ParameterError
from tentctl.exact_oracle import enumerate_cycles
from tentctl.hp_real import parse_rational
from tentctl.manifest import RunManifest, write_output
from tentctl.orbit_finder import (
    NumericCycle,
    SearchConfig,
    default_threshold,
    extract_cycle,
    grid_search,
    iterate_controlled,
    resolve_precision,
    search_seeds,
    trace_rows,
    verify_against_oracle,
)
from tentctl.tent_map import ControlConfig, MapParams, Regime, graph_rows

DEFAULT_GRID = 20

# ParameterError.field -> flag named in error messages
FIELD_FLAGS = {
    "T": "--period",
    "grid_size": "--grid",
    "max_iters": "--max-iters",
    "value": "--seed-value",
    "points": "--input",
    "symbols": "--input",
}

Handler = Tuple[str, int]


def _flag(field: str) -> str:
    return FIELD_FLAGS.get(field, f"--{field.replace('_', '-')}" if field else "--?")


def _require(value: Any, field: str) -> Any:
    if value is None:
        raise ParameterError("this flag is required", field=field)
    return value


def _first(value: Any, fallback: Any) -> Any:
    return fallback if value is None else value


def _seed_values(raw: Optional[List[str]]) -> Optional[List[str]]:
    """Flatten repeated and comma-separated --seed-value flags"""
    if not raw:
        return None
    return [part.strip() for item in raw for part in item.split(",") if part.strip()]


def _checked_theta(params: MapParams, T: int, theta_text: str, regime_text: Optional[str], force: bool) -> Tuple[Regime, Fraction]:
    theta = parse_rational(theta_text, field="theta")
    regime = classify_theta(params, T, theta)
    if regime is None:
        if not force:
            raise ParameterError(f"theta={theta} lies outside both regime intervals (use --force to run anyway)", field="theta")
        logging.warning(f"theta={theta} lies outside both regime intervals; proceeding because of --force")
        return Regime.parse(regime_text or "pos"), theta
    if regime_text is not None and Regime.parse(regime_text) is not regime:
        logging.warning(f"theta={theta} belongs to the {regime.value} regime, not {regime_text}")
    return regime, theta


def _schemes(args, params: MapParams, T: int, preset: Dict[str, Any]) -> List[Tuple[Regime, Optional[str], Optional[Fraction]]]:
    """(regime, offset, theta) triples to run"""
    if args.theta is not None:
        regime, theta = _checked_theta(params, T, args.theta, args.regime, args.force)
        return [(regime, None, theta)]
    if args.offset is not None:
        return [(Regime.parse(_require(args.regime, "regime")), args.offset, None)]
    if preset.get("schemes"):
        return [(Regime.parse(s["regime"]), s["offset"], None) for s in preset["schemes"]]
    raise ParameterError("either --offset (with --regime) or --theta is required", field="offset")


def _preset(name: Optional[str]) -> Dict[str, Any]:
    if not name:
        return {}
    presets = load_presets()
    if name not in presets:
        raise ParameterError(f"unknown preset {name!r} (known: {', '.join(sorted(presets))})", field="preset")
    return presets[name]


def cmd_count(args) -> Handler:
    return f"{count_cycles(args.period)}\n", 0


def cmd_enumerate(args) -> Handler:
    params = MapParams(args.H)
    records = [cycle.to_record() for cycle in enumerate_cycles(params, args.period)]
    if args.format == "csv":
        return to_csv(CYCLE_CSV_HEADER, cycle_csv_rows(records)), 0
    return to_jsonl(records), 0


def _write_trace(path: str, cfg: ControlConfig, seed: str, precision: int, args, threshold) -> Optional[NumericCycle]:
    search = SearchConfig.build(cfg, seed, precision, threshold=threshold, max_iters=args.max_iters, window=args.window)
    trace = iterate_controlled(search)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(to_csv(TRACE_CSV_HEADER, trace_rows(trace)))
    logging.info(f"Trace of {len(trace.states)} states written to {path} ({trace.verdict.kind.value})")
    if not trace.verdict.converged:
        return None
    cycle = extract_cycle(trace, cfg.T, search.residual_threshold)
    return cycle if cycle is None else replace(cycle, seed=seed)


def cmd_find(args) -> Handler:
    preset = _preset(args.preset)
    params = MapParams(_require(_first(args.H, preset.get("H")), "H"))
    T = int(_require(_first(args.period, preset.get("period")), "T"))
    args.precision = resolve_precision(params, T, _first(args.precision, preset.get("precision")))
    threshold = _first(args.threshold, preset.get("threshold"))
    seeds = _seed_values(args.seed_value) or preset.get("seeds")
    schemes = _schemes(args, params, T, preset)

    records = []
    for regime, offset, theta in schemes:
        options = dict(
            precision=args.precision,
            threshold=threshold,
            max_iters=args.max_iters,
            window=args.window,
            workers=args.workers,
        )
        if args.trace:
            if not seeds or len(seeds) != 1 or len(schemes) != 1:
                raise ParameterError("--trace needs exactly one seed and one control scheme", field="trace")
            if theta is None:
                theta = theta_from_offset(params, T, regime, RegimeOffset(parse_rational(offset, field="offset")))
            cycle = _write_trace(args.trace, ControlConfig(params, T, regime, theta), seeds[0], args.precision, args, threshold)
            cycles = [cycle] if cycle is not None else []
        elif seeds:
            cycles = search_seeds(params, T, regime, seeds, offset=offset, theta=theta, **options)
        else:
            cycles = grid_search(params, T, regime, offset, _first(args.grid, DEFAULT_GRID), theta=theta, **options)
        records.extend(cycle.to_record() for cycle in cycles)
    return to_jsonl(records), 0


def _read_jsonl(path: str) -> List[Dict[str, Any]]:
    try:
        stream = sys.stdin if path == "-" else open(path, "r", encoding="utf-8")
        with stream:
            return [json.loads(line) for line in stream if line.strip()]
    except (OSError, json.JSONDecodeError) as e:
        raise ParameterError(f"cannot read cycles from {path}: {e}", field="input")


def cmd_verify(args) -> Handler:
    params = MapParams(args.H)
    found = [NumericCycle.from_record(record) for record in _read_jsonl(args.input)]
    exact = [cycle for tau in divisors(args.period) for cycle in enumerate_cycles(params, tau)]
    if args.tol is not None:
        tol = parse_rational(args.tol, field="tol")
    elif found and all(cycle.threshold is not None for cycle in found):
        tol = 10 * max(cycle.threshold.to_fraction() for cycle in found)
    else:
        tol = (10 * default_threshold(resolve_precision(params, args.period))).to_fraction()
    logging.info(f"Matching within tol={float(tol):.1e}")
    report = verify_against_oracle(found, exact, tol)
    logging.info(f"{len(report.matches)} of {len(found)} cycles matched the oracle")
    return to_json(report.to_dict(exact)), 0 if report.ok else 1


def cmd_graph(args) -> Handler:
    params = MapParams(args.H)
    if args.theta is not None:
        regime, theta = _checked_theta(params, args.period, args.theta, args.regime, args.force)
    else:
        regime = Regime.parse(_require(args.regime, "regime"))
        offset = RegimeOffset(parse_rational(_require(args.offset, "offset"), field="offset"))
        theta = theta_from_offset(params, args.period, regime, offset)
    cfg = ControlConfig(params, args.period, regime, theta)
    args.precision = resolve_precision(params, args.period, args.precision)
    return to_csv(GRAPH_CSV_HEADER, graph_rows(cfg, args.samples, args.precision)), 0


def cmd_cantor(args) -> Handler:
    if args.mode == "first-type":
        points = sample_first_type(args.depth, args.count, args.seed)
    else:
        params = MapParams(_require(args.H, "H"))
        T = _require(args.period, "T")
        cloud = cycle_point_cloud(
            params,
            T,
            regimes=args.regime or ("pos", "neg"),
            offsets=args.offset or (),
            mode=args.cloud,
            include_subcycles=args.subcycles,
            seeds=_seed_values(args.seed_value),
            grid_size=args.grid,
            precision=args.precision,
        )
        points = cloud.points
    return to_csv(HISTOGRAM_CSV_HEADER, histogram_rows(points, args.bins)), 0


def _strip_output(argv: List[str]) -> List[str]:
    stripped, skip = [], False
    for token in argv:
        if skip:
            skip = False
            continue
        if token == "--output":
            skip = True
            continue
        if token.startswith("--output="):
            continue
        stripped.append(token)
    return stripped


def cmd_replay(args) -> Handler:
    manifest = RunManifest.load(args.manifest)
    replay_args = build_parser().parse_args(_strip_output(manifest.argv))
    if replay_args.command in ("replay", "serve"):
        raise ParameterError(f"cannot replay a {replay_args.command} manifest", field="manifest")
    text, _ = replay_args.handler(replay_args)
    ok = manifest.matches(text)
    if not ok:
        logging.error(f"Replay of {args.manifest} produced different output")
    report = {"ok": ok, "command": manifest.command, "expected_digest": manifest.output_digest}
    return to_json(report), 0 if ok else 1


def cmd_serve(args) -> Handler:
    import uvicorn

    uvicorn.run("tentctl.index:app", host=args.host, port=args.port, log_level=settings.log_level.lower())
    return "", 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tentctl", description="Predictive control of tent-map periodic orbits")
    parser.add_argument("--version", action="version", version=f"tentctl {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write primary output to FILE (and FILE.manifest.json)")
    common.add_argument("--precision", type=int, help="significant digits (default: 1.05*T*log10(H) + 10)")

    control = argparse.ArgumentParser(add_help=False)
    control.add_argument("--regime", help="pos or neg")
    control.add_argument("--offset", help="regime offset c, |c| < 1")
    control.add_argument("--theta", help="control parameter as exact rational text, e.g. 9/8")
    control.add_argument("--force", action="store_true", help="run even when theta is outside both regimes")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", parents=[common], help="number of T-cycles")
    p.add_argument("--period", type=int, required=True)
    p.set_defaults(handler=cmd_count)

    p = sub.add_parser("enumerate", parents=[common], help="exact T-cycles")
    p.add_argument("--H", required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.set_defaults(handler=cmd_enumerate)

    p = sub.add_parser("find", parents=[common, control], help="numerical cycles of the controlled map")
    p.add_argument("--H")
    p.add_argument("--period", type=int)
    p.add_argument("--preset", help="named run from data/presets.json")
    p.add_argument("--grid", type=int, help=f"seed grid size G (default {DEFAULT_GRID})")
    p.add_argument("--seed-value", action="append", help="explicit seed(s); repeat or comma-separate")
    p.add_argument("--threshold", help="residual threshold (default 1e-(P-5))")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--trace", help="write the (n, x, U, Uhat) trace of a single seed to FILE")
    p.set_defaults(handler=cmd_find)

    p = sub.add_parser("verify", parents=[common], help="match find output against the exact oracle")
    p.add_argument("--H", required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--input", required=True, help="JSON-lines from find, or - for stdin")
    p.add_argument("--tol")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("graph", parents=[common, control], help="x, f, f^T, zeta, F on a uniform grid")
    p.add_argument("--H", required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--samples", type=int, default=2000)
    p.set_defaults(handler=cmd_graph)

    p = sub.add_parser("cantor", parents=[common], help="histogram of cycle points or first-type Cantor points")
    p.add_argument("--mode", choices=("cycles", "first-type"), required=True)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--depth", type=int, default=25)
    p.add_argument("--count", type=int, default=200000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--H")
    p.add_argument("--period", type=int)
    p.add_argument("--cloud", choices=("oracle", "finder"), default="oracle")
    p.add_argument("--regime", action="append")
    p.add_argument("--offset", action="append")
    p.add_argument("--grid", type=int)
    p.add_argument("--seed-value", action="append")
    p.add_argument("--subcycles", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(handler=cmd_cantor)

    p = sub.add_parser("replay", help="re-run a manifest and compare output digests")
    p.add_argument("--manifest", required=True)
    p.add_argument("--output")
    p.set_defaults(handler=cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="0.0.0.0")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)

    return parser


def _parameters(args) -> Dict[str, Any]:
    return {
        key: value
        for key, value in vars(args).items()
        if key not in ("handler", "output", "command") and value is not None
    }


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        stream=sys.stderr,
        format="%(levelname)s: %(message)s",
    )
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        text, code = args.handler(args)
        manifest = None
        if args.output and args.command not in ("replay", "serve"):
            manifest = RunManifest.for_output(args.command, _parameters(args), argv, text)
        write_output(text, args.output, manifest)
        return code
    except ParameterError as e:
        print(f"error: {_flag(e.field)}: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logging.error(f"{args.command} failed: {e}")
        return 1
