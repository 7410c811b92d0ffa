"""Command-line interface: windows, schedule, sweep, and tips.

Exit codes: 0 success, 1 runtime failure, 2 configuration/parse failure.
Set TIPCUE_LOG=DEBUG|INFO|WARNING for verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from datetime import datetime, timedelta, timezone

from .config import ConfigError, load_scenario
from .model import Schedule, ScheduledCue, WindowSet
from .orbits import SamplingConfig, compute_all_windows
from .scenario import ScenarioSpec, build_cues, run_schedule, run_sweep
from .scheduling import OptimizerConfig
from .tips import TipScoringParams, ais_error_km, load_predictions, tip_from_observation

logger = logging.getLogger("tipcue")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _parse_epoch(iso: str) -> datetime:
    return datetime.fromisoformat(iso.replace("Z", "+00:00")).astimezone(timezone.utc)


def _iso(epoch: datetime, t_s: float) -> str:
    return (epoch + timedelta(seconds=t_s)).isoformat().replace("+00:00", "Z")


def _apply_overrides(spec: ScenarioSpec, args) -> ScenarioSpec:
    if getattr(args, "seed", None) is not None:
        spec = replace(spec, seed=args.seed)
    opt = spec.optimizer
    changed = False
    eta, eps, iters = opt.eta, opt.epsilon, opt.max_iters
    if getattr(args, "eta", None) is not None:
        eta, changed = args.eta, True
    if getattr(args, "eps", None) is not None:
        eps, changed = args.eps, True
    if getattr(args, "max_iters", None) is not None:
        iters, changed = args.max_iters, True
    if changed:
        spec = replace(spec, optimizer=OptimizerConfig(eta, eps, iters,
                                                       opt.lipschitz_estimate))
    if getattr(args, "rho", None) is not None:
        spec = replace(spec, penalty=replace(spec.penalty, rho=args.rho))
    if getattr(args, "t_img", None) is not None:
        spec = replace(spec, satellites=tuple(
            replace(s, dwell_time=args.t_img) for s in spec.satellites))
    if getattr(args, "sampling", None) is not None:
        spec = replace(spec, sampling=replace(spec.sampling, mode=args.sampling))
    if getattr(args, "lam", None) is not None:
        spec = replace(spec, ranking=replace(spec.ranking,
                                             availability_weight=args.lam))
    return spec


def _horizon_empty(spec: ScenarioSpec) -> bool:
    return spec.horizon[1] <= spec.horizon[0]


def _write_windows_csv(path: str, windows: dict[str, WindowSet]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cue_id", "satellite_id", "start", "end"])
        for cue_id in sorted(windows):
            for iv in windows[cue_id].intervals:
                writer.writerow([cue_id, iv.satellite_id, repr(iv.start), repr(iv.end)])


def _satellite_summary(windows: dict[str, WindowSet], epoch: datetime) -> list[str]:
    spans: dict[str, list[tuple[float, float]]] = {}
    for w in windows.values():
        for iv in w.intervals:
            spans.setdefault(iv.satellite_id, []).append((iv.start, iv.end))
    lines = []
    for sat_id in sorted(spans):
        merged: list[list[float]] = []
        for s, e in sorted(spans[sat_id]):
            if merged and s <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], e)
            else:
                merged.append([s, e])
        parts = ", ".join(f"{_iso(epoch, s)}..{_iso(epoch, e)} ({e - s:.0f} s)"
                          for s, e in merged)
        lines.append(f"satellite {sat_id}: {len(merged)} window(s): {parts}")
    return lines


def cmd_windows(args) -> int:
    spec = _apply_overrides(load_scenario(args.scenario), args)
    os.makedirs(args.out, exist_ok=True)
    out_csv = os.path.join(args.out, "windows.csv")
    if _horizon_empty(spec):
        _write_windows_csv(out_csv, {})
        print("empty horizon: no windows computed")
        return EXIT_OK
    cues = build_cues(spec)
    windows = compute_all_windows(cues, list(spec.satellites), spec.sampling)
    _write_windows_csv(out_csv, windows)
    epoch = _parse_epoch(spec.epoch_iso)
    for line in _satellite_summary(windows, epoch):
        print(line)
    nonempty = sum(1 for w in windows.values() if not w.is_empty)
    print(f"cues={len(cues)} with_windows={nonempty} -> {out_csv}")
    return EXIT_OK


def schedule_to_json(schedule: Schedule, spec: ScenarioSpec, feasible_count: int,
                     k_star: int) -> dict:
    epoch = _parse_epoch(spec.epoch_iso)
    return {
        "epoch": spec.epoch_iso,
        "seed": spec.seed,
        "lambda": spec.ranking.availability_weight,
        "feasible_count": feasible_count,
        "k_star": k_star,
        "phase_counts": {"binary_search": schedule.phase_counts[0],
                         "refinement": schedule.phase_counts[1]},
        "total_utility": schedule.total_utility,
        "entries": [
            {
                "cue_id": e.cue_id,
                "satellite_id": e.satellite_id,
                "time_s": e.time,
                "time_iso": _iso(epoch, e.time),
                "utility": e.utility_at_time,
            }
            for e in schedule.entries
        ],
    }


def load_schedule_json(path: str) -> Schedule:
    """Rebuild a Schedule from cmd_schedule output (for round-trip validation)."""
    with open(path) as fh:
        doc = json.load(fh)
    entries = tuple(ScheduledCue(e["cue_id"], e["time_s"], e["satellite_id"], e["utility"])
                    for e in doc["entries"])
    return Schedule(entries, doc["total_utility"],
                    (doc["phase_counts"]["binary_search"], doc["phase_counts"]["refinement"]))


def _write_traces(path: str, traces) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prefix_k", "iteration", "loss"])
        for k, losses in traces:
            for i, loss in enumerate(losses):
                writer.writerow([k, i, repr(loss)])


def cmd_schedule(args) -> int:
    spec = _apply_overrides(load_scenario(args.scenario), args)
    os.makedirs(args.out, exist_ok=True)
    if _horizon_empty(spec):
        empty = Schedule((), 0.0, (0, 0))
        with open(os.path.join(args.out, "schedule.json"), "w") as fh:
            json.dump(schedule_to_json(empty, spec, 0, 0), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print("scheduled=0 binary=0 refine=0 u_total=0.0")
        return EXIT_OK
    result = run_schedule(spec)
    sched = result.schedule
    json_path = os.path.join(args.out, "schedule.json")
    with open(json_path, "w") as fh:
        json.dump(schedule_to_json(sched, spec, result.feasible_count, result.k_star),
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_traces(os.path.join(args.out, "loss_trace.csv"), result.loss_traces)
    b, r = sched.phase_counts
    print(f"scheduled={len(sched.entries)} binary={b} refine={r} "
          f"u_total={sched.total_utility!r}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _apply_overrides(load_scenario(args.scenario), args)
    lambdas = [float(x) for x in args.lambdas.split(",") if x.strip() != ""]
    if not lambdas or any(not (0.0 <= v <= 1.0) for v in lambdas):
        raise ConfigError(f"bad lambda list: {args.lambdas!r}")
    os.makedirs(args.out, exist_ok=True)
    sweep = run_sweep(spec, lambdas)
    csv_path = os.path.join(args.out, "sweep.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "binary", "refine", "total", "u_total"])
        for row in sweep.rows:
            writer.writerow([repr(row.lam), row.binary_count, row.refinement_count,
                             row.total_count, repr(row.u_total)])
    for row, res in zip(sweep.rows, sweep.results):
        _write_traces(os.path.join(args.out, f"loss_trace_lambda_{row.lam:g}.csv"),
                      res.loss_traces)
    for row in sweep.rows:
        print(f"lambda={row.lam:g} binary={row.binary_count} refine={row.refinement_count} "
              f"total={row.total_count} u_total={row.u_total!r}")
    print(f"-> {csv_path}")
    return EXIT_OK


def cmd_tips(args) -> int:
    if not os.path.exists(args.predictions):
        raise ConfigError(f"predictions file not found: {args.predictions}")
    try:
        rows = load_predictions(args.predictions)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    params = TipScoringParams(args.theta, args.alpha, args.delta_lead)
    os.makedirs(args.out, exist_ok=True)
    out_csv = os.path.join(args.out, "tips.csv")
    count = 0
    with open(out_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "lat", "lon", "error_km", "score"])
        for row in rows:
            obs = row.observation()
            tip = tip_from_observation(obs, params)
            if tip is None:
                continue
            writer.writerow([repr(row.time), repr(row.act_lat), repr(row.act_lon),
                             repr(ais_error_km(obs)), repr(tip.score)])
            count += 1
    print(f"tips={count} -> {out_csv}")
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, scenario_required: bool = True) -> None:
    p.add_argument("--scenario", required=scenario_required, help="scenario TOML file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="ranking availability weight in [0,1]")
    p.add_argument("--eta", type=float, default=None, help="PGD step size")
    p.add_argument("--rho", type=float, default=None, help="penalty weight")
    p.add_argument("--eps", type=float, default=None, help="convergence threshold")
    p.add_argument("--max-iters", type=int, default=None, help="PGD iteration cap")
    p.add_argument("--t-img", type=float, default=None, help="imaging dwell time (s)")
    p.add_argument("--sampling", choices=["theoretical", "practical", "algorithmic"],
                   default=None, help="window sampling mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tipcue",
        description="Tip-and-cue tasking: windows, schedules, sweeps, tips")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("windows", help="compute per-cue feasibility windows")
    _add_common(p)
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("schedule", help="run the full scheduling pipeline")
    _add_common(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("sweep", help="schedule across ranking weights")
    _add_common(p)
    p.add_argument("--lambdas", default="0,0.25,0.5,0.75,1",
                   help="comma-separated ranking weights")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tips", help="score tips from a predictions file")
    p.add_argument("--predictions", required=True, help="predictions CSV")
    p.add_argument("--out", default="out")
    p.add_argument("--theta", type=float, default=3.0, help="trigger threshold (km)")
    p.add_argument("--alpha", type=float, default=0.5, help="deviation weight")
    p.add_argument("--delta-lead", type=float, default=3.0, help="lead time (hours)")
    p.set_defaults(func=cmd_tips)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("TIPCUE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failure
        logger.exception("command failed")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
