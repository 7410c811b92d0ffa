"""Desk-scale experiment reproduction: synthetic cue pools, satellite
construction, the ranking-weight sweep, and a brute-force oracle for
small instances.

The default scenario is fully synthetic: three near-polar satellites are
placed so that each makes exactly one pass over the operating polygon
inside the horizon, which reproduces the structure (not the exact
numbers) of a real single-evening tasking run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .geo import EARTH_RADIUS_KM
from .model import Cue, FeasibilityConstraints, Satellite, Tip, WindowSet
from .orbits import (
    MU_EARTH_KM3_S2,
    OMEGA_EARTH_RAD_S,
    KeplerElements,
    SamplingConfig,
    compute_all_windows,
)
from .rng import SplitMix64, derive_seed
from .scheduling import (
    OptimizerConfig,
    PenaltyParams,
    RankingParams,
    ScheduleResult,
    delta_ij,
    delta_matrix,
    rank,
    schedule,
)
from .tips import (
    PredictionRow,
    TipScoringParams,
    build_dynamic_cue,
    build_static_cue,
    load_predictions,
    tip_from_observation,
)
from .model import utility_eval


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to rebuild one experiment deterministically."""

    epoch_iso: str
    horizon: tuple[float, float]
    lat_range: tuple[float, float]
    lon_range: tuple[float, float]
    n_static: int
    static_side_m: tuple[float, float]
    static_priority: tuple[float, float]
    static_peak_s: tuple[float, float]
    static_sigma_hours: tuple[float, float]
    constraints: FeasibilityConstraints
    satellites: tuple[Satellite, ...]
    sampling: SamplingConfig
    ranking: RankingParams = RankingParams()
    penalty: PenaltyParams = PenaltyParams()
    optimizer: OptimizerConfig = OptimizerConfig()
    seed: int = 0
    theta_km: float = 3.0
    alpha: float = 0.5
    delta_lead_hours: float = 3.0
    decay_per_hour: float = 0.2
    dynamic_side_m: float = 200.0
    predictions_path: Optional[str] = None

    def __post_init__(self):
        for lo, hi in (self.lat_range, self.lon_range, self.static_side_m,
                       self.static_priority, self.static_peak_s, self.static_sigma_hours):
            if hi < lo:
                raise ValueError("scenario ranges must be ordered lo <= hi")
        if self.n_static < 0:
            raise ValueError("n_static must be >= 0")


@dataclass(frozen=True)
class SweepRow:
    lam: float
    binary_count: int
    refinement_count: int
    total_count: int
    u_total: float

    def __post_init__(self):
        if self.total_count != self.binary_count + self.refinement_count:
            raise ValueError("total must equal binary + refinement")


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    results: tuple[ScheduleResult, ...] = field(compare=False, default=())


def generate_static(spec: ScenarioSpec, seed: Optional[int] = None) -> list[Cue]:
    """Synthetic fixed-area cues with uniform parameters from the spec ranges.

    Each cue draws from its own derived sub-stream, so the result does not
    depend on generation order or thread count.
    """
    base = spec.seed if seed is None else seed
    cues = []
    for i in range(spec.n_static):
        rng = SplitMix64(derive_seed(base, i))
        lat = rng.uniform(*spec.lat_range)
        lon = rng.uniform(*spec.lon_range)
        width = rng.uniform(*spec.static_side_m)
        height = rng.uniform(*spec.static_side_m)
        priority = rng.uniform(*spec.static_priority)
        t_peak = rng.uniform(*spec.static_peak_s)
        sigma_h = rng.uniform(*spec.static_sigma_hours)
        cues.append(build_static_cue((lat, lon), width, height, priority, t_peak,
                                     sigma_h, cue_id=f"static-{i:03d}",
                                     constraints=spec.constraints))
    return cues


def generate_dynamic(predictions, spec: ScenarioSpec) -> list[tuple[Tip, Cue]]:
    """Tips and moving-target cues from prediction/actual pairs.

    ``predictions`` is a path or a sequence of PredictionRow. Every row
    whose position error exceeds theta produces one tip and one cue; the
    cue footprint follows the predicted positions from the detection
    onward.
    """
    rows = load_predictions(predictions) if isinstance(predictions, (str, bytes)) \
        else sorted(predictions, key=lambda r: (r.mmsi, r.time))
    params = TipScoringParams(spec.theta_km, spec.alpha, spec.delta_lead_hours)
    by_vessel: dict[str, list[PredictionRow]] = {}
    for r in rows:
        by_vessel.setdefault(r.mmsi, []).append(r)
    out: list[tuple[Tip, Cue]] = []
    for mmsi in sorted(by_vessel):
        vrows = by_vessel[mmsi]
        k = 0
        for r in vrows:
            tip = tip_from_observation(r.observation(), params,
                                       region_half_m=spec.dynamic_side_m / 2.0)
            if tip is None:
                continue
            waypoints = [(w.time, w.pred_lat, w.pred_lon) for w in vrows if w.time >= r.time]
            cue = build_dynamic_cue(tip, waypoints, spec.decay_per_hour,
                                    spec.dynamic_side_m, cue_id=f"dyn-{mmsi}-{k}",
                                    constraints=spec.constraints)
            out.append((tip, cue))
            k += 1
    return out


def build_cues(spec: ScenarioSpec, predictions=None) -> list[Cue]:
    """Full cue pool: dynamic (from predictions) then static."""
    preds = predictions
    if preds is None:
        preds = spec.predictions_path if spec.predictions_path else DEFAULT_PREDICTION_ROWS
    dynamic = [cue for _, cue in generate_dynamic(preds, spec)]
    return dynamic + generate_static(spec)


def make_overhead_satellite(sat_id: str, target_lat: float, target_lon: float,
                            t_pass: float, alt_km: float = 500.0, inc_deg: float = 97.0,
                            sensor_type: str = "EO", gsd_nadir: float = 50.0,
                            slew_rate: float = 30.0, dwell_time: float = 1.0,
                            ascending: bool = True) -> Satellite:
    """Circular-orbit satellite passing directly over a target point at t_pass.

    Solves for the ascending node and mean anomaly so the subsatellite
    point coincides with (target_lat, target_lon) at the requested time.
    """
    a = EARTH_RADIUS_KM + alt_km
    n = math.sqrt(MU_EARTH_KM3_S2 / a**3)
    inc = math.radians(inc_deg)
    lat = math.radians(target_lat)
    if abs(math.sin(inc)) < abs(math.sin(lat)):
        raise ValueError("inclination too low to reach the target latitude")
    u = math.asin(math.sin(lat) / math.sin(inc))
    if not ascending:
        u = math.pi - u
    lon_in_plane = math.atan2(math.cos(inc) * math.sin(u), math.cos(u))
    theta_g = OMEGA_EARTH_RAD_S * t_pass
    raan = math.radians(target_lon) + theta_g - lon_in_plane
    m0 = u - n * t_pass
    elements = KeplerElements(a, 0.0, inc_deg, math.degrees(raan) % 360.0, 0.0,
                              math.degrees(m0) % 360.0, 0.0)
    return Satellite(sat_id, elements, sensor_type=sensor_type, gsd_nadir=gsd_nadir,
                     slew_rate=slew_rate, dwell_time=dwell_time)


# Embedded copy of scenarios/predictions.csv: four vessels, one trigger each.
DEFAULT_PREDICTION_ROWS: tuple[PredictionRow, ...] = (
    PredictionRow("367001110", 60300.0, 40.2100, -73.9100, 40.2450, -73.8720, ),
    PredictionRow("367001110", 63900.0, 40.2650, -73.8350, 40.2700, -73.8300),
    PredictionRow("367001110", 67500.0, 40.2950, -73.7600, 40.2980, -73.7580),
    PredictionRow("367001110", 75600.0, 40.3600, -73.6100, 40.3620, -73.6090),
    PredictionRow("538005430", 61200.0, 40.6200, -73.2000, 40.5810, -73.2470),
    PredictionRow("538005430", 64800.0, 40.5500, -73.3000, 40.5460, -73.3040),
    PredictionRow("538005430", 72000.0, 40.4800, -73.4500, 40.4780, -73.4520),
    PredictionRow("563112200", 62100.0, 40.8300, -72.9500, 40.7920, -72.9060),
    PredictionRow("563112200", 65700.0, 40.8700, -72.8700, 40.8730, -72.8680),
    PredictionRow("563112200", 73800.0, 40.9300, -72.7000, 40.9310, -72.6990),
    PredictionRow("636019825", 63000.0, 40.0500, -73.0500, 40.0930, -73.0130),
    PredictionRow("636019825", 66600.0, 40.1000, -72.9500, 40.0990, -72.9510),
    PredictionRow("636019825", 74700.0, 40.1900, -72.7600, 40.1890, -72.7610),
)

DEFAULT_EPOCH_ISO = "2024-03-30T00:00:00Z"
DEFAULT_HORIZON = (66600.0, 86340.0)  # 18:30:00 to 23:59:00 UTC
DEFAULT_SEED = 20240330
_POLY_CENTER = (40.4, -73.45)
_PASS_TIMES = (68160.0, 69180.0, 72300.0)  # 18:56, 19:13, 20:05 UTC


def default_satellites() -> tuple[Satellite, ...]:
    lat, lon = _POLY_CENTER
    return (
        make_overhead_satellite("EOS-A", lat, lon, _PASS_TIMES[0], gsd_nadir=50.0),
        make_overhead_satellite("EOS-B", lat, lon, _PASS_TIMES[1], gsd_nadir=50.0),
        make_overhead_satellite("EOS-C", lat, lon, _PASS_TIMES[2], gsd_nadir=75.0),
    )


def default_scenario(seed: int = DEFAULT_SEED) -> ScenarioSpec:
    """The committed desk-scale scenario: 100 static + 4 dynamic cues,
    three satellites with one pass each inside the evening horizon."""
    return ScenarioSpec(
        epoch_iso=DEFAULT_EPOCH_ISO,
        horizon=DEFAULT_HORIZON,
        lat_range=(39.8, 41.0),
        lon_range=(-74.4, -72.5),
        n_static=100,
        static_side_m=(200.0, 800.0),
        static_priority=(0.05, 0.25),
        static_peak_s=DEFAULT_HORIZON,
        static_sigma_hours=(0.5, 2.0),
        constraints=FeasibilityConstraints("EO", 100.0, 100.0, 30.0),
        satellites=default_satellites(),
        sampling=SamplingConfig("practical", DEFAULT_HORIZON, safety_factor=2.0),
        ranking=RankingParams(0.25),
        penalty=PenaltyParams(5.0, 2.0, 100.0),
        optimizer=OptimizerConfig(0.01, 1e-3, 500),
        seed=seed,
    )


def run_schedule(spec: ScenarioSpec, lam: Optional[float] = None,
                 windows: Optional[Mapping[str, WindowSet]] = None,
                 cues: Optional[Sequence[Cue]] = None) -> ScheduleResult:
    """Schedule the scenario's cue pool, optionally overriding the ranking weight."""
    pool = list(cues) if cues is not None else build_cues(spec)
    rp = spec.ranking if lam is None else RankingParams(lam)
    return schedule(pool, list(spec.satellites), rp, spec.penalty, spec.optimizer,
                    spec.sampling, windows=windows)


def run_sweep(spec: ScenarioSpec, lambdas: Sequence[float]) -> SweepResult:
    """One schedule per ranking weight, reusing the window computation."""
    pool = build_cues(spec)
    windows = compute_all_windows(pool, list(spec.satellites), spec.sampling) if pool else {}
    rows = []
    results = []
    for lam in lambdas:
        res = run_schedule(spec, lam=lam, windows=windows, cues=pool)
        b, r = res.schedule.phase_counts
        rows.append(SweepRow(lam, b, r, len(res.schedule.entries), res.schedule.total_utility))
        results.append(res)
    return SweepResult(tuple(rows), tuple(results))


@dataclass(frozen=True)
class OracleResult:
    cue_ids: tuple[str, ...]
    times: tuple[float, ...]
    utility: float
    nodes_visited: int


def _grid_points(w: WindowSet, step: float) -> list[float]:
    pts: list[float] = []
    for iv in w.intervals:
        k = 0
        t = iv.start
        while t <= iv.end + 1e-12:
            pts.append(min(t, iv.end))
            k += 1
            t = iv.start + k * step
        if pts and pts[-1] < iv.end:
            pts.append(iv.end)
    return pts


def brute_force_oracle(cues: Sequence[Cue], windows: Mapping[str, WindowSet],
                       sat: Satellite, grid_step: float,
                       budget: int = 10_000_000) -> OracleResult:
    """Exhaustive best subset and grid times under exact separation.

    Enumerates every subset of cues and every combination of grid times
    inside their windows, rejecting exact-buffer violations as early as
    possible. The unpruned search size prod(1 + grid_i) must stay within
    ``budget``.
    """
    if len(cues) > 6:
        raise ValueError("oracle limited to 6 cues")
    grids = [_grid_points(windows[c.id], grid_step) for c in cues]
    size = 1
    for g in grids:
        size *= 1 + len(g)
        if size > budget:
            raise ValueError(f"oracle budget exceeded: {size} > {budget}")
    values = [[utility_eval(c.utility, t) for t in g] for c, g in zip(cues, grids)]
    # Pairwise buffers precomputed on the grid so the search does no geometry.
    deltas: dict[tuple[int, int], "object"] = {}
    for i in range(len(cues)):
        for j in range(i + 1, len(cues)):
            if grids[i] and grids[j]:
                deltas[(i, j)] = delta_matrix(cues[i], cues[j], sat, grids[i], grids[j])

    best_u = -1.0
    best_pick: list[tuple[int, int]] = []
    pick: list[tuple[int, int]] = []  # (cue index, grid index)
    nodes = 0

    def feasible_with(i: int, gi: int) -> bool:
        ti = grids[i][gi]
        for j, gj in pick:
            lo_, hi_ = (j, i) if j < i else (i, j)
            d = deltas[(lo_, hi_)][gj][gi] if j < i else deltas[(lo_, hi_)][gi][gj]
            if abs(ti - grids[j][gj]) < d:
                return False
        return True

    def dfs(i: int, acc: float):
        nonlocal best_u, best_pick, nodes
        nodes += 1
        if i == len(cues):
            if acc > best_u:
                best_u = acc
                best_pick = list(pick)
            return
        dfs(i + 1, acc)  # skip cue i
        for gi in range(len(grids[i])):
            if feasible_with(i, gi):
                pick.append((i, gi))
                dfs(i + 1, acc + values[i][gi])
                pick.pop()

    dfs(0, 0.0)
    chosen = sorted(best_pick)
    return OracleResult(tuple(cues[i].id for i, _ in chosen),
                        tuple(grids[i][g] for i, g in chosen),
                        max(best_u, 0.0), nodes)


def greedy_baseline(cues: Sequence[Cue], windows: Mapping[str, WindowSet],
                    sat: Satellite, grid_step: float, rp: RankingParams) -> OracleResult:
    """Discrete greedy: rank order, best feasible grid point per cue (ties earliest)."""
    ranked = rank(list(cues), [windows[c.id] for c in cues], rp)
    chosen: list[tuple[Cue, float]] = []
    for cue in ranked:
        pts = _grid_points(windows[cue.id], grid_step)
        best = None
        for t in pts:
            if any(abs(t - tj) < delta_ij(t, tj, cue, cj, sat) for cj, tj in chosen):
                continue
            v = utility_eval(cue.utility, t)
            if best is None or v > best[1]:
                best = (t, v)
        if best is not None:
            chosen.append((cue, best[0]))
    total = sum(utility_eval(c.utility, t) for c, t in chosen)
    return OracleResult(tuple(c.id for c, _ in chosen), tuple(t for _, t in chosen),
                        total, 0)
