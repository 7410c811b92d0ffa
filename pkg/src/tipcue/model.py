"""Core domain types plus utility evaluation and window/projection algebra.

Time is represented everywhere as continuous seconds since a configurable
scenario epoch (float64). Quantities naturally expressed in hours (decay
rates, Gaussian widths, lead times) are converted to seconds at the module
boundaries that accept them; nothing in this module mixes units.

All types are immutable value objects and every operation is a pure
function, so concurrent evaluation is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geo import polygon_centroid, polygon_is_simple, meters_to_latlon_offsets

DEFAULT_UTILITY_FLOOR = 1e-3

GAUSSIAN = "gaussian"
EXP_DECAY = "exp_decay"

EO = "EO"
SAR = "SAR"

TIP_EXTERNAL = "external"
TIP_FEEDBACK = "feedback"


def _check_latlon(lat: float, lon: float) -> None:
    if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
        raise ValueError(f"coordinates out of range: ({lat}, {lon})")


def _collinear(vertices) -> bool:
    (x0, y0), (x1, y1) = vertices[0], vertices[1]
    for x2, y2 in vertices[2:]:
        if abs((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)) > 1e-12:
            return False
    return True


@dataclass(frozen=True)
class Tip:
    """A spatiotemporal alert: anchor region, detection time, and base priority."""

    region: tuple[tuple[float, float], ...]  # (lat, lon) vertices, degrees
    detect_time: float  # seconds since scenario epoch
    score: float  # in [0, 1]
    source: str = TIP_EXTERNAL

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"tip score must be in [0,1], got {self.score}")
        if len(self.region) < 3:
            raise ValueError("tip region needs at least 3 vertices")
        for lat, lon in self.region:
            _check_latlon(lat, lon)
        if _collinear(self.region):
            raise ValueError("tip region vertices are collinear")
        if self.source not in (TIP_EXTERNAL, TIP_FEEDBACK):
            raise ValueError(f"unknown tip source {self.source!r}")


@dataclass(frozen=True)
class UtilityFunction:
    """Time-varying acquisition value u(t) = s * psi(t), with a hard floor.

    Two shapes are supported:
      - gaussian: psi(t) = exp(-((t - t_ref) / shape)^2), shape = width in s
      - exp_decay: psi(t) = exp(-shape * (t - t_ref)) for t >= t_ref, else 0;
        shape = decay rate per second

    Values of s * psi(t) strictly below ``floor`` evaluate to exactly 0; the
    analytic gradient ignores the floor so the optimizer sees a smooth field.
    """

    kind: str
    base_priority: float
    t_ref: float  # peak time (gaussian) or detection time (exp_decay)
    shape: float  # sigma seconds (gaussian) or lambda per second (exp_decay)
    floor: float = DEFAULT_UTILITY_FLOOR

    def __post_init__(self):
        if self.kind not in (GAUSSIAN, EXP_DECAY):
            raise ValueError(f"unknown utility kind {self.kind!r}")
        if self.shape <= 0.0:
            raise ValueError("utility shape parameter must be > 0")
        if not (0.0 <= self.base_priority <= 1.0):
            raise ValueError("base priority must be in [0,1]")
        if self.floor < 0.0:
            raise ValueError("floor must be >= 0")

    @staticmethod
    def gaussian(t_peak: float, sigma_s: float, base_priority: float,
                 floor: float = DEFAULT_UTILITY_FLOOR) -> "UtilityFunction":
        return UtilityFunction(GAUSSIAN, base_priority, t_peak, sigma_s, floor)

    @staticmethod
    def exp_decay(t0: float, rate_per_s: float, base_priority: float,
                  floor: float = DEFAULT_UTILITY_FLOOR) -> "UtilityFunction":
        return UtilityFunction(EXP_DECAY, base_priority, t0, rate_per_s, floor)

    def raw_value(self, t):
        """s * psi(t) without the floor. Accepts scalars or arrays."""
        t = np.asarray(t, dtype=float)
        if self.kind == GAUSSIAN:
            x = (t - self.t_ref) / self.shape
            return self.base_priority * np.exp(-x * x)
        out = self.base_priority * np.exp(-self.shape * (t - self.t_ref))
        return np.where(t < self.t_ref, 0.0, out)

    def value(self, t):
        raw = self.raw_value(t)
        return np.where(raw < self.floor, 0.0, raw)

    def grad(self, t):
        """Analytic d/dt of s * psi(t); the floor is ignored (value-only cutoff)."""
        t = np.asarray(t, dtype=float)
        if self.kind == GAUSSIAN:
            x = (t - self.t_ref) / self.shape
            return self.base_priority * np.exp(-x * x) * (-2.0 * x / self.shape)
        g = -self.shape * self.base_priority * np.exp(-self.shape * (t - self.t_ref))
        return np.where(t < self.t_ref, 0.0, g)

    def support(self) -> Optional[tuple[float, float]]:
        """Closed interval where s * psi(t) >= floor, or None when empty."""
        s = self.base_priority
        if s < self.floor or s <= 0.0:
            return None
        if self.floor == 0.0:
            return (-math.inf, math.inf) if self.kind == GAUSSIAN else (self.t_ref, math.inf)
        half = math.log(s / self.floor)
        if self.kind == GAUSSIAN:
            w = self.shape * math.sqrt(half)
            return (self.t_ref - w, self.t_ref + w)
        return (self.t_ref, self.t_ref + half / self.shape)


def utility_eval(u: UtilityFunction, t: float) -> float:
    """u(t) with values strictly below the floor returned as exactly 0."""
    return float(u.value(t))


def utility_grad(u: UtilityFunction, t: float) -> float:
    """Analytic derivative of u at t (per second); floor does not apply."""
    return float(u.grad(t))


@dataclass(frozen=True)
class FeasibilityConstraints:
    """Fixed operational constraints a satellite-sensor pair must satisfy."""

    sensor_type: str = EO
    max_cloud_cover: float = 100.0  # percent; never binds in this artifact
    max_gsd: float = 100.0  # cm/px
    max_off_nadir: float = 30.0  # degrees

    def __post_init__(self):
        if self.sensor_type not in (EO, SAR):
            raise ValueError(f"unknown sensor type {self.sensor_type!r}")
        if not (0.0 < self.max_off_nadir <= 90.0):
            raise ValueError("max_off_nadir must be in (0, 90]")
        if self.max_gsd <= 0.0:
            raise ValueError("max_gsd must be > 0")


FP_STATIC = "static_polygon"
FP_TRAJECTORY = "trajectory"


@dataclass(frozen=True)
class Footprint:
    """Imaging footprint: a fixed polygon or a square tracking a moving target.

    Trajectory footprints interpolate the center linearly in lat/lon between
    waypoints and hold the nearest waypoint beyond either end.
    """

    kind: str
    polygon: tuple[tuple[float, float], ...] = ()
    waypoints: tuple[tuple[float, float, float], ...] = ()  # (t, lat, lon)
    side_m: float = 0.0

    def __post_init__(self):
        if self.kind == FP_STATIC:
            if len(self.polygon) < 3:
                raise ValueError("static footprint polygon needs >= 3 vertices")
            for lat, lon in self.polygon:
                _check_latlon(lat, lon)
            if not polygon_is_simple(self.polygon):
                raise ValueError("static footprint polygon self-intersects")
        elif self.kind == FP_TRAJECTORY:
            if not self.waypoints:
                raise ValueError("trajectory footprint needs >= 1 waypoint")
            times = [w[0] for w in self.waypoints]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError("trajectory waypoints must strictly increase in time")
            for _, lat, lon in self.waypoints:
                _check_latlon(lat, lon)
            if self.side_m <= 0.0:
                raise ValueError("trajectory side_m must be > 0")
        else:
            raise ValueError(f"unknown footprint kind {self.kind!r}")

    @staticmethod
    def static_polygon(vertices) -> "Footprint":
        return Footprint(FP_STATIC, polygon=tuple((float(a), float(b)) for a, b in vertices))

    @staticmethod
    def trajectory(waypoints, side_m: float) -> "Footprint":
        wps = tuple((float(t), float(a), float(b)) for t, a, b in waypoints)
        return Footprint(FP_TRAJECTORY, waypoints=wps, side_m=float(side_m))

    def center(self, t: float) -> tuple[float, float]:
        lat, lon = self.center_arrays(np.asarray([t], dtype=float))
        return float(lat[0]), float(lon[0])

    def center_arrays(self, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Footprint center at each time; vectorized."""
        times = np.asarray(times, dtype=float)
        if self.kind == FP_STATIC:
            lat, lon = polygon_centroid(self.polygon)
            return np.full(times.shape, lat), np.full(times.shape, lon)
        ts = np.array([w[0] for w in self.waypoints])
        lats = np.array([w[1] for w in self.waypoints])
        lons = np.array([w[2] for w in self.waypoints])
        # np.interp clamps outside the sample range, which is exactly the
        # hold-last-waypoint extrapolation rule.
        return np.interp(times, ts, lats), np.interp(times, ts, lons)

    def vertices(self, t: float) -> tuple[tuple[float, float], ...]:
        """Polygon vertices at time t (the square corners for trajectories)."""
        if self.kind == FP_STATIC:
            return self.polygon
        lat, lon = self.center(t)
        h = self.side_m / 2.0
        dlat, dlon = meters_to_latlon_offsets(lat, h, h)
        return (
            (lat - dlat, lon - dlon),
            (lat - dlat, lon + dlon),
            (lat + dlat, lon + dlon),
            (lat + dlat, lon - dlon),
        )

    def centroid(self, t: float) -> tuple[float, float]:
        if self.kind == FP_STATIC:
            return polygon_centroid(self.polygon)
        return self.center(t)


@dataclass(frozen=True)
class Cue:
    """An imaging task: footprint, utility over time, and feasibility constraints."""

    id: str
    footprint: Footprint
    utility: UtilityFunction
    constraints: FeasibilityConstraints
    origin_tip: Optional[Tip] = None


@dataclass(frozen=True)
class TimeInterval:
    """Closed interval [start, end] of feasible times for one satellite."""

    start: float
    end: float
    satellite_id: str

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"interval end {self.end} before start {self.start}")

    @property
    def length(self) -> float:
        return self.end - self.start

    def contains(self, t: float) -> bool:
        return self.start <= t <= self.end


@dataclass(frozen=True)
class WindowSet:
    """Sorted feasible acquisition intervals, tagged by providing satellite.

    Intervals are sorted by start time; intervals of the same satellite are
    pairwise disjoint (different satellites may overlap in time).
    """

    intervals: tuple[TimeInterval, ...] = ()

    def __post_init__(self):
        ivs = self.intervals
        for a, b in zip(ivs, ivs[1:]):
            if (a.start, a.end, a.satellite_id) > (b.start, b.end, b.satellite_id):
                raise ValueError("window intervals must be sorted by start")
        per_sat: dict[str, list[TimeInterval]] = {}
        for iv in ivs:
            per_sat.setdefault(iv.satellite_id, []).append(iv)
        for sat, group in per_sat.items():
            for a, b in zip(group, group[1:]):
                if b.start <= a.end:
                    raise ValueError(f"overlapping intervals for satellite {sat}")

    @staticmethod
    def from_intervals(intervals) -> "WindowSet":
        """Normalize: sort, and merge touching/overlapping same-satellite intervals."""
        per_sat: dict[str, list[TimeInterval]] = {}
        for iv in intervals:
            per_sat.setdefault(iv.satellite_id, []).append(iv)
        merged: list[TimeInterval] = []
        for sat, group in per_sat.items():
            group.sort(key=lambda iv: (iv.start, iv.end))
            cur = group[0]
            for iv in group[1:]:
                if iv.start <= cur.end:
                    cur = TimeInterval(cur.start, max(cur.end, iv.end), sat)
                else:
                    merged.append(cur)
                    cur = iv
            merged.append(cur)
        merged.sort(key=lambda iv: (iv.start, iv.end, iv.satellite_id))
        return WindowSet(tuple(merged))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def total_length(self) -> float:
        """Lebesgue measure of the union over time (satellite tags ignored)."""
        return _union_measure([(iv.start, iv.end) for iv in self.intervals])

    def containing_interval(self, t: float) -> Optional[TimeInterval]:
        """First (earliest) interval containing t, or None."""
        for iv in self.intervals:
            if iv.contains(t):
                return iv
        return None


def project(w: WindowSet, t: float) -> tuple[float, str]:
    """Nearest point of the window union to t, with its satellite tag.

    Points inside an interval project to themselves. Equidistant ties are
    broken toward the earlier interval so runs are reproducible.
    """
    if w.is_empty:
        raise ValueError("no feasible window")
    best_t = 0.0
    best_d = math.inf
    best_sat = ""
    for iv in w.intervals:
        cand = min(max(t, iv.start), iv.end)
        d = abs(t - cand)
        if d < best_d:
            best_t, best_d, best_sat = cand, d, iv.satellite_id
        if d == 0.0:
            break
    return best_t, best_sat


def _union_measure(spans: list[tuple[float, float]]) -> float:
    if not spans:
        return 0.0
    spans = sorted(spans)
    total = 0.0
    cur_start, cur_end = spans[0]
    for s, e in spans[1:]:
        if s > cur_end:
            total += cur_end - cur_start
            cur_start, cur_end = s, e
        else:
            cur_end = max(cur_end, e)
    return total + (cur_end - cur_start)


def interval_overlap_length(a: WindowSet, b: WindowSet) -> float:
    """Measure of the temporal intersection of two window unions, in seconds.

    Satellite tags are ignored: overlap is purely temporal.
    """
    spans_a = [(iv.start, iv.end) for iv in a.intervals]
    spans_b = [(iv.start, iv.end) for iv in b.intervals]
    # Merge each union first so per-satellite duplicates do not double count.
    merged_a = _merge_spans(spans_a)
    merged_b = _merge_spans(spans_b)
    total = 0.0
    i = j = 0
    while i < len(merged_a) and j < len(merged_b):
        s = max(merged_a[i][0], merged_b[j][0])
        e = min(merged_a[i][1], merged_b[j][1])
        if e > s:
            total += e - s
        if merged_a[i][1] <= merged_b[j][1]:
            i += 1
        else:
            j += 1
    return total


def _merge_spans(spans: list[tuple[float, float]]) -> list[tuple[float, float]]:
    if not spans:
        return []
    spans = sorted(spans)
    out = [spans[0]]
    for s, e in spans[1:]:
        ps, pe = out[-1]
        if s <= pe:
            out[-1] = (ps, max(pe, e))
        else:
            out.append((s, e))
    return out


@dataclass(frozen=True)
class Satellite:
    """Imaging platform: ephemeris source, sensor, and agility parameters."""

    id: str
    ephemeris: object  # KeplerElements or EphemerisTable (see orbits module)
    sensor_type: str = EO
    gsd_nadir: float = 50.0  # cm/px
    slew_rate: float = 1.0  # deg/s
    dwell_time: float = 1.0  # seconds per acquisition

    def __post_init__(self):
        if self.slew_rate <= 0.0:
            raise ValueError("slew_rate must be > 0")
        if self.dwell_time <= 0.0:
            raise ValueError("dwell_time must be > 0")
        if self.sensor_type not in (EO, SAR):
            raise ValueError(f"unknown sensor type {self.sensor_type!r}")


@dataclass(frozen=True)
class ScheduledCue:
    """One planned acquisition: cue, time, satellite, and value at that time."""

    cue_id: str
    time: float
    satellite_id: str
    utility_at_time: float


@dataclass(frozen=True)
class Schedule:
    """Final plan with per-phase counts (binary-search selected, refinement added)."""

    entries: tuple[ScheduledCue, ...] = ()
    total_utility: float = 0.0
    phase_counts: tuple[int, int] = (0, 0)
