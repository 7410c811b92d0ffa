"""Satellite propagation, visibility geometry, and feasible-window computation.

Propagation is deliberately simple: a two-body Keplerian propagator (Newton
solve of Kepler's equation to 1e-12 rad) with uniform sidereal Earth
rotation, plus a table loader for externally produced ephemerides. The
prime meridian is aligned with the inertial x-axis at scenario epoch t=0.

Earth is spherical with R = 6371.0 km and mu = 398600.4418 km^3/s^2.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .geo import EARTH_RADIUS_KM, central_angle_rad, polygon_centroid
from .model import (
    FP_STATIC,
    Cue,
    FeasibilityConstraints,
    Footprint,
    Satellite,
    TimeInterval,
    UtilityFunction,
    WindowSet,
)

MU_EARTH_KM3_S2 = 398600.4418
SIDEREAL_DAY_S = 86164.0905
OMEGA_EARTH_RAD_S = 2.0 * math.pi / SIDEREAL_DAY_S


@dataclass(frozen=True)
class KeplerElements:
    """Classical orbital elements at a reference epoch (seconds since scenario epoch)."""

    a_km: float
    ecc: float
    inc_deg: float
    raan_deg: float
    argp_deg: float
    mean_anomaly_deg: float
    epoch_s: float = 0.0

    def __post_init__(self):
        if self.a_km <= EARTH_RADIUS_KM:
            raise ValueError("semi-major axis must exceed the Earth radius")
        if not (0.0 <= self.ecc < 1.0):
            raise ValueError("eccentricity must be in [0, 1)")

    @property
    def mean_motion_rad_s(self) -> float:
        return math.sqrt(MU_EARTH_KM3_S2 / self.a_km**3)

    @property
    def period_s(self) -> float:
        return 2.0 * math.pi / self.mean_motion_rad_s


@dataclass(frozen=True)
class EphemerisTable:
    """Sampled ground track, linearly interpolated (lon unwrapped across +/-180)."""

    times: tuple[float, ...]
    lats: tuple[float, ...]
    lons: tuple[float, ...]
    alts: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) < 2:
            raise ValueError("ephemeris table needs >= 2 samples")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("ephemeris table times must strictly increase")

    @staticmethod
    def from_csv(path) -> "EphemerisTable":
        times, lats, lons, alts = [], [], [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            expected = {"t", "lat_deg", "lon_deg", "alt_km"}
            if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
                raise ValueError(f"ephemeris CSV must have columns {sorted(expected)}")
            for row in reader:
                times.append(float(row["t"]))
                lats.append(float(row["lat_deg"]))
                lons.append(float(row["lon_deg"]))
                alts.append(float(row["alt_km"]))
        return EphemerisTable(tuple(times), tuple(lats), tuple(lons), tuple(alts))


EphemerisSource = Union[KeplerElements, EphemerisTable]


@dataclass(frozen=True)
class SatelliteState:
    """Subsatellite point and along-track ground speed at one instant."""

    time: float
    lat_deg: float
    lon_deg: float
    alt_km: float
    ground_speed_kms: float

    def __post_init__(self):
        if self.alt_km <= 0.0:
            raise ValueError("altitude must be > 0")


THEORETICAL = "theoretical"
PRACTICAL = "practical"
ALGORITHMIC = "algorithmic"


@dataclass(frozen=True)
class SamplingConfig:
    """Sampling-rate rule and time horizon for window computation.

    theoretical: rate G = ground speed / d_min (spatial continuity bound)
    practical:   rate G = c / T_img for safety factor c > 1
    algorithmic: start at initial_rate and double until midpoint checks pass
    """

    mode: str
    horizon: tuple[float, float]
    d_min_m: float = 100.0
    safety_factor: float = 2.0
    initial_rate_hz: float = 0.05
    midpoints_per_gap: int = 3
    max_doublings: int = 6

    def __post_init__(self):
        if self.mode not in (THEORETICAL, PRACTICAL, ALGORITHMIC):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.horizon[1] <= self.horizon[0]:
            raise ValueError("sampling horizon must be non-degenerate")
        if self.mode == THEORETICAL and self.d_min_m <= 0.0:
            raise ValueError("d_min must be > 0")
        if self.mode == PRACTICAL and self.safety_factor <= 1.0:
            raise ValueError("safety factor must be > 1")
        if self.mode == ALGORITHMIC:
            if self.initial_rate_hz <= 0.0 or self.midpoints_per_gap < 1 or self.max_doublings < 0:
                raise ValueError("bad algorithmic sampling parameters")


def _kepler_solve(M: np.ndarray, e: float) -> np.ndarray:
    """Solve E - e sin E = M by Newton iteration to 1e-12 rad."""
    E = np.where(e < 0.8, M, np.pi * np.ones_like(M))
    for _ in range(60):
        f = E - e * np.sin(E) - M
        dE = f / (1.0 - e * np.cos(E))
        E = E - dE
        if np.max(np.abs(dE)) < 1e-12:
            break
    return E


def _propagate_kepler_arrays(el: KeplerElements, times: np.ndarray):
    n = el.mean_motion_rad_s
    M = np.radians(el.mean_anomaly_deg) + n * (times - el.epoch_s)
    M = np.mod(M, 2.0 * math.pi)
    E = _kepler_solve(M, el.ecc)
    a, e = el.a_km, el.ecc
    x_pf = a * (np.cos(E) - e)
    y_pf = a * math.sqrt(1.0 - e * e) * np.sin(E)
    ci, si = math.cos(math.radians(el.inc_deg)), math.sin(math.radians(el.inc_deg))
    cw, sw = math.cos(math.radians(el.argp_deg)), math.sin(math.radians(el.argp_deg))
    cO, sO = math.cos(math.radians(el.raan_deg)), math.sin(math.radians(el.raan_deg))
    px = x_pf * (cw * cO - sw * sO * ci) - y_pf * (sw * cO + cw * sO * ci)
    py = x_pf * (cw * sO + sw * cO * ci) + y_pf * (cw * cO * ci - sw * sO)
    pz = x_pf * (sw * si) + y_pf * (cw * si)
    r = np.sqrt(px * px + py * py + pz * pz)
    lat = np.degrees(np.arcsin(np.clip(pz / r, -1.0, 1.0)))
    theta = OMEGA_EARTH_RAD_S * times  # prime meridian at inertial x when t = 0
    lon = np.degrees(np.arctan2(py, px) - theta)
    lon = (lon + 180.0) % 360.0 - 180.0
    alt = r - EARTH_RADIUS_KM
    speed = np.full(times.shape, n * EARTH_RADIUS_KM)
    return lat, lon, alt, speed


def _propagate_table_arrays(tab: EphemerisTable, times: np.ndarray):
    ts = np.asarray(tab.times)
    lats = np.asarray(tab.lats)
    lons_unwrapped = np.degrees(np.unwrap(np.radians(np.asarray(tab.lons))))
    alts = np.asarray(tab.alts)
    first_gap = ts[1] - ts[0]
    last_gap = ts[-1] - ts[-2]
    lo = ts[0] - first_gap
    hi = ts[-1] + last_gap
    if np.any(times < lo - 1e-9) or np.any(times > hi + 1e-9):
        raise ValueError("ephemeris out of range")
    # Segment-wise linear interpolation; the edge segments extrapolate up to
    # one sample gap beyond the table.
    seg = np.clip(np.searchsorted(ts, times, side="right") - 1, 0, len(ts) - 2)
    t0 = ts[seg]
    dt = ts[seg + 1] - t0
    w = (times - t0) / dt
    lat = lats[seg] + w * (lats[seg + 1] - lats[seg])
    lon = lons_unwrapped[seg] + w * (lons_unwrapped[seg + 1] - lons_unwrapped[seg])
    lon = (lon + 180.0) % 360.0 - 180.0
    alt = alts[seg] + w * (alts[seg + 1] - alts[seg])
    seg_dist = central_angle_rad(lats[seg], lons_unwrapped[seg],
                                 lats[seg + 1], lons_unwrapped[seg + 1]) * EARTH_RADIUS_KM
    speed = seg_dist / dt
    return lat, lon, alt, speed


def propagate_arrays(src: EphemerisSource, times: np.ndarray):
    """Vectorized propagation; returns (lat_deg, lon_deg, alt_km, speed_kms) arrays."""
    times = np.asarray(times, dtype=float)
    if isinstance(src, KeplerElements):
        return _propagate_kepler_arrays(src, times)
    if isinstance(src, EphemerisTable):
        return _propagate_table_arrays(src, times)
    raise TypeError(f"unknown ephemeris source {type(src)!r}")


def propagate(src: EphemerisSource, t: float) -> SatelliteState:
    """Satellite state at time t (seconds since scenario epoch)."""
    lat, lon, alt, speed = propagate_arrays(src, np.asarray([t], dtype=float))
    return SatelliteState(t, float(lat[0]), float(lon[0]), float(alt[0]), float(speed[0]))


def visibility_radius(state: SatelliteState, max_off_nadir: float) -> float:
    """Great-circle radius (km) of the ground region reachable at the given off-nadir limit."""
    return float(_visibility_radius_km(np.asarray([state.alt_km]), max_off_nadir)[0])


def _visibility_radius_km(alt_km: np.ndarray, max_off_nadir: float) -> np.ndarray:
    if not (0.0 < max_off_nadir <= 90.0):
        raise ValueError("max_off_nadir must be in (0, 90]")
    R = EARTH_RADIUS_KM
    ratio = (R + alt_km) / R
    s = ratio * math.sin(math.radians(max_off_nadir))
    eta = math.radians(max_off_nadir)
    beta = np.where(s >= 1.0,
                    np.arccos(np.clip(1.0 / ratio, -1.0, 1.0)),  # horizon-limited
                    np.arcsin(np.clip(s, -1.0, 1.0)) - eta)
    return R * beta


def _off_nadir_deg(beta_rad: np.ndarray, alt_km: np.ndarray) -> np.ndarray:
    """Off-nadir angle at the satellite subtending central angle beta to a ground point."""
    R = EARTH_RADIUS_KM
    return np.degrees(np.arctan2(R * np.sin(beta_rad), (R + alt_km) - R * np.cos(beta_rad)))


def _footprint_test_points(fp: Footprint, times: np.ndarray):
    """(lats, lons) arrays of shape (n_points, len(times)): vertices plus centroid."""
    if fp.kind == FP_STATIC:
        pts = list(fp.polygon) + [polygon_centroid(fp.polygon)]
        lats = np.array([[p[0]] for p in pts]) * np.ones((1, times.size))
        lons = np.array([[p[1]] for p in pts]) * np.ones((1, times.size))
        return lats, lons
    clat, clon = fp.center_arrays(times)
    h = fp.side_m / 2.0
    # Corner offsets vary with latitude through the cos(lat) factor.
    dlat = np.degrees(h / (EARTH_RADIUS_KM * 1000.0))
    dlon = np.degrees(h / (EARTH_RADIUS_KM * 1000.0 * np.cos(np.radians(clat))))
    lats = np.stack([clat - dlat, clat - dlat, clat + dlat, clat + dlat, clat])
    lons = np.stack([clon - dlon, clon + dlon, clon + dlon, clon - dlon, clon])
    return lats, lons


def _visible_mask(cue: Cue, sat: Satellite, fc: FeasibilityConstraints,
                  times: np.ndarray, track=None) -> np.ndarray:
    """Vectorized visibility of the cue from the satellite at each sample time."""
    if sat.sensor_type != fc.sensor_type or sat.gsd_nadir > fc.max_gsd:
        return np.zeros(times.shape, dtype=bool)
    if track is None:
        track = propagate_arrays(sat.ephemeris, times)
    slat, slon, alt, _ = track
    radius = _visibility_radius_km(alt, fc.max_off_nadir)
    lats, lons = _footprint_test_points(cue.footprint, times)
    beta = central_angle_rad(slat[None, :], slon[None, :], lats, lons)
    dist = EARTH_RADIUS_KM * beta
    min_dist = dist.min(axis=0)
    # Centroid is the last test row by construction.
    eta_centroid = _off_nadir_deg(beta[-1], alt)
    return (min_dist <= radius) & (eta_centroid <= fc.max_off_nadir)


# Placeholder utility for probe cues; only its footprint matters to is_visible.
_ALWAYS_ON_UTILITY = UtilityFunction.gaussian(0.0, 1.0, 1.0, floor=0.0)


def is_visible(state: SatelliteState, fp: Footprint, t: float,
               fc: FeasibilityConstraints, sat: Satellite) -> bool:
    """True when the footprint intersects the satellite's visibility disc and the
    sensor constraints hold (cloud cover always passes in this artifact)."""
    cue = Cue("probe", fp, _ALWAYS_ON_UTILITY, fc)
    track = (np.asarray([state.lat_deg]), np.asarray([state.lon_deg]),
             np.asarray([state.alt_km]), np.asarray([state.ground_speed_kms]))
    return bool(_visible_mask(cue, sat, fc, np.asarray([t], dtype=float), track)[0])


def _sample_grid(start: float, end: float, step: float) -> np.ndarray:
    n = int(math.floor((end - start) / step)) + 1
    times = start + np.arange(n) * step
    if times[-1] < end - 1e-9:
        times = np.append(times, end)
    return times


def _step_for(sat: Satellite, sc: SamplingConfig) -> float:
    if sc.mode == PRACTICAL:
        return sat.dwell_time / sc.safety_factor
    if sc.mode == THEORETICAL:
        start, end = sc.horizon
        probes = np.linspace(start, end, 9)
        _, _, _, speed = propagate_arrays(sat.ephemeris, probes)
        v_ms = float(np.max(speed)) * 1000.0
        if v_ms <= 0.0:
            raise ValueError("non-positive ground speed; theoretical bound undefined")
        return sc.d_min_m / v_ms
    return 1.0 / sc.initial_rate_hz


def _runs_to_intervals(times: np.ndarray, mask: np.ndarray, sat_id: str) -> list[TimeInterval]:
    intervals = []
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return intervals
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [idx.size - 1]))
    for s, e in zip(starts, ends):
        intervals.append(TimeInterval(float(times[idx[s]]), float(times[idx[e]]), sat_id))
    return intervals


def _verified_mask(cue: Cue, sat: Satellite, fc, times, mask, m: int) -> bool:
    """Check m uniform interior points between equal-valued neighbor samples."""
    same = mask[:-1] == mask[1:]
    if not np.any(same):
        return True
    left = times[:-1][same]
    right = times[1:][same]
    expect = mask[:-1][same]
    fracs = np.arange(1, m + 1) / (m + 1)
    probe_times = (left[None, :] + fracs[:, None] * (right - left)[None, :]).ravel()
    probe_mask = _visible_mask(cue, sat, fc, probe_times)
    return bool(np.all(probe_mask.reshape(m, -1) == expect[None, :]))


def _windows_for_sat(cue: Cue, sat: Satellite, sc: SamplingConfig,
                     track_cache: Optional[dict] = None) -> list[TimeInterval]:
    fc = cue.constraints
    start, end = sc.horizon
    step = _step_for(sat, sc)
    doublings = 0
    while True:
        times = _sample_grid(start, end, step)
        track = None
        if track_cache is not None:
            key = (sat.id, step)
            if key not in track_cache:
                track_cache[key] = propagate_arrays(sat.ephemeris, times)
            track = track_cache[key]
        mask = _visible_mask(cue, sat, fc, times, track)
        if sc.mode != ALGORITHMIC or doublings >= sc.max_doublings:
            break
        if _verified_mask(cue, sat, fc, times, mask, sc.midpoints_per_gap):
            break
        step /= 2.0
        doublings += 1
    return _runs_to_intervals(times, mask, sat.id)


def compute_windows(cue: Cue, sats: list[Satellite], sc: SamplingConfig) -> WindowSet:
    """Feasible acquisition windows for one cue across all satellites.

    Contiguous visible samples become closed intervals, which are then
    intersected with the cue's positive-utility support (value >= floor).
    An empty result means the cue is unschedulable, not an error.
    """
    if not sats:
        raise ValueError("at least one satellite required")
    return _trim_and_merge(cue, [iv for sat in sats for iv in _windows_for_sat(cue, sat, sc)])


def compute_all_windows(cues: list[Cue], sats: list[Satellite],
                        sc: SamplingConfig) -> dict[str, WindowSet]:
    """Windows for many cues, sharing each satellite's propagated track.

    Equivalent to calling compute_windows per cue; the shared track only
    avoids recomputing satellite positions for identical sample grids.
    """
    if not sats:
        raise ValueError("at least one satellite required")
    cache: dict = {}
    out: dict[str, WindowSet] = {}
    for cue in cues:
        raw = [iv for sat in sats for iv in _windows_for_sat(cue, sat, sc, cache)]
        out[cue.id] = _trim_and_merge(cue, raw)
    return out


def _trim_and_merge(cue: Cue, intervals: list[TimeInterval]) -> WindowSet:
    support = cue.utility.support()
    if support is None:
        return WindowSet()
    lo, hi = support
    trimmed = []
    for iv in intervals:
        s, e = max(iv.start, lo), min(iv.end, hi)
        if s <= e:
            trimmed.append(TimeInterval(s, e, iv.satellite_id))
    if not trimmed:
        return WindowSet()
    return WindowSet.from_intervals(trimmed)
