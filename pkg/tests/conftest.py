"""Shared builders for desk-scale test instances.

Desk satellites use a constant-position ephemeris table so separation
geometry is exact and cheap; windows are constructed directly instead of
going through visibility sampling.
"""

from __future__ import annotations

import math

from tipcue.model import (
    Cue,
    FeasibilityConstraints,
    Satellite,
    TimeInterval,
    UtilityFunction,
    WindowSet,
)
from tipcue.orbits import EphemerisTable
from tipcue.rng import SplitMix64
from tipcue.tips import build_static_cue

DESK_CENTER = (40.0, -73.0)


def desk_satellite(sat_id: str = "SAT-1", lat: float = 40.0, lon: float = -73.0,
                   alt_km: float = 600.0, slew_rate: float = 10.0,
                   dwell_time: float = 1.0) -> Satellite:
    """Stationary satellite: constant subsatellite point over a huge time span."""
    table = EphemerisTable((-1e6, 1e6), (lat, lat), (lon, lon), (alt_km, alt_km))
    return Satellite(sat_id, table, sensor_type="EO", gsd_nadir=50.0,
                     slew_rate=slew_rate, dwell_time=dwell_time)


def desk_cue(cue_id: str, utility: UtilityFunction, lat: float = 40.0,
             lon: float = -73.0, side_m: float = 300.0) -> Cue:
    cue = build_static_cue((lat, lon), side_m, side_m, utility.base_priority,
                           0.0, 1.0, cue_id=cue_id)
    return Cue(cue_id, cue.footprint, utility, cue.constraints)


def window(*spans: tuple[float, float, str]) -> WindowSet:
    return WindowSet.from_intervals([TimeInterval(s, e, sat) for s, e, sat in spans])


def random_feasible_instance(seed: int):
    """Random multi-cue instance with a zero-penalty configuration by construction.

    Returns (cues, windows list, sats, min_delta or None). Most cues are
    Gaussians peaking inside their window; a few decay cues pin to window
    starts; occasional same-satellite pairs start inside the penalty wall
    but have room to separate.
    """
    rng = SplitMix64(seed)
    n_sats = 1 + rng.randrange(3)
    sats = [desk_satellite(f"SAT-{k+1}", lat=40.0 + 0.05 * k) for k in range(n_sats)]
    n_cues = 3 + rng.randrange(18)
    cues, windows = [], []
    next_center = {s.id: 500.0 + 200.0 * i for i, s in enumerate(sats)}
    decay_budget = 2
    collide = rng.uniform() < 0.15
    for i in range(n_cues):
        sat = sats[rng.randrange(n_sats)]
        center = next_center[sat.id] + rng.uniform(20.0, 120.0)
        half = rng.uniform(30.0, 90.0)
        lat = 40.0 + rng.uniform(-0.2, 0.2)
        lon = -73.0 + rng.uniform(-0.2, 0.2)
        s = rng.uniform(0.2, 1.0)
        if decay_budget > 0 and rng.uniform() < 0.1:
            decay_budget -= 1
            u = UtilityFunction.exp_decay(center - half - rng.uniform(0.0, 300.0),
                                          rng.uniform(0.1, 0.5) / 3600.0, s)
        else:
            u = UtilityFunction.gaussian(center + rng.uniform(-0.4, 0.4) * half,
                                         rng.uniform(600.0, 3600.0), s)
        cues.append(desk_cue(f"cue-{i:02d}", u, lat=lat, lon=lon))
        windows.append(window((center - half, center + half, sat.id)))
        next_center[sat.id] = center + half + rng.uniform(8.0, 40.0)
    if collide and n_cues >= 2:
        # Same-satellite pair starting inside the wall: shared window, peaks
        # under one buffer apart, plenty of room to separate.
        sat = sats[0]
        base = max(next_center.values()) + 200.0
        for j, off in enumerate((0.0, 0.8)):
            u = UtilityFunction.gaussian(base + off, 3600.0, 0.9)
            cues.append(desk_cue(f"cue-c{j}", u))
            windows.append(window((base - 40.0, base + 40.0, sat.id)))
    min_delta = 1.0 if n_cues > n_sats else None
    return cues, windows, sats, min_delta


def oracle_instance(seed: int):
    """Tiny single-satellite instance for oracle comparisons.

    Windows are short (a few buffer widths), so subset selection and
    packing both matter.
    """
    rng = SplitMix64(seed)
    sat = desk_satellite("SAT-1", slew_rate=10.0, dwell_time=1.0)
    n = 3 + rng.randrange(3)
    cues, wmap = [], {}
    for i in range(n):
        start = rng.uniform(0.0, 10.0)
        length = rng.uniform(1.2, 2.2)
        s = rng.uniform(0.3, 1.0)
        sigma = rng.uniform(600.0, 1800.0)
        peak = start + rng.uniform(-2.0, length + 2.0)
        cue = desk_cue(f"cue-{i}", UtilityFunction.gaussian(peak, sigma, s),
                       lat=40.0 + rng.uniform(-0.1, 0.1),
                       lon=-73.0 + rng.uniform(-0.1, 0.1))
        cues.append(cue)
        wmap[cue.id] = window((start, start + length, sat.id))
    return cues, wmap, sat
