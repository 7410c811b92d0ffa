"""Scenario file loading.

Scenarios are TOML documents (key/value pairs with nested tables). The
grammar, with defaults in brackets:

  epoch = "2024-03-30T00:00:00Z"      # ISO-8601 UTC scenario epoch
  seed = 20240330
  [horizon]      start_s, end_s       # seconds since epoch
  [region]       lat = [lo, hi], lon = [lo, hi]
  [static_cues]  count, side_m, priority, peak_s, sigma_hours (ranges)
  [dynamic_cues] predictions (path), theta_km, alpha, delta_lead_hours,
                 decay_per_hour, side_m
  [constraints]  sensor_type, max_cloud_cover_pct, max_gsd_cm, max_off_nadir_deg
  [ranking]      lambda
  [penalty]      r, beta, rho
  [optimizer]    eta, epsilon, max_iters
  [sampling]     mode = "theoretical" | "practical" | "algorithmic",
                 d_min_m | safety_factor | initial_rate_hz +
                 midpoints_per_gap + max_doublings
  [[satellites]] id, sensor_type, gsd_nadir_cm, slew_rate_deg_s, dwell_time_s
                 plus exactly one of:
                   [satellites.kepler]   a_km, ecc, inc_deg, raan_deg,
                                         argp_deg, mean_anomaly_deg, epoch_s
                   [satellites.table]    path (CSV: t,lat_deg,lon_deg,alt_km)
                   [satellites.overhead] target_lat, target_lon, t_pass_s,
                                         alt_km, inc_deg  (synthetic pass)

Relative paths resolve against the scenario file's directory.
"""

from __future__ import annotations

import os
from typing import Optional

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .model import FeasibilityConstraints, Satellite
from .orbits import EphemerisTable, KeplerElements, SamplingConfig
from .scenario import ScenarioSpec, make_overhead_satellite
from .scheduling import OptimizerConfig, PenaltyParams, RankingParams


class ConfigError(Exception):
    """Scenario file missing, malformed, or failing validation."""


def _pair(value, name: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{name} must be a two-element list")
    return float(value[0]), float(value[1])


def _resolve(base_dir: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def _load_satellite(entry: dict, base_dir: str) -> Satellite:
    try:
        sat_id = entry["id"]
        common = dict(
            sensor_type=entry.get("sensor_type", "EO"),
            gsd_nadir=float(entry.get("gsd_nadir_cm", 50.0)),
            slew_rate=float(entry.get("slew_rate_deg_s", 1.0)),
            dwell_time=float(entry.get("dwell_time_s", 1.0)),
        )
        sources = [k for k in ("kepler", "table", "overhead") if k in entry]
        if len(sources) != 1:
            raise ConfigError(f"satellite {sat_id}: need exactly one of kepler/table/overhead")
        kind = sources[0]
        if kind == "kepler":
            k = entry["kepler"]
            eph = KeplerElements(float(k["a_km"]), float(k["ecc"]), float(k["inc_deg"]),
                                 float(k["raan_deg"]), float(k["argp_deg"]),
                                 float(k["mean_anomaly_deg"]), float(k.get("epoch_s", 0.0)))
            return Satellite(sat_id, eph, **common)
        if kind == "table":
            path = _resolve(base_dir, entry["table"]["path"])
            if not os.path.exists(path):
                raise ConfigError(f"ephemeris file not found: {path}")
            return Satellite(sat_id, EphemerisTable.from_csv(path), **common)
        o = entry["overhead"]
        return make_overhead_satellite(
            sat_id, float(o["target_lat"]), float(o["target_lon"]), float(o["t_pass_s"]),
            alt_km=float(o.get("alt_km", 500.0)), inc_deg=float(o.get("inc_deg", 97.0)),
            ascending=bool(o.get("ascending", True)), **common)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad satellite entry: {exc}") from exc


def load_scenario(path: str) -> ScenarioSpec:
    """Parse and validate a scenario file into a ScenarioSpec."""
    if not os.path.exists(path):
        raise ConfigError(f"scenario file not found: {path}")
    base_dir = os.path.dirname(os.path.abspath(path))
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"scenario parse error in {path}: {exc}") from exc
    try:
        horizon = (float(doc["horizon"]["start_s"]), float(doc["horizon"]["end_s"]))
        region = doc["region"]
        static = doc["static_cues"]
        dyn = doc.get("dynamic_cues", {})
        cons = doc.get("constraints", {})
        constraints = FeasibilityConstraints(
            cons.get("sensor_type", "EO"),
            float(cons.get("max_cloud_cover_pct", 100.0)),
            float(cons.get("max_gsd_cm", 100.0)),
            float(cons.get("max_off_nadir_deg", 30.0)),
        )
        sats = tuple(_load_satellite(e, base_dir) for e in doc.get("satellites", []))
        if not sats:
            raise ConfigError("at least one satellite required")
        samp = doc.get("sampling", {"mode": "practical"})
        # A degenerate horizon means an empty scenario; commands bail out on
        # ScenarioSpec.horizon before sampling is used, so substitute a valid
        # placeholder span to satisfy the sampling invariants.
        samp_horizon = horizon if horizon[1] > horizon[0] else (horizon[0], horizon[0] + 1.0)
        sampling = SamplingConfig(
            samp.get("mode", "practical"), samp_horizon,
            d_min_m=float(samp.get("d_min_m", 100.0)),
            safety_factor=float(samp.get("safety_factor", 2.0)),
            initial_rate_hz=float(samp.get("initial_rate_hz", 0.05)),
            midpoints_per_gap=int(samp.get("midpoints_per_gap", 3)),
            max_doublings=int(samp.get("max_doublings", 6)),
        )
        rankcfg = doc.get("ranking", {})
        pencfg = doc.get("penalty", {})
        optcfg = doc.get("optimizer", {})
        predictions = dyn.get("predictions")
        if predictions is not None:
            predictions = _resolve(base_dir, predictions)
            if not os.path.exists(predictions):
                raise ConfigError(f"predictions file not found: {predictions}")
        return ScenarioSpec(
            epoch_iso=doc.get("epoch", "1970-01-01T00:00:00Z"),
            horizon=horizon,
            lat_range=_pair(region["lat"], "region.lat"),
            lon_range=_pair(region["lon"], "region.lon"),
            n_static=int(static.get("count", 0)),
            static_side_m=_pair(static.get("side_m", [200.0, 800.0]), "static_cues.side_m"),
            static_priority=_pair(static.get("priority", [0.05, 0.25]), "static_cues.priority"),
            static_peak_s=_pair(static.get("peak_s", list(horizon)), "static_cues.peak_s"),
            static_sigma_hours=_pair(static.get("sigma_hours", [0.5, 2.0]),
                                     "static_cues.sigma_hours"),
            constraints=constraints,
            satellites=sats,
            sampling=sampling,
            ranking=RankingParams(float(rankcfg.get("lambda", 0.25))),
            penalty=PenaltyParams(float(pencfg.get("r", 5.0)), float(pencfg.get("beta", 2.0)),
                                  float(pencfg.get("rho", 100.0))),
            optimizer=OptimizerConfig(float(optcfg.get("eta", 0.01)),
                                      float(optcfg.get("epsilon", 1e-3)),
                                      int(optcfg.get("max_iters", 500))),
            seed=int(doc.get("seed", 0)),
            theta_km=float(dyn.get("theta_km", 3.0)),
            alpha=float(dyn.get("alpha", 0.5)),
            delta_lead_hours=float(dyn.get("delta_lead_hours", 3.0)),
            decay_per_hour=float(dyn.get("decay_per_hour", 0.2)),
            dynamic_side_m=float(dyn.get("side_m", 200.0)),
            predictions_path=predictions,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario {path}: {exc}") from exc
