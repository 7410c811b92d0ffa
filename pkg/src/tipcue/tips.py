"""Tip triggering and scoring, cue construction, and feedback relevance.

Scoring combines a deviation term (how far past the trigger threshold an
anomaly score landed) with an urgency term that decays logarithmically in
the forecast lead time. Both live in [0, 1], so their convex combination
does too. Natural log throughout.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .geo import haversine_km, meters_to_latlon_offsets
from .model import Cue, Footprint, Tip, UtilityFunction, FeasibilityConstraints

SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class TipScoringParams:
    """Threshold, deviation/urgency balance, and lead time for tip scoring."""

    theta: float  # modality threshold (km for AIS position error)
    alpha: float  # deviation weight in [0, 1]
    delta_lead_hours: float

    def __post_init__(self):
        if self.theta <= 0.0:
            raise ValueError("theta must be > 0")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must be in [0,1]")
        if self.delta_lead_hours < 0.0:
            raise ValueError("delta_lead must be >= 0")


@dataclass(frozen=True)
class AnomalyObservation:
    """Predicted vs actual position of a tracked object at one time."""

    predicted: tuple[float, float]  # (lat, lon) degrees
    actual: tuple[float, float]
    time: float  # seconds since scenario epoch

    def __post_init__(self):
        for lat, lon in (self.predicted, self.actual):
            if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
                raise ValueError(f"coordinates out of range: ({lat}, {lon})")


@dataclass(frozen=True)
class FeedbackReport:
    """Per-channel deviation components with aggregation weights."""

    deltas: tuple[float, ...]
    weights: tuple[float, ...]
    threshold: float

    def __post_init__(self):
        if len(self.deltas) != len(self.weights):
            raise ValueError("deltas and weights must have equal length")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if any(not (0.0 <= d <= 1.0) for d in self.deltas):
            raise ValueError("deviation components must be in [0,1]")
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError("threshold must be in [0,1]")


def anomaly_trigger(phi: float, theta: float) -> bool:
    """Binary tip decision: strictly above threshold fires."""
    if theta <= 0.0:
        raise ValueError("theta must be > 0")
    return phi > theta


def ais_error_km(obs: AnomalyObservation) -> float:
    """Great-circle distance between predicted and actual positions, km."""
    return haversine_km(obs.predicted[0], obs.predicted[1], obs.actual[0], obs.actual[1])


def cosine_drift(z, z_hist_mean) -> float:
    """Cosine distance 1 - cos(z, z_mean), in [0, 2]."""
    if len(z) != len(z_hist_mean):
        raise ValueError("vectors must have equal length")
    dot = sum(a * b for a, b in zip(z, z_hist_mean))
    nz = math.sqrt(sum(a * a for a in z))
    nh = math.sqrt(sum(b * b for b in z_hist_mean))
    if nz == 0.0 or nh == 0.0:
        raise ValueError("cosine drift undefined for zero vectors")
    return 1.0 - dot / (nz * nh)


def dev_score(phi: float, theta: float) -> float:
    """1 - theta/phi: how far past the threshold the anomaly score sits."""
    if phi <= theta:
        raise ValueError("not a triggered tip")
    return 1.0 - theta / phi


def urg_score(delta_lead_hours: float) -> float:
    """1 / (1 + ln(1 + lead)): urgency decays logarithmically with lead time."""
    if delta_lead_hours < 0.0:
        raise ValueError("lead time must be >= 0")
    return 1.0 / (1.0 + math.log(1.0 + delta_lead_hours))


def tip_score(params: TipScoringParams, phi: float) -> float:
    """Convex combination of deviation and urgency; always in [0, 1]."""
    return (params.alpha * dev_score(phi, params.theta)
            + (1.0 - params.alpha) * urg_score(params.delta_lead_hours))


def build_dynamic_cue(tip: Tip, trajectory, decay_per_hour: float, side_m: float,
                      cue_id: str = "", constraints: FeasibilityConstraints | None = None) -> Cue:
    """Cue tracking a moving target with confidence-decay utility.

    ``trajectory`` is a sequence of (t_seconds, lat, lon) waypoints; the
    footprint is a side_m square centered on the interpolated position. The
    utility decays from the tip's detection time at ``decay_per_hour``.
    """
    traj = list(trajectory)
    if not traj:
        raise ValueError("trajectory must be non-empty")
    if decay_per_hour <= 0.0:
        raise ValueError("decay rate must be > 0")
    fp = Footprint.trajectory(traj, side_m)
    utility = UtilityFunction.exp_decay(tip.detect_time, decay_per_hour / SECONDS_PER_HOUR,
                                        tip.score)
    return Cue(cue_id or f"dyn-{tip.detect_time:.0f}", fp, utility,
               constraints or FeasibilityConstraints(), origin_tip=tip)


def build_static_cue(center: tuple[float, float], width_m: float, height_m: float,
                     priority: float, t_peak: float, sigma_hours: float,
                     cue_id: str = "", constraints: FeasibilityConstraints | None = None) -> Cue:
    """Cue over a fixed axis-aligned rectangle with a Gaussian utility peak."""
    if width_m <= 0.0 or height_m <= 0.0:
        raise ValueError("footprint dimensions must be > 0")
    if sigma_hours <= 0.0:
        raise ValueError("sigma must be > 0")
    lat, lon = center
    dlat, dlon = meters_to_latlon_offsets(lat, width_m / 2.0, height_m / 2.0)
    fp = Footprint.static_polygon([
        (lat - dlat, lon - dlon),
        (lat - dlat, lon + dlon),
        (lat + dlat, lon + dlon),
        (lat + dlat, lon - dlon),
    ])
    utility = UtilityFunction.gaussian(t_peak, sigma_hours * SECONDS_PER_HOUR, priority)
    return Cue(cue_id or f"static-{lat:.4f}-{lon:.4f}", fp, utility,
               constraints or FeasibilityConstraints())


def relevance(report: FeedbackReport) -> float:
    """Weighted aggregation of deviation components into one score in [0, 1]."""
    return sum(w * d for w, d in zip(report.weights, report.deltas))


def feedback_trigger(r: float, theta: float) -> bool:
    """Re-tip decision: relevance strictly above threshold fires."""
    return r > theta


def predict_constant_velocity(history, t: float) -> tuple[float, float]:
    """Dead-reckon a position at time t from the last two history points.

    ``history`` is a sequence of (t, lat, lon); positions extrapolate
    linearly in lat/lon. With one point the position is held constant.
    """
    pts = sorted(history)
    if not pts:
        raise ValueError("history must be non-empty")
    if len(pts) == 1:
        return pts[0][1], pts[0][2]
    (t0, la0, lo0), (t1, la1, lo1) = pts[-2], pts[-1]
    w = (t - t1) / (t1 - t0)
    return la1 + w * (la1 - la0), lo1 + w * (lo1 - lo0)


@dataclass(frozen=True)
class PredictionRow:
    """One row of a prediction file: where the model thought a vessel would be."""

    mmsi: str
    time: float
    pred_lat: float
    pred_lon: float
    act_lat: float
    act_lon: float

    def observation(self) -> AnomalyObservation:
        return AnomalyObservation((self.pred_lat, self.pred_lon),
                                  (self.act_lat, self.act_lon), self.time)


def load_predictions(path) -> list[PredictionRow]:
    """Parse a prediction CSV (mmsi,t,pred_lat,pred_lon,act_lat,act_lon)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"mmsi", "t", "pred_lat", "pred_lon", "act_lat", "act_lon"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise ValueError(f"prediction CSV must have columns {sorted(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(PredictionRow(row["mmsi"], float(row["t"]),
                                          float(row["pred_lat"]), float(row["pred_lon"]),
                                          float(row["act_lat"]), float(row["act_lon"])))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"bad prediction row at line {lineno}: {exc}") from exc
    rows.sort(key=lambda r: (r.mmsi, r.time))
    return rows


def load_ais_trajectories(path) -> dict[str, list[tuple[float, float, float, float, float]]]:
    """Parse an AIS trajectory CSV (mmsi,t,lat,lon,sog,cog) grouped by vessel."""
    out: dict[str, list] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"mmsi", "t", "lat", "lon", "sog", "cog"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise ValueError(f"AIS CSV must have columns {sorted(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                out.setdefault(row["mmsi"], []).append(
                    (float(row["t"]), float(row["lat"]), float(row["lon"]),
                     float(row["sog"]), float(row["cog"])))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"bad AIS row at line {lineno}: {exc}") from exc
    for traj in out.values():
        traj.sort()
    return out


def tip_from_observation(obs: AnomalyObservation, params: TipScoringParams,
                         region_half_m: float = 100.0) -> Tip | None:
    """Build a scored tip from one prediction/actual pair, or None if untriggered.

    The anchor region is a square around the observed (actual) position;
    the anomaly score is the position error in km.
    """
    phi = ais_error_km(obs)
    if not anomaly_trigger(phi, params.theta):
        return None
    lat, lon = obs.actual
    dlat, dlon = meters_to_latlon_offsets(lat, region_half_m, region_half_m)
    region = (
        (lat - dlat, lon - dlon),
        (lat - dlat, lon + dlon),
        (lat + dlat, lon + dlon),
        (lat + dlat, lon - dlon),
    )
    return Tip(region, obs.time, tip_score(params, phi), source="external")
