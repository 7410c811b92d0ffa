"""Continuous-time multi-satellite scheduling.

Pipeline: rank cues by availability and peak utility, run projected
gradient descent on the penalized loss over ranked prefixes, binary-search
the largest prefix whose result is exactly separation-feasible, then
greedily re-insert the remaining cues wherever exact feasibility allows.

Gradients treat the separation buffer of each pair as frozen at the
current iterate (recomputed every iteration); final feasibility is always
checked with the exact time-dependent buffer, so the soft penalty can
never smuggle an infeasible pair into the output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .geo import EARTH_RADIUS_KM, angle_between_deg, latlon_to_unit_vec
from .model import (
    EXP_DECAY,
    GAUSSIAN,
    Cue,
    Satellite,
    Schedule,
    ScheduledCue,
    TimeInterval,
    UtilityFunction,
    WindowSet,
    project,
    interval_overlap_length,
    utility_eval,
)
from .orbits import SamplingConfig, compute_all_windows, propagate, propagate_arrays


@dataclass(frozen=True)
class RankingParams:
    """Pre-selection balance: weight on availability vs on peak utility."""

    availability_weight: float = 0.25

    def __post_init__(self):
        if not (0.0 <= self.availability_weight <= 1.0):
            raise ValueError("availability weight must be in [0,1]")


@dataclass(frozen=True)
class PenaltyParams:
    """Soft separation penalty kappa(d, D) = max(0, 1 - (d/D)^r)^beta, weighted by rho."""

    r: float = 5.0
    beta: float = 2.0
    rho: float = 100.0

    def __post_init__(self):
        if self.r <= 0.0 or self.rho <= 0.0:
            raise ValueError("penalty parameters must be positive")
        # beta >= 2 keeps the penalty gradient continuous at d = D.
        if self.beta < 2.0:
            raise ValueError("beta must be >= 2 for a smooth penalty")


@dataclass(frozen=True)
class OptimizerConfig:
    """PGD settings. eta moves time by eta * gradient seconds per step."""

    eta: float = 0.01
    epsilon: float = 1e-3
    max_iters: int = 500
    lipschitz_estimate: Optional[float] = None  # when set, enforce eta < 1/L'

    def __post_init__(self):
        if self.eta <= 0.0 or self.epsilon <= 0.0 or self.max_iters < 1:
            raise ValueError("bad optimizer configuration")

    def effective_eta(self) -> float:
        if self.lipschitz_estimate and self.eta >= 1.0 / self.lipschitz_estimate:
            return 0.9 / self.lipschitz_estimate
        return self.eta


@dataclass(frozen=True)
class SeparationModel:
    """Dwell plus slew view of a satellite used by the separation buffer."""

    t_img: float
    slew_rate: float

    def __post_init__(self):
        if self.t_img <= 0.0 or self.slew_rate <= 0.0:
            raise ValueError("separation parameters must be positive")

    @staticmethod
    def from_satellite(sat: Satellite) -> "SeparationModel":
        return SeparationModel(sat.dwell_time, sat.slew_rate)


def availability(i: int, windows: Sequence[WindowSet]) -> float:
    """Temporal uniqueness of window i: one minus its mean normalized overlap.

    Clamped to [0, 1]; the raw formula can go negative when many cues fully
    overlap window i.
    """
    wi = windows[i]
    if wi.is_empty:
        raise ValueError("availability undefined for empty window set")
    n = len(windows)
    if n == 1:
        return 1.0
    li = wi.total_length()
    if li <= 0.0:
        raise ValueError("availability undefined for zero-measure windows")
    s = sum(interval_overlap_length(wi, wj) / li
            for j, wj in enumerate(windows) if j != i)
    return min(1.0, max(0.0, 1.0 - s / (n - 1)))


def windowed_peak_utility(cue: Cue, w: WindowSet) -> tuple[float, float]:
    """(time, value) of the utility argmax over a window set; ties go earliest."""
    if w.is_empty:
        raise ValueError("empty window set")
    best_t, best_v = None, -math.inf
    for iv in w.intervals:
        t, v = _argmax_on_segment(cue.utility, iv.start, iv.end)
        if v > best_v or (v == best_v and t < best_t):
            best_t, best_v = t, v
    return best_t, best_v


def _argmax_on_segment(u: UtilityFunction, start: float, end: float) -> tuple[float, float]:
    """Argmax of u over [start, end] from analytic critical points and endpoints."""
    candidates = [start, end]
    if u.kind == GAUSSIAN and start <= u.t_ref <= end:
        candidates.append(u.t_ref)
    # exp_decay has no interior critical point: monotone on its support.
    best_t, best_v = None, -math.inf
    for t in sorted(candidates):
        v = utility_eval(u, t)
        if v > best_v:
            best_t, best_v = t, v
    return best_t, best_v


def rank_scores(cues: Sequence[Cue], windows: Sequence[WindowSet],
                p: RankingParams) -> list[float]:
    """Pre-selection score per cue: weight*availability + (1-weight)*peak utility."""
    lam = p.availability_weight
    scores = []
    for i, (cue, w) in enumerate(zip(cues, windows)):
        if w.is_empty:
            raise ValueError(f"cue {cue.id} has empty windows; exclude before ranking")
        if w.total_length() > 0.0:
            avl = availability(i, windows)
        else:
            avl = 1.0  # point windows cannot overlap in measure
        _, peak = windowed_peak_utility(cue, w)
        scores.append(lam * avl + (1.0 - lam) * peak)
    return scores


def rank(cues: Sequence[Cue], windows: Sequence[WindowSet],
         p: RankingParams) -> list[Cue]:
    """Cues in descending score order; ties broken by ascending cue id."""
    scores = rank_scores(cues, windows, p)
    order = sorted(range(len(cues)), key=lambda i: (-scores[i], cues[i].id))
    return [cues[i] for i in order]


def delta_ij(ti: float, tj: float, cue_i: Cue, cue_j: Cue, sat: Satellite) -> float:
    """Minimum time buffer between two acquisitions on one satellite.

    Dwell time plus the slew of the angular separation between the look
    vectors to the two footprint centroids, with the satellite position
    anchored at min(ti, tj) (slewing starts after the first acquisition).
    """
    sep = SeparationModel.from_satellite(sat)
    t_anchor = min(ti, tj)
    state = propagate(sat.ephemeris, t_anchor)
    sat_vec = (EARTH_RADIUS_KM + state.alt_km) * latlon_to_unit_vec(state.lat_deg, state.lon_deg)
    ci = cue_i.footprint.centroid(ti)
    cj = cue_j.footprint.centroid(tj)
    vi = EARTH_RADIUS_KM * latlon_to_unit_vec(*ci) - sat_vec
    vj = EARTH_RADIUS_KM * latlon_to_unit_vec(*cj) - sat_vec
    gamma = float(angle_between_deg(vi, vj))
    return sep.t_img + gamma / sep.slew_rate


def _centroids_at(cues: Sequence[Cue], times: np.ndarray) -> np.ndarray:
    out = np.empty((len(cues), 2))
    for k, (c, t) in enumerate(zip(cues, times)):
        out[k] = c.footprint.centroid(float(t))
    return out


def _buffers_elementwise(times_a: np.ndarray, cues_a: Sequence[Cue],
                         times_b: np.ndarray, cues_b: Sequence[Cue],
                         sat: Satellite) -> np.ndarray:
    """Separation buffers for aligned (a_k, b_k) acquisition pairs on one satellite.

    Element-for-element identical to delta_ij; used where scalar calls
    would dominate the runtime.
    """
    times_a = np.asarray(times_a, dtype=float)
    times_b = np.asarray(times_b, dtype=float)
    if times_a.size == 0:
        return np.zeros(0)
    anchors = np.minimum(times_a, times_b)
    lat, lon, alt, _ = propagate_arrays(sat.ephemeris, anchors)
    sat_pos = (EARTH_RADIUS_KM + alt)[:, None] * latlon_to_unit_vec(lat, lon)
    ca = _centroids_at(cues_a, times_a)
    cb = _centroids_at(cues_b, times_b)
    va = EARTH_RADIUS_KM * latlon_to_unit_vec(ca[:, 0], ca[:, 1]) - sat_pos
    vb = EARTH_RADIUS_KM * latlon_to_unit_vec(cb[:, 0], cb[:, 1]) - sat_pos
    gamma = angle_between_deg(va, vb)
    return sat.dwell_time + gamma / sat.slew_rate


def delta_matrix(cue_i: Cue, cue_j: Cue, sat: Satellite,
                 times_i: Sequence[float], times_j: Sequence[float]) -> np.ndarray:
    """Buffer delta_ij on the grid times_i x times_j, shape (len(i), len(j))."""
    ti = np.asarray(times_i, dtype=float)
    tj = np.asarray(times_j, dtype=float)
    mi, mj = np.meshgrid(ti, tj, indexing="ij")
    flat = _buffers_elementwise(mi.ravel(), [cue_i] * mi.size,
                                mj.ravel(), [cue_j] * mj.size, sat)
    return flat.reshape(mi.shape)


def kappa(d: float, delta: float, p: PenaltyParams) -> float:
    """Soft separation penalty in [0, 1]: 1 at d=0, 0 for d >= delta."""
    if delta <= 0.0:
        raise ValueError("delta must be > 0")
    if d < 0.0:
        raise ValueError("d must be >= 0")
    x = d / delta
    return max(0.0, 1.0 - x**p.r) ** p.beta


def penalty(times: Sequence[float], assignment: Sequence[str], cues: Sequence[Cue],
            sats: Sequence[Satellite], p: PenaltyParams) -> float:
    """Total soft penalty over same-satellite pairs."""
    by_id = {s.id: s for s in sats}
    total = 0.0
    n = len(cues)
    for i in range(n):
        for j in range(i + 1, n):
            if assignment[i] != assignment[j]:
                continue
            sat = by_id[assignment[i]]
            d = abs(times[i] - times[j])
            total += kappa(d, delta_ij(times[i], times[j], cues[i], cues[j], sat), p)
    return total


class _LossEngine:
    """Vectorized penalized loss and gradient over one fixed cue set.

    Holds per-cue utility parameters and satellite lookups; all arrays are
    rebuilt per call from the given times/assignment, so instances are
    reusable and side-effect free.
    """

    def __init__(self, cues: Sequence[Cue], sats: Sequence[Satellite], pp: PenaltyParams):
        self.cues = list(cues)
        self.pp = pp
        self.sats = list(sats)
        self.sat_index = {s.id: k for k, s in enumerate(self.sats)}
        self.dwell = np.array([s.dwell_time for s in self.sats])
        self.slew = np.array([s.slew_rate for s in self.sats])
        n = len(self.cues)
        self.is_gauss = np.array([c.utility.kind == GAUSSIAN for c in self.cues])
        self.s = np.array([c.utility.base_priority for c in self.cues])
        self.tref = np.array([c.utility.t_ref for c in self.cues])
        self.shape = np.array([c.utility.shape for c in self.cues])
        self.static_centroid = np.full((n, 2), np.nan)
        self.dynamic_idx = []
        for k, c in enumerate(self.cues):
            if c.footprint.kind == "static_polygon":
                self.static_centroid[k] = c.footprint.centroid(0.0)
            else:
                self.dynamic_idx.append(k)
        self.iu, self.ju = np.triu_indices(n, 1)

    def utilities(self, t: np.ndarray) -> np.ndarray:
        xg = (t - self.tref) / self.shape
        gauss = self.s * np.exp(-xg * xg)
        dt = t - self.tref
        decay = np.where(dt < 0.0, 0.0, self.s * np.exp(-self.shape * np.maximum(dt, 0.0)))
        return np.where(self.is_gauss, gauss, decay)

    def utility_grads(self, t: np.ndarray) -> np.ndarray:
        xg = (t - self.tref) / self.shape
        gauss = self.s * np.exp(-xg * xg) * (-2.0 * xg / self.shape)
        dt = t - self.tref
        decay = np.where(dt < 0.0, 0.0,
                         -self.shape * self.s * np.exp(-self.shape * np.maximum(dt, 0.0)))
        return np.where(self.is_gauss, gauss, decay)

    def centroids(self, t: np.ndarray) -> np.ndarray:
        out = self.static_centroid.copy()
        for k in self.dynamic_idx:
            lat, lon = self.cues[k].footprint.center_arrays(np.asarray([t[k]]))
            out[k, 0] = lat[0]
            out[k, 1] = lon[0]
        return out

    def same_sat_pairs(self, assign_idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mask = assign_idx[self.iu] == assign_idx[self.ju]
        return self.iu[mask], self.ju[mask]

    def pair_deltas(self, t: np.ndarray, assign_idx: np.ndarray,
                    i_idx: np.ndarray, j_idx: np.ndarray) -> np.ndarray:
        if i_idx.size == 0:
            return np.zeros(0)
        cent = self.centroids(t)
        ground = EARTH_RADIUS_KM * latlon_to_unit_vec(cent[:, 0], cent[:, 1])
        anchors = np.minimum(t[i_idx], t[j_idx])
        pair_sat = assign_idx[i_idx]
        sat_pos = np.zeros((i_idx.size, 3))
        for si in np.unique(pair_sat):
            sel = pair_sat == si
            lat, lon, alt, _ = propagate_arrays(self.sats[si].ephemeris, anchors[sel])
            sat_pos[sel] = (EARTH_RADIUS_KM + alt)[:, None] * latlon_to_unit_vec(lat, lon)
        vi = ground[i_idx] - sat_pos
        vj = ground[j_idx] - sat_pos
        gamma = angle_between_deg(vi, vj)
        return self.dwell[pair_sat] + gamma / self.slew[pair_sat]

    def loss_and_grad(self, t: np.ndarray, assign_idx: np.ndarray):
        i_idx, j_idx = self.same_sat_pairs(assign_idx)
        deltas = self.pair_deltas(t, assign_idx, i_idx, j_idx)
        return self.loss_and_grad_frozen(t, i_idx, j_idx, deltas)

    def loss_and_grad_frozen(self, t: np.ndarray, i_idx, j_idx, deltas):
        """Loss and gradient with the pair buffers held fixed (stop-gradient)."""
        loss = -float(np.sum(self.utilities(t)))
        grad = -self.utility_grads(t)
        if i_idx.size:
            diff = t[i_idx] - t[j_idx]
            d = np.abs(diff)
            x = d / deltas
            inside = x < 1.0
            base = np.where(inside, 1.0 - np.where(inside, x, 0.0) ** self.pp.r, 0.0)
            loss += self.pp.rho * float(np.sum(base ** self.pp.beta))
            # d(kappa)/dd, zero outside the wall and at exact coincidence.
            active = inside & (d > 0.0)
            xa = np.where(active, x, 0.5)
            dkdd = np.where(
                active,
                -self.pp.beta * (1.0 - xa**self.pp.r) ** (self.pp.beta - 1.0)
                * self.pp.r * xa ** (self.pp.r - 1.0) / deltas,
                0.0,
            )
            contrib = self.pp.rho * dkdd * np.sign(diff)
            np.add.at(grad, i_idx, contrib)
            np.add.at(grad, j_idx, -contrib)
        return loss, grad


def pair_buffers(times: Sequence[float], assignment: Sequence[str], cues: Sequence[Cue],
                 sats: Sequence[Satellite]):
    """Same-satellite pair indices and their separation buffers at the given times.

    Returned as (i_idx, j_idx, deltas); useful for finite-difference checks
    against the frozen-buffer loss.
    """
    eng = _LossEngine(cues, sats, PenaltyParams())
    assign_idx = np.array([eng.sat_index[a] for a in assignment])
    t = np.asarray(times, dtype=float)
    i_idx, j_idx = eng.same_sat_pairs(assign_idx)
    return i_idx, j_idx, eng.pair_deltas(t, assign_idx, i_idx, j_idx)


def frozen_loss(times: Sequence[float], cues: Sequence[Cue], sats: Sequence[Satellite],
                pp: PenaltyParams, frozen) -> float:
    """Penalized loss with pair buffers fixed to ``frozen`` (from pair_buffers)."""
    eng = _LossEngine(cues, sats, pp)
    i_idx, j_idx, deltas = frozen
    loss, _ = eng.loss_and_grad_frozen(np.asarray(times, dtype=float), i_idx, j_idx, deltas)
    return loss


def loss_and_grad(times: Sequence[float], assignment: Sequence[str], cues: Sequence[Cue],
                  sats: Sequence[Satellite], pp: PenaltyParams,
                  oc: Optional[OptimizerConfig] = None):
    """Penalized loss and its gradient (per second) at the given times.

    The separation buffers are evaluated at the given times and treated as
    constants inside the gradient (the optimizer recomputes them every
    iteration). ``oc`` is accepted for signature symmetry; the gradient
    does not depend on it.
    """
    eng = _LossEngine(cues, sats, pp)
    assign_idx = np.array([eng.sat_index[a] for a in assignment])
    loss, grad = eng.loss_and_grad(np.asarray(times, dtype=float), assign_idx)
    return loss, [float(g) for g in grad]


def init_time(cue: Cue, windows: WindowSet) -> float:
    """Utility argmax over the cue's windows; ties resolve to the earliest time."""
    if windows.is_empty:
        raise ValueError("cannot initialize a cue with empty windows")
    t, _ = windowed_peak_utility(cue, windows)
    return t


@dataclass(frozen=True)
class PgdResult:
    times: tuple[float, ...]
    assignment: tuple[str, ...]
    converged: bool
    trace: tuple[float, ...]
    eta_used: float
    iterations: int


def pgd(prefix: Sequence[Cue], windows: Sequence[WindowSet], sats: Sequence[Satellite],
        pp: PenaltyParams, oc: OptimizerConfig) -> PgdResult:
    """Projected gradient descent over acquisition times of the given cues.

    Each step takes a gradient move then projects every time back onto its
    cue's windows, reassigning the satellite when the projection lands in a
    different satellite's interval. Convergence means the gradient norm
    fell below epsilon; non-convergence is reported, never raised.
    """
    if any(w.is_empty for w in windows):
        raise ValueError("all prefix cues need non-empty windows")
    eng = _LossEngine(prefix, sats, pp)
    eta = oc.effective_eta()
    times = np.empty(len(prefix))
    assignment: list[str] = []
    for k, (cue, w) in enumerate(zip(prefix, windows)):
        t0 = init_time(cue, w)
        times[k] = t0
        assignment.append(w.containing_interval(t0).satellite_id)
    assign_idx = np.array([eng.sat_index[a] for a in assignment])
    trace: list[float] = []
    converged = False
    iterations = 0
    for m in range(oc.max_iters):
        iterations = m + 1
        loss, grad = eng.loss_and_grad(times, assign_idx)
        trace.append(loss)
        if float(np.linalg.norm(grad)) < oc.epsilon:
            converged = True
            break
        stepped = times - eta * grad
        for k, w in enumerate(windows):
            t_new, sat_id = project(w, float(stepped[k]))
            times[k] = t_new
            if assignment[k] != sat_id:
                assignment[k] = sat_id
                assign_idx[k] = eng.sat_index[sat_id]
            # Post-projection iterates always lie inside the window set.
            assert w.containing_interval(t_new) is not None
    return PgdResult(tuple(float(t) for t in times), tuple(assignment), converged,
                     tuple(trace), eta, iterations)


def separation_feasible(cues: Sequence[Cue], times: Sequence[float],
                        assignment: Sequence[str], sats: Sequence[Satellite]) -> bool:
    """Exact check: |t_i - t_j| >= buffer(t_i, t_j) for every same-satellite pair."""
    by_id = {s.id: s for s in sats}
    t = np.asarray(times, dtype=float)
    groups: dict[str, list[int]] = {}
    for k, a in enumerate(assignment):
        groups.setdefault(a, []).append(k)
    for sat_id, idx in groups.items():
        if len(idx) < 2:
            continue
        ii, jj = np.triu_indices(len(idx), 1)
        gi = np.asarray(idx)[ii]
        gj = np.asarray(idx)[jj]
        deltas = _buffers_elementwise(t[gi], [cues[k] for k in gi],
                                      t[gj], [cues[k] for k in gj], by_id[sat_id])
        if np.any(np.abs(t[gi] - t[gj]) < deltas):
            return False
    return True


def binary_search_prefix(ranked: Sequence[Cue], windows: Mapping[str, WindowSet],
                         sats: Sequence[Satellite], pp: PenaltyParams,
                         oc: OptimizerConfig):
    """Largest ranked prefix whose PGD result is exactly feasible.

    Returns (k_star, best_result, traces) where traces holds one
    (prefix_size, loss_trace) record per evaluated prefix.
    """
    lo, hi = 1, len(ranked)
    k_star = 0
    best: Optional[PgdResult] = None
    traces: list[tuple[int, tuple[float, ...]]] = []
    while lo <= hi:
        k = (lo + hi) // 2
        prefix = list(ranked[:k])
        res = pgd(prefix, [windows[c.id] for c in prefix], sats, pp, oc)
        traces.append((k, res.trace))
        if separation_feasible(prefix, res.times, res.assignment, sats):
            k_star, best = k, res
            lo = k + 1
        else:
            hi = k - 1
    return k_star, best, traces


def _subtract_open(segs: list[tuple[float, float]], lo: float, hi: float):
    """Remove the open interval (lo, hi) from closed segments."""
    out = []
    for s, e in segs:
        if hi <= s or lo >= e:
            out.append((s, e))
            continue
        if s <= lo:
            out.append((s, min(lo, e)))
        if hi <= e:
            out.append((max(hi, s), e))
    return [(s, e) for s, e in out if e >= s]


def _feasible_argmax(cue: Cue, iv: TimeInterval, entries, cue_index: Mapping[str, Cue],
                     sat: Satellite):
    """Best feasible (time, value) in one interval against scheduled entries.

    Forbidden regions use the buffer evaluated from each scheduled time to
    the interval's nearest point, then every candidate is verified against
    the exact buffer and the segment shrunk until exact feasibility holds.
    """
    segs = [(iv.start, iv.end)]
    if entries:
        e_times = np.array([e.time for e in entries])
        e_cues = [cue_index[e.cue_id] for e in entries]
        nearest = np.clip(e_times, iv.start, iv.end)
        dhat = _buffers_elementwise(nearest, [cue] * len(entries), e_times, e_cues, sat)
        for et, dh in zip(e_times, dhat):
            segs = _subtract_open(segs, et - dh, et + dh)
            if not segs:
                return None
    for _ in range(500):
        if not segs:
            return None
        best = None
        for s, e in segs:
            t, v = _argmax_on_segment(cue.utility, s, e)
            if best is None or v > best[1] or (v == best[1] and t < best[0]):
                best = (t, v)
        t_star, v_star = best
        if not entries:
            return t_star, v_star
        d_exact = _buffers_elementwise(np.full(len(entries), t_star),
                                       [cue] * len(entries), e_times, e_cues, sat)
        violations = np.flatnonzero(np.abs(t_star - e_times) < d_exact)
        if violations.size == 0:
            return t_star, v_star
        k = int(violations[0])
        segs = _subtract_open(segs, float(e_times[k] - d_exact[k]),
                              float(e_times[k] + d_exact[k]))
        # Rounding can leave the rejected candidate sitting exactly on a
        # segment edge one ulp inside the buffer; drop the point itself so
        # the shrink always makes progress.
        if any(s <= t_star <= e for s, e in segs):
            segs = _subtract_open(segs, np.nextafter(t_star, -math.inf),
                                  np.nextafter(t_star, math.inf))
    return None


def refine(schedule: Schedule, unscheduled: Sequence[Cue],
           windows: Mapping[str, WindowSet], sats: Sequence[Satellite],
           pp: PenaltyParams, cue_index: Optional[Mapping[str, Cue]] = None) -> Schedule:
    """Re-insert unscheduled cues, in rank order, wherever exactly feasible.

    Existing entries are never moved or removed; each added cue takes the
    utility argmax over the sub-intervals that survive the separation
    constraints against everything scheduled so far.
    """
    by_id = {s.id: s for s in sats}
    index: dict[str, Cue] = dict(cue_index or {})
    for cue in unscheduled:
        index.setdefault(cue.id, cue)
    entries = list(schedule.entries)
    added = 0
    for cue in unscheduled:
        w = windows[cue.id]
        best = None  # (value, time, sat_id)
        for iv in w.intervals:
            sat = by_id[iv.satellite_id]
            same = [e for e in entries if e.satellite_id == iv.satellite_id]
            found = _feasible_argmax(cue, iv, same, index, sat)
            if found is None:
                continue
            t, v = found
            if best is None or v > best[0] or (v == best[0] and t < best[1]):
                best = (v, t, iv.satellite_id)
        if best is not None:
            v, t, sat_id = best
            entries.append(ScheduledCue(cue.id, t, sat_id, utility_eval(cue.utility, t)))
            index.setdefault(cue.id, cue)
            added += 1
    total = sum(e.utility_at_time for e in entries)
    return Schedule(tuple(entries), total,
                    (schedule.phase_counts[0], schedule.phase_counts[1] + added))


@dataclass(frozen=True)
class ScheduleResult:
    """Schedule plus the diagnostics downstream tooling consumes."""

    schedule: Schedule
    feasible_count: int
    ranked_ids: tuple[str, ...]
    k_star: int
    loss_traces: tuple[tuple[int, tuple[float, ...]], ...]
    windows: Mapping[str, WindowSet] = field(hash=False)


def schedule(cues: Sequence[Cue], sats: Sequence[Satellite], rp: RankingParams,
             pp: PenaltyParams, oc: OptimizerConfig, sc: SamplingConfig,
             windows: Optional[Mapping[str, WindowSet]] = None) -> ScheduleResult:
    """End-to-end scheduling: windows, ranking, prefix search, refinement.

    ``windows`` may be supplied to reuse a previous computation (they do
    not depend on ranking or optimizer settings).
    """
    if windows is None:
        windows = compute_all_windows(list(cues), list(sats), sc) if cues else {}
    feasible = [c for c in cues if not windows[c.id].is_empty]
    index = {c.id: c for c in cues}
    if not feasible:
        empty = Schedule((), 0.0, (0, 0))
        return ScheduleResult(empty, 0, (), 0, (), dict(windows))
    ranked = rank(feasible, [windows[c.id] for c in feasible], rp)
    k_star, best, traces = binary_search_prefix(ranked, windows, sats, pp, oc)
    entries = []
    if best is not None:
        for cue, t, sat_id in zip(ranked[:k_star], best.times, best.assignment):
            entries.append(ScheduledCue(cue.id, t, sat_id, utility_eval(cue.utility, t)))
    base = Schedule(tuple(entries), sum(e.utility_at_time for e in entries), (k_star, 0))
    final = refine(base, ranked[k_star:], windows, sats, pp, cue_index=index)
    validate_schedule(final, index, sats, windows)
    return ScheduleResult(final, len(feasible), tuple(c.id for c in ranked), k_star,
                          tuple(traces), dict(windows))


def validate_schedule(sched: Schedule, cues_by_id: Mapping[str, Cue],
                      sats: Sequence[Satellite], windows: Mapping[str, WindowSet]) -> None:
    """Raise unless every schedule invariant holds exactly.

    Checks: each time sits in a window interval tagged with the assigned
    satellite, the stored utility matches, the total matches the sum, and
    every same-satellite pair respects the exact separation buffer.
    """
    by_id = {s.id: s for s in sats}
    for e in sched.entries:
        w = windows[e.cue_id]
        ok = any(iv.contains(e.time) and iv.satellite_id == e.satellite_id
                 for iv in w.intervals)
        if not ok:
            raise AssertionError(f"entry {e.cue_id} at {e.time} outside its windows")
        expect = utility_eval(cues_by_id[e.cue_id].utility, e.time)
        if expect != e.utility_at_time:
            raise AssertionError(f"entry {e.cue_id} utility mismatch")
    total = sum(e.utility_at_time for e in sched.entries)
    if not math.isclose(total, sched.total_utility, rel_tol=0.0, abs_tol=1e-9):
        raise AssertionError("total utility mismatch")
    es = list(sched.entries)
    for i in range(len(es)):
        for j in range(i + 1, len(es)):
            if es[i].satellite_id != es[j].satellite_id:
                continue
            d = abs(es[i].time - es[j].time)
            need = delta_ij(es[i].time, es[j].time, cues_by_id[es[i].cue_id],
                            cues_by_id[es[j].cue_id], by_id[es[i].satellite_id])
            if d < need:
                raise AssertionError(
                    f"separation violation between {es[i].cue_id} and {es[j].cue_id}: "
                    f"{d} < {need}")


def estimate_lipschitz(cues: Sequence[Cue], pp: PenaltyParams,
                       min_delta_s: Optional[float] = None) -> float:
    """Smoothness bound L' = max(utility curvature bound, penalty curvature bound).

    Utility bounds: s/sigma^2 * max(1, 2/e) for the Gaussian family and
    s*lambda^2 for exponential decay. The penalty bound scales the worst
    curvature of kappa over its normalized argument by rho / min_delta^2;
    pass min_delta_s=None when no same-satellite pair can interact.
    """
    l_util = 0.0
    for c in cues:
        u = c.utility
        if u.kind == GAUSSIAN:
            l_util = max(l_util, u.base_priority / u.shape**2 * max(1.0, 2.0 / math.e))
        else:
            l_util = max(l_util, u.base_priority * u.shape**2)
    if min_delta_s is None:
        return l_util
    x = np.linspace(0.0, 1.0, 20001)
    r, b = pp.r, pp.beta
    inner = 1.0 - x**r
    k2 = (b * (b - 1.0) * np.where(inner > 0, inner, 0.0) ** max(b - 2.0, 0.0)
          * (r * x ** (r - 1.0)) ** 2
          - b * inner ** (b - 1.0) * r * (r - 1.0) * np.where(x > 0, x, 1.0) ** (r - 2.0))
    l_pen = pp.rho * float(np.max(np.abs(k2))) / min_delta_s**2
    return max(l_util, l_pen)
