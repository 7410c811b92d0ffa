"""Spherical-Earth geometry helpers shared by the visibility and tasking code.

All distances use the mean Earth radius R = 6371.0 km on a sphere; this
matches the accuracy needed for swath-scale visibility tests (footprints
are hundreds of meters, swaths hundreds of kilometers).
"""

from __future__ import annotations

import math

import numpy as np

EARTH_RADIUS_KM = 6371.0
EARTH_RADIUS_M = EARTH_RADIUS_KM * 1000.0


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance between two points, in km."""
    return float(EARTH_RADIUS_KM * central_angle_rad(lat1, lon1, lat2, lon2))


def central_angle_rad(lat1, lon1, lat2, lon2):
    """Central angle between two geodetic points (radians).

    Accepts scalars or numpy arrays (broadcasting applies).
    """
    p1 = np.radians(lat1)
    p2 = np.radians(lat2)
    dp = p2 - p1
    dl = np.radians(lon2) - np.radians(lon1)
    a = np.sin(dp / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dl / 2.0) ** 2
    a = np.clip(a, 0.0, 1.0)
    return 2.0 * np.arcsin(np.sqrt(a))


def meters_to_latlon_offsets(lat_deg: float, east_m, north_m):
    """Convert local ENU meter offsets at a given latitude to (dlat, dlon) degrees."""
    dlat = np.degrees(np.asarray(north_m, dtype=float) / EARTH_RADIUS_M)
    coslat = math.cos(math.radians(lat_deg))
    if abs(coslat) < 1e-12:
        raise ValueError("longitude offset undefined at the poles")
    dlon = np.degrees(np.asarray(east_m, dtype=float) / (EARTH_RADIUS_M * coslat))
    return dlat, dlon


def latlon_to_unit_vec(lat_deg, lon_deg):
    """Unit vector(s) from the Earth's center to geodetic point(s).

    Returns an array of shape (..., 3).
    """
    lat = np.radians(np.asarray(lat_deg, dtype=float))
    lon = np.radians(np.asarray(lon_deg, dtype=float))
    cl = np.cos(lat)
    return np.stack([cl * np.cos(lon), cl * np.sin(lon), np.sin(lat)], axis=-1)


def angle_between_deg(u, v):
    """Angle between vectors along the last axis, in degrees."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = np.linalg.norm(u, axis=-1)
    nv = np.linalg.norm(v, axis=-1)
    dot = np.sum(u * v, axis=-1)
    cosg = np.clip(dot / np.maximum(nu * nv, 1e-300), -1.0, 1.0)
    return np.degrees(np.arccos(cosg))


def polygon_centroid(vertices) -> tuple[float, float]:
    """Arithmetic mean of polygon vertices as (lat, lon).

    Adequate for the small, convex footprints used here; not an area centroid.
    """
    lats = [v[0] for v in vertices]
    lons = [v[1] for v in vertices]
    return sum(lats) / len(lats), sum(lons) / len(lons)


def _segments_properly_intersect(p, q, r, s) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p, q, r)
    d2 = orient(p, q, s)
    d3 = orient(r, s, p)
    d4 = orient(r, s, q)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def polygon_is_simple(vertices) -> bool:
    """True when no two non-adjacent edges properly cross."""
    n = len(vertices)
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_properly_intersect(*edges[i], *edges[j]):
                return False
    return True
