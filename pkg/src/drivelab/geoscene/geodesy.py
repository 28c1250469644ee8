"""WGS-84 geodesy: east-north-up tangent frames via ECEF.

City-scale study tracks stay well inside tangent-plane validity (<50 km),
so a single ENU frame anchored at the scene origin serves the whole scene.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..model import GeoSample, Vec3

WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)


def _check_latlon(lat: float, lon: float) -> None:
    if not (-90.0 <= lat <= 90.0):
        raise ValueError(f"latitude {lat} outside [-90, 90]")
    if not (-180.0 <= lon <= 180.0):
        raise ValueError(f"longitude {lon} outside [-180, 180]")


def geodetic_to_ecef(lat: float, lon: float, alt: float) -> Vec3:
    _check_latlon(lat, lon)
    phi = math.radians(lat)
    lam = math.radians(lon)
    sin_phi = math.sin(phi)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_phi * sin_phi)
    x = (n + alt) * math.cos(phi) * math.cos(lam)
    y = (n + alt) * math.cos(phi) * math.sin(lam)
    z = (n * (1.0 - WGS84_E2) + alt) * sin_phi
    return (x, y, z)


def ecef_to_geodetic(x: float, y: float, z: float) -> tuple[float, float, float]:
    lam = math.atan2(y, x)
    p = math.hypot(x, y)
    if p < 1e-12:
        # pole
        lat = math.copysign(90.0, z)
        alt = abs(z) - WGS84_A * math.sqrt(1.0 - WGS84_E2)
        return (lat, math.degrees(lam), alt)
    phi = math.atan2(z, p * (1.0 - WGS84_E2))
    for _ in range(10):
        sin_phi = math.sin(phi)
        n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_phi * sin_phi)
        alt = p / math.cos(phi) - n
        phi_next = math.atan2(z, p * (1.0 - WGS84_E2 * n / (n + alt)))
        if abs(phi_next - phi) < 1e-14:
            phi = phi_next
            break
        phi = phi_next
    sin_phi = math.sin(phi)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_phi * sin_phi)
    alt = p / math.cos(phi) - n
    return (math.degrees(phi), math.degrees(lam), alt)


@dataclass
class LocalFrame:
    """ENU frame tangent to the WGS-84 ellipsoid at ``origin``."""

    origin: GeoSample
    _origin_ecef: Vec3 = field(init=False, repr=False)
    _east: Vec3 = field(init=False, repr=False)
    _north: Vec3 = field(init=False, repr=False)
    _up: Vec3 = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._origin_ecef = geodetic_to_ecef(self.origin.lat, self.origin.lon, self.origin.alt)
        phi = math.radians(self.origin.lat)
        lam = math.radians(self.origin.lon)
        sp, cp = math.sin(phi), math.cos(phi)
        sl, cl = math.sin(lam), math.cos(lam)
        self._east = (-sl, cl, 0.0)
        self._north = (-sp * cl, -sp * sl, cp)
        self._up = (cp * cl, cp * sl, sp)


def geo_to_local(frame: LocalFrame, p: GeoSample) -> Vec3:
    """East-north-up coordinates of ``p`` in meters."""
    ex, ey, ez = geodetic_to_ecef(p.lat, p.lon, p.alt)
    ox, oy, oz = frame._origin_ecef
    dx, dy, dz = ex - ox, ey - oy, ez - oz
    e = dx * frame._east[0] + dy * frame._east[1] + dz * frame._east[2]
    n = dx * frame._north[0] + dy * frame._north[1] + dz * frame._north[2]
    u = dx * frame._up[0] + dy * frame._up[1] + dz * frame._up[2]
    return (e, n, u)


def local_to_geo(frame: LocalFrame, v: Vec3) -> tuple[float, float, float]:
    """Inverse of geo_to_local; returns (lat, lon, alt)."""
    e, n, u = v
    ox, oy, oz = frame._origin_ecef
    x = ox + e * frame._east[0] + n * frame._north[0] + u * frame._up[0]
    y = oy + e * frame._east[1] + n * frame._north[1] + u * frame._up[1]
    z = oz + e * frame._east[2] + n * frame._north[2] + u * frame._up[2]
    return ecef_to_geodetic(x, y, z)
