"""Scene reconstruction from GPS logs and footprint extracts."""

from .geodesy import LocalFrame, geo_to_local, local_to_geo
from .path import EgoPath, PathPose, build_ego_path, interpolate_pose
from .extrude import extrude_footprints, footprints_from_geojson
from .roadusers import place_road_users

__all__ = [
    "LocalFrame",
    "geo_to_local",
    "local_to_geo",
    "EgoPath",
    "PathPose",
    "build_ego_path",
    "interpolate_pose",
    "extrude_footprints",
    "footprints_from_geojson",
    "place_road_users",
]
