"""Synthetic shelf scenes: axis-aligned objects on a slot grid.

World frame is y-up; the shelf stands in the z=0 plane and the camera
starts on the +z side looking toward -z.  All dimensions are meters and
config-driven.
"""

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from ..perception import Pose


class ConfigError(ValueError):
    """Scene or trial configuration is invalid."""


# Base camera orientation: 180 deg about x, so camera +Z (forward) maps
# to world -Z and camera +Y (down) maps to world -Y (i.e. down).
CAM_BASE = np.array([[1.0, 0.0, 0.0],
                     [0.0, -1.0, 0.0],
                     [0.0, 0.0, -1.0]])


@dataclass(frozen=True)
class SceneObject:
    id: str
    label: str
    center: np.ndarray       # world, meters
    half_extents: np.ndarray  # meters

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).reshape(3))
        object.__setattr__(self, "half_extents",
                           np.asarray(self.half_extents, dtype=np.float64).reshape(3))

    @property
    def lo(self):
        return self.center - self.half_extents

    @property
    def hi(self):
        return self.center + self.half_extents


@dataclass(frozen=True)
class Scene:
    objects: tuple            # SceneObject, unique ids
    target_id: str
    camera_start: Pose
    bounds_lo: np.ndarray
    bounds_hi: np.ndarray
    slots: tuple = ()         # slot-center 3-vectors for randomization

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ConfigError("object ids must be unique")
        if self.target_id not in ids:
            raise ConfigError(f"target_id {self.target_id!r} not among objects")
        object.__setattr__(self, "bounds_lo", np.asarray(self.bounds_lo, dtype=np.float64))
        object.__setattr__(self, "bounds_hi", np.asarray(self.bounds_hi, dtype=np.float64))
        for o in self.objects:
            if np.any(o.lo < self.bounds_lo - 1e-9) or np.any(o.hi > self.bounds_hi + 1e-9):
                raise ConfigError(f"object {o.id!r} lies outside scene bounds")

    @property
    def target(self):
        return next(o for o in self.objects if o.id == self.target_id)

    def boxes(self):
        """(lo, hi) arrays of shape (N, 3) in object order."""
        lo = np.stack([o.lo for o in self.objects])
        hi = np.stack([o.hi for o in self.objects])
        return lo, hi


DEFAULT_OBJECTS = [
    ("chips", "sour cream and onion chips", (0.09, 0.12, 0.04)),
    ("olive-oil", "olive oil bottle", (0.04, 0.13, 0.04)),
    ("rotini", "rotini pasta", (0.06, 0.10, 0.04)),
    ("penne", "penne pasta", (0.06, 0.10, 0.04)),
    ("cups", "red party cups", (0.05, 0.11, 0.05)),
    ("detergent", "laundry detergent", (0.08, 0.13, 0.06)),
    ("milk", "a2 milk carton", (0.04, 0.12, 0.04)),
    ("toilet-paper", "toilet paper pack", (0.12, 0.12, 0.06)),
]

DEFAULT_SHELF = {
    "rows": 4,
    "cols": 2,
    "width_m": 0.9,
    "depth_m": 0.35,
    "row_gap_m": 0.4,
    "base_height_m": 0.2,
    "camera_distance_m": 1.5,
}


def shelf_slots(shelf=None):
    """Slot-center grid: rows x cols across the shelf face."""
    cfg = dict(DEFAULT_SHELF, **(shelf or {}))
    rows, cols = cfg["rows"], cfg["cols"]
    xs = [(c + 0.5) / cols * cfg["width_m"] - cfg["width_m"] / 2 for c in range(cols)]
    ys = [cfg["base_height_m"] + r * cfg["row_gap_m"] for r in range(rows)]
    return tuple(np.array([x, y, 0.0]) for y in ys for x in xs)


def build_shelf_scene(objects=None, target_id="rotini", shelf=None):
    """Default study shelf: 4 rows, 8 household objects, camera 1.5 m out."""
    cfg = dict(DEFAULT_SHELF, **(shelf or {}))
    specs = objects if objects is not None else DEFAULT_OBJECTS
    slots = shelf_slots(cfg)
    if len(specs) > len(slots):
        raise ConfigError(f"{len(specs)} objects but only {len(slots)} shelf slots")
    objs = tuple(
        SceneObject(id=oid, label=label, center=slots[i], half_extents=he)
        for i, (oid, label, he) in enumerate(specs)
    )
    cam_height = cfg["base_height_m"] + (cfg["rows"] - 1) * cfg["row_gap_m"] / 2
    camera_start = Pose(CAM_BASE.copy(), np.array([0.0, cam_height, cfg["camera_distance_m"]]))
    margin = 0.5
    lo = np.array([-cfg["width_m"] / 2 - margin, -margin, -cfg["depth_m"] - margin])
    hi = np.array([cfg["width_m"] / 2 + margin,
                   cfg["base_height_m"] + cfg["rows"] * cfg["row_gap_m"] + margin,
                   cfg["camera_distance_m"] + margin])
    return Scene(objects=objs, target_id=target_id, camera_start=camera_start,
                 bounds_lo=lo, bounds_hi=hi, slots=slots)


def randomize_positions(scene: Scene, seed):
    """Uniformly permute objects across the shelf slot grid.

    Slots are disjoint by construction, so placements never overlap.
    """
    if not scene.slots:
        raise ConfigError("scene has no slot grid to randomize over")
    if len(scene.objects) > len(scene.slots):
        raise ConfigError("more objects than slots")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(scene.slots))
    objects = tuple(
        replace(o, center=np.asarray(scene.slots[perm[i]]))
        for i, o in enumerate(scene.objects)
    )
    return replace(scene, objects=objects)


def scene_hash(scene: Scene):
    """Stable content hash of the scene layout."""
    doc = {
        "objects": [
            {"id": o.id, "label": o.label,
             "center": [round(float(c), 9) for c in o.center],
             "half_extents": [round(float(h), 9) for h in o.half_extents]}
            for o in scene.objects
        ],
        "target_id": scene.target_id,
        "camera": [round(float(c), 9) for c in scene.camera_start.translation],
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]
