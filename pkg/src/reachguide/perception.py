"""Camera geometry and target-anchor maintenance.

Converts a detector's 2D box plus a depth frame into a world-frame 3D
anchor and keeps that anchor smoothed over time.  Camera frame is the
usual pinhole convention: +X right, +Y down, +Z forward (optical axis).
"""

import struct
from dataclasses import dataclass, field, replace

import numpy as np


class InvalidDepth(ValueError):
    """Depth value is not usable (non-positive or out of range)."""


class NoDepth(ValueError):
    """No valid depth pixels available where one was needed."""


class InvalidPoint(ValueError):
    """A 3D point contained non-finite components."""


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


@dataclass(frozen=True)
class Pose:
    """Rigid camera-to-world transform."""

    rotation: np.ndarray    # (3, 3), orthonormal, det +1
    translation: np.ndarray  # (3,), meters

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-9):
            raise ValueError("rotation is not orthonormal")
        if not np.isclose(np.linalg.det(r), 1.0, atol=1e-9):
            raise ValueError("rotation determinant must be +1")

    @staticmethod
    def identity():
        return Pose(np.eye(3), np.zeros(3))

    def apply(self, point_cam):
        return self.rotation @ np.asarray(point_cam, dtype=np.float64) + self.translation

    def inverse_apply(self, point_world):
        return self.rotation.T @ (np.asarray(point_world, dtype=np.float64) - self.translation)

    def inverse(self):
        return Pose(self.rotation.T, -(self.rotation.T @ self.translation))

    def compose(self, other):
        """self ∘ other: apply `other` first, then `self`."""
        return Pose(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)


@dataclass
class DepthFrame:
    width: int
    height: int
    depth: np.ndarray   # (height, width) float32/float64 meters
    valid: np.ndarray   # (height, width) bool
    max_range: float


@dataclass(frozen=True)
class Detection2D:
    bbox: tuple  # (u_min, v_min, u_max, v_max) pixels
    label: str
    confidence: float

    def center(self):
        u_min, v_min, u_max, v_max = self.bbox
        return (0.5 * (u_min + u_max), 0.5 * (v_min + v_max))


@dataclass(frozen=True)
class TargetAnchor:
    position: np.ndarray  # world frame, meters
    last_update: float
    confidence: float = 1.0
    ema_alpha: float = 0.5


def unproject(pixel, depth_m, intr: CameraIntrinsics):
    """Pinhole back-projection of a pixel + metric depth to camera frame."""
    if depth_m <= 0:
        raise InvalidDepth(f"depth must be positive, got {depth_m}")
    u, v = pixel
    x = (u - intr.cx) * depth_m / intr.fx
    y = (v - intr.cy) * depth_m / intr.fy
    return np.array([x, y, depth_m], dtype=np.float64)


def to_world(point_cam, pose: Pose):
    return pose.apply(point_cam)


def bbox_depth(frame: DepthFrame, bbox):
    """Median valid depth inside the central 50%x50% sub-box of bbox.

    The shrunken box rejects background bleed at the detection edges.
    """
    u_min, v_min, u_max, v_max = bbox
    du = (u_max - u_min) * 0.25
    dv = (v_max - v_min) * 0.25
    i0 = int(np.floor(v_min + dv))
    i1 = max(int(np.ceil(v_max - dv)), i0 + 1)
    j0 = int(np.floor(u_min + du))
    j1 = max(int(np.ceil(u_max - du)), j0 + 1)
    i0 = np.clip(i0, 0, frame.height - 1)
    i1 = np.clip(i1, i0 + 1, frame.height)
    j0 = np.clip(j0, 0, frame.width - 1)
    j1 = np.clip(j1, j0 + 1, frame.width)
    patch = frame.depth[i0:i1, j0:j1]
    mask = frame.valid[i0:i1, j0:j1]
    if not mask.any():
        raise NoDepth("no valid depth pixels in detection sub-box")
    return float(np.median(patch[mask]))


def update_anchor(anchor, new_world_point, now, alpha=0.5, confidence=1.0):
    """Exponential moving-average update of the target anchor."""
    if not (0 < alpha <= 1):
        raise ValueError("alpha must be in (0, 1]")
    p = np.asarray(new_world_point, dtype=np.float64)
    if not np.all(np.isfinite(p)):
        raise InvalidPoint(f"non-finite target point {p}")
    if anchor is None:
        return TargetAnchor(position=p, last_update=now, confidence=confidence, ema_alpha=alpha)
    blended = alpha * p + (1.0 - alpha) * anchor.position
    return TargetAnchor(position=blended, last_update=now, confidence=confidence, ema_alpha=alpha)


# Flat binary depth-frame layout (little-endian) for golden-file tests:
# u32 width, u32 height, f32 max_range, then w*h f32 depths, then w*h u8 validity.

def write_depth_frame(frame: DepthFrame, path):
    with open(path, "wb") as f:
        f.write(struct.pack("<IIf", frame.width, frame.height, frame.max_range))
        f.write(np.asarray(frame.depth, dtype="<f4").tobytes())
        f.write(np.asarray(frame.valid, dtype=np.uint8).tobytes())


def read_depth_frame(path):
    with open(path, "rb") as f:
        width, height, max_range = struct.unpack("<IIf", f.read(12))
        depth = np.frombuffer(f.read(4 * width * height), dtype="<f4").reshape(height, width)
        valid = np.frombuffer(f.read(width * height), dtype=np.uint8).reshape(height, width) != 0
    return DepthFrame(width=width, height=height, depth=depth.astype(np.float64),
                      valid=valid, max_range=float(max_range))
