"""Directional audio cues and distance-banded haptic pulse schedules.

The target anchor is expressed in the camera frame (+X right, +Y down,
+Z forward); azimuth/elevation select a quantized spoken direction, and
distance selects one of four haptic bands whose pulse rates strictly
increase as the hand closes in.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .perception import Pose


class Direction(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"
    UP = "Up"
    DOWN = "Down"
    FORWARD = "Forward"
    ARRIVED = "Arrived"


class Band(enum.Enum):
    FAR = "Far"
    MID = "Mid"
    NEAR = "Near"
    ARRIVED = "Arrived"


@dataclass(frozen=True)
class GuidanceConfig:
    dir_threshold_deg: float = 10.0
    arrival_m: float = 0.15
    near_m: float = 0.3
    far_m: float = 1.0
    # Pulse rates must strictly increase Far -> Arrived.
    pulse_rates_hz: tuple = (1.0, 3.0, 8.0, 12.0)
    duty: float = 0.5
    min_gap_s: float = 1.5
    arrived_utterance: str = "Bullseye"

    def __post_init__(self):
        rates = self.pulse_rates_hz
        if not all(a < b for a, b in zip(rates, rates[1:])):
            raise ValueError("pulse rates must strictly increase Far->Arrived")
        if not (0 < self.duty <= 1):
            raise ValueError("duty must be in (0, 1]")


DEFAULT_CONFIG = GuidanceConfig()

_BAND_INDEX = {Band.FAR: 0, Band.MID: 1, Band.NEAR: 2, Band.ARRIVED: 3}


@dataclass(frozen=True)
class HapticSchedule:
    band: Band
    pulse_rate_hz: float
    duty: float


@dataclass(frozen=True)
class GuidanceCue:
    direction: Direction
    azimuth_deg: float
    elevation_deg: float
    distance_m: float
    band: Band
    utterance: str


def distance_band(distance_m, cfg: GuidanceConfig = DEFAULT_CONFIG):
    if distance_m <= cfg.arrival_m:
        return Band.ARRIVED
    if distance_m < cfg.near_m:
        return Band.NEAR
    if distance_m > cfg.far_m:
        return Band.FAR
    return Band.MID


def haptic_schedule(band, cfg: GuidanceConfig = DEFAULT_CONFIG):
    return HapticSchedule(band=band, pulse_rate_hz=cfg.pulse_rates_hz[_BAND_INDEX[band]],
                          duty=cfg.duty)


def compute_cue(anchor, device_pose: Pose, cfg: GuidanceConfig = DEFAULT_CONFIG):
    """Quantized directional cue for the anchor as seen from the device.

    A target behind the camera is never an error: the cue turns the user
    by azimuth sign with a "turn around" utterance.
    """
    v = device_pose.inverse_apply(anchor.position)
    x, y, z = float(v[0]), float(v[1]), float(v[2])
    distance = float(np.linalg.norm(v))
    azimuth = math.degrees(math.atan2(x, z))
    elevation = math.degrees(math.atan2(-y, z))
    band = distance_band(distance, cfg)

    if distance <= cfg.arrival_m:
        direction = Direction.ARRIVED
        utterance = cfg.arrived_utterance
    else:
        if z <= 0:
            direction = Direction.LEFT if azimuth < 0 else Direction.RIGHT
            utterance = f"turn around, {direction.value.lower()}"
            return GuidanceCue(direction, azimuth, elevation, distance, band, utterance)
        if abs(azimuth) >= abs(elevation) and abs(azimuth) > cfg.dir_threshold_deg:
            direction = Direction.LEFT if azimuth < 0 else Direction.RIGHT
        elif abs(elevation) > cfg.dir_threshold_deg:
            direction = Direction.UP if elevation > 0 else Direction.DOWN
        else:
            direction = Direction.FORWARD
        utterance = f"{direction.value}, {round(distance, 1)} meters"
    return GuidanceCue(direction, azimuth, elevation, distance, band, utterance)


def throttle(prev, candidate, min_gap_s=DEFAULT_CONFIG.min_gap_s):
    """Rate-limit cues: emit on first cue, on direction/band change, or
    after the minimum gap.  ``prev``/``candidate`` are (time_s, cue)."""
    t, cue = candidate
    if prev is None:
        return cue
    t_prev, prev_cue = prev
    if cue.direction is not prev_cue.direction or cue.band is not prev_cue.band:
        return cue
    if t - t_prev >= min_gap_s:
        return cue
    return None


def cue_record(time_s, cue, cfg: GuidanceConfig = DEFAULT_CONFIG):
    """Serializable transcript-log row for an emitted cue."""
    return {
        "time_s": time_s,
        "direction": cue.direction.value,
        "azimuth_deg": cue.azimuth_deg,
        "elevation_deg": cue.elevation_deg,
        "distance_m": cue.distance_m,
        "band": cue.band.value,
        "pulse_rate_hz": haptic_schedule(cue.band, cfg).pulse_rate_hz,
        "utterance": cue.utterance,
    }
