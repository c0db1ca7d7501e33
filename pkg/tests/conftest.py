"""Shared fixtures and small helpers for the test suite."""

import os

import numpy as np
import pytest

from reachguide.perception import CameraIntrinsics, Pose
from reachguide.sim.scene import build_shelf_scene

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def intr():
    return CameraIntrinsics(fx=40.0, fy=40.0, cx=32.0, cy=24.0, width=64, height=48)


@pytest.fixture
def scene():
    return build_shelf_scene()


def random_rotation(rng):
    """Uniform random rotation via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_pose(rng, translation_scale=2.0):
    return Pose(random_rotation(rng), rng.normal(scale=translation_scale, size=3))
