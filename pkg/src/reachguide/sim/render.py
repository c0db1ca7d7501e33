"""Depth rendering, projection, and the geometric oracle detector."""

import numpy as np

from ..kernels import render_depth_kernel, ray_boxes_depth
from ..perception import CameraIntrinsics, DepthFrame, Detection2D, Pose
from ..intent import normalize_query
from .scene import Scene


def camera_ray_dirs(intr: CameraIntrinsics, pose: Pose):
    """World-frame ray directions through every pixel center, with unit
    camera-frame z (so ray parameter t equals camera depth)."""
    u = (np.arange(intr.width) + 0.5 - intr.cx) / intr.fx
    v = (np.arange(intr.height) + 0.5 - intr.cy) / intr.fy
    xx, yy = np.meshgrid(u, v)
    dirs_cam = np.stack([xx, yy, np.ones_like(xx)], axis=-1)
    return dirs_cam @ pose.rotation.T


def render_depth(scene: Scene, pose: Pose, intr: CameraIntrinsics, max_range=5.0):
    """Per-pixel nearest ray/AABB depth over all scene objects."""
    dirs = camera_ray_dirs(intr, pose)
    if not scene.objects:
        depth = np.full((intr.height, intr.width), max_range)
        valid = np.zeros((intr.height, intr.width), dtype=bool)
        return DepthFrame(intr.width, intr.height, depth, valid, max_range)
    lo, hi = scene.boxes()
    depth, valid = render_depth_kernel(pose.translation, dirs, lo, hi, max_range)
    return DepthFrame(intr.width, intr.height, depth, valid, max_range)


def project(world_point, pose: Pose, intr: CameraIntrinsics):
    """Pinhole projection; None when behind the camera or off-image."""
    p = pose.inverse_apply(world_point)
    if p[2] <= 0:
        return None
    u = intr.fx * p[0] / p[2] + intr.cx
    v = intr.fy * p[1] / p[2] + intr.cy
    if not (0 <= u < intr.width and 0 <= v < intr.height):
        return None
    return (float(u), float(v))


def _corners(obj):
    lo, hi = obj.lo, obj.hi
    return np.array([[x, y, z] for x in (lo[0], hi[0])
                     for y in (lo[1], hi[1])
                     for z in (lo[2], hi[2])])


def _match_object(scene: Scene, query):
    """Token containment match; best Jaccard wins, scene order breaks ties."""
    q_tokens = set(normalize_query(query).split())
    if not q_tokens:
        return None
    best, best_score = None, -1.0
    for obj in scene.objects:
        l_tokens = set(normalize_query(obj.label).split())
        if not q_tokens <= l_tokens:
            continue
        score = len(q_tokens & l_tokens) / len(q_tokens | l_tokens)
        if score > best_score:
            best, best_score = obj, score
    return best


def _project_bbox(obj, pose, intr):
    """Image-clipped pixel bounds of the projected AABB corners, or None
    if no corner lies in front of the camera."""
    cam = np.array([pose.inverse_apply(c) for c in _corners(obj)])
    front = cam[cam[:, 2] > 1e-9]
    if front.size == 0:
        return None
    us = intr.fx * front[:, 0] / front[:, 2] + intr.cx
    vs = intr.fy * front[:, 1] / front[:, 2] + intr.cy
    u0, u1 = max(us.min(), 0.0), min(us.max(), float(intr.width))
    v0, v1 = max(vs.min(), 0.0), min(vs.max(), float(intr.height))
    if u0 >= u1 or v0 >= v1:
        return None
    return (float(u0), float(v0), float(u1), float(v1))


def target_visible(scene: Scene, obj, pose: Pose, intr: CameraIntrinsics,
                   occlusion_eps_m=0.01):
    """In-frustum and unoccluded along the ray to the object center."""
    if _project_bbox(obj, pose, intr) is None:
        return False
    ray = obj.center - pose.translation
    cam_z = float(pose.inverse_apply(obj.center)[2])
    if cam_z <= 0:
        return False
    direction = ray / cam_z  # unit camera-z parameterization
    analytic = ray_boxes_depth(pose.translation, direction,
                               obj.lo.reshape(1, 3), obj.hi.reshape(1, 3))
    if not np.isfinite(analytic):
        return False
    lo, hi = scene.boxes()
    rendered = ray_boxes_depth(pose.translation, direction, lo, hi)
    return not (rendered < analytic - occlusion_eps_m)


def oracle_detect(scene: Scene, pose: Pose, intr: CameraIntrinsics, query,
                  rng=None, occlusion_eps_m=0.01, confidence=0.9,
                  force_wrong=False):
    """Ground-truth detector: geometric match of the query against the
    scene, absent when off-frustum or occluded.

    With ``force_wrong`` (false-positive injection) the box of some other
    visible object is returned under the query label.
    """
    matched = _match_object(scene, query)
    if force_wrong:
        others = [o for o in scene.objects if matched is None or o.id != matched.id]
        if rng is not None and len(others) > 1:
            others = [others[int(rng.integers(len(others)))]]
        for obj in others:
            if target_visible(scene, obj, pose, intr, occlusion_eps_m):
                bbox = _project_bbox(obj, pose, intr)
                if bbox is not None:
                    return Detection2D(bbox=bbox, label=normalize_query(query),
                                       confidence=0.5)
        return None
    if matched is None:
        return None
    if not target_visible(scene, matched, pose, intr, occlusion_eps_m):
        return None
    bbox = _project_bbox(matched, pose, intr)
    if bbox is None:
        return None
    return Detection2D(bbox=bbox, label=matched.label, confidence=confidence)
