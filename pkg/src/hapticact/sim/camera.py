"""Deterministic software rasterizer for the two workbench cameras.

Painter's algorithm over convex quads, thick line segments, and disks; all
math is plain numpy, so identical states give bit-identical frames.
"""

from __future__ import annotations

import numpy as np

from .config import SimConfig
from .transforms import quat_to_matrix
from .world import SimState, Simulator

BACKGROUND = (235, 238, 242)
TABLE = (208, 206, 200)
BLOCK = (205, 60, 45)
BASKET_WALL = (70, 105, 190)
BASKET_FLOOR = (96, 128, 200)
ARM = (105, 110, 120)
PALM = (80, 84, 92)
FINGER = (50, 50, 55)
THUMB = (35, 90, 55)

_MIN_DEPTH = 0.02  # clip primitives that reach behind the camera


class Camera:
    def __init__(self, position, rotation, fov_deg, hw):
        self.position = np.asarray(position, dtype=np.float64)
        self.rotation = np.asarray(rotation, dtype=np.float64)  # rows: right, down, forward
        h, w = hw
        self.h, self.w = h, w
        f = (w / 2.0) / np.tan(np.radians(fov_deg) / 2.0)
        self.fx = self.fy = f
        self.cx, self.cy = (w - 1) / 2.0, (h - 1) / 2.0

    def project(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """World points (N,3) -> pixel coords (N,2) and camera depths (N,)."""
        cam = (pts - self.position) @ self.rotation.T
        z = cam[:, 2]
        z_safe = np.maximum(z, 1e-6)
        u = self.fx * cam[:, 0] / z_safe + self.cx
        v = self.fy * cam[:, 1] / z_safe + self.cy
        return np.stack([u, v], axis=1), z


def look_at_camera(position, target, fov_deg, hw) -> Camera:
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    forward = forward / np.linalg.norm(forward)
    up = np.array([0.0, 0.0, 1.0])
    right = np.cross(up, forward)
    right = right / np.linalg.norm(right)
    down = np.cross(right, forward)
    return Camera(position, np.stack([right, down, forward]), fov_deg, hw)


def _fill_convex(img, pts2d, color):
    """Fill a convex polygon given projected vertices (N,2)."""
    h, w, _ = img.shape
    x0 = max(int(np.floor(pts2d[:, 0].min())), 0)
    x1 = min(int(np.ceil(pts2d[:, 0].max())) + 1, w)
    y0 = max(int(np.floor(pts2d[:, 1].min())), 0)
    y1 = min(int(np.ceil(pts2d[:, 1].max())) + 1, h)
    if x0 >= x1 or y0 >= y1:
        return
    xs = np.arange(x0, x1)[None, :]
    ys = np.arange(y0, y1)[:, None]
    inside_pos = np.ones((y1 - y0, x1 - x0), dtype=bool)
    inside_neg = np.ones_like(inside_pos)
    n = len(pts2d)
    for i in range(n):
        ax, ay = pts2d[i]
        bx, by = pts2d[(i + 1) % n]
        cross = (bx - ax) * (ys - ay) - (by - ay) * (xs - ax)
        inside_pos &= cross >= 0
        inside_neg &= cross <= 0
    mask = inside_pos | inside_neg
    img[y0:y1, x0:x1][mask] = color


def _fill_segment(img, a2d, b2d, width_px, color):
    h, w, _ = img.shape
    r = width_px / 2.0
    x0 = max(int(np.floor(min(a2d[0], b2d[0]) - r)), 0)
    x1 = min(int(np.ceil(max(a2d[0], b2d[0]) + r)) + 1, w)
    y0 = max(int(np.floor(min(a2d[1], b2d[1]) - r)), 0)
    y1 = min(int(np.ceil(max(a2d[1], b2d[1]) + r)) + 1, h)
    if x0 >= x1 or y0 >= y1:
        return
    xs = np.arange(x0, x1)[None, :].astype(np.float64)
    ys = np.arange(y0, y1)[:, None].astype(np.float64)
    ab = b2d - a2d
    denom = float(ab @ ab)
    if denom < 1e-12:
        t = np.zeros_like(xs * ys)
    else:
        t = np.clip(((xs - a2d[0]) * ab[0] + (ys - a2d[1]) * ab[1]) / denom, 0.0, 1.0)
    dx = xs - (a2d[0] + t * ab[0])
    dy = ys - (a2d[1] + t * ab[1])
    mask = dx * dx + dy * dy <= r * r
    img[y0:y1, x0:x1][mask] = color


def _fill_disk(img, c2d, radius_px, color):
    a = np.asarray(c2d, dtype=np.float64)
    _fill_segment(img, a, a, 2.0 * radius_px, color)


def _box_corners(center, half, R) -> np.ndarray:
    signs = np.array(
        [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=np.float64
    )
    return (signs * half) @ R.T + center


_BOX_FACES = (
    (0, 1, 3, 2),
    (4, 5, 7, 6),
    (0, 1, 5, 4),
    (2, 3, 7, 6),
    (0, 2, 6, 4),
    (1, 3, 7, 5),
)


def _scene_primitives(sim: Simulator, state: SimState, include_object: bool) -> list:
    """(layer, kind, world pts, extra, color) for everything in view.

    Ground-plane quads get their own early layers: mean-depth painter sorting
    misorders primitives that span a large depth range.
    """
    c = sim.config
    prims = []

    prims.append((0, "quad", np.array([
        [0.02, -0.55, 0.0], [0.95, -0.55, 0.0], [0.95, 0.55, 0.0], [0.02, 0.55, 0.0],
    ]), None, TABLE))

    bx, by = c.basket_center_xy
    hx, hy = c.basket_half_extents
    wz = c.basket_wall_height
    floor = np.array([
        [bx - hx, by - hy, 0.001], [bx + hx, by - hy, 0.001],
        [bx + hx, by + hy, 0.001], [bx - hx, by + hy, 0.001],
    ])
    prims.append((1, "quad", floor, None, BASKET_FLOOR))
    for i in range(4):
        a, b = floor[i, :2], floor[(i + 1) % 4, :2]
        wall = np.array([
            [a[0], a[1], 0.0], [b[0], b[1], 0.0], [b[0], b[1], wz], [a[0], a[1], wz],
        ])
        prims.append((2, "quad", wall, None, BASKET_WALL))

    if include_object:
        corners = _box_corners(
            state.object_pos, np.array(c.block_half_extents), quat_to_matrix(state.object_quat)
        )
        for face in _BOX_FACES:
            prims.append((2, "quad", corners[list(face)], None, BLOCK))

    origins, _, p_e, _ = sim.kin.frames(state.arm)
    chain = origins + [p_e]
    for i in range(len(chain) - 1):
        width = 5.0 if i < 3 else 3.5
        prims.append((2, "seg", np.array([chain[i], chain[i + 1]]), width, ARM))

    tips = sim.fingertips_world(state.arm, state.hand)
    prims.append((2, "disk", p_e[None, :], 3.0, PALM))
    for i in range(5):
        color = THUMB if i == 0 else FINGER
        prims.append((2, "seg", np.array([p_e, tips[i]]), 2.0, color))
        prims.append((2, "disk", tips[i][None, :], 1.5, color))

    return prims


def make_camera(sim: Simulator, state: SimState, name: str) -> Camera:
    c = sim.config
    if name == "front":
        return look_at_camera(c.front_cam_pos, c.front_cam_lookat, c.front_cam_fov_deg, c.image_hw)
    if name == "wrist":
        T = sim.palm_transform(state.arm)
        pos = T[:3, :3] @ np.array(c.wrist_cam_offset) + T[:3, 3]
        # looks along the palm normal (+z, toward the fingertips)
        rot = np.stack([T[:3, 0], T[:3, 1], T[:3, 2]])
        return Camera(pos, rot, c.wrist_cam_fov_deg, c.image_hw)
    raise ValueError(f"unknown camera {name!r}, expected one of {c.cameras}")


def render(sim: Simulator, state: SimState, camera: str, include_object: bool = True) -> np.ndarray:
    """Rasterize one camera view to an (H, W, 3) uint8 frame."""
    cam = make_camera(sim, state, camera)
    img = np.empty((cam.h, cam.w, 3), dtype=np.uint8)
    img[:] = BACKGROUND

    drawlist = []
    for order, (layer, kind, pts, extra, color) in enumerate(
        _scene_primitives(sim, state, include_object)
    ):
        pts2d, z = cam.project(pts)
        if (z < _MIN_DEPTH).any():
            continue
        drawlist.append((layer, -float(z.mean()), order, kind, pts2d, extra, color))
    drawlist.sort(key=lambda item: item[:3])

    for _, _, _, kind, pts2d, extra, color in drawlist:
        if kind == "quad":
            _fill_convex(img, pts2d, color)
        elif kind == "seg":
            _fill_segment(img, pts2d[0], pts2d[1], extra, color)
        elif kind == "disk":
            _fill_disk(img, pts2d[0], extra, color)
    return img


def render_all(sim: Simulator, state: SimState) -> dict[str, np.ndarray]:
    return {name: render(sim, state, name) for name in sim.config.cameras}
