"""Simulator configuration: kinematic table, scene geometry, contact constants."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

HAND_JOINT_NAMES = ("thumb_yaw", "thumb_pitch", "index", "middle", "ring", "pinky")


@dataclass(frozen=True)
class SimConfig:
    # stepping
    rate_hz: float = 50.0
    image_hw: tuple[int, int] = (64, 64)

    # 7-joint arm: rotation axes and the fixed link offset (m) that follows
    # each joint, expressed along the local z axis. All zeros is the
    # straight-up home pose at height sum(link_lengths).
    link_lengths: tuple[float, ...] = (0.267, 0.10, 0.2185, 0.10, 0.20, 0.08, 0.107)
    joint_axes: tuple[str, ...] = ("z", "y", "z", "y", "z", "y", "z")
    # (lo, hi) per joint; the last wrist roll is continuous
    joint_limits: tuple[tuple[float, float], ...] = (
        (-2.9, 2.9),
        (-2.1, 2.1),
        (-2.9, 2.9),
        (-2.25, 2.25),
        (-2.9, 2.9),
        (-2.1, 2.1),
        (float("-inf"), float("inf")),
    )
    arm_speed: float = 2.5  # rad/s per-joint tracking limit
    hand_speed: float = 1.5

    # simplified hand linkage, palm frame: +z out of the palm toward the
    # fingertips, fingers on +x, thumb on -x
    hand_limits: tuple[tuple[float, float], ...] = (
        (-0.8, 0.8),  # thumb yaw
        (0.0, 1.4),  # thumb pitch (curl)
        (0.0, 1.4),  # index
        (0.0, 1.4),  # middle
        (0.0, 1.4),  # ring
        (0.0, 1.4),  # pinky
    )
    finger_spread: float = 0.048  # open fingertip |x| in palm frame (m)
    curl_gain: float = 0.036  # m of inward fingertip travel per rad of curl
    finger_lateral: tuple[float, ...] = (-0.027, -0.009, 0.009, 0.027)  # y offsets
    tip_length: float = 0.09  # fingertip z below palm origin (m)

    # contact model
    contact_stiffness: float = 500.0  # N/m of penetration
    grasp_threshold: float = 0.5  # N, attach when thumb + one opposing finger exceed
    release_threshold: float = 0.1  # N, detach hysteresis
    force_cap: float = 8.0  # N, reported forces saturate here
    soft_grasp_setpoint: float = 1.0  # N, scripted closure stops per finger here

    # scene (m); table surface is the z=0 plane
    block_half_extents: tuple[float, float, float] = (0.02, 0.05, 0.02)
    block_nominal_xy: tuple[float, float] = (0.45, -0.12)
    block_spawn_extent: tuple[float, float] = (0.015, 0.03)  # uniform +/- per axis
    basket_center_xy: tuple[float, float] = (0.45, 0.22)
    basket_half_extents: tuple[float, float] = (0.07, 0.07)
    basket_wall_height: float = 0.06
    basket_region_height: float = 0.14  # success box: 0 <= z <= this

    # episode start: arm joints placing the palm face-down over the table
    start_joints: tuple[float, ...] = (0.0, 0.7, 0.0, 1.4, 0.0, 1.0, 0.0)

    # cameras
    cameras: tuple[str, ...] = ("front", "wrist")
    front_cam_pos: tuple[float, float, float] = (1.15, 0.0, 0.48)
    front_cam_lookat: tuple[float, float, float] = (0.40, 0.0, 0.06)
    front_cam_fov_deg: float = 55.0
    wrist_cam_offset: tuple[float, float, float] = (0.0, 0.0, -0.06)  # palm frame
    wrist_cam_fov_deg: float = 75.0

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be > 0")
        if self.contact_stiffness <= 0:
            raise ValueError("contact_stiffness must be > 0")
        if len(self.link_lengths) != 7 or len(self.joint_axes) != 7 or len(self.joint_limits) != 7:
            raise ValueError("arm table must have 7 entries")

    @property
    def dt(self) -> float:
        return 1.0 / self.rate_hz

    def to_dict(self) -> dict:
        data = asdict(self)
        # continuous joints carry infinite limits; JSON gets null instead
        data["joint_limits"] = [
            [None if lo == float("-inf") else lo, None if hi == float("inf") else hi]
            for lo, hi in self.joint_limits
        ]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        kwargs = {}
        for name in cls.__dataclass_fields__:
            if name not in data:
                continue
            v = data[name]
            if name == "joint_limits":
                v = tuple(
                    (float("-inf") if lo is None else lo, float("inf") if hi is None else hi)
                    for lo, hi in v
                )
            elif isinstance(v, list):
                v = tuple(tuple(x) if isinstance(x, list) else x for x in v)
            kwargs[name] = v
        return cls(**kwargs)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SimConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_simconfig_path() -> Path:
    return Path(__file__).parent.parent / "assets" / "simconfig.json"
