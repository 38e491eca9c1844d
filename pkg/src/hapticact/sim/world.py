"""Kinematic pick-and-place world: 7-joint arm, 6-joint hand, one block, one basket.

First-order joint tracking toward position targets, penetration-spring
fingertip contact, and hysteretic kinematic attachment instead of rigid-body
dynamics. Everything is a pure function of (seed, action sequence).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import SimConfig
from .kinematics import ArmKinematics
from .transforms import (
    invert_transform,
    make_transform,
    matrix_to_quat,
    quat_to_matrix,
    rot_axis,
)

N_ARM = 7
N_HAND = 6
N_FINGERS = 5
ACTION_DIM = N_ARM + N_HAND


class InvalidActionError(ValueError):
    """Action vector contains NaN/inf or has the wrong shape."""


@dataclass(frozen=True)
class SimState:
    arm: np.ndarray  # (7,) rad
    hand: np.ndarray  # (6,) rad: thumb_yaw, thumb_pitch, index, middle, ring, pinky
    object_pos: np.ndarray  # (3,) m
    object_quat: np.ndarray  # (4,) wxyz
    attached: bool
    attach_transform: np.ndarray | None  # palm -> object, set while attached
    forces: np.ndarray  # (5,) N per finger
    step_index: int
    seed: int

    @property
    def joints(self) -> np.ndarray:
        """Concatenated 13-vector [arm, hand]."""
        return np.concatenate([self.arm, self.hand])


class Simulator:
    """Owns the config-derived geometry; states are immutable snapshots."""

    def __init__(self, config: SimConfig | None = None):
        self.config = config or SimConfig()
        self.kin = ArmKinematics(self.config)
        c = self.config
        self._hand_lo = np.array([lo for lo, _ in c.hand_limits])
        self._hand_hi = np.array([hi for _, hi in c.hand_limits])
        self._arm_step = c.arm_speed * c.dt
        self._hand_step = c.hand_speed * c.dt

    # -- scene ------------------------------------------------------------

    def block_spawn(self, seed: int) -> np.ndarray:
        """Block center for an episode seed: nominal xy + seeded uniform offset."""
        c = self.config
        rng = np.random.default_rng(seed)
        ex, ey = c.block_spawn_extent
        dx, dy = rng.uniform(-ex, ex), rng.uniform(-ey, ey)
        return np.array([c.block_nominal_xy[0] + dx, c.block_nominal_xy[1] + dy, c.block_half_extents[2]])

    def reset(self, seed: int) -> SimState:
        c = self.config
        arm = np.array(c.start_joints, dtype=np.float64)
        hand = np.zeros(N_HAND)
        obj_pos = self.block_spawn(seed)
        obj_quat = np.array([1.0, 0.0, 0.0, 0.0])
        forces = self._contact_forces(arm, hand, obj_pos, obj_quat)
        return SimState(
            arm=arm,
            hand=hand,
            object_pos=obj_pos,
            object_quat=obj_quat,
            attached=False,
            attach_transform=None,
            forces=forces,
            step_index=0,
            seed=seed,
        )

    # -- hand geometry ------------------------------------------------------

    def palm_transform(self, arm: np.ndarray) -> np.ndarray:
        pose = self.kin.fk(arm, check_limits=False)
        return make_transform(quat_to_matrix(pose.quaternion), pose.position)

    def fingertips_local(self, hand: np.ndarray) -> np.ndarray:
        """(5, 3) fingertip positions in the palm frame, thumb first."""
        c = self.config
        tips = np.zeros((N_FINGERS, 3))
        thumb_yaw, thumb_pitch = hand[0], hand[1]
        thumb = np.array(
            [-(c.finger_spread - c.curl_gain * thumb_pitch), 0.0, c.tip_length]
        )
        tips[0] = rot_axis("z", thumb_yaw) @ thumb
        for i in range(4):
            curl = hand[2 + i]
            tips[1 + i] = (
                c.finger_spread - c.curl_gain * curl,
                c.finger_lateral[i],
                c.tip_length,
            )
        return tips

    def fingertips_world(self, arm: np.ndarray, hand: np.ndarray) -> np.ndarray:
        T = self.palm_transform(arm)
        local = self.fingertips_local(hand)
        return local @ T[:3, :3].T + T[:3, 3]

    # -- contact ------------------------------------------------------------

    def _contact_forces(
        self, arm: np.ndarray, hand: np.ndarray, obj_pos: np.ndarray, obj_quat: np.ndarray
    ) -> np.ndarray:
        c = self.config
        tips = self.fingertips_world(arm, hand)
        R_obj = quat_to_matrix(obj_quat)
        local = (tips - obj_pos) @ R_obj  # rows: fingertip in block frame
        half = np.array(c.block_half_extents)
        margins = half - np.abs(local)
        depth = np.where((margins > 0).all(axis=1), margins.min(axis=1), 0.0)
        return np.minimum(c.contact_stiffness * depth, c.force_cap)

    # -- stepping -----------------------------------------------------------

    def step(self, state: SimState, action: np.ndarray) -> SimState:
        action = np.asarray(action, dtype=np.float64)
        if action.shape != (ACTION_DIM,):
            raise InvalidActionError(f"action must have shape ({ACTION_DIM},), got {action.shape}")
        if not np.isfinite(action).all():
            raise InvalidActionError("action contains non-finite values")
        c = self.config

        arm_target = np.clip(action[:N_ARM], self.kin.limits_lo, self.kin.limits_hi)
        hand_target = np.clip(action[N_ARM:], self._hand_lo, self._hand_hi)
        arm = state.arm + np.clip(arm_target - state.arm, -self._arm_step, self._arm_step)
        hand = state.hand + np.clip(hand_target - state.hand, -self._hand_step, self._hand_step)

        attached = state.attached
        attach_T = state.attach_transform
        if attached:
            T_obj = self.palm_transform(arm) @ attach_T
            obj_pos = T_obj[:3, 3].copy()
            obj_quat = matrix_to_quat(T_obj[:3, :3])
        else:
            obj_pos = state.object_pos.copy()
            obj_quat = state.object_quat.copy()

        forces = self._contact_forces(arm, hand, obj_pos, obj_quat)

        thumb, others = forces[0], forces[1:]
        if not attached:
            if thumb >= c.grasp_threshold and others.max() >= c.grasp_threshold:
                attached = True
                T_palm = self.palm_transform(arm)
                T_obj = make_transform(quat_to_matrix(obj_quat), obj_pos)
                attach_T = invert_transform(T_palm) @ T_obj
        else:
            if thumb < c.release_threshold and others.max() < c.release_threshold:
                attached = False
                attach_T = None

        return SimState(
            arm=arm,
            hand=hand,
            object_pos=obj_pos,
            object_quat=obj_quat,
            attached=attached,
            attach_transform=attach_T,
            forces=forces,
            step_index=state.step_index + 1,
            seed=state.seed,
        )

    # -- task predicates ------------------------------------------------------

    def in_basket_region(self, obj_pos: np.ndarray) -> bool:
        c = self.config
        bx, by = c.basket_center_xy
        hx, hy = c.basket_half_extents
        return (
            abs(obj_pos[0] - bx) <= hx
            and abs(obj_pos[1] - by) <= hy
            and 0.0 <= obj_pos[2] <= c.basket_region_height
        )

    def success(self, state: SimState) -> bool:
        return self.in_basket_region(state.object_pos)
