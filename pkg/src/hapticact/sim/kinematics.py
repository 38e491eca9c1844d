"""Forward / inverse kinematics for the 7-joint arm.

The chain is a serial list of (rotation about a principal axis, fixed offset
along local z). Inverse kinematics solves FK(theta) = target with damped
least squares on the geometric Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .transforms import matrix_to_quat, quat_to_matrix, rot_axis, rotation_vector

IK_POS_TOL = 1e-3  # m
IK_ROT_TOL = 1e-2  # rad
IK_LAMBDA = 0.1
IK_MAX_ITERS = 100
_STEP_POS_CAP = 0.15  # m, per-iteration error clamp
_STEP_ROT_CAP = 0.5  # rad


class JointLimitError(ValueError):
    """A joint value lies outside the configured limits."""


class UnreachableTargetError(RuntimeError):
    """IK failed to converge; carries the best residual seen."""

    def __init__(self, msg: str, pos_residual: float, rot_residual: float):
        super().__init__(f"{msg} (best residual: {pos_residual:.4g} m, {rot_residual:.4g} rad)")
        self.pos_residual = pos_residual
        self.rot_residual = rot_residual


@dataclass(frozen=True)
class PoseTarget:
    """End-effector pose: position (m) and unit quaternion (wxyz)."""

    position: np.ndarray
    quaternion: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64))
        object.__setattr__(self, "quaternion", np.asarray(self.quaternion, dtype=np.float64))
        if self.position.shape != (3,) or self.quaternion.shape != (4,):
            raise ValueError("pose needs a 3-vector position and 4-vector quaternion")
        if abs(np.linalg.norm(self.quaternion) - 1.0) >= 1e-6:
            raise ValueError("quaternion must be unit-norm")

    @property
    def matrix(self) -> np.ndarray:
        return quat_to_matrix(self.quaternion)


class ArmKinematics:
    """FK/IK over the arm table of a SimConfig."""

    def __init__(self, config: SimConfig):
        self.axes = config.joint_axes
        self.offsets = [np.array([0.0, 0.0, L]) for L in config.link_lengths]
        self.limits_lo = np.array([lo for lo, _ in config.joint_limits])
        self.limits_hi = np.array([hi for _, hi in config.joint_limits])
        # reach sphere is centered at the shoulder (first offset is vertical
        # regardless of the base yaw angle)
        self.shoulder = self.offsets[0].copy()
        self.reach = float(sum(config.link_lengths[1:]))

    def n_joints(self) -> int:
        return len(self.axes)

    def check_limits(self, theta: np.ndarray) -> None:
        theta = np.asarray(theta)
        bad = (theta < self.limits_lo) | (theta > self.limits_hi)
        if bad.any():
            idx = int(np.argmax(bad))
            raise JointLimitError(
                f"joint {idx} value {theta[idx]:.4f} outside "
                f"[{self.limits_lo[idx]:.4f}, {self.limits_hi[idx]:.4f}]"
            )

    def clamp(self, theta: np.ndarray) -> np.ndarray:
        return np.clip(theta, self.limits_lo, self.limits_hi)

    def frames(self, theta: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray, np.ndarray]:
        """Per-joint world origins and rotation axes, plus the EE (p, R)."""
        R = np.eye(3)
        p = np.zeros(3)
        origins, axes_w = [], []
        for ax, off, th in zip(self.axes, self.offsets, theta):
            axis_local = {"x": [1, 0, 0], "y": [0, 1, 0], "z": [0, 0, 1]}[ax]
            origins.append(p.copy())
            axes_w.append(R @ np.array(axis_local, dtype=np.float64))
            R = R @ rot_axis(ax, th)
            p = p + R @ off
        return origins, axes_w, p, R

    def fk(self, theta: np.ndarray, check_limits: bool = True) -> PoseTarget:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.n_joints(),):
            raise ValueError(f"expected {self.n_joints()} joint values, got shape {theta.shape}")
        if not np.isfinite(theta).all():
            raise ValueError("joint values must be finite")
        if check_limits:
            self.check_limits(theta)
        _, _, p, R = self.frames(theta)
        return PoseTarget(p, matrix_to_quat(R))

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        origins, axes_w, p_e, _ = self.frames(theta)
        J = np.zeros((6, self.n_joints()))
        for i, (o, a) in enumerate(zip(origins, axes_w)):
            J[:3, i] = np.cross(a, p_e - o)
            J[3:, i] = a
        return J

    def _dls_step(self, J: np.ndarray, e: np.ndarray, lam_eff: float, theta: np.ndarray) -> np.ndarray:
        """One damped step; joints pinned at a limit and pushed outward are deactivated."""
        n = J.shape[1]
        active = np.ones(n, dtype=bool)
        for _ in range(n):
            Ja = J * active
            dtheta = Ja.T @ np.linalg.solve(Ja @ Ja.T + (lam_eff**2) * np.eye(6), e)
            sat = ((theta <= self.limits_lo + 1e-12) & (dtheta < 0)) | (
                (theta >= self.limits_hi - 1e-12) & (dtheta > 0)
            )
            sat &= active
            if not sat.any():
                return dtheta * active
            active &= ~sat
        return np.zeros(n)

    def ik(
        self,
        target: PoseTarget,
        theta_init: np.ndarray,
        pos_tol: float = IK_POS_TOL,
        rot_tol: float = IK_ROT_TOL,
        lam: float = IK_LAMBDA,
        max_iters: int = IK_MAX_ITERS,
    ) -> np.ndarray:
        """Damped-least-squares IK; joints are clamped to limits every step.

        Stalled runs restart from a deterministic random configuration within
        the same iteration budget, so the solver stays reproducible.
        """
        if np.linalg.norm(target.position - self.shoulder) > self.reach:
            raise UnreachableTargetError(
                "target outside the reach sphere", float("inf"), float("inf")
            )
        theta = self.clamp(np.asarray(theta_init, dtype=np.float64).copy())
        R_t = target.matrix
        best = (float("inf"), float("inf"))
        stall = 0
        stall_err = float("inf")
        restarts = 0
        for _ in range(max_iters):
            origins, axes_w, p, R = self.frames(theta)
            e_p = target.position - p
            e_r = rotation_vector(R_t @ R.T)
            pos_err, rot_err = float(np.linalg.norm(e_p)), float(np.linalg.norm(e_r))
            if pos_err <= pos_tol and rot_err <= rot_tol:
                return theta
            if pos_err + rot_err < sum(best):
                best = (pos_err, rot_err)
            err = pos_err + rot_err
            if err < 0.99 * stall_err:
                stall, stall_err = 0, err
            else:
                stall += 1
            if stall >= 10:
                restarts += 1
                rng = np.random.default_rng(1000 + restarts)
                lo = np.where(np.isfinite(self.limits_lo), self.limits_lo, -np.pi)
                hi = np.where(np.isfinite(self.limits_hi), self.limits_hi, np.pi)
                theta = rng.uniform(lo, hi)
                stall, stall_err = 0, float("inf")
                continue
            if pos_err > _STEP_POS_CAP:
                e_p = e_p * (_STEP_POS_CAP / pos_err)
            if rot_err > _STEP_ROT_CAP:
                e_r = e_r * (_STEP_ROT_CAP / rot_err)
            J = np.zeros((6, self.n_joints()))
            for i, (o, a) in enumerate(zip(origins, axes_w)):
                J[:3, i] = np.cross(a, p - o)
                J[3:, i] = a
            e = np.concatenate([e_p, e_r])
            # error-proportional damping: lam stabilizes large steps, decays
            # near the solution so convergence is not throttled by the damping
            lam_eff = lam * min(1.0, max(pos_err + 0.1 * rot_err, 1e-4) / 0.05)
            theta = self.clamp(theta + self._dls_step(J, e, lam_eff, theta))
        raise UnreachableTargetError("IK did not converge", best[0], best[1])
