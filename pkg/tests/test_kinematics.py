import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from hapticact.sim.config import SimConfig
from hapticact.sim.kinematics import (
    ArmKinematics,
    JointLimitError,
    PoseTarget,
    UnreachableTargetError,
)
from hapticact.sim.transforms import matrix_to_quat, quat_to_matrix


@pytest.fixture(scope="module")
def kin():
    return ArmKinematics(SimConfig())


def oracle_fk(config, theta):
    """Independent FK: scipy Rotation objects accumulated tip-to-base.

    Deliberately a different formulation from the production matrix chain.
    """
    rot = Rotation.identity()
    pos = np.zeros(3)
    for axis, L, th in zip(config.joint_axes, config.link_lengths, theta):
        rot = rot * Rotation.from_euler(axis, th)
        pos = pos + rot.apply([0.0, 0.0, L])
    return pos, rot.as_matrix()


def random_in_limit(kin, rng, n):
    lo = np.where(np.isfinite(kin.limits_lo), kin.limits_lo, -np.pi)
    hi = np.where(np.isfinite(kin.limits_hi), kin.limits_hi, np.pi)
    return rng.uniform(lo, hi, size=(n, 7))


def test_home_pose(kin):
    pose = kin.fk(np.zeros(7))
    np.testing.assert_allclose(pose.position, [0, 0, sum(SimConfig().link_lengths)], atol=1e-12)
    np.testing.assert_allclose(pose.quaternion, [1, 0, 0, 0], atol=1e-12)


def test_continuous_joint_periodicity(kin):
    theta = np.array(SimConfig().start_joints)
    a = kin.fk(theta)
    theta2 = theta.copy()
    theta2[6] += 2 * np.pi  # wrist roll is continuous
    b = kin.fk(theta2)
    np.testing.assert_allclose(a.position, b.position, atol=1e-12)
    np.testing.assert_allclose(quat_to_matrix(a.quaternion), quat_to_matrix(b.quaternion), atol=1e-12)


def test_fk_against_independent_oracle(kin):
    cfg = SimConfig()
    rng = np.random.default_rng(7)
    for theta in random_in_limit(kin, rng, 50):
        pose = kin.fk(theta)
        p_ref, R_ref = oracle_fk(cfg, theta)
        np.testing.assert_allclose(pose.position, p_ref, atol=1e-9)
        np.testing.assert_allclose(quat_to_matrix(pose.quaternion), R_ref, atol=1e-9)


def test_fk_rejects_out_of_limit(kin):
    theta = np.zeros(7)
    theta[1] = 3.0  # beyond the +/-2.1 pitch limit
    with pytest.raises(JointLimitError):
        kin.fk(theta)


def test_fk_rejects_nonfinite(kin):
    theta = np.zeros(7)
    theta[0] = np.nan
    with pytest.raises(ValueError):
        kin.fk(theta)


def test_jacobian_matches_finite_differences(kin):
    rng = np.random.default_rng(3)
    for theta in random_in_limit(kin, rng, 10) * 0.7:
        J = kin.jacobian(theta)
        h = 1e-7
        for i in range(7):
            dp = np.zeros(7)
            dp[i] = h
            p_plus = kin.fk(theta + dp, check_limits=False).position
            p_minus = kin.fk(theta - dp, check_limits=False).position
            np.testing.assert_allclose(J[:3, i], (p_plus - p_minus) / (2 * h), atol=1e-6)


def test_ik_fixed_point(kin):
    theta = np.array(SimConfig().start_joints)
    target = kin.fk(theta)
    sol = kin.ik(target, theta)
    np.testing.assert_allclose(sol, theta, atol=1e-12)


def test_ik_unreachable_raises(kin):
    target = PoseTarget(np.array([2.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0, 0.0]))
    with pytest.raises(UnreachableTargetError):
        kin.ik(target, np.zeros(7))


def test_ik_round_trip_rate(kin):
    # FK(IK(t)) position residual < 1e-3 m on >= 99/100 seeded reachable targets
    rng = np.random.default_rng(42)
    theta_init = np.array(SimConfig().start_joints)
    ok = 0
    for theta in random_in_limit(kin, rng, 100):
        target = kin.fk(theta)
        try:
            sol = kin.ik(target, theta_init)
        except UnreachableTargetError:
            continue
        residual = np.linalg.norm(kin.fk(sol, check_limits=False).position - target.position)
        ok += residual < 1e-3
    assert ok >= 99


def test_ik_respects_limits(kin):
    rng = np.random.default_rng(5)
    theta_init = np.array(SimConfig().start_joints)
    for theta in random_in_limit(kin, rng, 20):
        try:
            sol = kin.ik(kin.fk(theta), theta_init)
        except UnreachableTargetError:
            continue
        assert np.all(sol >= kin.limits_lo - 1e-12)
        assert np.all(sol <= kin.limits_hi + 1e-12)


def test_pose_target_validates_quaternion():
    with pytest.raises(ValueError, match="unit-norm"):
        PoseTarget(np.zeros(3), np.array([1.0, 1.0, 0.0, 0.0]))


def test_quat_matrix_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(50):
        R = Rotation.random(random_state=rng).as_matrix()
        np.testing.assert_allclose(quat_to_matrix(matrix_to_quat(R)), R, atol=1e-12)
