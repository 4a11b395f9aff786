"""Multi-IMU legged-robot state estimation toolkit."""

from mimu._core import (  # noqa: F401
    ContactMode,
    InvalidInput,
    KinematicChain,
    ate,
    avds_mm,
    center_of_pressure,
    detect_contact,
    discretize,
    estimate,
    estimate_deformations,
    evaluate,
    forward_kinematics,
    hat,
    kalman_correct,
    kinematic_jacobians,
    predict_covariance,
    rot_between,
    rpe,
    s2_ominus,
    s2_oplus,
    simulate,
    so3_exp,
    so3_log,
    so3_ominus,
    so3_oplus,
    tangent_basis,
    vee,
)

__all__ = [
    "ContactMode", "InvalidInput", "KinematicChain", "ate", "avds_mm",
    "center_of_pressure", "detect_contact", "discretize", "estimate",
    "estimate_deformations", "evaluate", "forward_kinematics", "hat",
    "kalman_correct", "kinematic_jacobians", "predict_covariance",
    "rot_between", "rpe", "s2_ominus", "s2_oplus", "simulate", "so3_exp",
    "so3_log", "so3_ominus", "so3_oplus", "tangent_basis", "vee",
]
