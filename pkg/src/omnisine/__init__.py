"""Relative pose of catadioptric omni-cameras from sinusoid fits of panorama motion."""

from .cylinder import (CylinderModel, OmniImage, PanoramaImage, cylinder_to_pano,
                       pano_to_cylinder, unwrap)
from .fmi import RegistrationResult, phase_correlate, register_window
from .motionfield import MotionField, MotionSample, median_filter, sweep
from .pipeline import PairResult, RunConfig, estimate_pair
from .pose import PoseEstimate, extract_pose, rmse, to_rotation_matrix
from .sinusoid import FitConfig, FitReport, SinusoidParams, fit, model_eval, pseudo_huber
from .synth import RigidTransform, SceneDepth, make_texture, predicted_shift, warp

__version__ = "0.1.0"

__all__ = [
    "CylinderModel", "OmniImage", "PanoramaImage", "cylinder_to_pano",
    "pano_to_cylinder", "unwrap", "RegistrationResult", "phase_correlate",
    "register_window", "MotionField", "MotionSample", "median_filter", "sweep",
    "PairResult", "RunConfig", "estimate_pair", "PoseEstimate", "extract_pose",
    "rmse", "to_rotation_matrix", "FitConfig", "FitReport", "SinusoidParams",
    "fit", "model_eval", "pseudo_huber", "RigidTransform", "SceneDepth",
    "make_texture", "predicted_shift", "warp",
]
