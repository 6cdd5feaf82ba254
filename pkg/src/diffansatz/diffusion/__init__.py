from .checkpoint import load_checkpoint, save_checkpoint
from .nets import CONFIGS, DenoiserParams, init_params, predict_eps, shape_manifest
from .schedule import NoiseSchedule, forward_noise, make_schedule
from .train import TrainConfig, init_opt_state, sample, train, train_step

__all__ = [
    "CONFIGS", "DenoiserParams", "NoiseSchedule", "TrainConfig", "forward_noise",
    "init_opt_state", "init_params", "load_checkpoint", "make_schedule", "predict_eps",
    "sample", "save_checkpoint", "shape_manifest", "train", "train_step",
]
