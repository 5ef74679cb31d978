"""Small numpy neural networks, losses, optimizer and synthetic tasks."""

from .losses import CrossEntropy, Huber, Ramp, loss_eval, loss_from_name, zero_one
from .mlp import MlpModel, input_gradient, mlp_forward, mlp_grad, spectral_lipschitz_upper
from .optim import AdamState, adamw_step, effective_lr
from .tasks import Dataset, logit_field, make_dataset, regression_target, synth_classification, synth_regression
from .train import TrainConfig, adversarial_example, train

__all__ = [
    "AdamState", "CrossEntropy", "Dataset", "Huber", "MlpModel", "Ramp", "TrainConfig",
    "adamw_step", "adversarial_example", "effective_lr", "input_gradient", "logit_field",
    "loss_eval", "loss_from_name", "make_dataset", "mlp_forward", "mlp_grad", "regression_target",
    "spectral_lipschitz_upper", "synth_classification", "synth_regression", "train", "zero_one",
]
