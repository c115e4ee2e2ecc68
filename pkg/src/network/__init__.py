from network.config import (
    NetworkConfig,
    TrainConfig,
    OptimizerSpec,
    EarlyStopping,
    TemperatureConfig,
    Activation,
    OutputHead,
)
from network.model import (
    Network,
    init_network,
    forward_logits,
    softmax,
    predict_scores,
    predict_probability,
    accuracy,
    activation_pattern,
    region_affine_map,
)
from network.losses import cross_entropy_loss, binary_cross_entropy, training_loss, backward
from network.optimizers import OptimizerState, optimizer_step, build_optimizer
from network.trainer import train, EpochStats
from network.serialization import save_network, load_network, write_param_file, read_param_file

__all__ = [
    'NetworkConfig',
    'TrainConfig',
    'OptimizerSpec',
    'EarlyStopping',
    'TemperatureConfig',
    'Activation',
    'OutputHead',
    'Network',
    'init_network',
    'forward_logits',
    'softmax',
    'predict_scores',
    'predict_probability',
    'accuracy',
    'activation_pattern',
    'region_affine_map',
    'cross_entropy_loss',
    'binary_cross_entropy',
    'training_loss',
    'backward',
    'OptimizerState',
    'optimizer_step',
    'build_optimizer',
    'train',
    'EpochStats',
    'save_network',
    'load_network',
    'write_param_file',
    'read_param_file',
]
