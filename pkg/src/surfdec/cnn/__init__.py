"""Fully convolutional syndrome decoder."""

from .grad import Loss, batch_forward, loss_and_grads
from .infer import OpCounter, decode_pass, forward, multi_pass_decode, probabilities_to_frame
from .io import load_weights, save_weights
from .net import REFERENCE_ARCH, Activation, ConvLayer, ConvNet, LayerSpec, init_net, zero_net
from .train import (Optimizer, Stage, TrainConfig, example_stream, load_train_config, make_example,
                    parse_train_config, target_planes, train, train_step)

__all__ = [
    "Activation", "ConvLayer", "ConvNet", "LayerSpec", "Loss", "OpCounter", "Optimizer", "REFERENCE_ARCH",
    "Stage", "TrainConfig", "batch_forward", "decode_pass", "example_stream", "forward", "init_net",
    "load_train_config", "load_weights", "loss_and_grads", "make_example", "multi_pass_decode",
    "parse_train_config", "probabilities_to_frame", "save_weights", "target_planes", "train", "train_step",
    "zero_net",
]
