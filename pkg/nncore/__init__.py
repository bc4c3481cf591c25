from nncore.layers import (
    DenseLayer,
    LSTMLayer,
    Parameter,
    dense_forward,
    lstm_forward,
)
from nncore.network import EncoderDecoder, backward, cross_entropy, decode, encode, forward
from nncore.optim import OptimizerConfig, make_optimizer, optimizer_step
from nncore.records import LayerActivations, record_activations

__all__ = [
    "DenseLayer",
    "EncoderDecoder",
    "LSTMLayer",
    "LayerActivations",
    "OptimizerConfig",
    "Parameter",
    "backward",
    "cross_entropy",
    "decode",
    "dense_forward",
    "encode",
    "forward",
    "lstm_forward",
    "make_optimizer",
    "optimizer_step",
    "record_activations",
]
