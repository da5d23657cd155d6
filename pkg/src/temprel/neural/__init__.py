"""Minimal neural core: embeddings, LSTM layers, training, gradient checks."""

from .checkpoint import load_model, save_model
from .embeddings import EmbeddingTable
from .gradcheck import gradient_check, max_zero_gradient_gap
from .layers import (
    DenseLayer,
    LSTMLayer,
    Parameter,
    dropout_mask,
    lstm_forward,
    max_pool_time,
    sigmoid,
    softmax,
)
from .models import PairExample, TwoBranchModel
from .training import Adam, TrainingConfig, TrainingHistory, train

__all__ = [
    "Adam",
    "DenseLayer",
    "EmbeddingTable",
    "LSTMLayer",
    "PairExample",
    "Parameter",
    "TrainingConfig",
    "TrainingHistory",
    "TwoBranchModel",
    "dropout_mask",
    "gradient_check",
    "load_model",
    "lstm_forward",
    "max_pool_time",
    "max_zero_gradient_gap",
    "save_model",
    "sigmoid",
    "softmax",
    "train",
]
