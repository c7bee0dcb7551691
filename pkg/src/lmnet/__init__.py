"""Levenberg-Marquardt trained single-hidden-layer binary classifier."""
from .dataset import DEFAULT_SCHEMA, DataError, EncodedDataset, Schema, Subset
from .loss import ClassWeights, class_weights, error_report
from .network import Architecture, Network, forward, init, predict, residual_jacobian
from .order_selection import OrderSelectionConfig, select_order
from .trainer import StoppingReason, TrainingConfig, TrainingError, lm_step, train

__version__ = "0.1.0"
