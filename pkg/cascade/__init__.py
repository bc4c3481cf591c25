from cascade.config import CascadeConfig, Mode
from cascade.model import CascadeModel, infer
from cascade.ordering import OrderingReport, verify_ordering
from cascade.training import augment, train_phase1, train_phase2

__all__ = [
    "CascadeConfig",
    "CascadeModel",
    "Mode",
    "OrderingReport",
    "augment",
    "infer",
    "train_phase1",
    "train_phase2",
    "verify_ordering",
]
