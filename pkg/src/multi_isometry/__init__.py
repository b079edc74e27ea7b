from .model import ModelTuple, complete_tuple, compose, equivalent, validate_model
from .util import Tolerances

__version__ = "0.1.0"

__all__ = ["ModelTuple", "Tolerances", "complete_tuple", "compose", "equivalent", "validate_model"]
