# Trainable flow models: SympNet and the dense baseline
from .base import ACTIVATIONS, FlowModel, ModelError, ModelParseError, ParamDict
from .fnn import Fnn
from .maps import Gate, Shear, Shift, SymplecticMap
from .serialization import deserialize, load_model, save_model, serialize
from .sympnet import SympNet

__all__ = [
    "ACTIVATIONS",
    "FlowModel",
    "Fnn",
    "Gate",
    "ModelError",
    "ModelParseError",
    "ParamDict",
    "Shear",
    "Shift",
    "SympNet",
    "SymplecticMap",
    "deserialize",
    "load_model",
    "save_model",
    "serialize",
]
