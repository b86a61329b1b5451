"""
JSON model container for both network kinds.

SympNet:
    {"schema_version": 1, "kind": "sympnet", "d", "h", "k", "n", "activation",
     "trainable_gates", "shear_start",
     "units": [{"type": "linear", "sides": [...], "a_raw": [[[...]]], "bias": [...]},
               {"type": "gate", "side": "low", "activation": "sigmoid", "c"?: float}, ...]}

FNN:
    {"schema_version": 1, "kind": "fnn", "d", "sizes",
     "layers": [{"activation": "sigmoid", "weights": [[...]], "bias": [...]}, ...]}

Floats are written with their shortest round-trip repr, so parameters
survive serialize/deserialize bit-exactly.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from .base import FlowModel, ModelParseError
from .fnn import Fnn
from .maps import SIDES
from .sympnet import SympNet

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def model_to_dict(model: FlowModel) -> Dict[str, Any]:
    if isinstance(model, SympNet):
        units = []
        for i in range(model.k + 1):
            units.append({
                "type": "linear",
                "sides": model.shear_sides(),
                "a_raw": model.params[f"linear.{i}.a"].tolist(),
                "bias": model.params[f"linear.{i}.b"].tolist(),
            })
            if i < model.k:
                gate = {"type": "gate", "side": model.gate_side(i), "activation": model.activation}
                if model.trainable_gates:
                    gate["c"] = model.gate_coefficient(i)
                units.append(gate)
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "sympnet",
            "d": model.d,
            "h": model.h,
            "k": model.k,
            "n": model.n,
            "activation": model.activation,
            "trainable_gates": model.trainable_gates,
            "shear_start": model.shear_start,
            "units": units,
        }
    if isinstance(model, Fnn):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "fnn",
            "d": model.d,
            "sizes": list(model.sizes),
            "layers": [
                {
                    "activation": model.layer_activation(i),
                    "weights": model.params[f"dense.{i}.w"].tolist(),
                    "bias": model.params[f"dense.{i}.b"].tolist(),
                }
                for i in range(model.n_layers)
            ],
        }
    raise TypeError(f"Cannot serialize {type(model).__name__}")


def _field(obj: Dict[str, Any], key: str, kind, where: str):
    if not isinstance(obj, dict):
        raise ModelParseError(f"{where}: expected an object")
    if key not in obj:
        raise ModelParseError(f"{where}: missing '{key}'")
    value = obj[key]
    # bool is an int subclass; reject it where numbers are expected
    if kind in (int, float, (int, float)) and isinstance(value, bool):
        raise ModelParseError(f"{where}.{key}: expected a number, got {value!r}")
    if not isinstance(value, kind):
        raise ModelParseError(f"{where}.{key}: unexpected value {value!r}")
    return value


def _array(obj: Dict[str, Any], key: str, shape: tuple, where: str) -> np.ndarray:
    raw = _field(obj, key, list, where)
    try:
        arr = np.array(raw, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise ModelParseError(f"{where}.{key}: not a numeric array ({e})")
    if arr.shape != shape:
        raise ModelParseError(f"{where}.{key}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelParseError(f"{where}.{key}: contains non-finite values")
    return arr


def model_from_dict(data: Dict[str, Any]) -> FlowModel:
    """
    Rebuild a model from its container dict.

    Raises:
        ModelParseError: naming the offending field path
    """
    version = _field(data, "schema_version", int, "model")
    if version != SCHEMA_VERSION:
        raise ModelParseError(f"model.schema_version: unsupported version {version}")
    kind = _field(data, "kind", str, "model")
    d = _field(data, "d", int, "model")
    if d < 1:
        raise ModelParseError(f"model.d: must be positive, got {d}")

    if kind == "sympnet":
        k = _field(data, "k", int, "model")
        n = _field(data, "n", int, "model")
        trainable_gates = _field(data, "trainable_gates", bool, "model")
        shear_start = _field(data, "shear_start", str, "model")
        if shear_start not in SIDES:
            raise ModelParseError(f"model.shear_start: expected 'up' or 'low', got {shear_start!r}")
        try:
            net = SympNet(
                d=d,
                h=_field(data, "h", (int, float), "model"),
                k=k,
                n=n,
                activation=_field(data, "activation", str, "model"),
                trainable_gates=trainable_gates,
                shear_start=shear_start,
            )
        except ValueError as e:
            raise ModelParseError(f"model: {e}")
        units = _field(data, "units", list, "model")
        if len(units) != 2 * k + 1:
            raise ModelParseError(f"model.units: expected {2 * k + 1} units, got {len(units)}")
        for idx, unit in enumerate(units):
            where = f"units[{idx}]"
            expected = "linear" if idx % 2 == 0 else "gate"
            if _field(unit, "type", str, where) != expected:
                raise ModelParseError(f"{where}.type: expected '{expected}'")
            i = idx // 2
            if expected == "linear":
                if _field(unit, "sides", list, where) != net.shear_sides():
                    raise ModelParseError(f"{where}.sides: do not match shear_start={net.shear_start!r}")
                net.params[f"linear.{i}.a"][...] = _array(unit, "a_raw", (n, d, d), where)
                net.params[f"linear.{i}.b"][...] = _array(unit, "bias", (2 * d,), where)
            else:
                if _field(unit, "side", str, where) != net.gate_side(i):
                    raise ModelParseError(f"{where}.side: gates must alternate starting with 'low'")
                if net.trainable_gates:
                    net.params[f"gate.{i}.c"][0] = _field(unit, "c", (int, float), where)
        return net

    if kind == "fnn":
        sizes = _field(data, "sizes", list, "model")
        if len(sizes) < 2 or sizes[0] != 2 * d or sizes[-1] != 2 * d:
            raise ModelParseError(f"model.sizes: must start and end with {2 * d}, got {sizes}")
        try:
            net = Fnn(d=d, hidden=sizes[1:-1])
        except (TypeError, ValueError) as e:
            raise ModelParseError(f"model.sizes: {e}")
        layers = _field(data, "layers", list, "model")
        if len(layers) != net.n_layers:
            raise ModelParseError(f"model.layers: expected {net.n_layers} layers, got {len(layers)}")
        for i, layer in enumerate(layers):
            where = f"layers[{i}]"
            if _field(layer, "activation", str, where) != net.layer_activation(i):
                raise ModelParseError(f"{where}.activation: expected '{net.layer_activation(i)}'")
            shape = (net.sizes[i + 1], net.sizes[i])
            net.params[f"dense.{i}.w"][...] = _array(layer, "weights", shape, where)
            net.params[f"dense.{i}.b"][...] = _array(layer, "bias", (shape[0],), where)
        return net

    raise ModelParseError(f"model.kind: unknown kind {kind!r}")


def serialize(model: FlowModel) -> bytes:
    return (json.dumps(model_to_dict(model), indent=2) + "\n").encode("utf-8")


def deserialize(raw: Union[bytes, str]) -> FlowModel:
    """
    Parse a model file's contents.

    Raises:
        ModelParseError: syntax errors report line and column,
            structural errors report the field path
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ModelParseError(f"byte {e.start}: not valid UTF-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ModelParseError(f"line {e.lineno} column {e.colno}: {e.msg}")
    return model_from_dict(data)


def save_model(model: FlowModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize(model))
    logger.info(f"Wrote {model.kind} model ({model.parameter_count()} parameters) to {path}")
    return path


def load_model(path: Path) -> FlowModel:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ModelParseError(f"{path}: cannot read ({e})")
    try:
        return deserialize(raw)
    except ModelParseError as e:
        raise ModelParseError(f"{path}: {e}") from None
