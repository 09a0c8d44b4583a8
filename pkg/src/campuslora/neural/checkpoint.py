"""Versioned JSON checkpoints; save -> load -> save is byte-identical."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .lstm import LstmLayer, LstmStack
from .mlp import MlpNet

FORMAT_VERSION = 1
LSTM_LAYOUT = "stacked-ifog"

Model = Union[LstmStack, MlpNet]


def _arr(a: np.ndarray) -> list:
    return a.tolist()


def model_to_dict(model: Model) -> dict:
    if isinstance(model, LstmStack):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "lstm_stack",
            "layout": LSTM_LAYOUT,
            "input_size": model.input_size,
            "hidden_dims": [layer.hidden_size for layer in model.layers],
            "output_size": model.output_size,
            "layers": [{"w": _arr(l.w), "b": _arr(l.b)} for l in model.layers],
            "w_out": _arr(model.w_out),
            "b_out": _arr(model.b_out),
        }
    if isinstance(model, MlpNet):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "mlp",
            "dims": list(model.dims),
            "weights": [_arr(w) for w in model.weights],
            "biases": [_arr(b) for b in model.biases],
        }
    raise TypeError(f"not a checkpointable model: {type(model)!r}")


def model_from_dict(data: dict) -> Model:
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {data.get('format_version')!r}")
    kind = data.get("kind")
    if kind == "lstm_stack":
        if data.get("layout") != LSTM_LAYOUT:
            raise ValueError(f"unsupported weight layout {data.get('layout')!r}")
        layers = [
            LstmLayer(np.asarray(l["w"], dtype=np.float64), np.asarray(l["b"], dtype=np.float64))
            for l in data["layers"]
        ]
        return LstmStack(
            layers,
            np.asarray(data["w_out"], dtype=np.float64),
            np.asarray(data["b_out"], dtype=np.float64),
        )
    if kind == "mlp":
        return MlpNet(
            [np.asarray(w, dtype=np.float64) for w in data["weights"]],
            [np.asarray(b, dtype=np.float64) for b in data["biases"]],
        )
    raise ValueError(f"unknown checkpoint kind {kind!r}")


def render_checkpoint(model: Model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":")) + "\n"


def save_checkpoint(model: Model, path: Union[str, Path]) -> None:
    Path(path).write_text(render_checkpoint(model), encoding="utf-8")


def load_checkpoint(path: Union[str, Path]) -> Model:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
