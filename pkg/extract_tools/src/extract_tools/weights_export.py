"""Convert a trained classifier checkpoint into the portable weights file.

Accepts either a torch state dict (ordered ``*.weight`` / ``*.bias`` pairs
of the affine layers) or a TorchScript module. The classifier contract is
five affine layers ending in two logits; hidden widths are free and recorded
in the file. State dicts carry no activation information, so the pattern is
declared at export time (ReLU between layers, none on the last, by default).
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import CheckpointError

WEIGHTS_FORMAT_VERSION = 1
EXPECTED_LAYERS = 5


def _layers_from_state_dict(state) -> list[tuple[list[list[float]], list[float]]]:
    layers = []
    for key in state:
        if not key.endswith(".weight"):
            continue
        weight = state[key]
        if weight.dim() != 2:
            continue  # conv / norm weights are not affine classifier layers
        bias_key = key[: -len(".weight")] + ".bias"
        if bias_key not in state:
            raise CheckpointError(f"layer {key!r} has no matching bias")
        bias = state[bias_key]
        if bias.dim() != 1 or bias.shape[0] != weight.shape[0]:
            raise CheckpointError(f"bias shape {tuple(bias.shape)} does not match "
                                  f"weight shape {tuple(weight.shape)} for {key!r}")
        layers.append((weight.detach().cpu().double().tolist(),
                       bias.detach().cpu().double().tolist()))
    return layers


def load_checkpoint_layers(path):
    import torch

    path = Path(path)
    try:
        module = torch.jit.load(str(path), map_location="cpu")
    except (RuntimeError, ValueError):
        module = None
    if module is not None:
        return _layers_from_state_dict(dict(module.state_dict()))
    try:
        state = torch.load(str(path), map_location="cpu", weights_only=True)
    except Exception as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    if not hasattr(state, "items"):
        raise CheckpointError(f"checkpoint {path} is not a state dict")
    return _layers_from_state_dict(state)


def _validate_chain(layers, expected_layers: int) -> None:
    if len(layers) != expected_layers:
        raise CheckpointError(f"expected {expected_layers} affine layers, "
                              f"found {len(layers)}")
    out_dim = None
    for index, (weight, bias) in enumerate(layers):
        rows, cols = len(weight), len(weight[0])
        if out_dim is not None and cols != out_dim:
            raise CheckpointError(f"layer {index} expects input {cols}, previous "
                                  f"layer produces {out_dim}")
        if len(bias) != rows:
            raise CheckpointError(f"layer {index} bias length {len(bias)} != {rows}")
        out_dim = rows
    if out_dim != 2:
        raise CheckpointError(f"final layer must produce 2 logits, got {out_dim}")


def export_mlp_weights(checkpoint_path, out_path, *,
                       positive_class_index: int = 0,
                       hidden_activation: str = "relu",
                       expected_layers: int = EXPECTED_LAYERS) -> Path:
    layers = load_checkpoint_layers(checkpoint_path)
    _validate_chain(layers, expected_layers)
    input_dim = len(layers[0][0][0])
    payload = {
        "format_version": WEIGHTS_FORMAT_VERSION,
        "input_dim": input_dim,
        "positive_class_index": positive_class_index,
        "layers": [
            {
                "rows": len(weight),
                "cols": len(weight[0]),
                "weights": [value for row in weight for value in row],
                "bias": list(bias),
                "activation": hidden_activation if index < len(layers) - 1
                              else "none",
            }
            for index, (weight, bias) in enumerate(layers)
        ],
    }
    out_path = Path(out_path)
    out_path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n",
                        encoding="utf-8")
    return out_path
