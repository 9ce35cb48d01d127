import json

import pytest

from extract_tools.errors import CheckpointError
from extract_tools.weights_export import export_mlp_weights


def _classifier(widths=(12, 32, 24, 16, 8, 2), seed=0):
    import torch

    torch.manual_seed(seed)
    layers = []
    for a, b in zip(widths, widths[1:]):
        layers.append(torch.nn.Linear(a, b))
        layers.append(torch.nn.ReLU())
    return torch.nn.Sequential(*layers[:-1])  # no activation after the head


def test_export_from_state_dict(tmp_path):
    import torch

    model = _classifier()
    ckpt = tmp_path / "model.pt"
    torch.save(model.state_dict(), ckpt)
    out = export_mlp_weights(ckpt, tmp_path / "w.json")
    payload = json.loads(out.read_text())
    assert payload["input_dim"] == 12
    assert len(payload["layers"]) == 5
    assert payload["layers"][-1]["rows"] == 2
    assert payload["layers"][-1]["activation"] == "none"
    assert all(layer["activation"] == "relu" for layer in payload["layers"][:-1])
    assert payload["positive_class_index"] == 0


def test_export_from_torchscript(tmp_path):
    import torch

    model = _classifier(seed=3)
    scripted = torch.jit.script(model)
    ckpt = tmp_path / "model.ts"
    scripted.save(str(ckpt))
    out = export_mlp_weights(ckpt, tmp_path / "w.json")
    payload = json.loads(out.read_text())
    assert len(payload["layers"]) == 5
    sd = model.state_dict()
    first = payload["layers"][0]["weights"][:3]
    assert first == pytest.approx(sd["0.weight"][0, :3].double().tolist())


def test_wrong_head_width_rejected(tmp_path):
    import torch

    model = _classifier(widths=(12, 32, 24, 16, 8, 3))
    ckpt = tmp_path / "bad.pt"
    torch.save(model.state_dict(), ckpt)
    with pytest.raises(CheckpointError, match="2 logits, got 3"):
        export_mlp_weights(ckpt, tmp_path / "w.json")


def test_wrong_depth_rejected(tmp_path):
    import torch

    model = _classifier(widths=(12, 8, 2))
    ckpt = tmp_path / "shallow.pt"
    torch.save(model.state_dict(), ckpt)
    with pytest.raises(CheckpointError, match="expected 5 affine layers, found 2"):
        export_mlp_weights(ckpt, tmp_path / "w.json")
    # but an explicitly declared depth is accepted
    out = export_mlp_weights(ckpt, tmp_path / "w.json", expected_layers=2)
    assert len(json.loads(out.read_text())["layers"]) == 2


def test_unreadable_checkpoint_rejected(tmp_path):
    ckpt = tmp_path / "noise.pt"
    ckpt.write_bytes(b"definitely not a checkpoint")
    with pytest.raises(CheckpointError, match="cannot read"):
        export_mlp_weights(ckpt, tmp_path / "w.json")
