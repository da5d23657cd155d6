"""Self-describing model checkpoints: an .npz of arrays plus a JSON header."""

from __future__ import annotations

import json

import numpy as np

from ..errors import StructuralError
from ..relations import RelationLabel


def _encode_labels(labels):
    if all(isinstance(l, RelationLabel) for l in labels):
        return "relation", [l.value for l in labels]
    return "raw", [str(l) for l in labels]


def _decode_labels(kind, names):
    if kind == "relation":
        return [RelationLabel.from_string(n) for n in names]
    return list(names)


def save_model(model, path) -> None:
    meta = model.checkpoint_config()
    if "labels" in meta:
        meta["label_kind"], meta["labels"] = _encode_labels(meta["labels"])
    arrays = {f"p{i}": p.value for i, p in enumerate(model.parameters())}
    arrays["meta"] = np.asarray(json.dumps(meta, sort_keys=True))
    np.savez(path, **arrays)


def load_model(path):
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        arrays = {k: data[k] for k in data.files if k != "meta"}

    kind = meta.pop("kind")
    if "labels" in meta:
        meta["labels"] = _decode_labels(meta.pop("label_kind"), meta["labels"])
    if kind == "two-branch":
        from .models import TwoBranchModel
        model = TwoBranchModel(**meta)
    elif kind == "event":
        from ..event_extractor import EventModel
        model = EventModel(**meta)
    else:
        raise StructuralError(f"unknown checkpoint kind {kind!r}")

    params = model.parameters()
    if len(params) != len(arrays):
        raise StructuralError(
            f"checkpoint holds {len(arrays)} arrays, model has {len(params)}"
        )
    for i, p in enumerate(params):
        stored = arrays[f"p{i}"]
        if stored.shape != p.value.shape:
            raise StructuralError(
                f"shape mismatch for {p.name}: checkpoint {stored.shape}, "
                f"model {p.value.shape}"
            )
        p.value[...] = stored
    return model
