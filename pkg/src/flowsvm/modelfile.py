"""Versioned, checksummed text persistence for :class:`OvoModel` (``.fpsvm``).

Layout::

    fpsvm-model <version>
    <JSON document>
    sha256 <hex digest of everything above this line>

Floats are written with ``repr`` so a save/load cycle is bit-exact.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .dataset import LabelScheme, StandardScaler
from .errors import CorruptModelError
from .kernel import KernelParams
from .multiclass import OvoModel
from .smo import BinarySvmModel, TrainConfig

MAGIC = "fpsvm-model"
VERSION = 1


def dumps(model: OvoModel) -> str:
    config = model.config
    body = {
        "scheme": model.scheme.id,
        "classes": list(model.classes),
        "scaler": {"mean": model.scaler.mean.tolist(), "scale": model.scaler.scale.tolist()},
        "gamma": config.kernel.gamma,
        "c": config.c,
        "kkt_tolerance": config.kkt_tolerance,
        "pairs": [
            {
                "i": i,
                "j": j,
                "labels": list(m.pair),
                "bias": m.bias,
                "coef": m.coef.tolist(),
                "support_vectors": m.support_vectors.tolist(),
            }
            for (i, j), m in sorted(model.models.items())
        ],
    }
    head = f"{MAGIC} {VERSION}\n" + json.dumps(body, indent=1) + "\n"
    digest = hashlib.sha256(head.encode("utf-8")).hexdigest()
    return head + f"sha256 {digest}\n"


def loads(text: str) -> OvoModel:
    head, sep, tail = text.rstrip("\n").rpartition("\n")
    if not sep or not tail.startswith("sha256 "):
        raise CorruptModelError("model file is truncated or missing its sha256 checksum line")
    head += "\n"
    if hashlib.sha256(head.encode("utf-8")).hexdigest() != tail.split(" ", 1)[1].strip():
        raise CorruptModelError("model file checksum mismatch; the file is corrupt or was edited")
    first, _, payload = head.partition("\n")
    parts = first.split()
    if len(parts) != 2 or parts[0] != MAGIC:
        raise CorruptModelError(f"not a flowsvm model file (header {first!r})")
    if parts[1] != str(VERSION):
        raise CorruptModelError(f"unsupported model format version {parts[1]}; expected {VERSION}")
    try:
        body = json.loads(payload)
        scheme = LabelScheme.get(body["scheme"])
        config = TrainConfig(c=float(body["c"]), kernel=KernelParams(float(body["gamma"])),
                             kkt_tolerance=float(body["kkt_tolerance"]))
        scaler = StandardScaler(np.array(body["scaler"]["mean"], dtype=float),
                                np.array(body["scaler"]["scale"], dtype=float))
        models = {}
        for block in body["pairs"]:
            sv = np.array(block["support_vectors"], dtype=float).reshape(len(block["coef"]), -1)
            models[(int(block["i"]), int(block["j"]))] = BinarySvmModel(
                support_vectors=sv,
                coef=np.array(block["coef"], dtype=float),
                bias=float(block["bias"]),
                config=config,
                pair=tuple(block["labels"]),
            )
        return OvoModel(tuple(body["classes"]), models, scaler, scheme)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModelError(f"model file content is invalid: {exc}") from exc


def save_model(model: OvoModel, path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8", newline="\n")


def load_model(path) -> OvoModel:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise CorruptModelError(f"{path}: not UTF-8 text; checksum cannot be verified") from None
    return loads(text)
