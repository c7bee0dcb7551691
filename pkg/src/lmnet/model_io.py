"""Model bundles: trained weights plus the preprocessing needed to score raw rows.

A bundle is a single UTF-8 JSON document (conventionally ``*.lmnet.json``)::

    {
      "format_version": 1,
      "encoder": {"schema": ..., "categories": ..., "token_maps": ..., "scaling": ...},
      "arch": {"n_inputs": int, "order": int, "n_outputs": 1},
      "w": ["<17 significant digits>", ...],
      "class_weights": {"positive": "...", "negative": "..."},
      "training_summary": {...}
    }

Floating point values that affect scoring are stored as decimal strings with
17 significant digits so that loading restores them exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dataset import DataError, Encoder
from .loss import ClassWeights
from .network import Architecture, Network, predict

FORMAT_VERSION = 1
SUFFIX = ".lmnet.json"


class MissingValueError(DataError):
    """A record with missing cells was offered for scoring."""


def _f(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class ModelBundle:
    encoder: Encoder
    net: Network
    class_weights: ClassWeights
    training_summary: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    @property
    def schema(self):
        return self.encoder.schema

    @property
    def arch(self) -> Architecture:
        return self.net.arch

    @property
    def w(self) -> np.ndarray:
        return self.net.w

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "encoder": self.encoder.to_dict(),
            "arch": {"n_inputs": self.arch.n_inputs, "order": self.arch.order,
                     "n_outputs": self.arch.n_outputs},
            "w": [_f(v) for v in self.net.w],
            "class_weights": {"positive": _f(self.class_weights.positive),
                              "negative": _f(self.class_weights.negative)},
            "training_summary": self.training_summary,
        }


def save(bundle: ModelBundle, path) -> None:
    text = json.dumps(bundle.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load(path) -> ModelBundle:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read model {path}: {exc}") from exc
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported model format_version {version!r} "
                        f"(expected {FORMAT_VERSION})")
    arch = Architecture(**d["arch"])
    w = np.array([float(v) for v in d["w"]])
    if w.size != arch.n_params:
        raise DataError(f"{path}: {w.size} weights do not match architecture "
                        f"needing {arch.n_params}")
    encoder = Encoder.from_dict(d["encoder"])
    if len(encoder.feature_names) != arch.n_inputs:
        raise DataError(f"{path}: encoder yields {len(encoder.feature_names)} "
                        f"features, network expects {arch.n_inputs}")
    cw = d["class_weights"]
    return ModelBundle(
        encoder=encoder,
        net=Network(arch, w),
        class_weights=ClassWeights(float(cw["positive"]), float(cw["negative"])),
        training_summary=d.get("training_summary", {}),
        format_version=version,
    )


def _full_row(schema, raw_row: Sequence[Optional[str]]) -> list[Optional[str]]:
    """Accept rows with or without the target cell; return schema-ordered cells."""
    names = schema.names
    row = list(raw_row)
    if len(row) == len(names):
        return row
    if len(row) == len(names) - 1:
        row.insert(names.index(schema.target), None)
        return row
    raise DataError(f"record has {len(row)} cells, schema expects {len(names)}")


def score_records(bundle: ModelBundle, rows: Sequence[Sequence[Optional[str]]]) -> np.ndarray:
    schema = bundle.schema
    full = []
    tj = schema.names.index(schema.target)
    for i, raw in enumerate(rows):
        row = _full_row(schema, raw)
        missing = [schema.names[j] for j, c in enumerate(row)
                   if j != tj and (c is None or c.strip() in ("", schema.missing_token))]
        if missing:
            raise MissingValueError(f"record {i + 1} has missing values in {missing}")
        full.append([c.strip() if c is not None else None for c in row])
    X = bundle.encoder.transform(full)
    return predict(bundle.net, X)


def score_record(bundle: ModelBundle, raw_row: Sequence[Optional[str]],
                 threshold: float = 0.5) -> tuple[float, str]:
    """Probability of the positive class and the YES/NO decision."""
    p = float(score_records(bundle, [raw_row])[0])
    return p, ("YES" if p >= threshold else "NO")
