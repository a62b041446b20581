"""Versioned model artifacts.

Models are persisted as self-describing JSON with explicit node records,
chosen over a binary format for auditability. The artifact id is the
SHA-256 of the written bytes, so identical models hash identically and
the save/load round trip reproduces predictions exactly.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CorruptArtifact, IoFailure, SchemaMismatch, UnsupportedVersion
from .learners import (
    BoostedEnsemble,
    BoostingParams,
    DecisionTree,
    FlatTree,
    Forest,
    ForestParams,
    TreeParams,
)
from .panel import FeatureSchema

FORMAT_VERSION = 1
EXPECTED_FEATURES = 15


@dataclass
class ModelArtifact:
    format_version: int
    model_kind: str
    schema: FeatureSchema
    model: object
    training_metadata: dict
    artifact_id: Optional[str] = None


def _clean_floats(values) -> list:
    return [None if math.isnan(v) else float(v) for v in values]


def _restore_floats(values) -> np.ndarray:
    return np.array([math.nan if v is None else v for v in values],
                    dtype=np.float64)


def _flat_tree_to_dict(tree: FlatTree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": _clean_floats(tree.threshold),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "n_node": tree.n_node.tolist(),
        "counts": None if tree.counts is None else tree.counts.tolist(),
        "value": None if tree.value is None else tree.value.tolist(),
        "gain": None if tree.gain is None else tree.gain.tolist(),
    }


def _flat_tree_from_dict(data: dict) -> FlatTree:
    return FlatTree(
        feature=np.array(data["feature"], dtype=np.int64),
        threshold=_restore_floats(data["threshold"]),
        left=np.array(data["left"], dtype=np.int64),
        right=np.array(data["right"], dtype=np.int64),
        n_node=np.array(data["n_node"], dtype=np.int64),
        counts=(None if data["counts"] is None
                else np.array(data["counts"], dtype=np.int64)),
        value=(None if data["value"] is None
               else np.array(data["value"], dtype=np.float64)),
        gain=(None if data["gain"] is None
              else np.array(data["gain"], dtype=np.float64)),
    )


def _tree_payload(model: DecisionTree) -> dict:
    return {
        "params": dataclasses.asdict(model.params),
        "n_root": model.n_root,
        "root_impurity": model.root_impurity,
        "tree": _flat_tree_to_dict(model.tree),
    }


def _tree_from_payload(payload: dict, schema: FeatureSchema) -> DecisionTree:
    return DecisionTree(
        tree=_flat_tree_from_dict(payload["tree"]),
        schema=schema,
        params=TreeParams(**payload["params"]),
        n_root=payload["n_root"],
        root_impurity=payload["root_impurity"],
    )


def _model_payload(model, kind: str) -> dict:
    if kind == "cart":
        return _tree_payload(model)
    if kind == "forest":
        return {
            "params": dataclasses.asdict(model.params),
            "oob_error": model.oob_error,
            "trees": [_tree_payload(t) for t in model.trees],
        }
    if kind == "boosting":
        return {
            "params": dataclasses.asdict(model.params),
            "initial_scores": model.initial_scores.tolist(),
            "stages": [[_flat_tree_to_dict(t) for t in stage]
                       for stage in model.stages],
        }
    raise ValueError(f"unknown model kind {kind!r}")


def _model_from_payload(payload: dict, kind: str, schema: FeatureSchema):
    if kind == "cart":
        return _tree_from_payload(payload, schema)
    if kind == "forest":
        return Forest(
            trees=[_tree_from_payload(t, schema) for t in payload["trees"]],
            params=ForestParams(**payload["params"]),
            schema=schema,
            oob_error=payload["oob_error"],
        )
    if kind == "boosting":
        return BoostedEnsemble(
            initial_scores=np.array(payload["initial_scores"],
                                    dtype=np.float64),
            stages=[[_flat_tree_from_dict(t) for t in stage]
                    for stage in payload["stages"]],
            params=BoostingParams(**payload["params"]),
            schema=schema,
        )
    raise ValueError(f"unknown model kind {kind!r}")


def artifact_bytes(model, model_kind: str, schema: FeatureSchema,
                   training_metadata: dict) -> bytes:
    document = {
        "format_version": FORMAT_VERSION,
        "model_kind": model_kind,
        "schema": schema.to_dict(),
        "payload": _model_payload(model, model_kind),
        "training_metadata": training_metadata,
    }
    text = json.dumps(document, sort_keys=True, separators=(",", ":"),
                      allow_nan=False)
    return text.encode("utf-8")


def save_artifact(model, model_kind: str, schema: FeatureSchema,
                  training_metadata: dict, path) -> str:
    """Write the artifact; returns its content-hash id."""
    data = artifact_bytes(model, model_kind, schema, training_metadata)
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoFailure(f"cannot write artifact to {path}: {exc}") from exc
    return hashlib.sha256(data).hexdigest()


def load_artifact(path) -> ModelArtifact:
    """Read and validate an artifact file."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CorruptArtifact(f"cannot read {path}: {exc}") from exc
    try:
        document = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptArtifact(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(document, dict):
        raise CorruptArtifact(f"{path}: top level is not an object")

    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(
            f"{path}: format_version {version!r}, supported: {FORMAT_VERSION}")

    try:
        schema = FeatureSchema.from_dict(document["schema"])
        kind = document["model_kind"]
        if len(schema) != EXPECTED_FEATURES:
            raise SchemaMismatch(
                f"{path}: schema has {len(schema)} features, "
                f"expected {EXPECTED_FEATURES}")
        model = _model_from_payload(document["payload"], kind, schema)
        metadata = document["training_metadata"]
    except SchemaMismatch:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptArtifact(f"{path}: malformed payload ({exc})") from exc

    return ModelArtifact(
        format_version=version,
        model_kind=kind,
        schema=schema,
        model=model,
        training_metadata=metadata,
        artifact_id=hashlib.sha256(data).hexdigest(),
    )


def attach_report(path, report_dict: dict) -> str:
    """Embed an evaluation report into an existing artifact file.

    Rewrites the file; returns the new content-hash id.
    """
    artifact = load_artifact(path)
    artifact.training_metadata["evaluation_report"] = report_dict
    return save_artifact(artifact.model, artifact.model_kind, artifact.schema,
                         artifact.training_metadata, path)
