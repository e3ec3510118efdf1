"""Self-describing JSON model artifacts.

Floats are written with their shortest round-trip representation, so a
loaded artifact reproduces the saved model's predictions bit for bit.
Non-finite values are stored as ``null``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .._io import atomic_write_text
from ..core import IoError, SchemaError
from ..models import model_from_dict, model_to_dict
from ..pipeline import Pipeline
from ..transform import PowerTransformer

FORMAT_VERSION = 1


def _clean(obj: Any) -> Any:
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


@dataclass(frozen=True)
class ModelArtifact:
    pipeline: Pipeline
    lags: tuple[int, ...] = (0,)
    calendar: bool = True
    include_static: bool = False
    metadata: dict = field(default_factory=dict)  # seed, config_digest, trained_through

    def to_dict(self) -> dict:
        p = self.pipeline
        return _clean({
            "format_version": FORMAT_VERSION,
            "kind": p.kind,
            "methodology": p.methodology,
            "horizon_hours": p.horizon_hours,
            "features": {
                "names": list(p.feature_names),
                "lags": list(self.lags),
                "calendar": self.calendar,
                "include_static": self.include_static,
            },
            "model": model_to_dict(p.model),
            "feature_transform": None if p.feature_transform is None else p.feature_transform.to_dict(),
            "target_transform": None if p.target_transform is None else p.target_transform.to_dict(),
            "metadata": dict(self.metadata),
        })

    @classmethod
    def from_dict(cls, d: dict) -> "ModelArtifact":
        version = d.get("format_version")
        if version != FORMAT_VERSION:
            raise SchemaError(f"unsupported artifact format_version {version!r}; expected {FORMAT_VERSION}")
        try:
            ft, tt = d["feature_transform"], d["target_transform"]
            feats = d["features"]
            pipeline = Pipeline(
                d["methodology"], d["kind"], model_from_dict(d["model"]), tuple(feats["names"]),
                int(d["horizon_hours"]),
                None if ft is None else PowerTransformer.from_dict(ft),
                None if tt is None else PowerTransformer.from_dict(tt),
            )
            return cls(pipeline, tuple(feats["lags"]), bool(feats["calendar"]),
                       bool(feats["include_static"]), dict(d.get("metadata", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed artifact: {exc!r}") from exc


def dumps(artifact: ModelArtifact) -> str:
    return json.dumps(artifact.to_dict(), sort_keys=True, indent=1, allow_nan=False) + "\n"


def save_artifact(path, artifact: ModelArtifact) -> Path:
    return atomic_write_text(path, dumps(artifact))


def load_artifact(path) -> ModelArtifact:
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise IoError(f"artifact not found: {path}", path=str(path)) from exc
    except OSError as exc:
        raise IoError(f"cannot read artifact {path}: {exc.strerror}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"artifact {path} is not valid JSON: {exc}", path=str(path)) from exc
    if not isinstance(d, dict):
        raise SchemaError(f"artifact {path} is not a JSON object", path=str(path))
    return ModelArtifact.from_dict(d)


def artifact_name(methodology: str, kind: str, horizon: int) -> str:
    return f"{methodology}_{kind}_{horizon}h.json"
