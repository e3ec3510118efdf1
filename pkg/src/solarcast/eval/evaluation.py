from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..core import SupervisedDataset
from ..pipeline import Pipeline
from .metrics import mae, r2, rmse

SCALES = ("raw", "transformed", "inverse_transformed")


@dataclass(frozen=True)
class EvalReport:
    model: str
    methodology: str
    horizon_hours: int
    scale: str
    r2: float
    mae: float
    rmse: float
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def check(self) -> None:
        """Assert the metric invariants: ``rmse >= mae >= 0`` and ``r2 <= 1``."""
        if not self.ok:
            return
        # rounding slack for the equal-error case
        slack = 1e-12 * max(1.0, self.mae)
        assert self.mae >= 0 and self.rmse + slack >= self.mae, self
        assert self.r2 <= 1.0, self

    @classmethod
    def failed(cls, model: str, methodology: str, horizon: int, scale: str, error: str) -> "EvalReport":
        return cls(model, methodology, horizon, scale, math.nan, math.nan, math.nan, error)


def _report(model, methodology, horizon, scale, y, yhat) -> EvalReport:
    rep = EvalReport(model, methodology, horizon, scale, r2(y, yhat), mae(y, yhat), rmse(y, yhat))
    rep.check()
    return rep


def evaluate(pipeline: Pipeline, test: SupervisedDataset) -> list[EvalReport]:
    """Score a fitted pipeline on held-out rows.

    Pipelines with a transformed target get two reports: one on the
    transformed scale and one after inverting predictions back to kWh
    (``inverse_transformed``). All others get a single ``raw`` report.
    """
    name, meth, h = pipeline.kind, pipeline.methodology, test.horizon_hours
    if pipeline.target_transform is None:
        return [_report(name, meth, h, "raw", test.y, pipeline.predict(test.X))]
    pred_t = pipeline.predict_model_scale(test.X)
    y_t = pipeline.transform_target(test.y)
    return [
        _report(name, meth, h, "transformed", y_t, pred_t),
        _report(name, meth, h, "inverse_transformed", test.y, pipeline.to_raw_scale(pred_t)),
    ]
