"""HTTP service exposing fitting, prediction, invariance metrics, experiments,
and self-checks. The CLI is a thin client of these endpoints."""

from __future__ import annotations

from typing import Any, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict

from . import estimator, harness, kernels, verify
from .config import ExperimentConfig, KrrMethodConfig, SpecAvgMethodConfig


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FitRequest(StrictModel):
    config: ExperimentConfig
    method: Optional[str] = None
    n: Optional[int] = None
    seed: Optional[int] = None


class FitResponse(StrictModel):
    model: dict[str, Any]


class PredictRequest(StrictModel):
    model: dict[str, Any]
    point: list[float]


class PredictResponse(StrictModel):
    value: float


class DiscrepancyRequest(StrictModel):
    model: dict[str, Any]
    config: ExperimentConfig


class DiscrepancyResponse(StrictModel):
    invariance_discrepancy: float
    sampled: bool


class ExperimentRequest(StrictModel):
    config: ExperimentConfig
    include_timing: bool = True


class ExperimentResponse(StrictModel):
    csv: str


class CheckResultModel(StrictModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(StrictModel):
    passed: bool
    checks: list[CheckResultModel]


def fit_from_config(config: ExperimentConfig, method_name: Optional[str] = None,
                    n: Optional[int] = None, seed: Optional[int] = None) -> dict[str, Any]:
    """Fit one method cell of a config and return its model document."""
    methods = config.methods
    if method_name is not None:
        methods = [m for m in methods if m.name == method_name]
        if not methods:
            raise ValueError(f"no method named {method_name!r} in config")
    method = methods[0]
    manifold = config.manifold.to_spec()
    group = config.group.to_spec()
    target = harness.make_target(config.target, manifold)
    n_values = method.n_train if method.n_train else config.n_train
    n_used = n if n is not None else n_values[0]
    seed_used = seed if seed is not None else config.seeds[0]
    dataset = harness.generate_dataset(manifold, target, n_used, seed_used, config.noise_std)
    if isinstance(method, SpecAvgMethodConfig):
        _, alpha, cutoff = method.sweep()[0]
        model = estimator.fit(dataset, manifold, group, alpha=alpha, cutoff_override=cutoff)
        return estimator.model_to_document(model)
    assert isinstance(method, KrrMethodConfig)
    kernel = method.kernel.to_spec(manifold, group)
    krr_model = kernels.krr_fit(dataset, kernel, method.sweep()[0])
    return kernels.krr_to_document(krr_model)


def predictor_from_document(document: dict[str, Any]):
    """(predict_fn, group) for either model document type."""
    kind = document.get("type")
    if kind == "spectral":
        model = estimator.model_from_document(document)
        return (lambda pts: estimator.predict(model, pts)), model.group, model.basis.manifold
    if kind == "krr":
        model = kernels.krr_from_document(document)
        group = None
        if isinstance(model.kernel, kernels.GroupAveragedKernel):
            group = model.kernel.group
        return (lambda pts: kernels.krr_predict(model, pts)), group, model.kernel.manifold
    raise ValueError(f"unknown model document type: {kind!r}")


def create_app() -> FastAPI:
    app = FastAPI(title="specavg", version="0.1.0",
                  description="Invariant spectral regression service")

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.post("/fit", response_model=FitResponse)
    def fit(request: FitRequest) -> FitResponse:
        try:
            document = fit_from_config(request.config, request.method, request.n, request.seed)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return FitResponse(model=document)

    @app.post("/predict", response_model=PredictResponse)
    def predict(request: PredictRequest) -> PredictResponse:
        try:
            predict_fn, _, manifold = predictor_from_document(request.model)
            point = np.asarray(request.point, dtype=float)
            value = float(predict_fn(point[None, :])[0])
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return PredictResponse(value=value)

    @app.post("/discrepancy", response_model=DiscrepancyResponse)
    def discrepancy(request: DiscrepancyRequest) -> DiscrepancyResponse:
        try:
            predict_fn, model_group, manifold = predictor_from_document(request.model)
            config = request.config
            group = model_group if model_group is not None else config.group.to_spec()
            pts = harness.sample_test_points(manifold, config.n_test, config.seeds[0])
            value, sampled = harness.invariance_discrepancy(
                predict_fn, pts, group, manifold=manifold, seed=config.seeds[0])
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return DiscrepancyResponse(invariance_discrepancy=value, sampled=sampled)

    @app.post("/experiment", response_model=ExperimentResponse)
    def experiment(request: ExperimentRequest) -> ExperimentResponse:
        try:
            text = harness.run_experiment(request.config,
                                          include_timing=request.include_timing)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return ExperimentResponse(csv=text)

    @app.post("/verify", response_model=VerifyResponse)
    def run_verify() -> VerifyResponse:
        results = verify.run_checks()
        checks = [CheckResultModel(name=r.name, passed=r.passed, detail=r.detail)
                  for r in results]
        return VerifyResponse(passed=all(r.passed for r in results), checks=checks)

    return app


app = create_app()
