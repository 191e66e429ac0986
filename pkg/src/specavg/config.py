"""JSON config schema for experiments, the service, and the CLI.

Every model rejects unknown keys, so malformed configs fail loudly instead of
being silently ignored.
"""

from __future__ import annotations

import json
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .groups import GroupSpec
from .kernels import (
    GroupAveragedKernel,
    KernelSpec,
    TruncatedSobolevKernel,
    VonMisesKernel,
)
from .manifolds import BasisMode, ManifoldKind, ManifoldSpec, build_basis


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ManifoldConfig(StrictModel):
    kind: Literal["flat_torus", "circle"]
    dimension: int = Field(ge=1)
    basis_mode: Literal["full_fourier", "cosine_only"] = "full_fourier"

    def to_spec(self) -> ManifoldSpec:
        return ManifoldSpec(ManifoldKind(self.kind), self.dimension, BasisMode(self.basis_mode))

    @staticmethod
    def from_spec(spec: ManifoldSpec) -> "ManifoldConfig":
        return ManifoldConfig(kind=spec.kind.value, dimension=spec.dimension,
                              basis_mode=spec.basis_mode.value)


class GroupConfig(StrictModel):
    kind: Literal["sign_flips", "coordinate_permutations", "cyclic_rotation"]
    dimension: Optional[int] = Field(default=None, ge=1)
    order: Optional[int] = Field(default=None, ge=1)
    trivial: bool = False

    @model_validator(mode="after")
    def _check_parameter(self) -> "GroupConfig":
        if self.kind == "cyclic_rotation":
            if self.order is None:
                raise ValueError("cyclic_rotation requires 'order'")
        elif self.dimension is None:
            raise ValueError(f"{self.kind} requires 'dimension'")
        return self

    def to_spec(self) -> GroupSpec:
        if self.trivial:
            if self.kind == "cyclic_rotation":
                return GroupSpec.cyclic_rotation(1)
            return GroupSpec.trivial_on_torus(self.dimension)
        if self.kind == "sign_flips":
            return GroupSpec.sign_flips(self.dimension)
        if self.kind == "coordinate_permutations":
            return GroupSpec.coordinate_permutations(self.dimension)
        return GroupSpec.cyclic_rotation(self.order)


class SpectralCoefficientConfig(StrictModel):
    frequencies: list[int]
    trig_pattern: list[Literal["cos", "sin"]]
    value: float


class TargetConfig(StrictModel):
    kind: Literal["weighted_squares", "synthetic_spectral"]
    coefficients: Optional[list[SpectralCoefficientConfig]] = None

    @model_validator(mode="after")
    def _check_coefficients(self) -> "TargetConfig":
        if self.kind == "synthetic_spectral" and not self.coefficients:
            raise ValueError("synthetic_spectral requires 'coefficients'")
        if self.kind == "weighted_squares" and self.coefficients is not None:
            raise ValueError("weighted_squares takes no coefficients")
        return self


class KernelConfig(StrictModel):
    kind: Literal["von_mises", "truncated_sobolev", "group_averaged"]
    eta: Optional[float] = Field(default=None, gt=0)
    alpha: Optional[float] = Field(default=None, gt=1)
    min_total_dim: Optional[int] = Field(default=None, ge=1)
    inner: Optional["KernelConfig"] = None

    @model_validator(mode="after")
    def _check_fields(self) -> "KernelConfig":
        if self.kind == "von_mises" and self.eta is None:
            raise ValueError("von_mises requires 'eta'")
        if self.kind == "truncated_sobolev" and (self.alpha is None or self.min_total_dim is None):
            raise ValueError("truncated_sobolev requires 'alpha' and 'min_total_dim'")
        if self.kind == "group_averaged" and self.inner is None:
            raise ValueError("group_averaged requires 'inner'")
        return self

    def to_spec(self, manifold: ManifoldSpec, group: GroupSpec) -> KernelSpec:
        if self.kind == "von_mises":
            return VonMisesKernel(self.eta, manifold)
        if self.kind == "truncated_sobolev":
            return TruncatedSobolevKernel(build_basis(manifold, self.min_total_dim), self.alpha)
        return GroupAveragedKernel(self.inner.to_spec(manifold, group), group)


class SpecAvgMethodConfig(StrictModel):
    method: Literal["spec_avg"] = "spec_avg"
    name: str = "spec_avg"
    alpha: Optional[Union[float, list[float]]] = None
    cutoff: Optional[Union[int, list[int]]] = None
    n_train: Optional[list[int]] = None

    @model_validator(mode="after")
    def _check_sweep(self) -> "SpecAvgMethodConfig":
        if self.alpha is None and self.cutoff is None:
            raise ValueError("spec_avg needs 'alpha' or 'cutoff'")
        if isinstance(self.alpha, list) and self.cutoff is not None:
            raise ValueError("sweep over alpha and cutoff at once is ambiguous")
        return self

    def sweep(self) -> list[tuple[float, Optional[float], Optional[int]]]:
        """(hyperparam value, alpha, cutoff_override) per swept point."""
        if self.cutoff is not None:
            cuts = self.cutoff if isinstance(self.cutoff, list) else [self.cutoff]
            alpha = self.alpha if isinstance(self.alpha, (float, int)) else None
            return [(float(c), alpha, int(c)) for c in cuts]
        alphas = self.alpha if isinstance(self.alpha, list) else [self.alpha]
        return [(float(a), float(a), None) for a in alphas]


class KrrMethodConfig(StrictModel):
    method: Literal["krr"] = "krr"
    name: str = "krr"
    kernel: KernelConfig
    ridge: Union[float, list[float]]
    n_train: Optional[list[int]] = None

    def sweep(self) -> list[float]:
        values = self.ridge if isinstance(self.ridge, list) else [self.ridge]
        out = [float(v) for v in values]
        if any(v <= 0 for v in out):
            raise ValueError("ridge values must be positive")
        return out


MethodConfig = Annotated[Union[SpecAvgMethodConfig, KrrMethodConfig],
                         Field(discriminator="method")]


class ExperimentConfig(StrictModel):
    manifold: ManifoldConfig
    group: GroupConfig
    target: TargetConfig
    methods: list[MethodConfig] = Field(min_length=1)
    n_train: list[int] = Field(min_length=1)
    n_test: int = Field(ge=1)
    noise_std: float = Field(ge=0)
    seeds: list[int] = Field(min_length=1)
    output: Optional[str] = None

    @model_validator(mode="after")
    def _check_consistency(self) -> "ExperimentConfig":
        if any(n < 1 for n in self.n_train):
            raise ValueError("n_train entries must be >= 1")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError("method names must be unique")
        manifold = self.manifold.to_spec()
        group = self.group.to_spec()
        group.require_acts_on(manifold)
        if self.target.kind == "weighted_squares" and manifold.kind is not ManifoldKind.FLAT_TORUS:
            raise ValueError("weighted_squares target is defined on the flat torus")
        return self


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return ExperimentConfig.model_validate(json.load(fh))
