"""Experiment harness: data generation, invariance and risk metrics, and the
CSV-emitting experiment runner.

All randomness is derived from (seed, stream) pairs fed to numpy's seeded
generator, so a config fully determines every sample drawn anywhere in a run.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from . import estimator, kernels
from .config import (
    ExperimentConfig,
    KrrMethodConfig,
    SpecAvgMethodConfig,
    TargetConfig,
)
from .estimator import LabeledDataset, SpectralModel
from .groups import (
    GroupElement,
    GroupKind,
    GroupSpec,
    GroupTooLargeError,
    apply_group_element,
    compose,
    identity_like,
    is_identity,
)
from .manifolds import SIN, EigenIndex, ManifoldKind, ManifoldSpec, SQRT2

_TRAIN_STREAM = 1
_TEST_STREAM = 3
_GROUP_SAMPLE_STREAM = 4

DEFAULT_GROUP_SAMPLE = 64

PredictFn = Callable[[np.ndarray], np.ndarray]


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream])


def sample_points(manifold: ManifoldSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    hw = manifold.halfwidth
    return rng.uniform(-hw, hw, size=(n, manifold.dimension))


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------

def _eval_single_index(manifold: ManifoldSpec, index: EigenIndex, pts: np.ndarray) -> np.ndarray:
    scale = manifold.freq_scale
    out = np.ones(pts.shape[0])
    for axis, (freq, pat) in enumerate(zip(index.frequencies, index.trig_pattern)):
        if freq == 0:
            continue
        ang = scale * freq * pts[:, axis]
        out = out * (SQRT2 * (np.sin(ang) if pat == SIN else np.cos(ang)))
    return out


@lru_cache(maxsize=None)
def _squares_cosine_coefficient(freq: int) -> float:
    """<x^2, basis function of frequency freq> on [-1,1) under the uniform
    probability measure, by adaptive quadrature."""
    if freq == 0:
        value, _ = quad(lambda t: 0.5 * t * t, -1.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    else:
        value, _ = quad(lambda t: 0.5 * t * t * SQRT2 * math.cos(math.pi * freq * t),
                        -1.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    return value


@lru_cache(maxsize=None)
def _uniform_moment(power: int) -> float:
    value, _ = quad(lambda t: 0.5 * t ** power, -1.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    return value


class WeightedSquaresTarget:
    """f*(x) = (1/d) sum_i i * x_i^2 on the flat torus; invariant under sign
    flips and even in every coordinate, so only all-cos single-axis basis
    functions carry its spectrum."""

    def __init__(self, manifold: ManifoldSpec):
        if manifold.kind is not ManifoldKind.FLAT_TORUS:
            raise ValueError("weighted_squares target lives on the flat torus")
        self.manifold = manifold
        d = manifold.dimension
        self.axis_weights = np.arange(1, d + 1, dtype=np.float64) / d

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return pts ** 2 @ self.axis_weights

    def norm_sq(self) -> float:
        m2, m4 = _uniform_moment(2), _uniform_moment(4)
        sum_w = float(np.sum(self.axis_weights))
        sum_w2 = float(np.sum(self.axis_weights ** 2))
        return m4 * sum_w2 + m2 * m2 * (sum_w * sum_w - sum_w2)

    def coefficient_of(self, index: EigenIndex) -> float:
        nonzero = [axis for axis, f in enumerate(index.frequencies) if f != 0]
        if not nonzero:
            return float(np.sum(self.axis_weights)) * _squares_cosine_coefficient(0)
        if len(nonzero) > 1:
            return 0.0
        axis = nonzero[0]
        if index.trig_pattern[axis] == SIN:
            return 0.0
        return self.axis_weights[axis] * _squares_cosine_coefficient(index.frequencies[axis])


class SyntheticSpectralTarget:
    """f* given explicitly by finitely many spectral coefficients."""

    def __init__(self, manifold: ManifoldSpec, entries: list[tuple[EigenIndex, float]]):
        self.manifold = manifold
        self.entries = list(entries)
        for index, _ in self.entries:
            if len(index.frequencies) != manifold.dimension:
                raise ValueError("coefficient index dimension mismatch")

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        out = np.zeros(pts.shape[0])
        for index, value in self.entries:
            out += value * _eval_single_index(self.manifold, index, pts)
        return out

    def norm_sq(self) -> float:
        return float(sum(v * v for _, v in self.entries))

    def coefficient_of(self, index: EigenIndex) -> float:
        for candidate, value in self.entries:
            if candidate == index:
                return float(value)
        return 0.0


Target = WeightedSquaresTarget | SyntheticSpectralTarget


def make_target(config: TargetConfig, manifold: ManifoldSpec) -> Target:
    if config.kind == "weighted_squares":
        return WeightedSquaresTarget(manifold)
    entries = [
        (EigenIndex.from_names(c.frequencies, c.trig_pattern), c.value)
        for c in config.coefficients
    ]
    return SyntheticSpectralTarget(manifold, entries)


def target_coefficients(target: Target, basis) -> tuple[np.ndarray, float]:
    """Target coefficients aligned with a basis, plus the target's full
    squared L2 norm (so the truncated tail is norm_sq - |aligned|^2)."""
    aligned = np.array([target.coefficient_of(m) for m in basis.members])
    return aligned, target.norm_sq()


# ---------------------------------------------------------------------------
# Data generation
# ---------------------------------------------------------------------------

def generate_dataset(manifold: ManifoldSpec, target: Target, n: int, seed: int,
                     noise_std: float) -> LabeledDataset:
    """n uniform points with y = f*(x) + Gaussian noise; deterministic in seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream_rng(seed, _TRAIN_STREAM)
    points = sample_points(manifold, n, rng)
    labels = target(points)
    if noise_std > 0:
        labels = labels + rng.normal(0.0, noise_std, size=n)
    return LabeledDataset(points, labels, noise_std)


def sample_test_points(manifold: ManifoldSpec, n_test: int, seed: int) -> np.ndarray:
    return sample_points(manifold, n_test, stream_rng(seed, _TEST_STREAM))


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def _sampled_elements(group: GroupSpec, max_group_sample: int, seed: int) -> list[GroupElement]:
    """Generators, their inverses, and random bounded-length words: a lower
    bound proxy when the closure is too large to enumerate."""
    rng = np.random.default_rng([seed, _GROUP_SAMPLE_STREAM])
    gens = list(group.generators)
    pool: list[GroupElement] = []
    seen: set[GroupElement] = set()
    from .groups import inverse as group_inverse

    def add(element: GroupElement) -> None:
        if not is_identity(element) and element not in seen:
            seen.add(element)
            pool.append(element)

    for g in gens:
        add(g)
        add(group_inverse(g))
    max_len = max(4, 2 * math.ceil(math.log2(max(2, group.declared_order))))
    for _ in range(max_group_sample * 20):
        if len(pool) >= max_group_sample:
            break
        word = identity_like(gens[0])
        for _ in range(int(rng.integers(1, max_len + 1))):
            g = gens[int(rng.integers(len(gens)))]
            if rng.integers(2):
                g = group_inverse(g)
            word = compose(word, g)
        add(word)
    return pool


OrbitPredictFn = Callable[[np.ndarray, list[GroupElement]], np.ndarray]


def invariance_discrepancy(predict_fn: PredictFn, pts: np.ndarray, group: GroupSpec,
                           *, manifold: ManifoldSpec | None = None,
                           closure_cap: int = 10_000,
                           max_group_sample: int = DEFAULT_GROUP_SAMPLE,
                           seed: int = 0,
                           orbit_predict_fn: OrbitPredictFn | None = None) -> tuple[float, bool]:
    """Max over group elements and test points of |f(x) - f(gx)|.

    Exact over the full closure when enumerable; otherwise a sampled lower
    bound over generators plus random words, flagged via the second return
    value. orbit_predict_fn, when given, evaluates the predictor on the whole
    orbit in one call (predictor-specific fast path, same result).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    if pts.shape[0] < 1:
        raise ValueError("need at least one test point")
    try:
        elements = [g for g in group.closure(closure_cap) if not is_identity(g)]
        sampled = False
    except GroupTooLargeError:
        elements = _sampled_elements(group, max_group_sample, seed)
        sampled = True
    base = np.asarray(predict_fn(pts))
    if orbit_predict_fn is not None and elements:
        orbit = np.asarray(orbit_predict_fn(pts, elements))
        return float(np.max(np.abs(orbit - base[None, :]))), sampled
    worst = 0.0
    for element in elements:
        moved = apply_group_element(group, element, pts, manifold)
        worst = max(worst, float(np.max(np.abs(np.asarray(predict_fn(moved)) - base))))
    return worst, sampled


def empirical_excess_risk(predict_fn: PredictFn, target: Target, pts: np.ndarray) -> float:
    pred = np.asarray(predict_fn(pts))
    return float(np.mean((pred - target(pts)) ** 2))


def exact_excess_risk(model: SpectralModel, target: Target) -> float:
    """Exact L2 error via Parseval: coefficient mismatch on the retained basis
    plus the target's truncated tail."""
    aligned, norm_sq = target_coefficients(target, model.basis)
    head = float(np.sum((model.coefficients - aligned) ** 2))
    tail = max(0.0, norm_sq - float(np.sum(aligned ** 2)))
    return head + tail


def excess_risk(predict_fn: PredictFn, target: Target, manifold: ManifoldSpec,
                n_test: int, seed: int,
                model: SpectralModel | None = None) -> tuple[float, Optional[float]]:
    """(empirical risk on a fresh seeded test set, exact risk when available)."""
    pts = sample_test_points(manifold, n_test, seed)
    empirical = empirical_excess_risk(predict_fn, target, pts)
    exact = exact_excess_risk(model, target) if model is not None else None
    return empirical, exact


# ---------------------------------------------------------------------------
# Experiment runner
# ---------------------------------------------------------------------------

CSV_HEADER = [
    "method", "hyperparam", "n", "seed", "invariance_discrepancy", "id_sampled",
    "excess_risk_empirical", "excess_risk_exact", "wall_time_ms", "oracle_calls",
    "error",
]


@dataclass
class MetricsRow:
    method: str
    hyperparam: float
    n: int
    seed: str
    invariance_discrepancy: Optional[float] = None
    id_sampled: bool = False
    excess_risk_empirical: Optional[float] = None
    excess_risk_exact: Optional[float] = None
    wall_time_ms: float = 0.0
    oracle_calls: float = 0.0
    error: str = ""

    def validate(self) -> None:
        if self.error:
            return
        for name in ("invariance_discrepancy", "excess_risk_empirical", "wall_time_ms",
                     "oracle_calls"):
            value = getattr(self, name)
            if value is None or not math.isfinite(value) or value < 0:
                raise ValueError(f"metrics field {name} must be finite and nonnegative, got {value}")
        if self.excess_risk_exact is not None and (
                not math.isfinite(self.excess_risk_exact) or self.excess_risk_exact < 0):
            raise ValueError("excess_risk_exact must be finite and nonnegative")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def rows_to_csv(rows: list[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([
            row.method, _fmt(row.hyperparam), row.n, row.seed,
            _fmt(row.invariance_discrepancy), _fmt(row.id_sampled),
            _fmt(row.excess_risk_empirical), _fmt(row.excess_risk_exact),
            _fmt(row.wall_time_ms), _fmt(row.oracle_calls), row.error,
        ])
    return buf.getvalue()


def _run_cell(config: ExperimentConfig, manifold: ManifoldSpec, group: GroupSpec,
              target: Target, method, hyper, n: int, seed: int,
              include_timing: bool) -> MetricsRow:
    dataset = generate_dataset(manifold, target, n, seed, config.noise_std)
    started = time.perf_counter()
    if isinstance(method, SpecAvgMethodConfig):
        _, alpha, cutoff = hyper
        model = estimator.fit(dataset, manifold, group, alpha=alpha, cutoff_override=cutoff)
        predict_fn: PredictFn = lambda pts: estimator.predict(model, pts)
        oracle_calls = float(model.oracle_counts.total)
        spectral_model: Optional[SpectralModel] = model
    else:
        kernel = method.kernel.to_spec(manifold, group)
        krr_model = kernels.krr_fit(dataset, kernel, hyper)
        predict_fn = lambda pts: kernels.krr_predict(krr_model, pts)
        oracle_calls = float(krr_model.kernel_evals)
        spectral_model = None

    orbit_fn: Optional[OrbitPredictFn] = None
    if (spectral_model is None and isinstance(kernel, kernels.VonMisesKernel)
            and group.kind is GroupKind.SIGN_FLIPS):
        orbit_fn = lambda pts, elements: kernels.vonmises_signflip_orbit_predict(
            krr_model, pts, elements)

    pts = sample_test_points(manifold, config.n_test, seed)
    id_value, id_sampled = invariance_discrepancy(
        predict_fn, pts, group, manifold=manifold, seed=seed,
        orbit_predict_fn=orbit_fn)
    empirical = empirical_excess_risk(predict_fn, target, pts)
    exact = exact_excess_risk(spectral_model, target) if spectral_model is not None else None
    elapsed_ms = (time.perf_counter() - started) * 1000.0 if include_timing else 0.0

    hyper_value = hyper[0] if isinstance(method, SpecAvgMethodConfig) else hyper
    row = MetricsRow(
        method=method.name, hyperparam=float(hyper_value), n=n, seed=str(seed),
        invariance_discrepancy=id_value, id_sampled=id_sampled,
        excess_risk_empirical=empirical, excess_risk_exact=exact,
        wall_time_ms=elapsed_ms, oracle_calls=oracle_calls,
    )
    row.validate()
    return row


def _mean(values: list[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    if not present or len(present) != len(values):
        return None
    return float(np.mean(present))


def _average_rows(rows: list[MetricsRow]) -> list[MetricsRow]:
    grouped: dict[tuple[str, float, int], list[MetricsRow]] = {}
    for row in rows:
        grouped.setdefault((row.method, row.hyperparam, row.n), []).append(row)
    out = []
    for (method, hyper, n), cell_rows in sorted(grouped.items()):
        good = [r for r in cell_rows if not r.error]
        if not good:
            out.append(MetricsRow(method, hyper, n, "avg", error="all seeds failed"))
            continue
        out.append(MetricsRow(
            method=method, hyperparam=hyper, n=n, seed="avg",
            invariance_discrepancy=_mean([r.invariance_discrepancy for r in good]),
            id_sampled=any(r.id_sampled for r in good),
            excess_risk_empirical=_mean([r.excess_risk_empirical for r in good]),
            excess_risk_exact=_mean([r.excess_risk_exact for r in good]),
            wall_time_ms=float(np.mean([r.wall_time_ms for r in good])),
            oracle_calls=float(np.mean([r.oracle_calls for r in good])),
        ))
    return out


def run_experiment(config: ExperimentConfig, *, include_timing: bool = True,
                   out_path: str | None = None) -> str:
    """Run every (method, hyperparameter, n, seed) cell, then append the
    seed-averaged rows. Failures become rows with the error column set and the
    run continues. Returns the CSV text; writes it when a path is given."""
    manifold = config.manifold.to_spec()
    group = config.group.to_spec()
    target = make_target(config.target, manifold)

    rows: list[MetricsRow] = []
    for method in config.methods:
        n_values = method.n_train if method.n_train else config.n_train
        for hyper in method.sweep():
            hyper_value = hyper[0] if isinstance(method, SpecAvgMethodConfig) else hyper
            for n in n_values:
                for seed in config.seeds:
                    try:
                        rows.append(_run_cell(config, manifold, group, target,
                                              method, hyper, n, seed, include_timing))
                    except Exception as exc:  # noqa: BLE001 - reported per cell
                        rows.append(MetricsRow(
                            method=method.name, hyperparam=float(hyper_value), n=n,
                            seed=str(seed), error=f"{type(exc).__name__}: {exc}",
                        ))
    rows.sort(key=lambda r: (r.method, r.hyperparam, r.n, int(r.seed)))
    rows = rows + _average_rows(rows)

    text = rows_to_csv(rows)
    destination = out_path or config.output
    if destination:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
