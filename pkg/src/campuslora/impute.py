"""Strategies for filling missing grid cells: drop, zero, linear, polynomial, KNN.

The KNN neighbor space is per-device: a neighbor row is a grid slot where the
target and every companion field are present; features are the companion
values plus optional sin/cos time-of-day, z-scored, with Euclidean distance.
A query slot uses whichever of those features it has (time features are always
available), so slots that lost the whole transmission can still be matched by
time of day.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import DegenerateDesign, InsufficientSupport, MissingCompanions
from .gaps import GriddedSeries

MS_PER_DAY = 24 * 60 * 60 * 1000


@dataclass(frozen=True)
class Drop:
    pass


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Linear:
    pass


@dataclass(frozen=True)
class Poly:
    order: int

    def __post_init__(self) -> None:
        if self.order < 2:
            raise ValueError("polynomial order must be >= 2 (use Linear below that)")


@dataclass(frozen=True)
class Knn:
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")


ImputeStrategy = Union[Drop, Zero, Linear, Poly, Knn]


def parse_strategy(token: str) -> ImputeStrategy:
    """Parse a CLI strategy token: drop | zero | linear | poly:N | knn:K."""
    name, _, arg = token.partition(":")
    if name == "drop" and not arg:
        return Drop()
    if name == "zero" and not arg:
        return Zero()
    if name == "linear" and not arg:
        return Linear()
    if name == "poly" and arg:
        return Poly(int(arg))
    if name == "knn" and arg:
        return Knn(int(arg))
    raise ValueError(f"unknown imputation strategy {token!r}")


def strategy_label(strategy: ImputeStrategy) -> str:
    if isinstance(strategy, Drop):
        return "drop"
    if isinstance(strategy, Zero):
        return "zero"
    if isinstance(strategy, Linear):
        return "linear"
    if isinstance(strategy, Poly):
        return f"poly:{strategy.order}"
    if isinstance(strategy, Knn):
        return f"knn:{strategy.k}"
    raise TypeError(f"not a strategy: {strategy!r}")


@dataclass(frozen=True)
class KnnConfig:
    """Feature-space knobs for KNN imputation."""

    k: int
    feature_set: tuple[str, ...] = ()
    time_features: bool = True
    standardize: bool = True


def poly_fit(xs, ys, order: int) -> np.ndarray:
    """Least-squares coefficients a_0..a_order of y = sum a_i x^i.

    Columns of the Vandermonde matrix are scaled to unit max-norm before the
    solve to keep the system well conditioned; interpolation is exact when the
    number of distinct points equals order + 1.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be equal-length 1-D arrays")
    if order < 0:
        raise ValueError("order must be nonnegative")
    n_distinct = np.unique(x).size
    if n_distinct < order + 1:
        raise DegenerateDesign(
            f"need {order + 1} distinct x values for order {order}, got {n_distinct}"
        )
    vander = np.vander(x, order + 1, increasing=True)
    scale = np.max(np.abs(vander), axis=0)
    scale[scale == 0] = 1.0
    coeffs, _, rank, _ = np.linalg.lstsq(vander / scale, y, rcond=None)
    if rank < order + 1:
        raise DegenerateDesign(f"design matrix rank {rank} < {order + 1}")
    return coeffs / scale


def _poly_eval(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(x, coeffs)


def _linear_fill(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    present = np.flatnonzero(mask)
    if present.size < 2:
        raise InsufficientSupport(f"linear needs >= 2 present cells, got {present.size}")
    out = values.copy()
    missing = np.flatnonzero(~mask)
    xs = present.astype(np.float64)
    ys = values[present]
    interior = missing[(missing > present[0]) & (missing < present[-1])]
    out[interior] = np.interp(interior.astype(np.float64), xs, ys)
    # edge runs: extend the nearest segment's line
    lead = missing[missing < present[0]]
    if lead.size:
        x0, x1 = present[0], present[1]
        slope = (values[x1] - values[x0]) / (x1 - x0)
        out[lead] = values[x0] + slope * (lead - x0)
    trail = missing[missing > present[-1]]
    if trail.size:
        x0, x1 = present[-2], present[-1]
        slope = (values[x1] - values[x0]) / (x1 - x0)
        out[trail] = values[x1] + slope * (trail - x1)
    return out


def _poly_fill(values: np.ndarray, mask: np.ndarray, order: int) -> np.ndarray:
    present = np.flatnonzero(mask)
    if present.size < order + 1:
        raise InsufficientSupport(
            f"poly:{order} needs >= {order + 1} present cells, got {present.size}"
        )
    coeffs = poly_fit(present.astype(np.float64), values[present], order)
    out = values.copy()
    missing = np.flatnonzero(~mask)
    out[missing] = _poly_eval(coeffs, missing.astype(np.float64))
    return out


def _time_of_day_features(series: GriddedSeries) -> np.ndarray:
    idx = np.arange(len(series), dtype=np.int64)
    ms = (series.t0.epoch_millis + idx * series.cadence_ms) % MS_PER_DAY
    phase = 2.0 * np.pi * ms / MS_PER_DAY
    return np.column_stack([np.sin(phase), np.cos(phase)])


def _check_cogridded(series: GriddedSeries, companion: GriddedSeries, name: str) -> None:
    if (
        len(companion) != len(series)
        or companion.t0 != series.t0
        or companion.cadence_ms != series.cadence_ms
    ):
        raise ValueError(f"companion {name!r} is not co-gridded with the target series")


def knn_impute(
    series: GriddedSeries,
    companions: Mapping[str, GriddedSeries],
    config: KnnConfig,
) -> GriddedSeries:
    """Fill missing target cells with the mean of the k most similar rows."""
    if not config.feature_set and not config.time_features:
        raise MissingCompanions("KNN has no features to match on")
    feat_cols: list[np.ndarray] = []
    feat_masks: list[np.ndarray] = []
    for name in config.feature_set:
        if name not in companions:
            raise MissingCompanions(f"companion series {name!r} not provided")
        comp = companions[name]
        _check_cogridded(series, comp, name)
        feat_cols.append(comp.values)
        feat_masks.append(comp.mask)
    if config.time_features:
        tod = _time_of_day_features(series)
        feat_cols.extend([tod[:, 0], tod[:, 1]])
        feat_masks.extend([np.ones(len(series), dtype=bool)] * 2)

    features = np.column_stack(feat_cols)
    feature_mask = np.column_stack(feat_masks)
    neighbor_rows = np.flatnonzero(series.mask & feature_mask.all(axis=1))
    if config.k > neighbor_rows.size:
        raise InsufficientSupport(
            f"knn:{config.k} needs >= {config.k} complete neighbor rows, got {neighbor_rows.size}"
        )

    if config.standardize:
        mean = features[neighbor_rows].mean(axis=0)
        std = features[neighbor_rows].std(axis=0)
        std[std == 0] = 1.0
    else:
        mean = np.zeros(features.shape[1])
        std = np.ones(features.shape[1])
    z = (features - mean) / std

    out = series.values.copy()
    for q in np.flatnonzero(~series.mask):
        available = np.flatnonzero(feature_mask[q])
        if available.size == 0:
            raise InsufficientSupport(
                f"slot {q} has no usable features (enable time features or provide companions)"
            )
        diff = z[neighbor_rows][:, available] - z[q, available]
        dist = np.sqrt((diff * diff).sum(axis=1))
        nearest = neighbor_rows[np.argsort(dist, kind="stable")[: config.k]]
        out[q] = series.values[nearest].mean()
    return series.replace_values(out, np.ones(len(series), dtype=bool))


def impute(
    series: GriddedSeries,
    strategy: ImputeStrategy,
    companions: Optional[Mapping[str, GriddedSeries]] = None,
) -> GriddedSeries:
    """Apply one strategy; present cells are never modified.

    Drop excises missing cells and attaches the surviving slot indices; the
    other strategies return a fully present grid of the original length.
    """
    values = series.values
    mask = series.mask
    if isinstance(strategy, Drop):
        keep = np.flatnonzero(mask)
        return series.replace_values(
            values[keep], np.ones(keep.size, dtype=bool), keep.astype(np.int64)
        )
    if isinstance(strategy, Zero):
        out = values.copy()
        out[~mask] = 0.0
        return series.replace_values(out, np.ones(len(series), dtype=bool))
    if isinstance(strategy, Linear):
        if series.is_complete:
            return series.replace_values(values.copy(), mask.copy())
        return series.replace_values(_linear_fill(values, mask), np.ones(len(series), dtype=bool))
    if isinstance(strategy, Poly):
        if series.is_complete:
            return series.replace_values(values.copy(), mask.copy())
        return series.replace_values(
            _poly_fill(values, mask, strategy.order), np.ones(len(series), dtype=bool)
        )
    if isinstance(strategy, Knn):
        if companions is None:
            raise MissingCompanions("KNN imputation requires companion series")
        config = KnnConfig(k=strategy.k, feature_set=tuple(sorted(companions)))
        return knn_impute(series, companions, config)
    raise TypeError(f"not a strategy: {strategy!r}")


def select_k(
    clean: GriddedSeries,
    companions: Mapping[str, GriddedSeries],
    mask_fraction: float,
    k_candidates: Sequence[int],
    seed: int,
    config: Optional[KnnConfig] = None,
) -> tuple[int, dict[int, float]]:
    """Pick k by masking known cells and scoring reconstruction MSE.

    A seeded uniform sample of cells is hidden, each candidate k imputes
    them, and the k with the lowest MSE against the hidden truth wins; ties
    break toward smaller k.
    """
    if not clean.is_complete:
        raise InsufficientSupport("k selection requires a series with no missing cells")
    if not k_candidates:
        raise ValueError("k_candidates must be nonempty")
    n = len(clean)
    n_masked = math.ceil(mask_fraction * n)
    if n_masked < 1:
        raise InsufficientSupport(f"mask_fraction {mask_fraction} masks zero of {n} cells")
    if n_masked >= n:
        raise InsufficientSupport(f"mask_fraction {mask_fraction} would mask every cell")
    rng = np.random.default_rng(seed)
    hidden = np.sort(rng.choice(n, size=n_masked, replace=False))
    holed_mask = clean.mask.copy()
    holed_mask[hidden] = False
    holed_values = clean.values.copy()
    holed_values[hidden] = np.nan
    holed = clean.replace_values(holed_values, holed_mask)

    base = config or KnnConfig(k=1, feature_set=tuple(sorted(companions)))
    mse_per_k: dict[int, float] = {}
    truth = clean.values[hidden]
    for k in sorted(set(int(k) for k in k_candidates)):
        cfg = KnnConfig(k=k, feature_set=base.feature_set,
                        time_features=base.time_features, standardize=base.standardize)
        try:
            filled = knn_impute(holed, companions, cfg)
        except InsufficientSupport as exc:
            raise InsufficientSupport(f"candidate k={k}: {exc}") from None
        err = filled.values[hidden] - truth
        mse_per_k[k] = float(np.mean(err * err))

    k_star = min(mse_per_k, key=lambda k: (mse_per_k[k], k))
    return k_star, mse_per_k
