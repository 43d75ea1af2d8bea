"""Time-series container and pre-signature path transforms.

A :class:`TimeSeries` is an ordered sequence of (time, value-vector)
samples: ``times`` is a strictly increasing float vector of length n and
``values`` is an (n, d) row-major array, ``values[i]`` being the sample
observed at ``times[i]``. All transforms are pure functions returning new
series; inputs are never mutated, so everything here is safe to call from
any number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist


class StreamValidationError(ValueError):
    """Raised when a TimeSeries violates its invariants."""


@dataclass
class TimeSeries:
    """Ordered (time, value-vector) samples.

    times: shape (n,), strictly increasing, finite.
    values: shape (n, d), finite, row i sampled at times[i].
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.times.ndim != 1 or self.values.ndim != 2:
            raise StreamValidationError("times must be 1-D and values 2-D")
        if self.times.shape[0] != self.values.shape[0]:
            raise StreamValidationError(
                f"length mismatch: {self.times.shape[0]} times vs "
                f"{self.values.shape[0]} value rows"
            )
        if self.times.shape[0] < 1 or self.values.shape[1] < 1:
            raise StreamValidationError("need at least one sample and one channel")
        if not np.all(np.isfinite(self.times)) or not np.all(np.isfinite(self.values)):
            raise StreamValidationError("times and values must be finite")
        if self.times.shape[0] > 1 and not np.all(np.diff(self.times) > 0):
            raise StreamValidationError("times must be strictly increasing")

    @property
    def n(self) -> int:
        return self.times.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def time_augment(ts: TimeSeries) -> TimeSeries:
    """Prepend the observation times as channel 0 (breaks reparameterisation invariance)."""
    return TimeSeries(ts.times.copy(), np.column_stack([ts.times, ts.values]))


def basepoint_augment(ts: TimeSeries) -> TimeSeries:
    """Prepend a zero vector one median time-step before the first sample.

    All augmented streams then share the origin as a common initial value,
    which breaks the translation invariance of downstream signatures. The
    offset is the median positive time step (1.0 for single-sample series)
    so the time axis stays strictly increasing without a magic constant.
    """
    if ts.n == 1:
        delta = 1.0
    else:
        delta = float(np.median(np.diff(ts.times)))
    times = np.concatenate([[ts.times[0] - delta], ts.times])
    values = np.vstack([np.zeros(ts.d), ts.values])
    return TimeSeries(times, values)


def lead_lag(ts: TimeSeries) -> TimeSeries:
    """Interleave the series with a one-step-shifted copy.

    Maps an (n, d) series to a (2n-1, 2d) series
    ((x1,x1), (x1,x2), (x2,x2), ..., (x_{n-1},x_n), (x_n,x_n)) with the
    lagged copy in the first d channels and the leading copy in the last d.
    The original timestamps carry no meaning for the interleaved stream, so
    output times are the fresh uniform grid 0, 1, ..., 2n-2.
    """
    if ts.n < 2:
        raise StreamValidationError("lead_lag requires at least 2 samples")
    k = np.arange(2 * ts.n - 1)
    lag = ts.values[k // 2]
    lead = ts.values[(k + 1) // 2]
    return TimeSeries(k.astype(float), np.hstack([lag, lead]))


def cumulative_sum(ts: TimeSeries) -> TimeSeries:
    """Per-channel cumulative sum of the values; times unchanged."""
    return TimeSeries(ts.times.copy(), np.cumsum(ts.values, axis=0))


def range_normalize(ts: TimeSeries, value_range: np.ndarray) -> TimeSeries:
    """Divide values channel-wise by a vector of positive ranges; times unchanged."""
    r = np.asarray(value_range, dtype=float)
    if r.ndim == 0:
        r = r[None]
    if r.shape != (ts.d,):
        raise StreamValidationError(
            f"range vector has shape {r.shape}, expected ({ts.d},)"
        )
    if not np.all(r > 0):
        raise StreamValidationError("range components must be positive")
    return TimeSeries(ts.times.copy(), ts.values / r)


def time_normalize(ts: TimeSeries) -> TimeSeries:
    """Affinely rescale times onto [0, 1] (identity span for single samples).

    Keeps the time channel added by :func:`time_augment` on the same scale
    as range-normalised values, which the PDE kernel solver needs to stay
    well conditioned.
    """
    if ts.n == 1:
        return TimeSeries(np.zeros(1), ts.values.copy())
    span = ts.times[-1] - ts.times[0]
    return TimeSeries((ts.times - ts.times[0]) / span, ts.values.copy())


def median_pairwise_distance(ts: TimeSeries) -> float:
    """Median Euclidean distance over all pairs of value rows.

    Even pair counts average the two central order statistics. Used as the
    bandwidth heuristic for RBF static kernels.
    """
    if ts.n < 2:
        raise StreamValidationError("median_pairwise_distance requires n >= 2")
    return float(np.median(pdist(ts.values)))


_TRANSFORMS = {
    "cumsum": cumulative_sum,
    "leadlag": lead_lag,
    "time_normalize": time_normalize,
    "time_augment": time_augment,
    "basepoint": basepoint_augment,
}


@dataclass
class TransformPipeline:
    """Ordered, deterministic sequence of path transforms.

    Steps are tags from ``cumsum | leadlag | range_normalize |
    time_normalize | time_augment | basepoint``; ``range_normalize``
    requires the ``value_range`` vector to divide by (resolved at pipeline
    construction time, e.g. from pilot runs or a training set). Application
    order is the list order.
    """

    steps: list = field(default_factory=list)
    value_range: np.ndarray | None = None

    def __post_init__(self):
        for s in self.steps:
            if s not in _TRANSFORMS and s != "range_normalize":
                raise StreamValidationError(f"unknown transform tag {s!r}")
        if "range_normalize" in self.steps and self.value_range is None:
            raise StreamValidationError("range_normalize step needs value_range")

    def apply(self, ts: TimeSeries) -> TimeSeries:
        for s in self.steps:
            if s == "range_normalize":
                ts = range_normalize(ts, self.value_range)
            else:
                ts = _TRANSFORMS[s](ts)
        return ts

    def __call__(self, ts: TimeSeries) -> TimeSeries:
        return self.apply(ts)
