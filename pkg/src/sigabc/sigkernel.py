"""Signature-kernel evaluation via the Goursat PDE, plus a truncated oracle.

``sig_kernel`` returns the inner product of the full (untruncated) path
signatures of two piecewise-linearly interpolated streams, lifted through a
static kernel, by solving the associated Goursat problem with a
finite-difference sweep. ``truncated_signature`` / ``truncated_sig_inner``
compute explicit iterated-integral coefficients up to a finite depth; they
exist as an independent cross-check of the PDE route and are not used by
the inference code paths.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._pde import goursat_corner
from .streams import TimeSeries

DEFAULT_MAX_DYADIC_ORDER = 6


class SigKernelError(ValueError):
    """Raised on invalid kernel configuration or a diverged PDE solve."""


@dataclass(frozen=True)
class StaticKernelSpec:
    """Point-wise kernel used to lift path values before sequentialisation.

    kind: "linear" (Euclidean inner product) or "rbf" (Gaussian,
        exp(-||a-b||^2 / (2 * bandwidth^2))).
    """

    kind: str = "rbf"
    bandwidth: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise SigKernelError(f"unknown static kernel kind {self.kind!r}")
        if self.kind == "rbf":
            if self.bandwidth is None or not self.bandwidth > 0:
                raise SigKernelError("rbf static kernel needs bandwidth > 0")


@dataclass(frozen=True)
class SigKernelConfig:
    """Static kernel choice plus dyadic refinement order for the PDE grid."""

    static: StaticKernelSpec
    dyadic_order: int = 0
    max_dyadic_order: int = DEFAULT_MAX_DYADIC_ORDER

    def __post_init__(self):
        if not 0 <= self.dyadic_order <= self.max_dyadic_order:
            raise SigKernelError(
                f"dyadic_order must be in [0, {self.max_dyadic_order}], "
                f"got {self.dyadic_order}"
            )


def static_kernel_eval(spec: StaticKernelSpec, a, b) -> float:
    """Evaluate the static kernel on a single pair of vectors."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise SigKernelError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if spec.kind == "linear":
        return float(a @ b)
    sq = float(np.sum((a - b) ** 2))
    return float(np.exp(-sq / (2.0 * spec.bandwidth**2)))


def static_gram(spec: StaticKernelSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Static-kernel Gram matrix between the rows of X (n, d) and Y (m, d)."""
    if X.shape[1] != Y.shape[1]:
        raise SigKernelError(
            f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]} channels"
        )
    if spec.kind == "linear":
        return X @ Y.T
    sq = (
        np.sum(X**2, axis=1)[:, None]
        + np.sum(Y**2, axis=1)[None, :]
        - 2.0 * (X @ Y.T)
    )
    np.clip(sq, 0.0, None, out=sq)
    return np.exp(-sq / (2.0 * spec.bandwidth**2))


def _stream_sort_key(ts: TimeSeries):
    return (ts.n, ts.d, ts.values.tobytes(), ts.times.tobytes())


def sig_kernel(x: TimeSeries, y: TimeSeries, cfg: SigKernelConfig) -> float:
    """Signature kernel k(x, y) of two streams via the Goursat solver.

    The grid cell (i, j) carries the static-kernel cross-increment
    A_ij = k(x_{i+1}, y_{j+1}) - k(x_{i+1}, y_j) - k(x_i, y_{j+1})
    + k(x_i, y_j); with dyadic order lambda each cell is subdivided
    2^lambda x 2^lambda and A_ij / 4^lambda used per sub-cell. Arguments
    are evaluated in a canonical order, which makes k(x, y) == k(y, x)
    bit-exact.
    """
    if x.d != y.d:
        raise SigKernelError(f"channel mismatch: {x.d} vs {y.d}")
    if _stream_sort_key(y) < _stream_sort_key(x):
        x, y = y, x
    if x.n < 2 or y.n < 2:
        # no increments on one side: only the level-0 term survives
        return 1.0
    gram = static_gram(cfg.static, x.values, y.values)
    inc = gram[1:, 1:] - gram[1:, :-1] - gram[:-1, 1:] + gram[:-1, :-1]
    if not np.all(np.isfinite(inc)):
        raise SigKernelError(
            "non-finite static-kernel increments; range_normalize the "
            "streams before evaluating the signature kernel"
        )
    a = inc / 4.0**cfg.dyadic_order
    c1 = 1.0 + 0.5 * a + a * a / 12.0
    c2 = 1.0 - a * a / 12.0
    val = goursat_corner(c1, c2, 2**cfg.dyadic_order)
    if not np.isfinite(val):
        raise SigKernelError(
            "signature-kernel PDE solve diverged; range_normalize the "
            "streams (values and time scale) and retry"
        )
    return float(val)


def sig_distance(x: TimeSeries, y: TimeSeries, cfg: SigKernelConfig) -> float:
    """Squared RKHS distance k(x,x) + k(y,y) - 2 k(x,y).

    Non-negative up to solver error; negatives above -1e-8 are clamped to
    zero, anything lower signals a misconfigured solve and raises.
    """
    d = sig_kernel(x, x, cfg) + sig_kernel(y, y, cfg) - 2.0 * sig_kernel(x, y, cfg)
    if d < 0.0:
        if d < -1e-8:
            raise SigKernelError(
                f"signature distance {d} is negative beyond tolerance; "
                "increase dyadic_order or normalise inputs"
            )
        return 0.0
    return float(d)


def sig_gram_matrix(
    streams_a,
    streams_b=None,
    cfg: SigKernelConfig | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Gram matrix of sig_kernel values.

    With ``streams_b=None`` computes the symmetric Gram of ``streams_a``
    (only the upper triangle is evaluated and mirrored). Entries are
    independent solves, so thread-level parallelism cannot change results.
    """
    if cfg is None:
        raise SigKernelError("cfg is required")
    a = list(streams_a)
    symmetric = streams_b is None
    b = a if symmetric else list(streams_b)
    pairs = [
        (i, j)
        for i in range(len(a))
        for j in range(len(b))
        if not symmetric or j >= i
    ]
    out = np.empty((len(a), len(b)))

    def fill(pair):
        i, j = pair
        out[i, j] = sig_kernel(a[i], b[j], cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(fill, pairs))
    else:
        for p in pairs:
            fill(p)
    if symmetric:
        iu = np.triu_indices(len(a), k=1)
        out[(iu[1], iu[0])] = out[iu]
    return out


@dataclass
class TruncatedSignature:
    """Explicit signature coefficients up to a finite depth.

    levels[m] holds the d^m iterated-integral coefficients of level m in
    lexicographic multi-index order; levels[0] is the constant 1.
    """

    depth: int
    levels: list

    def __post_init__(self):
        if len(self.levels) != self.depth + 1:
            raise SigKernelError("levels must have depth + 1 entries")
        if self.levels[0].shape != (1,) or self.levels[0][0] != 1.0:
            raise SigKernelError("level 0 must be the scalar 1")


def _segment_exponential(delta: np.ndarray, depth: int) -> list:
    # tensor exponential of one linear segment: level m = delta^(x)m / m!
    levels = [np.ones(1)]
    cur = levels[0]
    for m in range(1, depth + 1):
        cur = np.outer(cur, delta).ravel() / m
        levels.append(cur)
    return levels


def _chen_product(a: list, b: list, depth: int) -> list:
    # Chen's relation: level m of the concatenation is sum_k a_k (x) b_{m-k}
    out = [np.ones(1)]
    for m in range(1, depth + 1):
        acc = np.outer(a[0], b[m]).ravel()
        for k in range(1, m + 1):
            acc = acc + np.outer(a[k], b[m - k]).ravel()
        out.append(acc)
    return out


def truncated_signature(x: TimeSeries, depth: int) -> TruncatedSignature:
    """Signature of the piecewise-linear interpolation, truncated at ``depth``.

    Each segment contributes the tensor exponential of its increment; the
    segment signatures are combined in order with Chen's relation.
    """
    if depth < 1:
        raise SigKernelError("depth must be >= 1")
    if x.n < 2:
        raise SigKernelError("truncated_signature requires n >= 2")
    increments = np.diff(x.values, axis=0)
    sig = _segment_exponential(increments[0], depth)
    for k in range(1, increments.shape[0]):
        sig = _chen_product(sig, _segment_exponential(increments[k], depth), depth)
    return TruncatedSignature(depth, sig)


def truncated_sig_inner(x: TimeSeries, y: TimeSeries, depth: int) -> float:
    """Sum of level-wise inner products of truncated signatures (depth 0 -> 1)."""
    if x.d != y.d:
        raise SigKernelError(f"channel mismatch: {x.d} vs {y.d}")
    if depth == 0:
        return 1.0
    sx = truncated_signature(x, depth)
    sy = truncated_signature(y, depth)
    return float(sum(a @ b for a, b in zip(sx.levels, sy.levels)))
