"""Gaussian-weighted expectations E[s(x)] for x ~ N(mean, cov).

The integral is pulled back to standard-normal coordinates through the
affine transform x = mean + L c with L a square root of cov, evaluated on a
rule draw from :mod:`srcf.rules`, and averaged over the scheme's repetition
count.  Batched evaluation (`expect_batch`) reuses the same draws for every
function, which keeps derived covariances internally consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import spd_sqrt, symmetrize
from .rng import RngStream
from .rules import IntegrationScheme, draw_rule_batch

__all__ = ["GaussianBelief", "VectorFunction", "IntegrandError", "expect", "expect_batch"]


class IntegrandError(ValueError):
    """An integrand returned NaN/Inf; carries the offending evaluation point."""

    def __init__(self, message: str, point: np.ndarray | None = None, index: int | None = None):
        super().__init__(message)
        self.point = point
        self.index = index


@dataclass
class GaussianBelief:
    """A Gaussian state density N(mean, cov).

    The covariance is symmetrized on construction; it may be indefinite by a
    numerical margin (conditioning happens when a square root is taken).
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        cov = np.asarray(self.cov, dtype=np.float64)
        if cov.ndim == 0:
            cov = cov.reshape(1, 1)
        if self.mean.ndim != 1:
            raise ValueError(f"mean must be a vector, got shape {self.mean.shape}")
        n = self.mean.shape[0]
        if cov.shape != (n, n):
            raise ValueError(f"cov must have shape ({n}, {n}), got {cov.shape}")
        if not np.all(np.isfinite(self.mean)) or not np.all(np.isfinite(cov)):
            raise ValueError("belief contains NaN or Inf entries")
        asym = np.abs(cov - cov.T).max()
        if asym > 1e-8 * max(1.0, np.abs(cov).max()):
            raise ValueError(f"cov is not symmetric (max asymmetry {asym:.3e})")
        self.cov = symmetrize(cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class VectorFunction:
    """A function of the state with constant output shape.

    ``fn`` maps one (n,) vector to a scalar, vector, or matrix.  With
    ``vectorized=True`` it must instead accept a (P, n) stack of points and
    return the (P, ...) stack of outputs; this is the fast path.
    """

    fn: Callable
    vectorized: bool = False


def _as_vector_function(f) -> VectorFunction:
    return f if isinstance(f, VectorFunction) else VectorFunction(f)


def _evaluate(f: VectorFunction, x: np.ndarray) -> np.ndarray:
    """Evaluate f on a (P, n) point stack, returning (P, ...) float output."""
    if f.vectorized:
        vals = np.asarray(f.fn(x), dtype=np.float64)
        if vals.shape[:1] != x.shape[:1]:
            raise ValueError(
                f"vectorized integrand returned leading shape {vals.shape}, "
                f"expected first axis {x.shape[0]}"
            )
    else:
        vals = np.stack([np.asarray(f.fn(p), dtype=np.float64) for p in x])
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = int(np.argwhere(bad.reshape(vals.shape[0], -1).any(axis=1))[0, 0])
        raise IntegrandError(
            f"integrand returned non-finite output at point index {idx}, x={x[idx]}",
            point=x[idx],
            index=idx,
        )
    return vals


def expect_batch(
    fns,
    belief: GaussianBelief,
    scheme: IntegrationScheme,
    rng: RngStream,
) -> list[np.ndarray]:
    """Estimate E[f(x)] for several functions on shared rule draws.

    All functions see the same sigma points (same radii and rotation per
    repetition), so moment combinations such as E[f f^T] - E[f] E[f]^T stay
    consistent.  Repetition results are averaged in index order.

    Returns
    -------
    list of arrays, one per function, each with the function's output shape.
    """
    fns = [_as_vector_function(f) for f in fns]
    n = belief.dim
    scheme.validate_dim(n)
    root = spd_sqrt(belief.cov)  # computed once per call
    points, weights = draw_rule_batch(scheme, n, scheme.n_m, rng)
    n_m, n_pts, _ = points.shape
    x = belief.mean + points.reshape(-1, n) @ root.T
    out = []
    for f in fns:
        vals = _evaluate(f, x)
        vals = vals.reshape(n_m, n_pts, *vals.shape[1:])
        per_rep = np.einsum("lp,lp...->l...", weights, vals)
        out.append(per_rep.mean(axis=0))
    return out


def expect(
    s,
    belief: GaussianBelief,
    scheme: IntegrationScheme,
    rng: RngStream,
) -> np.ndarray:
    """Estimate E[s(x)] under the belief with one scheme evaluation."""
    return expect_batch([s], belief, scheme, rng)[0]
