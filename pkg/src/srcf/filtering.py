"""Gaussian-assumed Bayesian filtering driven by an integration scheme.

One recursion covers every filter variant: the prediction and observation
moments are Gaussian expectations evaluated by the selected rule (CKF3/CKF5/
SIF3/SIF5/QSIF5/MC), and the correction step is the standard linear update.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .integrate import (
    GaussianBelief,
    IntegrandError,
    VectorFunction,
    _as_vector_function,
    _evaluate,
    expect_batch,
)
from .linalg import symmetrize
from .rng import RngStream
from .rules import IntegrationScheme

__all__ = [
    "StateSpaceModel",
    "PredictedObservation",
    "DivergenceError",
    "predict_state",
    "predict_observation",
    "correct",
    "run_filter",
]


class DivergenceError(RuntimeError):
    """The filter lost a usable Gaussian belief (singular/non-finite moments)."""

    def __init__(self, message: str, step: int | None = None):
        if step is not None:
            message = f"filter diverged at step {step}: {message}"
        super().__init__(message)
        self.step = step


@dataclass
class StateSpaceModel:
    """Discrete-time model x_k = f(x_{k-1}) + w_k, y_k = h(x_k) + v_k.

    ``f`` and ``h`` may be plain callables of one state vector or
    :class:`VectorFunction` instances (use ``vectorized=True`` for functions
    that accept (P, n) stacks; that is the fast path).  ``w ~ N(0, q)`` and
    ``v ~ N(0, r)``.
    """

    f: Callable | VectorFunction
    h: Callable | VectorFunction
    q: np.ndarray
    r: np.ndarray
    n: int
    m: int

    def __post_init__(self):
        self.f = _as_vector_function(self.f)
        self.h = _as_vector_function(self.h)
        self.q = np.asarray(self.q, dtype=np.float64).reshape(self.n, self.n)
        self.r = np.asarray(self.r, dtype=np.float64).reshape(self.m, self.m)
        for name, mat in (("q", self.q), ("r", self.r)):
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"{name} contains NaN or Inf entries")
            if np.abs(mat - mat.T).max() > 1e-8 * max(1.0, np.abs(mat).max()):
                raise ValueError(f"{name} must be symmetric")


@dataclass
class PredictedObservation:
    """Predicted observation moments: mean, state cross-covariance, innovation covariance."""

    y_hat: np.ndarray  # (m,)
    pxy: np.ndarray  # (n, m)
    pyy: np.ndarray  # (m, m), symmetric; dominates the noise floor r up to slack

    def __post_init__(self):
        self.y_hat = np.atleast_1d(np.asarray(self.y_hat, dtype=np.float64))
        self.pxy = np.asarray(self.pxy, dtype=np.float64)
        self.pyy = symmetrize(np.asarray(self.pyy, dtype=np.float64).reshape(
            self.y_hat.shape[0], self.y_hat.shape[0]
        ))
        if self.pxy.ndim == 1:
            self.pxy = self.pxy[:, None]


class _StackedEval:
    """Evaluate a model function once per sigma-point stack, normalized to 2-D.

    The same stack feeds several moment integrands within one prediction
    step; caching on the stack's identity avoids re-evaluating the model.
    """

    def __init__(self, fn: VectorFunction, out_dim: int, name: str):
        self.fn = fn
        self.out_dim = out_dim
        self.name = name
        self._last: tuple | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self._last is not None and self._last[0] is x:
            return self._last[1]
        vals = _evaluate(self.fn, x)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[1] != self.out_dim:
            raise ValueError(
                f"{self.name} must map to {self.out_dim} components, "
                f"got output shape {vals.shape[1:]}"
            )
        self._last = (x, vals)
        return vals


def _require_finite(step_name: str, **arrays) -> None:
    for name, arr in arrays.items():
        if not np.all(np.isfinite(arr)):
            raise DivergenceError(f"{step_name} produced non-finite {name}")


def _observation_estimate_usable(sxx, pxy, pyy_raw) -> bool:
    """Decide whether the joint (state, observation) moment estimate is real.

    All three blocks come from the same rule draws, so the joint second
    central moment [[Sxx, Pxy], [Pxy^T, Pyy - R]] is a weighted Gram matrix:
    PSD by construction whenever the weights are non-negative (the bound
    that keeps the Kalman gain contractive).  Rules with negative weights
    can break it on violently nonlinear observations -- e.g. a cross
    covariance orders of magnitude beyond what the observation variance
    supports -- and applying the usual gain to such an estimate throws the
    state far from any plausible value.  A meaningfully indefinite joint
    therefore marks the whole observation estimate as integration noise.
    The check runs in a diagonally balanced scale because Pyy can dwarf Sxx
    by tens of orders of magnitude.
    """
    joint = symmetrize(np.block([[sxx, pxy], [pxy.T, pyy_raw]]))
    d = np.sqrt(np.maximum(np.abs(np.diag(joint)), np.finfo(np.float64).tiny))
    w = np.linalg.eigvalsh(joint / np.outer(d, d))
    return w.min() >= -1e-8 * max(w.max(), 1.0)


def _psd_magnitude(mat: np.ndarray) -> np.ndarray:
    """PSD surrogate with the same scale: eigenvalues replaced by |values|."""
    w, v = np.linalg.eigh(symmetrize(mat))
    return (v * np.abs(w)) @ v.T


def predict_state(
    prior: GaussianBelief,
    model: StateSpaceModel,
    scheme: IntegrationScheme,
    rng: RngStream,
) -> GaussianBelief:
    """Time update: propagate the belief through the transition function.

    mean = E[f(x)], cov = E[f(x) f(x)^T] + Q - mean mean^T, with both
    expectations taken on shared rule draws so the implied covariance stays
    consistent.
    """
    if prior.dim != model.n:
        raise ValueError(f"prior dimension {prior.dim} != model state dimension {model.n}")
    fe = _StackedEval(model.f, model.n, "transition function")
    f1 = VectorFunction(fe, vectorized=True)
    f2 = VectorFunction(lambda x: np.einsum("pi,pj->pij", fe(x), fe(x)), vectorized=True)
    mean, second = expect_batch([f1, f2], prior, scheme, rng)
    cov = symmetrize(second + model.q - np.outer(mean, mean))
    _require_finite("state prediction", mean=mean, cov=cov)
    return GaussianBelief(mean=mean, cov=cov)


def predict_observation(
    pred: GaussianBelief,
    model: StateSpaceModel,
    scheme: IntegrationScheme,
    rng: RngStream,
) -> PredictedObservation:
    """Observation update moments on a fresh set of rule draws.

    y_hat = E[h], Pxy = E[x h^T] - mean y_hat^T, Pyy = E[h h^T] - y_hat y_hat^T + R.

    When the joint (state, observation) moment estimate is meaningfully
    indefinite -- impossible for a true covariance, so a sign the rule's
    integration noise has swamped the observation moments -- the
    observation is marked uninformative: Pxy is zeroed (the correction then
    has zero gain) and Pyy keeps its magnitude but is forced PSD.  Valid
    estimates pass through bitwise untouched.
    """
    if pred.dim != model.n:
        raise ValueError(f"belief dimension {pred.dim} != model state dimension {model.n}")
    he = _StackedEval(model.h, model.m, "observation function")
    h1 = VectorFunction(he, vectorized=True)
    h2 = VectorFunction(lambda x: np.einsum("pi,pj->pij", x, he(x)), vectorized=True)
    h3 = VectorFunction(lambda x: np.einsum("pi,pj->pij", he(x), he(x)), vectorized=True)
    # identity and E[x x^T] from the same draws close the joint moment
    # matrix the usability check needs
    h4 = VectorFunction(lambda x: x, vectorized=True)
    h5 = VectorFunction(lambda x: np.einsum("pi,pj->pij", x, x), vectorized=True)
    y_hat, xh, hh, x_bar, xx = expect_batch([h1, h2, h3, h4, h5], pred, scheme, rng)
    pxy = xh - np.outer(pred.mean, y_hat)
    pyy_raw = symmetrize(hh - np.outer(y_hat, y_hat))
    _require_finite("observation prediction", y_hat=y_hat, pxy=pxy, pyy=pyy_raw)
    # the check centers every block at the drawn means (x_bar equals the
    # predicted mean for polynomial-exact rules but not for Monte-Carlo)
    if not _observation_estimate_usable(
        symmetrize(xx - np.outer(x_bar, x_bar)),
        xh - np.outer(x_bar, y_hat),
        pyy_raw,
    ):
        pxy = np.zeros_like(pxy)
        pyy_raw = _psd_magnitude(pyy_raw)
    pyy = symmetrize(pyy_raw + model.r)
    return PredictedObservation(y_hat=y_hat, pxy=pxy, pyy=pyy)


def correct(
    pred: GaussianBelief,
    obs: PredictedObservation,
    y: np.ndarray,
) -> GaussianBelief:
    """Measurement update via the innovation y - y_hat.

    The gain solves against a Cholesky factorization of Pyy (never an
    explicit inverse), with one diagonal jitter of 1e-9 * trace / m retried
    on failure.  If Pyy is indefinite even after the jitter, the estimate has
    been swamped by integration noise (possible for negative-weight rules,
    i.e. the fifth-degree family at n > 7, on violently nonlinear
    observations: a true innovation covariance always dominates the noise
    floor R).  Such an observation carries no usable information, so the
    update degrades to zero gain and the prediction is returned unchanged.
    Pure and deterministic: no randomness enters the correction step.
    """
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    m = obs.y_hat.shape[0]
    if y.shape != (m,):
        raise ValueError(f"observation must have shape ({m},), got {y.shape}")
    if not (np.all(np.isfinite(obs.pyy)) and np.all(np.isfinite(obs.pxy))):
        raise DivergenceError("observation moments are not finite")
    pyy = obs.pyy
    factor = None
    try:
        factor = cho_factor(pyy, lower=True)
    except LinAlgError:
        jitter = max(1e-9 * abs(np.trace(pyy)) / m, np.finfo(np.float64).tiny)
        try:
            factor = cho_factor(pyy + jitter * np.eye(m), lower=True)
        except LinAlgError:
            pass
    if factor is None:
        # indefinite innovation covariance: skip the measurement
        return GaussianBelief(mean=pred.mean.copy(), cov=pred.cov.copy())
    gain = cho_solve(factor, obs.pxy.T).T
    if not np.all(np.isfinite(gain)):
        raise DivergenceError("gain solve produced non-finite values")
    mean = pred.mean + gain @ (y - obs.y_hat)
    cov = symmetrize(pred.cov - gain @ obs.pxy.T)
    _require_finite("correction", mean=mean, cov=cov)
    return GaussianBelief(mean=mean, cov=cov)


def run_filter(
    model: StateSpaceModel,
    scheme: IntegrationScheme,
    observations: Sequence[np.ndarray] | np.ndarray,
    init: GaussianBelief,
    rng: RngStream,
) -> list[GaussianBelief]:
    """Run the full predict/observe/correct recursion over an observation sequence.

    Returns the posterior belief after each step.  Deterministic given
    (model, scheme, observations, stream): step k draws from substreams
    (k, 0) and (k, 1) for the two prediction phases.  A divergence aborts the
    run with the failing step index; earlier posteriors are not returned.
    """
    observations = np.asarray(observations, dtype=np.float64)
    if observations.ndim == 1:
        observations = observations[:, None]
    if observations.shape[0] == 0:
        raise ValueError("observation sequence must be nonempty")
    posteriors: list[GaussianBelief] = []
    belief = init
    for k in range(observations.shape[0]):
        try:
            pred = predict_state(belief, model, scheme, rng.substream(k, 0))
            obs = predict_observation(pred, model, scheme, rng.substream(k, 1))
            belief = correct(pred, obs, observations[k])
        except DivergenceError as err:
            if err.step is None:
                raise DivergenceError(str(err), step=k) from err
            raise
        except IntegrandError as err:
            raise DivergenceError(f"integrand failure: {err}", step=k) from err
        posteriors.append(belief)
    return posteriors
