"""Weighted sigma-point sets for Gaussian-weighted integration.

All rules live in standard-normal coordinates c ~ N(0, I) and factor into a
radial part (radii with Lagrange-interpolation weights) and a spherical part
(a degree-5 simplex surface rule, optionally under a random rotation).  Every
point set stores probability-normalized weights: they sum to one, so constants
are integrated exactly and no Gamma-function normalizers ever appear.

Available schemes
-----------------
CKF3    deterministic third-degree rule, 2n axis points.
CKF5    deterministic fifth-degree rule: simplex surface rule with a
        two-node radial rule pinned at zero (radius sqrt(n+2)).
SIF3    stochastic third degree: chi-distributed radius, Haar-random axes.
SIF5    stochastic fifth degree: random radius pair + Haar-random rotation
        of the simplex rule; every draw is degree-5 exact and unbiased.
QSIF5   quasi-stochastic fifth degree: CKF5 radii with a Haar-random
        rotation per repetition.
MC      plain Monte-Carlo: i.i.d. standard-normal points, equal weights.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .linalg import haar_orthogonal_batch
from .rng import RngStream
from .samplers import RadialNodes, _radial_pair_batch, sample_chi

__all__ = [
    "SchemeKind",
    "IntegrationScheme",
    "SimplexBasis",
    "SigmaPointSet",
    "radial_weights_deg5",
    "radial_weights_deg3",
    "simplex_vertices",
    "simplex_midpoints",
    "simplex_basis",
    "spherical_weights_deg5",
    "build_rule",
    "draw_rule_batch",
    "reported_eval_count",
    "gaussian_monomial_moment",
]


class SchemeKind(Enum):
    """Tag for the supported integration rule families."""

    CKF3 = "ckf3"
    CKF5 = "ckf5"
    SIF3 = "sif3"
    SIF5 = "sif5"
    QSIF5 = "qsif5"
    MC = "mc"

    @property
    def deterministic(self) -> bool:
        return self in (SchemeKind.CKF3, SchemeKind.CKF5)

    @property
    def degree(self) -> int | None:
        """Polynomial exactness degree per draw (None for Monte-Carlo)."""
        if self is SchemeKind.MC:
            return None
        return 3 if self in (SchemeKind.CKF3, SchemeKind.SIF3) else 5

    @property
    def min_dim(self) -> int:
        # The simplex midpoint projection divides by n - 1.
        return 2 if self in (SchemeKind.CKF5, SchemeKind.SIF5, SchemeKind.QSIF5) else 1


@dataclass(frozen=True)
class IntegrationScheme:
    """An integration rule selector plus its repetition count.

    Parameters
    ----------
    kind : SchemeKind
    n_m : int
        Number of independent rule draws averaged per integral evaluation.
        Forced to 1 (with a warning) for deterministic kinds, where
        repetitions would be identical.
    mc_samples : int, optional
        Sample count per draw; required for and exclusive to MC.
    """

    kind: SchemeKind
    n_m: int = 1
    mc_samples: int | None = None

    def __post_init__(self):
        if self.n_m < 1:
            raise ValueError("n_m must be >= 1")
        if self.kind is SchemeKind.MC:
            if self.mc_samples is None or self.mc_samples < 1:
                raise ValueError("MC scheme requires mc_samples >= 1")
        elif self.mc_samples is not None:
            raise ValueError(f"mc_samples is only valid for MC, not {self.kind.value}")
        if self.kind.deterministic and self.n_m != 1:
            warnings.warn(
                f"{self.kind.value} is deterministic; forcing n_m from {self.n_m} to 1",
                UserWarning,
                stacklevel=2,
            )
            object.__setattr__(self, "n_m", 1)

    @property
    def label(self) -> str:
        return self.kind.value

    @classmethod
    def from_label(cls, label: str, n_m: int = 1, mc_samples: int | None = None) -> "IntegrationScheme":
        try:
            kind = SchemeKind(label.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in SchemeKind)
            raise ValueError(f"unknown scheme {label!r}; expected one of: {valid}") from None
        if kind is SchemeKind.MC and mc_samples is None:
            mc_samples = 600
        return cls(kind, n_m=n_m, mc_samples=mc_samples)

    def validate_dim(self, n: int) -> None:
        if n < self.kind.min_dim:
            raise ValueError(
                f"{self.kind.value} requires dimension >= {self.kind.min_dim}, got n={n}"
            )


@dataclass(frozen=True)
class SimplexBasis:
    """Unit vertices of a regular n-simplex and their projected midpoints."""

    vertices: np.ndarray  # (n+1, n), unit rows with pairwise dot -1/n
    midpoints: np.ndarray  # (n(n+1)/2, n), unit rows


@dataclass(frozen=True)
class SigmaPointSet:
    """One realized rule draw: points in standard-normal coordinates.

    ``points[i]`` carries probability weight ``weights[i]``; the weights sum
    to one.  ``eval_count`` is the draw's operating point count as reported
    by the benchmarks, which for the symmetrized fifth-degree stochastic rule
    counts each +-pair once (see :func:`reported_eval_count`).
    """

    points: np.ndarray  # (P, n)
    weights: np.ndarray  # (P,)
    eval_count: int

    def __post_init__(self):
        if self.points.ndim != 2 or self.weights.ndim != 1:
            raise ValueError("points must be (P, n) and weights (P,)")
        if self.points.shape[0] != self.weights.shape[0]:
            raise ValueError("points and weights length mismatch")

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def radial_weights_deg5(n: int, nodes: RadialNodes) -> tuple[float, float, float]:
    """Normalized weights of the three-node fifth-degree radial rule.

    Lagrange interpolation in u = r^2 on the nodes {0, rho1^2, rho2^2}
    against the radial part of the standard Gaussian (moments E[u] = n,
    E[u^2] = n(n+2)) gives

        w0 = 1 - n (rho1^2 + rho2^2 - (n+2)) / (rho1^2 rho2^2)
        w1 = n (n + 2 - rho2^2) / (rho1^2 (rho1^2 - rho2^2))
        w2 = n (n + 2 - rho1^2) / (rho2^2 (rho2^2 - rho1^2))

    which sum to one for any node pair; w1, w2 may be negative.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if not nodes.is_pair:
        raise ValueError("fifth-degree radial weights need a node pair")
    r1sq = nodes.rho1 * nodes.rho1
    r2sq = nodes.rho2 * nodes.rho2
    if r1sq == 0.0 or r2sq == 0.0 or r1sq == r2sq:
        raise ValueError("radial nodes must be distinct and nonzero")
    w0 = 1.0 - n * (r1sq + r2sq - (n + 2.0)) / (r1sq * r2sq)
    w1 = n * (n + 2.0 - r2sq) / (r1sq * (r1sq - r2sq))
    w2 = n * (n + 2.0 - r1sq) / (r2sq * (r2sq - r1sq))
    return w0, w1, w2


def radial_weights_deg3(n: int, rho: float) -> tuple[float, float]:
    """Normalized weights of the two-node third-degree radial rule.

    Matching the Gaussian second radial moment E[r^2] = n gives
    w1 = n / rho^2 with the remainder on the center node.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if not (rho > 0.0):
        raise ValueError("radius must be positive")
    w1 = n / (rho * rho)
    return 1.0 - w1, w1


def simplex_vertices(n: int) -> np.ndarray:
    """Unit vertices a_1..a_{n+1} of a regular n-simplex, as rows.

    Built column-by-column:

        a[j, k] = -sqrt((n+1) / (n (n-k+2)(n-k+1)))        for k < j
        a[j, j] = +sqrt((n+1)(n-j+1) / (n (n-j+2)))
        a[j, k] = 0                                        for k > j

    (1-based indices).  Rows have unit norm and pairwise dot product -1/n.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    a = np.zeros((n + 1, n))
    for j in range(1, n + 2):
        for k in range(1, n + 1):
            if k < j:
                a[j - 1, k - 1] = -np.sqrt((n + 1.0) / (n * (n - k + 2.0) * (n - k + 1.0)))
            elif k == j:
                a[j - 1, k - 1] = np.sqrt((n + 1.0) * (n - j + 1.0) / (n * (n - j + 2.0)))
    return a


def simplex_midpoints(n: int, vertices: np.ndarray) -> np.ndarray:
    """Pairwise vertex midpoints projected back onto the unit sphere.

    b_{(k,l)} = sqrt(n / (2(n-1))) * (a_k + a_l) for k < l, enumerated in
    lexicographic (k, l) order.  Empty for n = 1, where no distinct pairs
    with a finite projection factor exist.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if n == 1:
        return np.zeros((0, 1))
    scale = np.sqrt(n / (2.0 * (n - 1.0)))
    pairs = [
        vertices[k] + vertices[l]
        for k in range(n + 1)
        for l in range(k + 1, n + 1)
    ]
    return scale * np.asarray(pairs)


@lru_cache(maxsize=None)
def _simplex_basis_cached(n: int) -> SimplexBasis:
    vertices = simplex_vertices(n)
    midpoints = simplex_midpoints(n, vertices)
    vertices.setflags(write=False)
    midpoints.setflags(write=False)
    return SimplexBasis(vertices=vertices, midpoints=midpoints)


def simplex_basis(n: int) -> SimplexBasis:
    """The cached simplex surface basis for dimension n."""
    return _simplex_basis_cached(n)


def spherical_weights_deg5(n: int) -> tuple[float, float]:
    """Per-point weights (wa, wb) of the degree-5 simplex surface rule.

    wa belongs to each of the 2(n+1) +-vertex points and wb to each of the
    n(n+1) +-midpoint points, normalized against the uniform measure on the
    sphere:

        2(n+1) wa + n(n+1) wb = 1.

    wa turns negative for n > 7; the rule stays degree-5 regardless.
    """
    if n < 2:
        raise ValueError("the degree-5 surface rule requires dimension >= 2")
    wa = n * (7.0 - n) / (2.0 * (n + 1.0) ** 2 * (n + 2.0))
    wb = 2.0 * (n - 1.0) ** 2 / (n * (n + 1.0) ** 2 * (n + 2.0))
    return wa, wb


def _assemble(blocks, wcols, b):
    points = np.concatenate(blocks, axis=1)
    weights = np.concatenate([np.broadcast_to(w, (b, size)) for w, size in wcols], axis=1)
    return points, np.ascontiguousarray(weights)


def draw_rule_batch(
    scheme: IntegrationScheme, n: int, size: int, rng: RngStream
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``size`` independent realizations of a scheme's point set.

    Returns
    -------
    points : (size, P, n) array
    weights : (size, P) array
        Each row sums to one.

    Notes
    -----
    Sampling order per draw is fixed (radii before rotation) so results are
    reproducible from the stream state.  Deterministic schemes tile a single
    construction.
    """
    scheme.validate_dim(n)
    if size < 1:
        raise ValueError("size must be >= 1")
    kind = scheme.kind

    if kind is SchemeKind.CKF3:
        eye = np.eye(n)
        pts = np.sqrt(n) * np.concatenate([eye, -eye], axis=0)
        w = np.full(2 * n, 1.0 / (2 * n))
        return (
            np.broadcast_to(pts, (size, 2 * n, n)).copy(),
            np.broadcast_to(w, (size, 2 * n)).copy(),
        )

    if kind is SchemeKind.MC:
        m = scheme.mc_samples
        pts = rng.generator.standard_normal((size, m, n))
        w = np.full((size, m), 1.0 / m)
        return pts, w

    if kind is SchemeKind.SIF3:
        rho = sample_chi(n + 2, rng, size=size)
        q = haar_orthogonal_batch(n, size, rng)
        w1 = n / (rho * rho)
        w0 = 1.0 - w1
        axes = np.swapaxes(q, 1, 2)  # rows are the columns Q e_i
        r = rho.reshape(size, 1, 1)
        blocks = [np.zeros((size, 1, n)), r * axes, -r * axes]
        wcols = [
            (w0.reshape(size, 1), 1),
            (w1.reshape(size, 1) / (2 * n), n),
            (w1.reshape(size, 1) / (2 * n), n),
        ]
        return _assemble(blocks, wcols, size)

    # Fifth-degree family: simplex surface rule composed with a radial rule.
    basis = simplex_basis(n)
    wa, wb = spherical_weights_deg5(n)
    n_vert = basis.vertices.shape[0]
    n_mid = basis.midpoints.shape[0]

    if kind in (SchemeKind.CKF5, SchemeKind.QSIF5):
        # Two-node radial rule with one node pinned at zero: matching the
        # radial moments (1, n, n(n+2)) forces rho^2 = n + 2.
        rho = np.full(size, np.sqrt(n + 2.0))
        w1 = np.full(size, n / (n + 2.0))
        w0 = 1.0 - w1
        if kind is SchemeKind.CKF5:
            q = np.broadcast_to(np.eye(n), (size, n, n))
        else:
            q = haar_orthogonal_batch(n, size, rng)
        va = np.einsum("lij,vj->lvi", q, basis.vertices)
        vb = np.einsum("lij,mj->lmi", q, basis.midpoints)
        r = rho.reshape(size, 1, 1)
        blocks = [np.zeros((size, 1, n)), r * va, -r * va, r * vb, -r * vb]
        w1c = w1.reshape(size, 1)
        wcols = [
            (w0.reshape(size, 1), 1),
            (wa * w1c, n_vert),
            (wa * w1c, n_vert),
            (wb * w1c, n_mid),
            (wb * w1c, n_mid),
        ]
        return _assemble(blocks, wcols, size)

    if kind is SchemeKind.SIF5:
        rho1, rho2 = _radial_pair_batch(n, size, rng)
        q = haar_orthogonal_batch(n, size, rng)
        r1sq, r2sq = rho1 * rho1, rho2 * rho2
        w0 = 1.0 - n * (r1sq + r2sq - (n + 2.0)) / (r1sq * r2sq)
        w1 = n * (n + 2.0 - r2sq) / (r1sq * (r1sq - r2sq))
        w2 = n * (n + 2.0 - r1sq) / (r2sq * (r2sq - r1sq))
        va = np.einsum("lij,vj->lvi", q, basis.vertices)
        vb = np.einsum("lij,mj->lmi", q, basis.midpoints)
        r1 = rho1.reshape(size, 1, 1)
        r2 = rho2.reshape(size, 1, 1)
        blocks = [
            np.zeros((size, 1, n)),
            r1 * va, -r1 * va, r2 * va, -r2 * va,
            r1 * vb, -r1 * vb, r2 * vb, -r2 * vb,
        ]
        w1c, w2c = w1.reshape(size, 1), w2.reshape(size, 1)
        wcols = [
            (w0.reshape(size, 1), 1),
            (wa * w1c, n_vert), (wa * w1c, n_vert),
            (wa * w2c, n_vert), (wa * w2c, n_vert),
            (wb * w1c, n_mid), (wb * w1c, n_mid),
            (wb * w2c, n_mid), (wb * w2c, n_mid),
        ]
        return _assemble(blocks, wcols, size)

    raise ValueError(f"unsupported scheme kind {kind!r}")


def build_rule(scheme: IntegrationScheme, n: int, rng: RngStream) -> SigmaPointSet:
    """Construct one draw of the scheme's weighted point set in dimension n.

    Repetition averaging (n_m) is the integrator's job; this returns a single
    realization.
    """
    points, weights = draw_rule_batch(scheme, n, 1, rng)
    return SigmaPointSet(
        points=points[0],
        weights=weights[0],
        eval_count=_per_draw_eval_count(scheme, n),
    )


def _per_draw_eval_count(scheme: IntegrationScheme, n: int) -> int:
    kind = scheme.kind
    if kind is SchemeKind.CKF3:
        return 2 * n
    if kind is SchemeKind.MC:
        return scheme.mc_samples
    if kind is SchemeKind.SIF3:
        return 2 * n + 1
    return n * n + 3 * n + 3


def reported_eval_count(scheme: IntegrationScheme, n: int) -> int:
    """Function-evaluation budget of one integral under the usual accounting.

    Conventions differ by rule family, mirroring how these budgets are
    normally quoted:

    * CKF3: 2n; CKF5: n^2 + 3n + 3; MC: mc_samples * n_m.
    * SIF5: n_m * (n^2 + 3n + 3) -- the symmetrized rule's operating points
      (each +-pair counted once, the center counted every repetition).
    * QSIF5: n_m * (n^2 + 3n + 2) + 1 -- its center point is deterministic
      and shared across repetitions.
    * SIF3: n_m * 2n + 1 -- all 2n axis points per draw plus the shared,
      location-fixed center.
    """
    kind = scheme.kind
    if kind is SchemeKind.CKF3:
        return 2 * n
    if kind is SchemeKind.CKF5:
        return n * n + 3 * n + 3
    if kind is SchemeKind.MC:
        return scheme.mc_samples * scheme.n_m
    if kind is SchemeKind.SIF3:
        return scheme.n_m * 2 * n + 1
    if kind is SchemeKind.SIF5:
        return scheme.n_m * (n * n + 3 * n + 3)
    if kind is SchemeKind.QSIF5:
        return scheme.n_m * (n * n + 3 * n + 2) + 1
    raise ValueError(f"unsupported scheme kind {kind!r}")


def gaussian_monomial_moment(alpha) -> float:
    """E[prod_i c_i^alpha_i] for c ~ N(0, I): product of double factorials.

    Zero when any exponent is odd; otherwise prod_i (alpha_i - 1)!!.
    """
    moment = 1.0
    for a in alpha:
        a = int(a)
        if a < 0:
            raise ValueError("exponents must be non-negative")
        if a % 2 == 1:
            return 0.0
        for k in range(a - 1, 1, -2):
            moment *= k
    return moment
