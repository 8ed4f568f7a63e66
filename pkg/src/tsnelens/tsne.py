"""Instrumented t-SNE: exact and Barnes-Hut optimization with the per-point
internals (bandwidths, conditional probabilities, remaining cost) kept and
returned instead of discarded.

The optimisation schedule follows the classic reference implementation:
early exaggeration 12x for the first quarter of the run (capped at 250
iterations), momentum 0.5 switching to 0.8 at iteration 250, per-coordinate
adaptive gains, and N(0, 1e-4) random initialisation from the run seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform
from sklearn.base import BaseEstimator

from ._barnes_hut import bh_repulsion
from .dataset import Dataset
from .errors import ComputationError, ValidationError

EPS = 1e-12
_EXAGGERATION = 12.0
_MOMENTUM_SWITCH = 250
_MAX_BISECTIONS = 200
_PERPLEXITY_RTOL = 1e-5


@dataclass(frozen=True)
class TsneParams:
    """Hyper-parameters of one t-SNE run.

    theta = 0 selects the exact gradient; theta in (0, 1] enables the
    Barnes-Hut approximation of the repulsive forces.
    """

    perplexity: float = 30.0
    learning_rate: float = 200.0
    max_iterations: int = 1000
    theta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.perplexity) or self.perplexity <= 1:
            raise ValidationError(f"perplexity must be a finite real > 1, got {self.perplexity}")
        if not np.isfinite(self.learning_rate) or self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 50:
            raise ValidationError(f"max_iterations must be an integer >= 50, got {self.max_iterations}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValidationError(f"theta must lie in [0, 1], got {self.theta}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed}")

    def clipped(self, n: int) -> "TsneParams":
        """Clip perplexity to the usual (n - 1) / 3 validity bound."""
        cap = (n - 1) / 3.0
        if cap <= 1:
            raise ValidationError(f"dataset too small for t-SNE (n={n})")
        if self.perplexity <= cap:
            return self
        return TsneParams(perplexity=cap, learning_rate=self.learning_rate,
                          max_iterations=self.max_iterations, theta=self.theta,
                          seed=self.seed)


@dataclass(frozen=True)
class Embedding:
    """A 2-D layout of n points."""

    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValidationError("embedding coords must be an (n, 2) matrix")
        if not np.isfinite(coords).all():
            raise ValidationError("embedding coords must be finite")
        coords = coords.copy()
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class Instrumentation:
    """Per-point internals of a finished run.

    density is stored redundantly as sigma**-2 and asserted to match exactly.
    """

    sigma: np.ndarray
    density: np.ndarray
    point_cost: np.ndarray
    total_cost: float

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=np.float64)
        density = np.asarray(self.density, dtype=np.float64)
        point_cost = np.asarray(self.point_cost, dtype=np.float64)
        if not (np.isfinite(sigma).all() and (sigma > 0).all()):
            raise ValidationError("sigma must be positive and finite")
        if not np.array_equal(density, sigma ** -2.0):
            raise ValidationError("density must equal sigma**-2 exactly")
        if not (np.isfinite(point_cost).all() and (point_cost >= 0).all()):
            raise ValidationError("point costs must be non-negative and finite")
        if not np.isfinite(self.total_cost) or self.total_cost < 0:
            raise ValidationError("total cost must be non-negative and finite")
        for arr in (sigma, density, point_cost):
            arr.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "density", density)
        object.__setattr__(self, "point_cost", point_cost)
        object.__setattr__(self, "total_cost", float(self.total_cost))


def pairwise_distances(dataset: Dataset) -> np.ndarray:
    """Symmetric Euclidean distance matrix over the normalized values."""
    if dataset.n < 2:
        raise ValidationError("dataset too small")
    return squareform(pdist(dataset.norm_values))


def calibrate_bandwidths(dists: np.ndarray, perplexity: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-point Gaussian bandwidths matching the target perplexity.

    Binary search on the precision beta = 1 / (2 sigma^2) until the perplexity
    2**H of each conditional row is within a relative 1e-5 of the target.
    Returns (sigma, P_cond) with each row of P_cond summing to 1 and a zero
    diagonal.
    """
    dists = np.asarray(dists, dtype=np.float64)
    n = dists.shape[0]
    if dists.ndim != 2 or dists.shape[1] != n:
        raise ValidationError("distance matrix must be square")
    if not 1 < perplexity <= n - 1:
        raise ValidationError(f"perplexity {perplexity} out of range for n={n}")

    sigma = np.empty(n)
    p_cond = np.zeros((n, n))
    others = ~np.eye(n, dtype=bool)
    for i in range(n):
        d2 = dists[i, others[i]] ** 2
        shift = d2.min()
        d2s = d2 - shift
        beta, lo, hi = 1.0, 0.0, np.inf
        row = None
        for _ in range(_MAX_BISECTIONS):
            w = np.exp(-beta * d2s)
            sw = w.sum()
            h_nats = np.log(sw) + beta * (w @ d2s) / sw
            perp_hat = np.exp(h_nats)
            if abs(perp_hat - perplexity) <= _PERPLEXITY_RTOL * perplexity:
                row = w / sw
                break
            if perp_hat > perplexity:
                lo = beta
                beta = beta * 2.0 if np.isinf(hi) else 0.5 * (beta + hi)
            else:
                hi = beta
                beta = beta * 0.5 if lo == 0.0 else 0.5 * (beta + lo)
        if row is None:
            raise ComputationError(f"bandwidth search did not converge for row {i}")
        sigma[i] = np.sqrt(0.5 / beta)
        p_cond[i, others[i]] = row
    return sigma, p_cond


def joint_probabilities(p_cond: np.ndarray) -> np.ndarray:
    """Symmetrized joint affinities (p_cond + p_cond.T) / (2n)."""
    n = p_cond.shape[0]
    return (p_cond + p_cond.T) / (2.0 * n)


def _student_weights(coords: np.ndarray) -> np.ndarray:
    sq = np.sum(coords ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * coords @ coords.T
    np.maximum(d2, 0.0, out=d2)
    w = 1.0 / (1.0 + d2)
    np.fill_diagonal(w, 0.0)
    return w


def kl_cost(p_joint: np.ndarray, coords: np.ndarray) -> float:
    """Symmetric KL divergence sum_ij p_ij log(p_ij / q_ij)."""
    w = _student_weights(coords)
    q = w / w.sum()
    mask = p_joint > 0
    p = p_joint[mask]
    return float(np.sum(p * (np.log(np.maximum(p, EPS)) - np.log(np.maximum(q[mask], EPS)))))


def kl_gradient(p_joint: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Analytic gradient of the symmetric KL objective wrt the coordinates."""
    w = _student_weights(coords)
    q = w / w.sum()
    m = (p_joint - q) * w
    return 4.0 * (m.sum(axis=1)[:, None] * coords - m @ coords)


def _bh_gradient(p_joint: np.ndarray, coords: np.ndarray, theta: float) -> np.ndarray:
    w = _student_weights(coords)
    m = p_joint * w
    attr = m.sum(axis=1)[:, None] * coords - m @ coords
    rep_num, zsum = bh_repulsion(coords, theta)
    if zsum <= 0:
        raise ComputationError("degenerate embedding: zero Student-t weight sum")
    return 4.0 * (attr - rep_num / zsum)


def point_costs(p_cond: np.ndarray, embedding: Embedding | np.ndarray) -> np.ndarray:
    """Remaining cost per point: KL of its conditional row against the
    row-normalized Student-t affinities of the embedding."""
    coords = embedding.coords if isinstance(embedding, Embedding) else np.asarray(embedding)
    p_cond = np.asarray(p_cond, dtype=np.float64)
    w = _student_weights(coords)
    rowsum = w.sum(axis=1)
    if np.any(rowsum <= 0):
        raise ComputationError("degenerate embedding: isolated row in Student-t affinities")
    q_cond = w / rowsum[:, None]
    terms = np.where(
        p_cond > 0,
        p_cond * (np.log(np.maximum(p_cond, EPS)) - np.log(np.maximum(q_cond, EPS))),
        0.0,
    )
    costs = terms.sum(axis=1)
    if costs.min() < -1e-9:
        raise ComputationError(f"negative per-point cost {costs.min()}")
    return np.maximum(costs, 0.0)


def _optimize(p_joint: np.ndarray, params: TsneParams) -> np.ndarray:
    n = p_joint.shape[0]
    rng = np.random.default_rng(params.seed)
    coords = rng.standard_normal((n, 2)) * 1e-2
    vel = np.zeros_like(coords)
    gains = np.ones_like(coords)
    exag_until = min(_MOMENTUM_SWITCH, params.max_iterations // 4)
    p_exag = p_joint * _EXAGGERATION
    with np.errstate(all="ignore"):  # divergence is caught by the finite check
        for it in range(params.max_iterations):
            p_eff = p_exag if it < exag_until else p_joint
            if params.theta == 0.0:
                grad = kl_gradient(p_eff, coords)
            else:
                grad = _bh_gradient(p_eff, coords, params.theta)
            momentum = 0.5 if it < _MOMENTUM_SWITCH else 0.8
            flip = (grad > 0) != (vel > 0)
            gains = np.where(flip, gains + 0.2, gains * 0.8)
            np.maximum(gains, 0.01, out=gains)
            vel = momentum * vel - params.learning_rate * gains * grad
            coords = coords + vel
            coords = coords - coords.mean(axis=0)
            if not np.isfinite(coords).all():
                raise ComputationError(
                    f"optimization diverged (non-finite coordinates) at iteration {it}")
    return coords


def run_tsne(dataset: Dataset, params: TsneParams) -> tuple[Embedding, Instrumentation]:
    """Run one fully-instrumented t-SNE projection of the dataset."""
    params = params.clipped(dataset.n)
    dists = pairwise_distances(dataset)
    sigma, p_cond = calibrate_bandwidths(dists, params.perplexity)
    return run_calibrated(params, sigma, p_cond)


def run_calibrated(params: TsneParams, sigma: np.ndarray,
                   p_cond: np.ndarray) -> tuple[Embedding, Instrumentation]:
    """Optimize and instrument a run whose bandwidth calibration is already
    done (shared across a grid search)."""
    p_joint = joint_probabilities(p_cond)
    coords = _optimize(p_joint, params)
    embedding = Embedding(coords)
    instr = Instrumentation(
        sigma=sigma,
        density=sigma ** -2.0,
        point_cost=point_costs(p_cond, coords),
        total_cost=kl_cost(p_joint, coords),
    )
    return embedding, instr


class InstrumentedTSNE(BaseEstimator):
    """Scikit-learn style wrapper around :func:`run_tsne`.

    fit(X) min-max normalizes X per dimension, embeds it in 2-D, and exposes
    the hidden internals as fitted attributes: ``embedding_``, ``sigma_``,
    ``density_``, ``point_cost_`` and ``total_cost_``.
    """

    def __init__(self, perplexity=30.0, learning_rate=200.0, max_iterations=1000,
                 theta=0.0, seed=0):
        self.perplexity = perplexity
        self.learning_rate = learning_rate
        self.max_iterations = max_iterations
        self.theta = theta
        self.seed = seed

    def _params(self) -> TsneParams:
        return TsneParams(perplexity=self.perplexity, learning_rate=self.learning_rate,
                          max_iterations=self.max_iterations, theta=self.theta,
                          seed=self.seed)

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValidationError("X must be a 2-D matrix")
        dataset = Dataset(values=X, dim_names=tuple(f"x{j}" for j in range(X.shape[1])))
        embedding, instr = run_tsne(dataset, self._params())
        self.embedding_ = embedding.coords
        self.sigma_ = instr.sigma
        self.density_ = instr.density
        self.point_cost_ = instr.point_cost
        self.total_cost_ = instr.total_cost
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_
