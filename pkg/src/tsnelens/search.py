"""Hyper-parameter grid search and representative-projection selection.

A grid of parameter settings is run to a pool of instrumented projections
(seeded per configuration, so results are independent of worker count), the
pool is clustered by Procrustes distance with PAM K-Medoids, and the cluster
medoids become the representatives shown to the user, ranked by a quality
metric either globally or restricted to a selection.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .dataset import Dataset
from .errors import ComputationError, SearchError, ValidationError
from .quality import DEFAULT_K, QualityScores, compute_quality_scores, selection_quality
from .tsne import (Embedding, Instrumentation, TsneParams,
                   calibrate_bandwidths, pairwise_distances, run_calibrated)

DEFAULT_PERPLEXITIES = (2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0, 70.0, 100.0)
DEFAULT_LEARNING_RATES = (10.0, 20.0, 50.0, 100.0, 150.0, 200.0, 300.0, 400.0, 500.0, 1000.0)
DEFAULT_ITERATION_COUNTS = (250, 500, 750, 1000, 2000)
DEFAULT_REPRESENTATIVES = 25
DEFAULT_TOP = 6
_MAX_FAILURE_FRACTION = 0.10


@dataclass(frozen=True)
class GridSpec:
    """The Cartesian product of perplexities, learning rates and iteration
    counts; run i is seeded with seed_base + i."""

    perplexities: tuple[float, ...] = DEFAULT_PERPLEXITIES
    learning_rates: tuple[float, ...] = DEFAULT_LEARNING_RATES
    iteration_counts: tuple[int, ...] = DEFAULT_ITERATION_COUNTS
    seed_base: int = 0

    def __post_init__(self):
        if not (self.perplexities and self.learning_rates and self.iteration_counts):
            raise ValidationError("grid axes must be non-empty")
        object.__setattr__(self, "perplexities", tuple(float(p) for p in self.perplexities))
        object.__setattr__(self, "learning_rates", tuple(float(r) for r in self.learning_rates))
        object.__setattr__(self, "iteration_counts", tuple(int(i) for i in self.iteration_counts))
        for p in self.perplexities:
            if not np.isfinite(p) or p <= 1:
                raise ValidationError(f"perplexity {p} out of range")
        for r in self.learning_rates:
            if not np.isfinite(r) or r <= 0:
                raise ValidationError(f"learning rate {r} out of range")
        for it in self.iteration_counts:
            if it < 50:
                raise ValidationError(f"iteration count {it} below minimum of 50")
        if self.seed_base < 0:
            raise ValidationError("seed_base must be non-negative")

    @property
    def size(self) -> int:
        return len(self.perplexities) * len(self.learning_rates) * len(self.iteration_counts)

    def configs(self) -> list[TsneParams]:
        return [
            TsneParams(perplexity=p, learning_rate=r, max_iterations=it,
                       theta=0.0, seed=self.seed_base + i)
            for i, (p, r, it) in enumerate(product(self.perplexities,
                                                   self.learning_rates,
                                                   self.iteration_counts))
        ]


@dataclass(frozen=True)
class ProjectionRecord:
    """One grid run: parameters, layout, instrumentation and quality scores.

    A failed run keeps its id and the error message; it is excluded from
    clustering and ranking.
    """

    id: int
    params: TsneParams
    embedding: Embedding | None = None
    instrumentation: Instrumentation | None = None
    scores: QualityScores | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class RepresentativeSet:
    """Cluster medoids of the projection pool, ordered by QMA descending,
    with each clustered record assigned to its nearest medoid."""

    medoid_ids: tuple[int, ...]
    cluster_assignment: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.medoid_ids)) != len(self.medoid_ids):
            raise ValidationError("medoid ids must be unique")
        for rid, mid in self.cluster_assignment.items():
            if mid not in self.medoid_ids:
                raise ValidationError(f"record {rid} assigned to non-medoid {mid}")


def default_grid(n: int, seed_base: int = 0) -> GridSpec:
    """The default 10 x 10 x 5 grid, with perplexities clipped to (n - 1) / 3."""
    if n < 8:
        raise ValidationError("insufficient data for grid search")
    cap = (n - 1) / 3.0
    clipped = []
    for p in DEFAULT_PERPLEXITIES:
        v = min(p, cap)
        if v not in clipped:
            clipped.append(v)
    return GridSpec(perplexities=tuple(clipped),
                    learning_rates=DEFAULT_LEARNING_RATES,
                    iteration_counts=DEFAULT_ITERATION_COUNTS,
                    seed_base=seed_base)


def run_grid_search(dataset: Dataset, grid: GridSpec, parallelism: int = 1,
                    k: int = DEFAULT_K, progress=None) -> list[ProjectionRecord]:
    """Run every configuration of the grid and score the results.

    The pool is ordered by configuration index and is a pure function of
    (dataset, grid): per-configuration seeding makes it independent of the
    worker count. Individual failures are recorded and excluded; more than
    10% failures abort the whole search.
    """
    if parallelism < 1:
        raise ValidationError("parallelism must be >= 1")
    configs = grid.configs()
    dists = pairwise_distances(dataset)

    # calibration depends only on (distances, perplexity): share it across runs
    calibrations: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    for params in configs:
        eff = params.clipped(dataset.n).perplexity
        if eff not in calibrations:
            calibrations[eff] = calibrate_bandwidths(dists, eff)

    lock = threading.Lock()
    done = 0

    def execute(item):
        nonlocal done
        idx, params = item
        try:
            clipped = params.clipped(dataset.n)
            sigma, p_cond = calibrations[clipped.perplexity]
            embedding, instr = run_calibrated(clipped, sigma, p_cond)
            scores = compute_quality_scores(dataset, embedding, k=k, hd_dists=dists)
            record = ProjectionRecord(id=idx, params=params, embedding=embedding,
                                      instrumentation=instr, scores=scores)
        except Exception as exc:  # noqa: BLE001 - a run failure must not kill the pool
            record = ProjectionRecord(id=idx, params=params, error=str(exc))
        with lock:
            done += 1
            if progress is not None:
                progress(done, len(configs))
        return record

    if parallelism == 1:
        pool = [execute(item) for item in enumerate(configs)]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as executor:
            pool = list(executor.map(execute, enumerate(configs)))

    failures = sum(r.failed for r in pool)
    if failures > _MAX_FAILURE_FRACTION * len(pool):
        raise SearchError(f"{failures} of {len(pool)} grid runs failed")
    return pool


def _normalized_configs(embeddings: list[np.ndarray]) -> np.ndarray:
    """Center each configuration and scale it to unit Frobenius norm."""
    out = np.empty((len(embeddings),) + embeddings[0].shape)
    for i, coords in enumerate(embeddings):
        centered = coords - coords.mean(axis=0)
        norm = np.linalg.norm(centered)
        if norm == 0:
            raise ComputationError(f"degenerate configuration at pool index {i}: all points coincide")
        out[i] = centered / norm
    return out


def procrustes_distance(a, b) -> float:
    """Residual sum of squares after optimally aligning two configurations.

    Both are centered and scaled to unit Frobenius norm; the optimal
    orthogonal alignment (reflections permitted) comes from the SVD of the
    2 x 2 cross-covariance. Zero iff the shapes are similarity-equivalent.
    """
    ca = a.coords if isinstance(a, Embedding) else np.asarray(a, dtype=float)
    cb = b.coords if isinstance(b, Embedding) else np.asarray(b, dtype=float)
    if ca.shape != cb.shape:
        raise ValidationError("configurations must have equal point counts")
    xa, xb = _normalized_configs([ca, cb])
    s = np.linalg.svd(xb.T @ xa, compute_uv=False).sum()
    return max(2.0 * (1.0 - s), 0.0)


def procrustes_matrix(embeddings: list[Embedding] | list[np.ndarray]) -> np.ndarray:
    """All pairwise Procrustes distances of a pool of configurations.

    Uses the closed form for 2-D: the nuclear norm of the 2 x 2
    cross-covariance M is sqrt(||M||_F^2 + 2 |det M|).
    """
    coords = [e.coords if isinstance(e, Embedding) else np.asarray(e, dtype=float)
              for e in embeddings]
    x = _normalized_configs(coords)
    m = np.einsum("anj,bnk->abjk", x, x)
    fro2 = np.sum(m ** 2, axis=(2, 3))
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    s = np.sqrt(fro2 + 2.0 * np.abs(det))
    dist = np.maximum(2.0 * (1.0 - s), 0.0)
    np.fill_diagonal(dist, 0.0)
    return dist


def kmedoids(dist_matrix: np.ndarray, k: int, seed: int = 0, on_swap=None
             ) -> tuple[np.ndarray, np.ndarray, float]:
    """PAM clustering: greedy BUILD then best-improvement SWAP to a local
    optimum. Deterministic (ties resolve to the smallest index); the seed is
    accepted for interface stability but the procedure needs no randomness.

    ``on_swap`` is called with the objective value after each applied swap.
    Returns (medoid indices, assignment as positions into the medoid list,
    total cost).
    """
    d = np.asarray(dist_matrix, dtype=float)
    n = d.shape[0]
    if k <= 0:
        raise ValidationError("k must be positive")
    if k > n:
        raise ValidationError(f"k={k} exceeds pool size {n}")
    if d.shape != (n, n) or not np.allclose(d, d.T) or np.any(np.diag(d) != 0):
        raise ValidationError("distance matrix must be square, symmetric, zero-diagonal")

    # BUILD
    medoids = [int(np.argmin(d.sum(axis=1)))]
    d_near = d[medoids[0]].copy()
    while len(medoids) < k:
        gains = np.maximum(d_near[None, :] - d, 0.0).sum(axis=1)
        gains[medoids] = -np.inf
        h = int(np.argmax(gains))
        medoids.append(h)
        np.minimum(d_near, d[h], out=d_near)

    # SWAP
    medoid_arr = np.array(medoids)
    for _ in range(1000):
        sub = d[:, medoid_arr]
        order = np.argsort(sub, axis=1, kind="stable")
        near_pos = order[:, 0]
        d1 = sub[np.arange(n), near_pos]
        d2 = sub[np.arange(n), order[:, 1]] if k > 1 else np.full(n, np.inf)
        cost = d1.sum()
        best_delta = -1e-12
        best_swap = None
        is_medoid = np.zeros(n, dtype=bool)
        is_medoid[medoid_arr] = True
        for pos in range(k):
            covered = near_pos == pos
            base = np.where(covered, d2, d1)
            for h in range(n):
                if is_medoid[h]:
                    continue
                delta = np.minimum(base, d[h]).sum() - cost
                if delta < best_delta:
                    best_delta = delta
                    best_swap = (pos, h)
        if best_swap is None:
            break
        medoid_arr[best_swap[0]] = best_swap[1]
        if on_swap is not None:
            new_sub = d[:, medoid_arr]
            on_swap(float(new_sub[np.arange(n), np.argmin(new_sub, axis=1)].sum()))
    else:
        raise ComputationError("k-medoids SWAP failed to converge")

    sub = d[:, medoid_arr]
    assignment = np.argmin(sub, axis=1)
    cost = float(sub[np.arange(n), assignment].sum())
    return medoid_arr, assignment, cost


def select_representatives(pool: list[ProjectionRecord], k: int = DEFAULT_REPRESENTATIVES
                           ) -> RepresentativeSet:
    """Pick medoid projections of the pool under Procrustes distance.

    Medoids are ordered by QMA descending (ties by id ascending), matching
    the thumbnail display order.
    """
    ok = [r for r in pool if not r.failed]
    if not ok:
        raise ValidationError("pool contains no successful runs")
    dist = procrustes_matrix([r.embedding for r in ok])
    k_eff = min(k, len(ok))
    medoid_pos, assignment, _ = kmedoids(dist, k_eff)
    display = sorted(range(k_eff),
                     key=lambda p: (-ok[medoid_pos[p]].scores.qma, ok[medoid_pos[p]].id))
    medoid_ids = tuple(ok[medoid_pos[p]].id for p in display)
    cluster_assignment = {
        ok[i].id: ok[medoid_pos[assignment[i]]].id for i in range(len(ok))
    }
    return RepresentativeSet(medoid_ids=medoid_ids, cluster_assignment=cluster_assignment)


def rank_representatives(records: list[ProjectionRecord], metric_id: str,
                         selection=None, top: int = DEFAULT_TOP,
                         dataset: Dataset | None = None, k: int = DEFAULT_K
                         ) -> list[int]:
    """Order representative record ids by a quality metric, best first.

    Without a selection the stored global scores are used; with one, each
    record's score is recomputed restricted to the selected points (which
    requires the dataset). Ties resolve by id ascending.
    """
    metric_id = metric_id.lower()
    ok = [r for r in records if not r.failed]
    if selection is not None and hasattr(selection, "__len__") and len(selection) == 0:
        selection = None
    if selection is None:
        keyed = [(-(r.scores.get(metric_id)), r.id) for r in ok]
    else:
        if dataset is None:
            raise ValidationError("selection-based ranking requires the dataset")
        keyed = [(-selection_quality(dataset, r.embedding, selection, metric_id, k=k), r.id)
                 for r in ok]
    keyed.sort()
    return [rid for _, rid in keyed[:max(0, top)]]
