"""Projection quality measurement.

Five scalar metrics (neighborhood hit, trustworthiness, continuity, normalized
stress score, Shepard diagram correlation) plus their average, Shepard
heatmap/diagram data, neighborhood-preservation curves, and density/cost
histograms.

Every scalar metric is computed by one selection-scoped routine; the global
score is simply the selection of all points, which makes the reduction
property (selection == everything -> global score) hold bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .dataset import Dataset
from .errors import ComputationError, ValidationError
from .tsne import Embedding, Instrumentation

METRIC_IDS = ("nh", "t", "c", "s", "sdc", "qma")
DEFAULT_K = 7


@dataclass(frozen=True)
class Selection:
    """A non-empty, duplicate-free set of point indices."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = [int(i) for i in self.indices]
        if not idx:
            raise ValidationError("selection must not be empty")
        if len(set(idx)) != len(idx):
            raise ValidationError("selection contains duplicate indices")
        if min(idx) < 0:
            raise ValidationError("selection indices must be non-negative")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    def as_array(self, n: int) -> np.ndarray:
        arr = np.asarray(self.indices, dtype=np.intp)
        if arr.max() >= n:
            raise ValidationError(f"selection index {arr.max()} out of range for n={n}")
        return arr


@dataclass(frozen=True)
class QualityScores:
    """The five metric scores in [0, 1] plus their arithmetic mean.

    nh is None when the dataset has no labels; qma then averages the rest.
    """

    t: float
    c: float
    s: float
    sdc: float
    qma: float
    nh: float | None = None

    def __post_init__(self):
        comp = self.components()
        for name, v in comp.items():
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"score {name}={v} outside [0, 1]")
        if abs(self.qma - float(np.mean(list(comp.values())))) > 1e-12:
            raise ValidationError("qma must be the mean of the available components")

    def components(self) -> dict[str, float]:
        out = {} if self.nh is None else {"nh": self.nh}
        out.update(t=self.t, c=self.c, s=self.s, sdc=self.sdc)
        return out

    def get(self, metric_id: str) -> float:
        metric_id = metric_id.lower()
        if metric_id == "qma":
            return self.qma
        if metric_id == "nh":
            if self.nh is None:
                raise ValidationError("nh score unavailable (dataset has no labels)")
            return self.nh
        if metric_id not in ("t", "c", "s", "sdc"):
            raise ValidationError(f"unknown metric '{metric_id}'")
        return getattr(self, metric_id)


@dataclass(frozen=True)
class ShepardHeatmap:
    """bins x bins pair counts; rows bin the high-D distance, columns the 2-D
    distance, both normalized by their maxima, cell (0, 0) at the top-left."""

    bins: int
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (self.bins, self.bins) or (counts < 0).any():
            raise ValidationError("counts must be a non-negative bins x bins grid")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class NPCurve:
    """Neighborhood preservation NP_k over a k range, global and optionally
    restricted to a selection."""

    k_values: np.ndarray
    global_np: np.ndarray
    selection_np: np.ndarray | None = None

    def __post_init__(self):
        for arr in (self.global_np, self.selection_np):
            if arr is not None and ((np.asarray(arr) < 0).any() or (np.asarray(arr) > 1).any()):
                raise ValidationError("NP values must lie in [0, 1]")


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray


def embedding_distances(embedding: Embedding | np.ndarray) -> np.ndarray:
    coords = embedding.coords if isinstance(embedding, Embedding) else np.asarray(embedding)
    return squareform(pdist(coords))


def _neighbor_ranks(dists: np.ndarray) -> np.ndarray:
    """rank[i, j] = 1-based position of j among i's neighbors (distance
    ascending, ties by index); rank[i, i] = n."""
    n = dists.shape[0]
    d = dists.copy()
    np.fill_diagonal(d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")
    rank = np.empty((n, n), dtype=np.intp)
    rows = np.arange(n)[:, None]
    rank[rows, order] = np.arange(1, n + 1)[None, :]
    return rank


def _coerce_selection(selection, n: int) -> np.ndarray | None:
    if selection is None:
        return None
    if not isinstance(selection, Selection):
        seq = list(selection)
        if not seq:
            return None  # empty selection treated as absent
        selection = Selection(indices=tuple(seq))
    return selection.as_array(n)


def _clamp_k(k: int, n: int) -> int:
    """Clamp k below n/2, the domain where the rank-penalty normalization
    bounds the per-point terms to [0, 1]."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    return min(k, max(1, (n - 1) // 2))


def _rank_penalty_terms(rank_a: np.ndarray, rank_b: np.ndarray, k: int) -> np.ndarray:
    """Per-point 1 - penalty terms of the rank-based metrics.

    Points that are within the k-neighborhood under ``rank_b`` but not under
    ``rank_a`` are penalized by how far down ``rank_a`` they sit.
    """
    n = rank_a.shape[0]
    in_a = rank_a <= k
    in_b = rank_b <= k
    penalty = np.where(in_b & ~in_a, rank_a - k, 0).sum(axis=1)
    return 1.0 - penalty * (2.0 / (k * (2.0 * n - 3.0 * k - 1.0)))


def _nh_terms(dataset: Dataset, ld_rank: np.ndarray, k: int) -> np.ndarray:
    labels = np.asarray(dataset.labels)
    same = labels[:, None] == labels[None, :]
    in_knn = ld_rank <= k
    return (same & in_knn).sum(axis=1) / float(k)


def _offdiag_rows(mat: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """All (i, j) entries with i in rows, j != i, flattened row-major."""
    n = mat.shape[1]
    sub = mat[rows]
    keep = np.ones((len(rows), n), dtype=bool)
    keep[np.arange(len(rows)), rows] = False
    return sub[keep]


def _metric_score(metric_id: str, dataset: Dataset, hd: np.ndarray, ld: np.ndarray,
                  sel: np.ndarray, k: int,
                  ranks: tuple[np.ndarray, np.ndarray] | None = None) -> float:
    metric_id = metric_id.lower()
    n = dataset.n
    if metric_id in ("nh", "t", "c"):
        k_eff = _clamp_k(k, n)
        hd_rank, ld_rank = ranks if ranks is not None else (_neighbor_ranks(hd), _neighbor_ranks(ld))
        if metric_id == "nh":
            if dataset.labels is None:
                raise ValidationError("neighborhood hit requires labels")
            terms = _nh_terms(dataset, ld_rank, min(k, n - 1))
        elif metric_id == "t":
            terms = _rank_penalty_terms(hd_rank, ld_rank, k_eff)
        else:
            terms = _rank_penalty_terms(ld_rank, hd_rank, k_eff)
        return float(np.mean(terms[sel]))
    if metric_id == "s":
        big = _offdiag_rows(hd, sel)
        small = _offdiag_rows(ld, sel)
        denom = np.sum(big ** 2)
        if denom == 0:
            raise ComputationError("degenerate distances")
        d2 = np.sum(small ** 2)
        alpha = np.sum(big * small) / d2 if d2 > 0 else 0.0
        stress = np.sum((big - alpha * small) ** 2) / denom
        return float(np.clip(1.0 - stress, 0.0, 1.0))
    if metric_id == "sdc":
        from .interpret import spearman  # late import: interpret uses Selection
        rho = spearman(_offdiag_rows(hd, sel), _offdiag_rows(ld, sel))
        return max(rho, 0.0)
    raise ValidationError(f"unknown metric '{metric_id}'")


def compute_quality_scores(dataset: Dataset, embedding: Embedding, k: int = DEFAULT_K,
                           hd_dists: np.ndarray | None = None) -> QualityScores:
    """All five quality scores (nh omitted without labels) and their mean."""
    if embedding.n != dataset.n:
        raise ValidationError("embedding size does not match dataset")
    hd = hd_dists if hd_dists is not None else squareform(pdist(dataset.norm_values))
    ld = embedding_distances(embedding)
    sel = np.arange(dataset.n)
    ranks = (_neighbor_ranks(hd), _neighbor_ranks(ld))
    vals = {
        m: _metric_score(m, dataset, hd, ld, sel, k, ranks)
        for m in (("nh", "t", "c", "s", "sdc") if dataset.labels is not None
                  else ("t", "c", "s", "sdc"))
    }
    qma = float(np.mean(list(vals.values())))
    return QualityScores(nh=vals.get("nh"), t=vals["t"], c=vals["c"], s=vals["s"],
                         sdc=vals["sdc"], qma=qma)


def selection_quality(dataset: Dataset, embedding: Embedding, selection,
                      metric_id: str, k: int = DEFAULT_K,
                      hd_dists: np.ndarray | None = None) -> float:
    """One metric aggregated only over the selected points.

    Uses the same per-point terms as the global metric; with the selection
    equal to all points this reproduces the global score exactly.
    """
    sel = _coerce_selection(selection, dataset.n)
    if sel is None:
        raise ValidationError("selection must not be empty")
    hd = hd_dists if hd_dists is not None else squareform(pdist(dataset.norm_values))
    ld = embedding_distances(embedding)
    metric_id = metric_id.lower()
    if metric_id == "qma":
        metrics = ("nh", "t", "c", "s", "sdc") if dataset.labels is not None else ("t", "c", "s", "sdc")
        ranks = (_neighbor_ranks(hd), _neighbor_ranks(ld))
        return float(np.mean([_metric_score(m, dataset, hd, ld, sel, k, ranks) for m in metrics]))
    return _metric_score(metric_id, dataset, hd, ld, sel, k)


def shepard_heatmap(hd_dists: np.ndarray, ld_dists: np.ndarray, bins: int = 10) -> ShepardHeatmap:
    """Bin all unordered pairs by (normalized high-D, normalized 2-D) distance."""
    hd = np.asarray(hd_dists)
    ld = np.asarray(ld_dists)
    if hd.shape != ld.shape or hd.ndim != 2 or hd.shape[0] != hd.shape[1]:
        raise ValidationError("distance matrices must be square and of equal shape")
    if bins < 2:
        raise ValidationError("bins must be >= 2")
    iu = np.triu_indices(hd.shape[0], 1)
    y = hd[iu]
    x = ld[iu]
    ymax = y.max() if y.size else 0.0
    xmax = x.max() if x.size else 0.0
    if ymax == 0 or xmax == 0:
        raise ComputationError("degenerate distances")
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _, _ = np.histogram2d(y / ymax, x / xmax, bins=(edges, edges))
    return ShepardHeatmap(bins=bins, counts=counts.astype(np.int64))


def shepard_pairs(hd_dists: np.ndarray, ld_dists: np.ndarray, cap: int,
                  seed: int = 0) -> np.ndarray:
    """Normalized (2-D, high-D) distance pairs, uniformly subsampled to ``cap``
    when there are more than ``cap`` pairs (deterministic for a fixed seed)."""
    if cap < 1:
        raise ValidationError("cap must be >= 1")
    hd = np.asarray(hd_dists)
    ld = np.asarray(ld_dists)
    iu = np.triu_indices(hd.shape[0], 1)
    y = hd[iu]
    x = ld[iu]
    ymax = y.max() if y.size else 0.0
    xmax = x.max() if x.size else 0.0
    if ymax == 0 or xmax == 0:
        raise ComputationError("degenerate distances")
    pairs = np.column_stack([x / xmax, y / ymax])
    if pairs.shape[0] <= cap:
        return pairs
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(pairs.shape[0], size=cap, replace=False))
    return pairs[idx]


def neighborhood_preservation(hd_dists: np.ndarray, ld_dists: np.ndarray,
                              selection=None, k_max: int | None = None) -> NPCurve:
    """Mean Jaccard similarity of the k-nearest-neighbor sets in both spaces,
    for every k up to k_max; neighbor sets exclude the point itself and break
    distance ties by ascending index."""
    hd = np.asarray(hd_dists)
    ld = np.asarray(ld_dists)
    n = hd.shape[0]
    if k_max is None:
        k_max = min(50, n - 1)
    if not 1 <= k_max <= n - 1:
        raise ValidationError(f"k_max must lie in [1, {n - 1}]")
    sel = _coerce_selection(selection, n)
    hd_rank = _neighbor_ranks(hd)
    ld_rank = _neighbor_ranks(ld)
    worst = np.maximum(hd_rank, ld_rank)
    np.fill_diagonal(worst, n + 1)
    jac = np.empty((n, k_max))
    ks = np.arange(1, k_max + 1)
    for i in range(n):
        cnt = np.bincount(worst[i], minlength=n + 2)
        inter = np.cumsum(cnt)[1:k_max + 1]
        jac[i] = inter / (2.0 * ks - inter)
    # per-k means over contiguous 1-D vectors so the result is reproducible
    # bit-for-bit regardless of how the (n, k) table was laid out
    global_np = np.array([np.ascontiguousarray(jac[:, kk]).mean() for kk in range(k_max)])
    selection_np = None
    if sel is not None:
        selection_np = np.array([np.ascontiguousarray(jac[sel, kk]).mean()
                                 for kk in range(k_max)])
    return NPCurve(k_values=ks, global_np=global_np, selection_np=selection_np)


def density_cost_histograms(instrumentation: Instrumentation, bins: int = 20
                            ) -> tuple[Histogram, Histogram]:
    """Histograms of the per-point density and remaining cost."""
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    d_counts, d_edges = np.histogram(instrumentation.density, bins=bins)
    c_counts, c_edges = np.histogram(instrumentation.point_cost, bins=bins)
    return (Histogram(edges=d_edges, counts=d_counts),
            Histogram(edges=c_edges, counts=c_counts))
