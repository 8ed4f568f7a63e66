"""Interpretation queries over a finished projection.

Dimension correlation: points near a user-drawn polyline are projected onto
it, the arclength ordering this induces is correlated (Spearman) with each
dimension's values, and the signed coefficients are reported sorted by
relevance. Adaptive axis selection: PCA over the selected points picks the up
to 8 dimensions with the largest leading-eigenvector loadings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .dataset import Dataset
from .errors import ComputationError, ValidationError
from .quality import Selection
from .tsne import Embedding

MAX_AXES = 8


@dataclass(frozen=True)
class Polyline:
    """An ordered sequence of >= 2 distinct vertices with a capture radius."""

    vertices: np.ndarray
    rho: float

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise ValidationError("polyline needs at least two 2-D vertices")
        if not np.isfinite(v).all():
            raise ValidationError("polyline vertices must be finite")
        if np.any(np.all(v[1:] == v[:-1], axis=1)):
            raise ValidationError("consecutive polyline vertices must be distinct")
        if not (np.isfinite(self.rho) and self.rho > 0):
            raise ValidationError("rho must be a positive real")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "rho", float(self.rho))

    def reversed(self) -> "Polyline":
        return Polyline(vertices=np.ascontiguousarray(self.vertices[::-1]), rho=self.rho)


@dataclass(frozen=True)
class PolylineProjection:
    """Points captured by a polyline, ordered by arclength (ties by index)."""

    point_indices: np.ndarray
    arclengths: np.ndarray
    distances: np.ndarray

    @property
    def size(self) -> int:
        return len(self.point_indices)


@dataclass(frozen=True)
class DimensionCorrelation:
    """Signed per-dimension Spearman coefficients, sorted by |rho| descending."""

    dim_indices: tuple[int, ...]
    dim_names: tuple[str, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        mags = [abs(c) for c in self.coefficients]
        if any(m > 1 + 1e-12 for m in mags):
            raise ValidationError("correlation coefficients must lie in [-1, 1]")
        if any(mags[i] < mags[i + 1] - 1e-15 for i in range(len(mags) - 1)):
            raise ValidationError("coefficients must be sorted by relevance")


@dataclass(frozen=True)
class AxisSelection:
    """Up to 8 dimensions ordered by the magnitude of their leading principal
    component loadings, with the signed weights."""

    dim_indices: tuple[int, ...]
    dim_names: tuple[str, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.dim_indices) > MAX_AXES:
            raise ValidationError(f"at most {MAX_AXES} axes allowed")
        if len(set(self.dim_indices)) != len(self.dim_indices):
            raise ValidationError("axis dimensions must be unique")


def default_rho(embedding: Embedding | np.ndarray, fraction: float = 0.05) -> float:
    """Capture radius as a fraction of the embedding bounding-box diagonal."""
    coords = embedding.coords if isinstance(embedding, Embedding) else np.asarray(embedding)
    span = coords.max(axis=0) - coords.min(axis=0)
    diag = float(np.sqrt(np.sum(span ** 2)))
    if diag == 0:
        raise ComputationError("degenerate embedding: zero bounding box")
    return fraction * diag


def project_to_polyline(embedding: Embedding | np.ndarray, polyline: Polyline
                        ) -> PolylineProjection:
    """Project every point within rho of the polyline onto its nearest
    segment and order the survivors by arclength along the polyline.

    Segment ties (equal distance) resolve to the earlier segment; arclength
    ties order by point index.
    """
    coords = embedding.coords if isinstance(embedding, Embedding) else np.asarray(embedding, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2 or coords.shape[0] < 1:
        raise ValidationError("embedding must contain at least one 2-D point")
    verts = polyline.vertices
    starts = verts[:-1]
    ends = verts[1:]
    seg_vec = ends - starts
    seg_len = np.sqrt(np.sum(seg_vec ** 2, axis=1))
    cum_len = np.concatenate([[0.0], np.cumsum(seg_len)])

    # point-to-segment distances, (n, S)
    rel = coords[:, None, :] - starts[None, :, :]
    t = np.einsum("nsk,sk->ns", rel, seg_vec) / (seg_len ** 2)
    t = np.clip(t, 0.0, 1.0)
    foot = starts[None, :, :] + t[:, :, None] * seg_vec[None, :, :]
    dist = np.sqrt(np.sum((coords[:, None, :] - foot) ** 2, axis=2))

    best_seg = np.argmin(dist, axis=1)  # first minimum: earlier segment wins ties
    n = coords.shape[0]
    rows = np.arange(n)
    best_dist = dist[rows, best_seg]
    keep = best_dist <= polyline.rho
    if not keep.any():
        raise ComputationError("empty capture band")
    arclength = cum_len[best_seg] + t[rows, best_seg] * seg_len[best_seg]
    idx = rows[keep]
    order = np.lexsort((idx, arclength[keep]))
    return PolylineProjection(point_indices=idx[order],
                              arclengths=arclength[keep][order],
                              distances=best_dist[keep][order])


def spearman(a, b) -> float:
    """Spearman rank correlation: Pearson correlation of average-fractional
    ranks. A constant vector yields 0 by convention."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValidationError("spearman needs two equal-length vectors of size >= 2")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValidationError("spearman inputs must be finite")
    ra = rankdata(a)
    rb = rankdata(b)
    sa = ra.std()
    sb = rb.std()
    if sa == 0.0 or sb == 0.0:
        return 0.0
    return float(np.mean((ra - ra.mean()) * (rb - rb.mean())) / (sa * sb))


def dimension_correlation(dataset: Dataset, projection: PolylineProjection,
                          threshold: float | None = None) -> DimensionCorrelation:
    """Correlate the polyline-induced ordering with every dimension.

    Returns signed coefficients sorted by |rho| descending (ties by dimension
    index); an optional threshold drops dimensions with |rho| below it.
    """
    if projection.size < 2:
        raise ValidationError("polyline projection needs at least 2 points")
    kept = projection.point_indices
    arc = projection.arclengths
    coeffs = np.array([spearman(arc, dataset.values[kept, j]) for j in range(dataset.d)])
    order = np.lexsort((np.arange(dataset.d), -np.abs(coeffs)))
    if threshold is not None:
        order = [j for j in order if abs(coeffs[j]) >= threshold]
    return DimensionCorrelation(
        dim_indices=tuple(int(j) for j in order),
        dim_names=tuple(dataset.dim_names[j] for j in order),
        coefficients=tuple(float(coeffs[j]) for j in order),
    )


def adaptive_axes(dataset: Dataset, selection) -> AxisSelection:
    """Rank dimensions by the leading principal component of the selection.

    The PCA runs on the selected rows only (all dimensions), each dimension
    standardized by the selection's standard deviation when nonzero. The up to
    8 dimensions with the largest |loading| are returned with signed weights.
    """
    if not isinstance(selection, Selection):
        selection = Selection(indices=tuple(selection))
    sel = selection.as_array(dataset.n)
    if len(sel) < 2:
        raise ValidationError("selection must contain at least 2 points")
    sub = dataset.values[sel]
    centered = sub - sub.mean(axis=0)
    std = centered.std(axis=0)
    if not (std > 0).any():
        raise ComputationError("degenerate selection: zero variance")
    scaled = centered.copy()
    nz = std > 0
    scaled[:, nz] = centered[:, nz] / std[nz]
    cov = scaled.T @ scaled
    eigvals, eigvecs = np.linalg.eigh(cov)
    w = eigvecs[:, -1]
    lead = int(np.argmax(np.abs(w)))
    if w[lead] < 0:  # canonical sign: strongest loading positive
        w = -w
    order = np.lexsort((np.arange(dataset.d), -np.abs(w)))[:min(MAX_AXES, dataset.d)]
    return AxisSelection(
        dim_indices=tuple(int(j) for j in order),
        dim_names=tuple(dataset.dim_names[j] for j in order),
        weights=tuple(float(w[j]) for j in order),
    )
