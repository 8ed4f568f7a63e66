import numpy as np
import pytest

from tsnelens import ComputationError, Dataset, Embedding, ValidationError
from tsnelens.quality import (QualityScores, Selection,
                              compute_quality_scores,
                              density_cost_histograms, embedding_distances,
                              neighborhood_preservation, selection_quality,
                              shepard_heatmap, shepard_pairs)
from tsnelens.tsne import Instrumentation, pairwise_distances

from .conftest import random_dataset


# ---------------------------------------------------------------- oracles

def knn_sets(dists, k):
    """Brute-force k-NN sets (self excluded, ties by ascending index)."""
    n = dists.shape[0]
    out = []
    for i in range(n):
        cand = sorted((dists[i, j], j) for j in range(n) if j != i)
        out.append({j for _, j in cand[:k]})
    return out


def np_oracle(hd, ld, k, rows):
    hd_sets = knn_sets(hd, k)
    ld_sets = knn_sets(ld, k)
    vals = []
    for i in rows:
        inter = len(hd_sets[i] & ld_sets[i])
        union = len(hd_sets[i] | ld_sets[i])
        vals.append(inter / union)
    return float(np.mean(vals))


def trust_continuity_oracle(hd, ld, k):
    """Direct double-loop rank-penalty computation of T and C."""
    n = hd.shape[0]

    def ranks_from(d):
        rk = np.zeros((n, n), dtype=int)
        for i in range(n):
            order = sorted((d[i, j], j) for j in range(n) if j != i)
            for pos, (_, j) in enumerate(order):
                rk[i, j] = pos + 1
        return rk

    r_hd = ranks_from(hd)
    r_ld = ranks_from(ld)
    hd_knn = knn_sets(hd, k)
    ld_knn = knn_sets(ld, k)
    t_pen = c_pen = 0.0
    for i in range(n):
        for j in ld_knn[i] - hd_knn[i]:
            t_pen += r_hd[i, j] - k
        for j in hd_knn[i] - ld_knn[i]:
            c_pen += r_ld[i, j] - k
    norm = 2.0 / (n * k * (2 * n - 3 * k - 1))
    return 1 - norm * t_pen, 1 - norm * c_pen


def binning_oracle(hd, ld, bins):
    n = hd.shape[0]
    ymax = max(hd[i, j] for i in range(n) for j in range(i + 1, n))
    xmax = max(ld[i, j] for i in range(n) for j in range(i + 1, n))
    counts = np.zeros((bins, bins), dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            yb = min(int(hd[i, j] / ymax * bins), bins - 1)
            xb = min(int(ld[i, j] / xmax * bins), bins - 1)
            counts[yb, xb] += 1
    return counts


def identity_embedding_dataset(rng, n):
    """2-D data projected by identity: distances match up to normalization."""
    values = rng.uniform(0, 1, size=(n, 2))
    ds = Dataset(values=values, dim_names=("x", "y"))
    return ds, Embedding(ds.norm_values.copy())


# ---------------------------------------------------------------- shepard

class TestShepardHeatmap:
    def test_identity_projection_on_diagonal(self, rng):
        ds, emb = identity_embedding_dataset(rng, 20)
        hm = shepard_heatmap(pairwise_distances(ds), embedding_distances(emb), bins=10)
        off_diag = hm.counts.sum() - np.trace(hm.counts)
        assert off_diag == 0

    def test_total_count(self, rng):
        ds = random_dataset(rng, 4, 3)
        emb = Embedding(rng.standard_normal((4, 2)))
        hm = shepard_heatmap(pairwise_distances(ds), embedding_distances(emb))
        assert hm.counts.sum() == 6

    def test_matches_binning_oracle(self, rng):
        ds = random_dataset(rng, 15, 4)
        emb = Embedding(rng.standard_normal((15, 2)))
        hd = pairwise_distances(ds)
        ld = embedding_distances(emb)
        hm = shepard_heatmap(hd, ld, bins=7)
        assert np.array_equal(hm.counts, binning_oracle(hd, ld, 7))

    def test_mass_conservation_fuzz(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 25))
            ds = random_dataset(rng, n, int(rng.integers(2, 6)))
            emb = Embedding(rng.standard_normal((n, 2)))
            hm = shepard_heatmap(pairwise_distances(ds), embedding_distances(emb),
                                 bins=int(rng.integers(2, 15)))
            assert hm.counts.sum() == n * (n - 1) // 2

    def test_degenerate_distances_error(self):
        zeros = np.zeros((4, 4))
        with pytest.raises(ComputationError, match="degenerate"):
            shepard_heatmap(zeros, zeros + 1 - np.eye(4))

    def test_bins_validated(self, rng):
        ds = random_dataset(rng, 5, 2)
        d = pairwise_distances(ds)
        with pytest.raises(ValidationError):
            shepard_heatmap(d, d, bins=1)


class TestShepardPairs:
    def test_below_cap_returns_all(self, rng):
        ds = random_dataset(rng, 3, 3)
        d = pairwise_distances(ds)
        pairs = shepard_pairs(d, d, cap=10)
        assert pairs.shape == (3, 2)

    def test_cap_rule_deterministic(self, rng):
        ds = random_dataset(rng, 100, 3)
        emb = Embedding(rng.standard_normal((100, 2)))
        hd = pairwise_distances(ds)
        ld = embedding_distances(emb)
        p1 = shepard_pairs(hd, ld, cap=1000, seed=5)
        p2 = shepard_pairs(hd, ld, cap=1000, seed=5)
        assert p1.shape == (1000, 2)
        assert np.array_equal(p1, p2)

    def test_sample_is_subset_of_full(self, rng):
        ds = random_dataset(rng, 30, 3)
        emb = Embedding(rng.standard_normal((30, 2)))
        hd = pairwise_distances(ds)
        ld = embedding_distances(emb)
        full = {tuple(p) for p in shepard_pairs(hd, ld, cap=10 ** 6)}
        sample = shepard_pairs(hd, ld, cap=50, seed=1)
        assert all(tuple(p) in full for p in sample)


# ---------------------------------------------------------------- NP curve

class TestNeighborhoodPreservation:
    def test_identical_spaces_all_ones(self, rng):
        ds = random_dataset(rng, 12, 3)
        d = pairwise_distances(ds)
        curve = neighborhood_preservation(d, d, k_max=6)
        assert np.allclose(curve.global_np, 1.0)

    def test_swapped_orderings_np1_zero(self):
        # two pairs far apart; within each pair the 2-D space swaps partners
        hd = np.array([
            [0.0, 1.0, 9.0, 9.5],
            [1.0, 0.0, 9.5, 9.0],
            [9.0, 9.5, 0.0, 1.0],
            [9.5, 9.0, 1.0, 0.0],
        ])
        ld = np.array([
            [0.0, 2.0, 1.0, 9.0],
            [2.0, 0.0, 9.0, 1.0],
            [1.0, 9.0, 0.0, 2.0],
            [9.0, 1.0, 2.0, 0.0],
        ])
        assert np_oracle(hd, ld, 1, range(4)) == 0.0  # construct validated by oracle
        curve = neighborhood_preservation(hd, ld, k_max=1)
        assert curve.global_np[0] == 0.0

    def test_matches_jaccard_oracle(self, rng):
        ds = random_dataset(rng, 12, 4)
        emb = Embedding(rng.standard_normal((12, 2)))
        hd = pairwise_distances(ds)
        ld = embedding_distances(emb)
        curve = neighborhood_preservation(hd, ld, k_max=6)
        for k in range(1, 7):
            assert curve.global_np[k - 1] == np_oracle(hd, ld, k, range(12))

    def test_last_k_is_one(self, rng):
        for _ in range(5):
            n = int(rng.integers(4, 12))
            ds = random_dataset(rng, n, 3)
            emb = Embedding(rng.standard_normal((n, 2)))
            curve = neighborhood_preservation(pairwise_distances(ds),
                                              embedding_distances(emb), k_max=n - 1)
            assert curve.global_np[-1] == 1.0

    def test_selection_scoped(self, rng):
        ds = random_dataset(rng, 10, 3)
        emb = Embedding(rng.standard_normal((10, 2)))
        hd = pairwise_distances(ds)
        ld = embedding_distances(emb)
        sel = Selection(indices=(1, 3, 5))
        curve = neighborhood_preservation(hd, ld, selection=sel, k_max=4)
        for k in range(1, 5):
            assert curve.selection_np[k - 1] == np_oracle(hd, ld, k, [1, 3, 5])

    def test_empty_selection_treated_absent(self, rng):
        ds = random_dataset(rng, 8, 3)
        d = pairwise_distances(ds)
        curve = neighborhood_preservation(d, d, selection=[], k_max=3)
        assert curve.selection_np is None

    def test_k_max_validated(self, rng):
        ds = random_dataset(rng, 8, 3)
        d = pairwise_distances(ds)
        with pytest.raises(ValidationError):
            neighborhood_preservation(d, d, k_max=8)


# ---------------------------------------------------------------- metrics

def labeled_clusters_dataset(rng, per=10, gap=20.0):
    a = rng.standard_normal((per, 2))
    b = rng.standard_normal((per, 2)) + gap
    values = np.vstack([a, b])
    labels = tuple(["a"] * per + ["b"] * per)
    return Dataset(values=values, dim_names=("x", "y"), labels=labels)


class TestQualityScores:
    def test_identity_projection_perfect(self, rng):
        ds, emb = identity_embedding_dataset(rng, 25)
        scores = compute_quality_scores(ds, emb, k=5)
        assert scores.t == 1.0
        assert scores.c == 1.0
        assert scores.s == pytest.approx(1.0, abs=1e-12)
        assert scores.sdc == pytest.approx(1.0, abs=1e-12)

    def test_separated_clusters_nh_one(self, rng):
        ds = labeled_clusters_dataset(rng, per=10)
        emb = Embedding(ds.norm_values.copy())
        scores = compute_quality_scores(ds, emb, k=5)
        assert scores.nh == 1.0

    def test_t_c_match_rank_penalty_oracle(self, rng):
        ds = random_dataset(rng, 10, 4)
        emb = Embedding(rng.standard_normal((10, 2)))
        hd = pairwise_distances(ds)
        ld = embedding_distances(emb)
        scores = compute_quality_scores(ds, emb, k=4)
        t_oracle, c_oracle = trust_continuity_oracle(hd, ld, 4)
        assert abs(scores.t - t_oracle) < 1e-12
        assert abs(scores.c - c_oracle) < 1e-12

    def test_qma_is_mean(self, rng):
        ds = labeled_clusters_dataset(rng)
        emb = Embedding(rng.standard_normal((20, 2)))
        scores = compute_quality_scores(ds, emb, k=4)
        comp = [scores.nh, scores.t, scores.c, scores.s, scores.sdc]
        assert scores.qma == pytest.approx(np.mean(comp), abs=1e-12)

    def test_label_free_omits_nh(self, rng):
        ds = random_dataset(rng, 15, 3)
        emb = Embedding(rng.standard_normal((15, 2)))
        scores = compute_quality_scores(ds, emb, k=4)
        assert scores.nh is None
        assert scores.qma == pytest.approx(np.mean([scores.t, scores.c, scores.s, scores.sdc]),
                                           abs=1e-12)

    def test_rigid_transform_invariance(self, rng):
        ds = random_dataset(rng, 14, 4)
        coords = rng.standard_normal((14, 2))
        angle = 1.1
        rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        moved = 3.7 * coords @ rot.T + np.array([5.0, -2.0])
        s1 = compute_quality_scores(ds, Embedding(coords), k=4)
        s2 = compute_quality_scores(ds, Embedding(moved), k=4)
        assert s1.t == pytest.approx(s2.t, abs=1e-9)
        assert s1.c == pytest.approx(s2.c, abs=1e-9)
        assert s1.s == pytest.approx(s2.s, abs=1e-9)
        assert s1.sdc == pytest.approx(s2.sdc, abs=1e-9)

    def test_scores_within_unit_interval_fuzz(self, rng):
        for _ in range(10):
            n = int(rng.integers(6, 20))
            ds = random_dataset(rng, n, 3)
            emb = Embedding(rng.standard_normal((n, 2)))
            scores = compute_quality_scores(ds, emb, k=3)
            for v in scores.components().values():
                assert 0.0 <= v <= 1.0

    def test_invariant_enforced(self):
        with pytest.raises(ValidationError):
            QualityScores(t=0.5, c=0.5, s=0.5, sdc=0.5, qma=0.9)
        with pytest.raises(ValidationError):
            QualityScores(t=1.5, c=0.5, s=0.5, sdc=0.5, qma=0.75)


class TestSelectionQuality:
    def test_full_selection_reduces_to_global(self, rng):
        ds = labeled_clusters_dataset(rng, per=8)
        emb = Embedding(rng.standard_normal((16, 2)))
        scores = compute_quality_scores(ds, emb, k=4)
        all_points = Selection(indices=tuple(range(16)))
        for metric in ("nh", "t", "c", "s", "sdc", "qma"):
            got = selection_quality(ds, emb, all_points, metric, k=4)
            assert got == scores.get(metric)  # bit-exact

    def test_singleton_nh(self, rng):
        ds = labeled_clusters_dataset(rng, per=6)
        emb = Embedding(ds.norm_values.copy())
        v = selection_quality(ds, emb, Selection(indices=(3,)), "nh", k=3)
        # point 3 sits inside a pure cluster of its own label
        assert v == 1.0

    def test_half_split_additivity(self, rng):
        ds = labeled_clusters_dataset(rng, per=8)
        emb = Embedding(rng.standard_normal((16, 2)))
        half_a = Selection(indices=tuple(range(0, 9)))
        half_b = Selection(indices=tuple(range(9, 16)))
        nh_a = selection_quality(ds, emb, half_a, "nh", k=4)
        nh_b = selection_quality(ds, emb, half_b, "nh", k=4)
        nh_all = selection_quality(ds, emb, Selection(indices=tuple(range(16))), "nh", k=4)
        weighted = (9 * nh_a + 7 * nh_b) / 16
        assert nh_all == pytest.approx(weighted, abs=1e-12)

    def test_nh_without_labels_errors(self, rng):
        ds = random_dataset(rng, 10, 3)
        emb = Embedding(rng.standard_normal((10, 2)))
        with pytest.raises(ValidationError, match="labels"):
            selection_quality(ds, emb, Selection(indices=(0, 1)), "nh")

    def test_selection_validation(self):
        with pytest.raises(ValidationError):
            Selection(indices=())
        with pytest.raises(ValidationError):
            Selection(indices=(1, 1))
        with pytest.raises(ValidationError):
            Selection(indices=(-1,))


# ---------------------------------------------------------------- histograms

class TestHistograms:
    def make_instrumentation(self, rng, n):
        sigma = rng.uniform(0.5, 2.0, n)
        return Instrumentation(sigma=sigma, density=sigma ** -2.0,
                               point_cost=rng.uniform(0, 1, n), total_cost=1.0)

    def test_constant_density_single_bin(self):
        sigma = np.full(10, 1.5)
        instr = Instrumentation(sigma=sigma, density=sigma ** -2.0,
                                point_cost=np.linspace(0, 1, 10), total_cost=1.0)
        dens_hist, _ = density_cost_histograms(instr, bins=8)
        assert (dens_hist.counts > 0).sum() == 1
        assert dens_hist.counts.sum() == 10

    def test_counts_sum_to_n(self, rng):
        instr = self.make_instrumentation(rng, 699)
        dens_hist, cost_hist = density_cost_histograms(instr, bins=10)
        assert dens_hist.counts.sum() == 699
        assert cost_hist.counts.sum() == 699

    def test_matches_direct_binning(self, rng):
        instr = self.make_instrumentation(rng, 50)
        dens_hist, _ = density_cost_histograms(instr, bins=6)
        v = instr.density
        edges = dens_hist.edges
        oracle = np.zeros(6, dtype=int)
        for x in v:
            b = min(int((x - edges[0]) / (edges[-1] - edges[0]) * 6), 5)
            oracle[b] += 1
        assert np.array_equal(dens_hist.counts, oracle)
