import numpy as np
import pytest

from tsnelens import ComputationError, Embedding, SearchError, ValidationError
from tsnelens.quality import Selection, compute_quality_scores
from tsnelens.search import (GridSpec, ProjectionRecord, default_grid,
                             kmedoids, procrustes_distance, procrustes_matrix,
                             rank_representatives, run_grid_search,
                             select_representatives)
from tsnelens.tsne import TsneParams

from .conftest import blob_dataset, line_dataset


# ---------------------------------------------------------------- oracles

def procrustes_grid_oracle(a, b, steps=20000):
    """Minimize alignment residual over a fine rotation grid x reflection."""
    def normalize(x):
        x = x - x.mean(axis=0)
        return x / np.linalg.norm(x)

    xa, xb = normalize(np.asarray(a, float)), normalize(np.asarray(b, float))
    best = np.inf
    for reflect in (False, True):
        xr = xb.copy()
        if reflect:
            xr[:, 0] = -xr[:, 0]
        for ang in np.linspace(0, 2 * np.pi, steps, endpoint=False):
            rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
            best = min(best, float(np.sum((xa - xr @ rot.T) ** 2)))
    return best


def kmedoids_exhaustive_pair(dist):
    """Best medoid pair by trying all C(n, 2) candidates."""
    n = dist.shape[0]
    best_cost, best_pair = np.inf, None
    for i in range(n):
        for j in range(i + 1, n):
            cost = np.minimum(dist[i], dist[j]).sum()
            if cost < best_cost:
                best_cost, best_pair = cost, {i, j}
    return best_pair, best_cost


def similarity_transform(coords, angle, scale, shift, reflect=False):
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    out = coords.copy()
    if reflect:
        out[:, 1] = -out[:, 1]
    return scale * out @ rot.T + shift


# ---------------------------------------------------------------- grid spec

class TestGridSpec:
    def test_default_grid_size_500(self):
        grid = default_grid(699)
        assert grid.size == 500

    def test_small_n_clips_perplexities(self):
        grid = default_grid(10)
        assert all(p <= 3.0 for p in grid.perplexities)

    def test_default_lists_product(self):
        grid = default_grid(1000)
        assert len(grid.perplexities) == 10
        assert len(grid.learning_rates) == 10
        assert len(grid.iteration_counts) == 5
        assert 10 * 10 * 5 == 500

    def test_insufficient_data(self):
        with pytest.raises(ValidationError, match="insufficient data"):
            default_grid(7)

    def test_configs_seeded_incrementally(self):
        grid = GridSpec(perplexities=(2, 5), learning_rates=(100,),
                        iteration_counts=(50, 100), seed_base=7)
        configs = grid.configs()
        assert [c.seed for c in configs] == [7, 8, 9, 10]
        assert grid.size == len(configs) == 4


@pytest.fixture(scope="module")
def small_dataset():
    return line_dataset(n=30)


@pytest.fixture(scope="module")
def mini_grid():
    return GridSpec(perplexities=(4, 8), learning_rates=(100, 200),
                    iteration_counts=(60,), seed_base=1)


class TestRunGridSearch:
    def test_rerun_identical(self, small_dataset, mini_grid):
        pool1 = run_grid_search(small_dataset, mini_grid)
        pool2 = run_grid_search(small_dataset, mini_grid)
        for a, b in zip(pool1, pool2):
            assert np.array_equal(a.embedding.coords, b.embedding.coords)
            assert a.scores == b.scores

    def test_parallelism_invariant(self, small_dataset, mini_grid):
        pool1 = run_grid_search(small_dataset, mini_grid, parallelism=1)
        pool4 = run_grid_search(small_dataset, mini_grid, parallelism=4)
        for a, b in zip(pool1, pool4):
            assert np.array_equal(a.embedding.coords, b.embedding.coords)
            assert a.instrumentation.total_cost == b.instrumentation.total_cost

    def test_scores_match_recomputation(self, small_dataset, mini_grid):
        pool = run_grid_search(small_dataset, mini_grid)
        assert len(pool) == 4
        for rec in pool:
            fresh = compute_quality_scores(small_dataset, rec.embedding)
            for m in ("t", "c", "s", "sdc", "qma"):
                assert abs(rec.scores.get(m) - fresh.get(m)) < 1e-9
                assert 0.0 <= rec.scores.get(m) <= 1.0

    def test_progress_monotone(self, small_dataset, mini_grid):
        seen = []
        run_grid_search(small_dataset, mini_grid,
                        progress=lambda done, total: seen.append((done, total)))
        assert seen == [(1, 4), (2, 4), (3, 4), (4, 4)]

    def test_failure_fraction_aborts(self, small_dataset):
        # diverging learning rate makes every run fail
        grid = GridSpec(perplexities=(4,), learning_rates=(1e300,),
                        iteration_counts=(60,))
        with pytest.raises(SearchError):
            run_grid_search(small_dataset, grid)


# ---------------------------------------------------------------- procrustes

class TestProcrustes:
    def test_similarity_invariance(self, rng):
        coords = rng.standard_normal((25, 2))
        moved = similarity_transform(coords, angle=0.7, scale=3.2, shift=np.array([4.0, -1.0]))
        assert procrustes_distance(coords, moved) <= 1e-9

    def test_reflection_invariance(self, rng):
        coords = rng.standard_normal((25, 2))
        mirrored = similarity_transform(coords, angle=1.3, scale=0.5,
                                        shift=np.zeros(2), reflect=True)
        assert procrustes_distance(coords, mirrored) <= 1e-9

    def test_symmetry(self, rng):
        for _ in range(10):
            a = rng.standard_normal((12, 2))
            b = rng.standard_normal((12, 2))
            assert abs(procrustes_distance(a, b) - procrustes_distance(b, a)) < 1e-12

    def test_matches_rotation_grid_oracle(self, rng):
        for _ in range(5):
            a = rng.standard_normal((4, 2))
            b = rng.standard_normal((4, 2))
            assert procrustes_distance(a, b) == pytest.approx(
                procrustes_grid_oracle(a, b), abs=1e-6)

    def test_degenerate_configuration(self):
        coincident = np.ones((5, 2))
        spread = np.random.default_rng(0).standard_normal((5, 2))
        with pytest.raises(ComputationError, match="degenerate"):
            procrustes_distance(coincident, spread)

    def test_matrix_matches_pairwise(self, rng):
        embeddings = [rng.standard_normal((10, 2)) for _ in range(6)]
        mat = procrustes_matrix(embeddings)
        for i in range(6):
            for j in range(6):
                assert mat[i, j] == pytest.approx(
                    procrustes_distance(embeddings[i], embeddings[j]), abs=1e-12)
        assert np.array_equal(mat, mat.T)
        assert np.all(np.diag(mat) == 0)


# ---------------------------------------------------------------- k-medoids

class TestKMedoids:
    def two_blob_distances(self, rng):
        pts = np.vstack([rng.standard_normal((5, 2)),
                         rng.standard_normal((5, 2)) + 50.0])
        diff = pts[:, None, :] - pts[None, :, :]
        return np.sqrt((diff ** 2).sum(-1))

    def test_k_equals_n(self, rng):
        d = self.two_blob_distances(rng)
        medoids, assignment, cost = kmedoids(d, 10)
        assert sorted(medoids.tolist()) == list(range(10))
        assert cost == 0.0

    def test_recovers_exhaustive_optimum(self, rng):
        for _ in range(10):
            d = self.two_blob_distances(rng)
            medoids, _, cost = kmedoids(d, 2)
            oracle_pair, oracle_cost = kmedoids_exhaustive_pair(d)
            assert set(medoids.tolist()) == oracle_pair
            assert cost == pytest.approx(oracle_cost, abs=1e-12)

    def test_local_optimality_single_swap_sweep(self, rng):
        pts = rng.standard_normal((20, 2))
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt((diff ** 2).sum(-1))
        medoids, _, cost = kmedoids(d, 4)
        med = set(medoids.tolist())
        for m in list(med):
            for h in range(20):
                if h in med:
                    continue
                trial = np.array(sorted((med - {m}) | {h}))
                trial_cost = d[:, trial].min(axis=1).sum()
                assert cost <= trial_cost + 1e-9

    def test_swap_cost_monotone(self, rng):
        # objective recomputed after the fact cannot exceed the BUILD cost
        d = self.two_blob_distances(rng)
        medoids, assignment, cost = kmedoids(d, 3)
        build_only = np.minimum.reduce([d[i] for i in medoids.tolist()]).sum()
        assert cost <= build_only + 1e-12

    def test_validation(self, rng):
        d = self.two_blob_distances(rng)
        with pytest.raises(ValidationError):
            kmedoids(d, 0)
        with pytest.raises(ValidationError):
            kmedoids(d, 11)
        with pytest.raises(ValidationError):
            kmedoids(d[:3, :4], 1)


# ------------------------------------------------------------ representatives

def synthetic_pool(rng, count, n_points=12):
    """Records with random embeddings and hand-set scores."""
    from tsnelens.quality import QualityScores
    records = []
    for i in range(count):
        coords = rng.standard_normal((n_points, 2))
        q = float(rng.uniform(0.2, 0.95))
        scores = QualityScores(t=q, c=q, s=q, sdc=q, qma=q)
        records.append(ProjectionRecord(
            id=i, params=TsneParams(perplexity=3, max_iterations=60, seed=i),
            embedding=Embedding(coords),
            instrumentation=None, scores=scores))
    return records


class TestSelectRepresentatives:
    def test_medoid_count_clipped(self, rng):
        pool = synthetic_pool(rng, 10)
        reps = select_representatives(pool, k=25)
        assert len(reps.medoid_ids) == 10

    def test_members_of_pool(self, rng):
        pool = synthetic_pool(rng, 30)
        reps = select_representatives(pool, k=5)
        ids = {r.id for r in pool}
        assert set(reps.medoid_ids) <= ids
        assert set(reps.cluster_assignment) == ids

    def test_ordered_by_qma(self, rng):
        pool = synthetic_pool(rng, 20)
        reps = select_representatives(pool, k=6)
        qmas = [pool[rid].scores.qma for rid in reps.medoid_ids]
        assert qmas == sorted(qmas, reverse=True)

    def test_assignment_is_nearest_medoid(self, rng):
        pool = synthetic_pool(rng, 15)
        reps = select_representatives(pool, k=4)
        dist = procrustes_matrix([r.embedding for r in pool])
        med_idx = {rid: rid for rid in reps.medoid_ids}
        for rid, mid in reps.cluster_assignment.items():
            best = min(reps.medoid_ids, key=lambda m: dist[rid, m])
            assert dist[rid, mid] == pytest.approx(dist[rid, best], abs=1e-12)

    def test_failed_runs_excluded(self, rng):
        pool = synthetic_pool(rng, 8)
        pool.append(ProjectionRecord(id=8, params=TsneParams(perplexity=3, max_iterations=60),
                                     error="diverged"))
        reps = select_representatives(pool, k=20)
        assert 8 not in reps.medoid_ids
        assert 8 not in reps.cluster_assignment


class TestRankRepresentatives:
    def test_hand_set_scores_order(self):
        from tsnelens.quality import QualityScores
        records = []
        for rid, q in ((1, 0.9), (2, 0.5), (3, 0.7)):
            records.append(ProjectionRecord(
                id=rid, params=TsneParams(perplexity=3, max_iterations=60),
                embedding=Embedding(np.random.default_rng(rid).standard_normal((5, 2))),
                scores=QualityScores(t=q, c=q, s=q, sdc=q, qma=q)))
        assert rank_representatives(records, "qma", top=3) == [1, 3, 2]

    def test_top_limits_output(self, rng):
        pool = synthetic_pool(rng, 10)
        assert len(rank_representatives(pool, "qma", top=6)) == 6

    def test_selection_of_everything_matches_global(self, rng):
        ds = blob_dataset(stds=(0.3, 0.6), per_cluster=10, seed=5)
        grid = GridSpec(perplexities=(3, 5), learning_rates=(100,),
                        iteration_counts=(60,), seed_base=0)
        pool = run_grid_search(ds, grid)
        everything = Selection(indices=tuple(range(ds.n)))
        global_order = rank_representatives(pool, "t", top=10)
        sel_order = rank_representatives(pool, "t", selection=everything,
                                         top=10, dataset=ds)
        assert global_order == sel_order

    def test_selection_requires_dataset(self, rng):
        pool = synthetic_pool(rng, 4)
        with pytest.raises(ValidationError, match="dataset"):
            rank_representatives(pool, "t", selection=Selection(indices=(0, 1)))
