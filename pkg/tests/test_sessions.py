import json
import threading

import numpy as np
import pytest

from tsnelens import ComputationError, Embedding, NotFoundError
from tsnelens.quality import QualityScores, Selection
from tsnelens.search import GridSpec, ProjectionRecord
from tsnelens.sessions import (Annotation, MigrationError, SessionStore,
                               load_session, new_session_id, save_session)
from tsnelens.tsne import Instrumentation, TsneParams


def random_record(rng, rid, n=15):
    coords = rng.standard_normal((n, 2)) * rng.uniform(0.5, 20)
    sigma = rng.uniform(0.2, 3.0, n)
    q = {m: float(rng.uniform(0, 1)) for m in ("nh", "t", "c", "s", "sdc")}
    scores = QualityScores(qma=float(np.mean(list(q.values()))), **q)
    return ProjectionRecord(
        id=rid,
        params=TsneParams(perplexity=float(rng.uniform(2, 4)),
                          learning_rate=float(rng.uniform(10, 500)),
                          max_iterations=int(rng.integers(50, 300)),
                          theta=float(rng.uniform(0, 1)),
                          seed=int(rng.integers(0, 10 ** 6))),
        embedding=Embedding(coords),
        instrumentation=Instrumentation(sigma=sigma, density=sigma ** -2.0,
                                        point_cost=rng.uniform(0, 2, n),
                                        total_cost=float(rng.uniform(0, 5))),
        scores=scores,
    )


def random_session(rng, n_records=4):
    records = tuple(random_record(rng, i) for i in range(n_records))
    annotations = tuple(
        Annotation(timestamp=f"2026-08-10T0{i}:00:00+00:00", author="t",
                   text=f"note {i}",
                   selection=Selection(indices=(0, int(rng.integers(1, 10)))) if i % 2 else None)
        for i in range(int(rng.integers(0, 3)))
    )
    sid = new_session_id()
    return SessionStore(
        session_id=sid,
        dataset_id="d" + sid[:8],
        grid=GridSpec(perplexities=(2.0, 5.0), learning_rates=(100.0,),
                      iteration_counts=(60,), seed_base=int(rng.integers(0, 100))),
        representatives=records,
        chosen_projection_id=f"{sid}:0" if n_records else None,
        annotations=annotations,
    )


def assert_sessions_equal(a: SessionStore, b: SessionStore):
    assert a.session_id == b.session_id
    assert a.dataset_id == b.dataset_id
    assert a.grid == b.grid
    assert a.chosen_projection_id == b.chosen_projection_id
    assert a.annotations == b.annotations
    assert len(a.representatives) == len(b.representatives)
    for ra, rb in zip(a.representatives, b.representatives):
        assert ra.id == rb.id
        assert ra.params == rb.params
        assert np.array_equal(ra.embedding.coords, rb.embedding.coords)
        assert np.array_equal(ra.instrumentation.sigma, rb.instrumentation.sigma)
        assert np.array_equal(ra.instrumentation.density, rb.instrumentation.density)
        assert np.array_equal(ra.instrumentation.point_cost, rb.instrumentation.point_cost)
        assert ra.instrumentation.total_cost == rb.instrumentation.total_cost
        assert ra.scores == rb.scores


class TestRoundTrip:
    def test_four_record_session(self, rng, tmp_path):
        store = random_session(rng, n_records=4)
        sid = save_session(store, tmp_path)
        loaded = load_session(sid, tmp_path)
        assert_sessions_equal(store, loaded)

    def test_fuzzed_round_trips(self, rng, tmp_path):
        for _ in range(15):
            store = random_session(rng, n_records=int(rng.integers(0, 6)))
            save_session(store, tmp_path)
            assert_sessions_equal(store, load_session(store.session_id, tmp_path))

    def test_failed_record_round_trips(self, rng, tmp_path):
        rec = ProjectionRecord(id=0, params=TsneParams(), error="diverged at iteration 3")
        store = SessionStore(session_id=new_session_id(), dataset_id="dx",
                             representatives=(rec,))
        save_session(store, tmp_path)
        loaded = load_session(store.session_id, tmp_path)
        assert loaded.representatives[0].failed
        assert loaded.representatives[0].error == "diverged at iteration 3"


class TestFailureModes:
    def test_unknown_id(self, tmp_path):
        with pytest.raises(NotFoundError):
            load_session("missing", tmp_path)

    def test_version_mismatch(self, rng, tmp_path):
        store = random_session(rng, 1)
        sid = save_session(store, tmp_path)
        manifest = tmp_path / "sessions" / sid / "manifest.json"
        obj = json.loads(manifest.read_text())
        obj["version"] = 99
        manifest.write_text(json.dumps(obj))
        with pytest.raises(MigrationError):
            load_session(sid, tmp_path)

    def test_corrupted_blob(self, rng, tmp_path):
        store = random_session(rng, 2)
        sid = save_session(store, tmp_path)
        blob = next((tmp_path / "sessions" / sid / "blobs").glob("*.json"))
        blob.write_bytes(blob.read_bytes()[:-10] + b"corruption")
        with pytest.raises(ComputationError, match="corrupt|hash"):
            load_session(sid, tmp_path)

    def test_corrupted_load_leaves_store_intact(self, rng, tmp_path):
        keep = random_session(rng, 1)
        save_session(keep, tmp_path)
        broken = random_session(rng, 1)
        sid = save_session(broken, tmp_path)
        manifest = tmp_path / "sessions" / sid / "manifest.json"
        manifest.write_text("{not json")
        with pytest.raises(ComputationError):
            load_session(sid, tmp_path)
        # unrelated session still loads
        assert_sessions_equal(keep, load_session(keep.session_id, tmp_path))


class TestConcurrency:
    def test_concurrent_saves_distinct(self, rng, tmp_path):
        stores = [random_session(np.random.default_rng(seed), 2) for seed in range(8)]
        threads = [threading.Thread(target=save_session, args=(s, tmp_path)) for s in stores]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        ids = [s.session_id for s in stores]
        assert len(set(ids)) == len(ids)
        for s in stores:
            assert_sessions_equal(s, load_session(s.session_id, tmp_path))
