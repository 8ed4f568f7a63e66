#!/usr/bin/env python3
"""Record real service responses for the frontend snapshot tests.

Runs the backend in-process against a deterministic dataset, executes a small
grid search, then captures the exact responses for a fixed lasso selection
and a fixed polyline. The UI tests replay these gestures against a mocked
fetch and assert the rendered values equal these raw payloads.
"""

import json
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from fastapi.testclient import TestClient  # noqa: E402
from tsnelens.service import create_app  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "scenario.json"

LASSO_INDICES = list(range(0, 18, 2)) + [19, 23, 27]


def make_csv(n=40, d=4, seed=7):
    rng = np.random.default_rng(seed)
    header = [f"f{j}" for j in range(d)] + ["label"]
    lines = [",".join(header)]
    centers = [np.zeros(d), np.full(d, 4.0)]
    for i in range(n):
        c = centers[i % 2]
        row = [f"{v:.8f}" for v in c + rng.standard_normal(d)]
        row.append("even" if i % 2 == 0 else "odd")
        lines.append(",".join(row))
    return ("\n".join(lines) + "\n").encode()


def main():
    with tempfile.TemporaryDirectory() as tmp:
        client = TestClient(create_app(data_dir=tmp))
        did = client.post("/datasets", content=make_csv()).json()["dataset_id"]
        sid = client.post("/sessions", json={"dataset_id": did}).json()["session_id"]
        job = client.post(f"/sessions/{sid}/grid-search", json={
            "grid": {"perplexities": [5, 10], "learning_rates": [100, 200],
                     "iteration_counts": [120], "seed_base": 3},
            "parallelism": 2, "representatives": 4,
        }).json()
        while True:
            state = client.get(f"/jobs/{job['job_id']}").json()
            if state["status"] != "running":
                break
            time.sleep(0.05)
        assert state["status"] == "done", state

        reps = client.get(f"/sessions/{sid}/representatives?metric=qma").json()
        pid = reps["representatives"][0]["projection_id"]
        projection = client.get(f"/projections/{pid}").json()

        # fixed polyline across the embedding diagonal
        from tsnelens.codec import decode_floats
        coords = decode_floats(projection["embedding"], shape=(projection["n"], 2))
        lo, hi = coords.min(axis=0), coords.max(axis=0)
        polyline = [[float(lo[0]), float(lo[1])], [float(hi[0]), float(hi[1])]]
        rho = float(np.linalg.norm(hi - lo)) * 0.4

        scenario = {
            "session_id": sid,
            "projection_id": pid,
            "session": client.get(f"/sessions/{sid}").json(),
            "dataset": client.get(f"/datasets/{did}").json(),
            "representatives": reps,
            "projection": projection,
            "shepard_heatmap": client.get(f"/projections/{pid}/shepard?mode=heatmap&bins=10&cap=5000").json(),
            "histograms": client.get(f"/projections/{pid}/histograms?bins=20").json(),
            "np_global": client.post(f"/projections/{pid}/np", json={
                "selection": None, "k_max": None, "variant": "bar"}).json(),
            "lasso_indices": LASSO_INDICES,
            "np_selection": client.post(f"/projections/{pid}/np", json={
                "selection": LASSO_INDICES, "k_max": None, "variant": "bar"}).json(),
            "axes_selection": client.post(f"/projections/{pid}/adaptive-axes", json={
                "selection": LASSO_INDICES}).json(),
            "polyline": polyline,
            "rho": rho,
            "dimcorr": client.post(f"/projections/{pid}/dimension-correlation", json={
                "polyline": polyline, "rho": rho, "threshold": None}).json(),
            "rank_selection": client.post(f"/sessions/{sid}/representatives/rank", json={
                "metric": "qma", "selection": LASSO_INDICES, "top": 6}).json(),
        }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(scenario, indent=1, sort_keys=True))
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
