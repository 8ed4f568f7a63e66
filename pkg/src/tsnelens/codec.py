"""Wire formats shared by the session store, the HTTP service and the CLI.

Float arrays travel as base64-encoded little-endian 64-bit values inside the
JSON envelope so round-trips are bit-exact regardless of the JSON serializer.
"""

from __future__ import annotations

import base64
import json

import numpy as np

from .dataset import Dataset
from .errors import ValidationError
from .quality import QualityScores, Selection
from .search import GridSpec, ProjectionRecord
from .tsne import Embedding, Instrumentation, TsneParams


def encode_floats(arr: np.ndarray) -> str:
    data = np.ascontiguousarray(arr, dtype="<f8").tobytes()
    return base64.b64encode(data).decode("ascii")


def decode_floats(text: str, shape=None) -> np.ndarray:
    try:
        raw = base64.b64decode(text.encode("ascii"), validate=True)
    except Exception as exc:
        raise ValidationError(f"invalid base64 float payload: {exc}") from exc
    arr = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    if shape is not None:
        try:
            arr = arr.reshape(shape)
        except ValueError as exc:
            raise ValidationError(f"float payload has wrong size: {exc}") from exc
    return arr


def canonical_json_bytes(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


# ------------------------------------------------------------------ dataset

def dataset_to_wire(ds: Dataset) -> dict:
    return {
        "n": ds.n,
        "d": ds.d,
        "dim_names": list(ds.dim_names),
        "labels": list(ds.labels) if ds.labels is not None else None,
        "values": encode_floats(ds.values),
    }


def dataset_from_wire(obj: dict) -> Dataset:
    values = decode_floats(obj["values"], shape=(obj["n"], obj["d"]))
    labels = obj.get("labels")
    return Dataset(values=values, dim_names=tuple(obj["dim_names"]),
                   labels=tuple(labels) if labels is not None else None)


# ------------------------------------------------------------------- params

def params_to_wire(p: TsneParams) -> dict:
    return {"perplexity": p.perplexity, "learning_rate": p.learning_rate,
            "max_iterations": p.max_iterations, "theta": p.theta, "seed": p.seed}


def params_from_wire(obj: dict) -> TsneParams:
    return TsneParams(**{k: obj[k] for k in
                         ("perplexity", "learning_rate", "max_iterations", "theta", "seed")})


# ------------------------------------------------------------------- scores

def scores_to_wire(s: QualityScores) -> dict:
    return {"nh": s.nh, "t": s.t, "c": s.c, "s": s.s, "sdc": s.sdc, "qma": s.qma}


def scores_from_wire(obj: dict) -> QualityScores:
    return QualityScores(nh=obj.get("nh"), t=obj["t"], c=obj["c"], s=obj["s"],
                         sdc=obj["sdc"], qma=obj["qma"])


# ------------------------------------------------------------------- record

def record_to_wire(rec: ProjectionRecord) -> dict:
    out = {"id": rec.id, "params": params_to_wire(rec.params), "error": rec.error}
    if rec.failed:
        return out
    out["n"] = rec.embedding.n
    out["embedding"] = encode_floats(rec.embedding.coords)
    out["instrumentation"] = {
        "sigma": encode_floats(rec.instrumentation.sigma),
        "point_cost": encode_floats(rec.instrumentation.point_cost),
        "total_cost": rec.instrumentation.total_cost,
    }
    out["scores"] = scores_to_wire(rec.scores) if rec.scores is not None else None
    return out


def record_from_wire(obj: dict) -> ProjectionRecord:
    params = params_from_wire(obj["params"])
    if obj.get("error") is not None:
        return ProjectionRecord(id=obj["id"], params=params, error=obj["error"])
    n = obj["n"]
    sigma = decode_floats(obj["instrumentation"]["sigma"], shape=(n,))
    instr = Instrumentation(
        sigma=sigma,
        density=sigma ** -2.0,
        point_cost=decode_floats(obj["instrumentation"]["point_cost"], shape=(n,)),
        total_cost=obj["instrumentation"]["total_cost"],
    )
    scores = scores_from_wire(obj["scores"]) if obj.get("scores") is not None else None
    return ProjectionRecord(
        id=obj["id"], params=params,
        embedding=Embedding(decode_floats(obj["embedding"], shape=(n, 2))),
        instrumentation=instr, scores=scores)


# --------------------------------------------------------------------- grid

def grid_to_wire(grid: GridSpec) -> dict:
    return {"perplexities": list(grid.perplexities),
            "learning_rates": list(grid.learning_rates),
            "iteration_counts": list(grid.iteration_counts),
            "seed_base": grid.seed_base}


def grid_from_wire(obj: dict) -> GridSpec:
    return GridSpec(perplexities=tuple(obj["perplexities"]),
                    learning_rates=tuple(obj["learning_rates"]),
                    iteration_counts=tuple(obj["iteration_counts"]),
                    seed_base=obj["seed_base"])


# ---------------------------------------------------------------- selection

def selection_from_wire(obj) -> Selection | None:
    if obj is None:
        return None
    if isinstance(obj, dict):
        obj = obj.get("indices")
    if obj is None or len(obj) == 0:
        return None
    return Selection(indices=tuple(int(i) for i in obj))


def decimate_coords(coords: np.ndarray, cap: int = 1000) -> dict:
    """Stride-sampled preview of an embedding for thumbnail payloads."""
    n = coords.shape[0]
    stride = max(1, int(np.ceil(n / cap)))
    pts = coords[::stride]
    return {"n": n, "stride": stride,
            "points": [[float(x), float(y)] for x, y in pts]}
