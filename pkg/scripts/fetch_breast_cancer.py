#!/usr/bin/env python3
"""Fetch the original Breast Cancer Wisconsin data (699 cases, 9 dimensions)
from the UCI repository and write the test fixture CSV.

The raw file marks 16 missing bare-nuclei values with '?'. The CSV ingester
rejects missing values by design, so this script imputes them with the
column median before writing the fixture; the row count stays at 699.

Usage: python3 scripts/fetch_breast_cancer.py [dest_csv]
Default destination: tests/fixtures/breast_cancer_wisconsin.csv
"""

import statistics
import sys
import urllib.request
from pathlib import Path

URLS = [
    "https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/breast-cancer-wisconsin.data",
    "https://archive.ics.uci.edu/static/public/15/data.csv",
]

DIM_NAMES = [
    "clump_thickness", "size_uniformity", "shape_uniformity",
    "marginal_adhesion", "epithelial_size", "bare_nuclei",
    "bland_chromatin", "normal_nucleoli", "mitoses",
]
LABELS = {"2": "benign", "4": "malignant"}


def fetch() -> str:
    last = None
    for url in URLS:
        try:
            with urllib.request.urlopen(url, timeout=30) as resp:
                return resp.read().decode("utf-8")
        except Exception as exc:  # noqa: BLE001
            last = exc
    raise SystemExit(f"could not download the dataset: {last}")


def main():
    dest = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "tests" / "fixtures"
        / "breast_cancer_wisconsin.csv")
    raw = fetch()
    rows = []
    for line in raw.strip().splitlines():
        parts = line.strip().split(",")
        if len(parts) != 11 or not parts[0].isdigit():
            continue  # the static mirror ships a header row
        rows.append(parts[1:])  # drop the sample code number
    if len(rows) != 699:
        raise SystemExit(f"expected 699 cases, parsed {len(rows)}")
    bare = [float(r[5]) for r in rows if r[5] != "?"]
    fill = str(int(statistics.median(bare)))
    n_missing = 0
    for r in rows:
        if r[5] == "?":
            r[5] = fill
            n_missing += 1
    dest.parent.mkdir(parents=True, exist_ok=True)
    with dest.open("w") as fh:
        fh.write(",".join(DIM_NAMES + ["label"]) + "\n")
        for r in rows:
            fh.write(",".join(r[:9] + [LABELS[r[9]]]) + "\n")
    print(f"wrote {dest} ({len(rows)} rows, {n_missing} bare_nuclei values imputed to {fill})")


if __name__ == "__main__":
    main()
