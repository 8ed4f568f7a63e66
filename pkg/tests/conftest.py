import numpy as np
import pytest

from tsnelens import Dataset


def random_dataset(rng, n, d, labels=None):
    values = rng.standard_normal((n, d))
    return Dataset(values=values, dim_names=tuple(f"d{j}" for j in range(d)), labels=labels)


def line_dataset(n=100, noise=0.05, seed=3):
    """Points along a noisy 1-D curve in 5-D; t-SNE unrolls it reproducibly."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 10, n)
    values = np.column_stack([t, np.sin(t), np.cos(t), 0.3 * t, 0.1 * t ** 1.5])
    values = values + noise * rng.standard_normal(values.shape)
    return Dataset(values=values, dim_names=("a", "b", "c", "d", "e"))


def blob_dataset(stds=(0.2, 0.5, 1.0), per_cluster=100, dim=5, seed=11):
    """Gaussian clusters with distinct spreads and slight overlap."""
    rng = np.random.default_rng(seed)
    centers = np.zeros((len(stds), dim))
    for i in range(len(stds)):
        centers[i, i % dim] = 6.0 * (i + 1)
    parts, labels = [], []
    for i, std in enumerate(stds):
        parts.append(centers[i] + std * rng.standard_normal((per_cluster, dim)))
        labels += [f"c{i}"] * per_cluster
    return Dataset(values=np.vstack(parts),
                   dim_names=tuple(f"d{j}" for j in range(dim)),
                   labels=tuple(labels))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
