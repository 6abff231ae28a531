"""Cross-check the density clustering against scikit-learn's HDBSCAN.

The two implementations share the HDBSCAN definition (min_samples =
min_cluster_size, excess-of-mass selection, no single-cluster shortcut) but
differ in how they break exact ties in the mutual-reachability graph, so the
comparison uses clean geometries where the answer is tie-free.
"""

import numpy as np
import pytest

import dce

sklearn_cluster = pytest.importorskip("sklearn.cluster")
if not hasattr(sklearn_cluster, "HDBSCAN"):
    pytest.skip("sklearn too old for HDBSCAN", allow_module_level=True)


def sklearn_count(points, mcs):
    labels = sklearn_cluster.HDBSCAN(min_cluster_size=mcs).fit(np.asarray(points)).labels_
    return int(labels.max()) + 1 if labels.max() >= 0 else 0


def as_lists(points):
    return [list(map(float, p)) for p in points]


@pytest.mark.parametrize("mcs", [3, 5, 7, 10])
def test_two_separated_blobs(mcs):
    rng = np.random.default_rng(7)
    pts = np.vstack(
        [rng.normal(0, 0.05, (12, 3)), rng.normal(0, 0.05, (12, 3)) + 6.0]
    )
    assert dce.cluster_count(as_lists(pts), mcs) == sklearn_count(pts, mcs) == 2


@pytest.mark.parametrize("mcs", [3, 5, 7, 10])
def test_three_blobs(mcs):
    rng = np.random.default_rng(8)
    pts = np.vstack(
        [
            rng.normal(0, 0.1, (14, 4)),
            rng.normal(0, 0.1, (12, 4)) + 10.0,
            rng.normal(0, 0.1, (20, 4)) - 10.0,
        ]
    )
    assert dce.cluster_count(as_lists(pts), mcs) == sklearn_count(pts, mcs)


@pytest.mark.parametrize("mcs", [5, 7, 10])
def test_sparse_uniform_noise(mcs):
    rng = np.random.default_rng(9)
    pts = rng.uniform(0, 100, (40, 3))
    assert dce.cluster_count(as_lists(pts), mcs) == sklearn_count(pts, mcs)


@pytest.mark.parametrize("mcs", [5, 7, 10])
def test_nested_densities(mcs):
    rng = np.random.default_rng(10)
    pts = np.vstack([rng.normal(0, 0.02, (18, 2)), rng.normal(0, 3.0, (25, 2))])
    assert dce.cluster_count(as_lists(pts), mcs) == sklearn_count(pts, mcs)
