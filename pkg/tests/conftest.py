import numpy as np
import pytest

from gtvdenoise import build_topology, compute_edge_weights, handcrafted_features


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_patch_graph(rng, height, width, epsilon=0.3):
    """Uniform-random patch and its handcrafted-feature weighted graph."""
    patch = rng.random((height, width))
    feats = handcrafted_features(patch)
    wgraph = compute_edge_weights(build_topology(height, width), feats, epsilon)
    return patch, wgraph
