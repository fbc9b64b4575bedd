"""Randomized spectral clustering (random projection and random sampling) on block-model graphs."""

import json

import numpy as np

from . import _rsclust
from ._rsclust import Error, cluster, misclassification_l1, pair_metrics, preset_names, sample_graph

__all__ = [
    "Error",
    "benchmark_model",
    "cluster",
    "eq47",
    "misclassification_l1",
    "pair_metrics",
    "preset",
    "preset_names",
    "run",
    "sample",
    "sample_graph",
]


def preset(name):
    return json.loads(_rsclust.preset_json(name))


def run(config, write=False):
    """Run a synthetic, real or timing config (a dict, as in aggregate.json's "config")."""
    return json.loads(_rsclust.run_json(json.dumps(config), write))


def eq47(n, K=3, alpha=0.2, lambda_=0.5):
    return json.loads(_rsclust.eq47_json(n, K, alpha, lambda_))


def benchmark_model(name, n, seed=0):
    return json.loads(_rsclust.benchmark_json(name, n, seed))


def sample(params, seed):
    """Draw a graph; returns (n, edges, weights, truth labels)."""
    n, edges, weights = _rsclust.sample_graph(json.dumps(params), seed)
    if "g" in params:
        truth = np.asarray(params["g"], dtype=np.int64)
    else:
        sizes = params["community_sizes"]
        truth = np.repeat(np.arange(len(sizes)), sizes)
    return n, edges, weights, truth
