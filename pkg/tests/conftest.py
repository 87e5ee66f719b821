"""Shared brute-force oracles, deliberately independent of the package's
own algorithms: closures via Floyd-Warshall instead of Dijkstra, covers via
subset enumeration instead of branch and bound."""

import itertools

import numpy as np
import pytest

from quasimetric import Direction, Mode, QuasiMetric, build_from_matrix


def floyd_warshall(weights: np.ndarray) -> np.ndarray:
    """Min-plus closure of a weight matrix (inf = no edge)."""
    d = weights.astype(np.float64).copy()
    np.fill_diagonal(d, 0.0)
    n = d.shape[0]
    for k in range(n):
        d = np.minimum(d, d[:, k][:, None] + d[k, :][None, :])
    return d


def random_quasimetric(rng: np.random.Generator, n: int,
                       wmax: int = 9) -> QuasiMetric:
    """Strict integer-valued space: random complete digraph, then closure."""
    w = rng.integers(1, wmax + 1, size=(n, n)).astype(np.float64)
    return build_from_matrix(floyd_warshall(w), mode=Mode.STRICT)


def brute_ball(qm: QuasiMetric, center: int, radius: float,
               direction: Direction) -> set:
    out = set()
    for y in range(qm.n):
        d = qm.dist[center, y] if direction is Direction.OUTER else qm.dist[y, center]
        if d <= radius:
            out.add(y)
    return out


def covers_point(qm: QuasiMetric, c: int, x: int, alpha: float,
                 direction: Direction) -> bool:
    d = qm.dist[c, x] if direction is Direction.OUTER else qm.dist[x, c]
    return d <= alpha


def brute_min_cover(qm: QuasiMetric, target, candidates, alpha: float,
                    direction: Direction):
    """Exhaustive minimum cover: try all candidate subsets by ascending size.

    Returns (size, ids) or (None, None) if no subset covers the target.
    """
    tgt = sorted(set(target))
    cand = sorted(set(candidates))
    for size in range(1, len(cand) + 1):
        for combo in itertools.combinations(cand, size):
            if all(any(covers_point(qm, c, x, alpha, direction) for c in combo)
                   for x in tgt):
                return size, list(combo)
    return None, None


def brute_max_packing(dist: np.ndarray, members, half: float) -> int:
    """Exhaustive maximum r/2-separated subset of a ball (symmetric dist)."""
    mem = sorted(members)
    best = 0
    for size in range(len(mem), 0, -1):
        for combo in itertools.combinations(mem, size):
            if all(dist[a, b] >= half
                   for a, b in itertools.combinations(combo, 2)):
                return size
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
