"""Finite quasi-metric spaces: construction, validation, and basic queries.

A quasi-metric is a distance function that is non-negative, zero on the
diagonal, and satisfies the directed triangle inequality, but is *not*
required to be symmetric.  Spaces here are finite and stored as dense
``float64`` matrices; ``dist[i, j]`` is the cost of going from point ``i``
to point ``j``.

Two modes are supported.  ``strict`` requires every entry to be finite.
``relaxed`` admits ``+inf`` entries for ordered pairs with no path at all;
the triangle inequality is then only enforced where the left-hand side is
finite.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

DEFAULT_TOLERANCE = 1e-9

# Environment override for the validation tolerance, mainly for the CLI.
TOLERANCE_ENV_VAR = "QUASIMETRIC_TOLERANCE"


class Mode(str, Enum):
    STRICT = "strict"
    RELAXED = "relaxed"


class Direction(str, Enum):
    """Orientation of a ball or cover.

    OUTER looks at distances *from* a center (who the center can reach);
    INNER looks at distances *to* a center (who can reach the center).
    """

    OUTER = "outer"
    INNER = "inner"

    def flipped(self) -> "Direction":
        return Direction.INNER if self is Direction.OUTER else Direction.OUTER


def default_tolerance() -> float:
    """Validation tolerance, overridable via QUASIMETRIC_TOLERANCE."""
    raw = os.environ.get(TOLERANCE_ENV_VAR)
    if raw is None:
        return DEFAULT_TOLERANCE
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValueError(f"bad {TOLERANCE_ENV_VAR} value: {raw!r}") from exc
    if value < 0:
        raise ValueError(f"{TOLERANCE_ENV_VAR} must be non-negative")
    return value


@dataclass
class ValidationReport:
    """Outcome of an axiom check.

    ``triangle_violations`` holds up to ``max_reported`` offending triples
    as ``(i, j, k, lhs, rhs)`` meaning ``dist[i, j] > dist[i, k] + dist[k, j]``
    beyond tolerance; ``triangle_count`` is the true total.
    """

    passed: bool
    tolerance: float
    triangle_violations: list[tuple[int, int, int, float, float]] = field(default_factory=list)
    triangle_count: int = 0
    negative_entries: list[tuple[int, int, float]] = field(default_factory=list)
    nonzero_diagonal: list[tuple[int, float]] = field(default_factory=list)
    symmetry_violations: list[tuple[int, int, float, float]] = field(default_factory=list)
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "triangle_violations": [list(v) for v in self.triangle_violations],
            "triangle_count": self.triangle_count,
            "negative_entries": [list(v) for v in self.negative_entries],
            "nonzero_diagonal": [list(v) for v in self.nonzero_diagonal],
            "symmetry_violations": [list(v) for v in self.symmetry_violations],
            "truncated": self.truncated,
        }


@dataclass
class QuasiMetric:
    """A finite quasi-metric space backed by a dense distance matrix.

    ``validated`` is None until :func:`validate` has run, then records the
    outcome of that check.
    """

    dist: np.ndarray
    mode: Mode = Mode.STRICT
    validated: Optional[bool] = None

    def __post_init__(self) -> None:
        self.dist = np.asarray(self.dist, dtype=np.float64)
        self.dist.setflags(write=False)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def has_infinite(self) -> bool:
        return bool(np.isinf(self.dist).any())

    def points(self) -> range:
        return range(self.n)


@dataclass
class QueryVectors:
    """Distances between an out-of-sample query point and the space.

    ``from_query[i]`` is the distance from the query to point ``i`` and
    ``to_query[i]`` the distance from point ``i`` to the query.  Either side
    may be omitted when the caller only needs one orientation.
    """

    from_query: Optional[Sequence[float]] = None
    to_query: Optional[Sequence[float]] = None


@dataclass(frozen=True)
class NearestResult:
    index: int
    distance: float
    evaluations: int


def build_from_matrix(entries, mode: Mode = Mode.STRICT,
                      strict_identity: bool = False) -> QuasiMetric:
    """Build a space from a square array of distances.

    Raises ValueError on non-square input, NaN or negative entries, or an
    infinite entry in strict mode.  ``strict_identity=True`` additionally
    rejects zero distances between distinct points.
    """
    mode = Mode(mode)
    dist = np.array(entries, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {dist.shape}")
    if dist.shape[0] == 0:
        raise ValueError("empty space (n must be at least 1)")
    if np.isnan(dist).any():
        raise ValueError("distance matrix contains NaN")
    if (dist < 0).any():
        i, j = np.argwhere(dist < 0)[0]
        raise ValueError(f"negative distance {dist[i, j]} at ({i}, {j})")
    if mode is Mode.STRICT and np.isinf(dist).any():
        i, j = np.argwhere(np.isinf(dist))[0]
        raise ValueError(f"infinite distance at ({i}, {j}) not allowed in strict mode")
    if strict_identity:
        off = dist + np.diag(np.full(dist.shape[0], np.inf))
        if (off == 0).any():
            i, j = np.argwhere(off == 0)[0]
            raise ValueError(f"zero distance between distinct points ({i}, {j})")
    return QuasiMetric(dist=dist, mode=mode)


def build_from_digraph(n: int, edges: Iterable[tuple[int, int, float]],
                       mode: Mode = Mode.STRICT) -> QuasiMetric:
    """Shortest-path closure of a weighted digraph on vertices 0..n-1.

    Parallel edges keep the minimum weight.  In strict mode every ordered
    pair must be reachable; in relaxed mode unreachable pairs become +inf.
    """
    mode = Mode(mode)
    if n < 1:
        raise ValueError("n must be at least 1")
    best: dict[tuple[int, int], float] = {}
    for u, v, w in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        w = float(w)
        if math.isnan(w) or w < 0:
            raise ValueError(f"edge ({u}, {v}) has bad weight {w}")
        if u == v:
            continue  # self-loops never shorten a path
        key = (u, v)
        if key not in best or w < best[key]:
            best[key] = w
    if best:
        rows, cols, data = zip(*((u, v, w) for (u, v), w in best.items()))
        graph = csr_matrix((data, (rows, cols)), shape=(n, n))
    else:
        graph = csr_matrix((n, n))
    dist = dijkstra(graph, directed=True)
    np.fill_diagonal(dist, 0.0)
    if mode is Mode.STRICT and np.isinf(dist).any():
        i, j = np.argwhere(np.isinf(dist))[0]
        raise ValueError(
            f"no path from {i} to {j}: graph is not strongly connected "
            "(use relaxed mode for partial reachability)")
    return QuasiMetric(dist=dist, mode=mode)


_MAX_REPORTED = 1000


def validate(qm: QuasiMetric, tolerance: Optional[float] = None) -> ValidationReport:
    """Check the quasi-metric axioms and return a report.

    A triple (i, j, k) is a violation when
    ``dist[i, j] > dist[i, k] + dist[k, j]`` by more than a relative
    ``tolerance``.  In relaxed mode, rows where the left-hand side is
    infinite are exempt.  Updates ``qm.validated``.
    """
    if tolerance is None:
        tolerance = default_tolerance()
    d = qm.dist
    n = qm.n
    report = ValidationReport(passed=True, tolerance=tolerance)

    diag = np.diagonal(d)
    for i in np.nonzero(diag != 0)[0]:
        report.nonzero_diagonal.append((int(i), float(diag[i])))
    neg = np.argwhere(d < 0)
    for i, j in neg[:_MAX_REPORTED]:
        report.negative_entries.append((int(i), int(j), float(d[i, j])))

    lhs_ok = np.isfinite(d) if qm.mode is Mode.RELAXED else np.ones_like(d, dtype=bool)
    for k in range(n):
        rhs = d[:, k][:, None] + d[k, :][None, :]
        bad = (d > rhs * (1.0 + tolerance) + 0.0) & lhs_ok
        # rhs may be inf in relaxed mode; inf rhs can never be violated
        bad &= np.isfinite(rhs)
        if not bad.any():
            continue
        for i, j in np.argwhere(bad):
            report.triangle_count += 1
            if len(report.triangle_violations) < _MAX_REPORTED:
                report.triangle_violations.append(
                    (int(i), int(j), int(k), float(d[i, j]), float(rhs[i, j])))
            else:
                report.truncated = True

    report.passed = (not report.triangle_violations
                     and not report.negative_entries
                     and not report.nonzero_diagonal
                     and not report.symmetry_violations)
    qm.validated = report.passed
    return report


def ball(qm: QuasiMetric, center: int, radius: float, direction: Direction) -> set[int]:
    """Closed directional ball of the given radius around ``center``.

    OUTER collects y with dist(center, y) <= radius, INNER collects y with
    dist(y, center) <= radius.  Infinite distances are never inside a ball.
    """
    direction = Direction(direction)
    if not (0 <= center < qm.n):
        raise ValueError(f"center {center} out of range")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    row = qm.dist[center, :] if direction is Direction.OUTER else qm.dist[:, center]
    return set(np.nonzero(row <= radius)[0].tolist())


def set_distance(qm: QuasiMetric, sources: Iterable[int], targets: Iterable[int]) -> float:
    """Minimum of dist(a, b) over a in sources, b in targets (order matters)."""
    src = sorted(set(int(i) for i in sources))
    tgt = sorted(set(int(i) for i in targets))
    if not src or not tgt:
        raise ValueError("set_distance requires non-empty id sets")
    for i in src + tgt:
        if not (0 <= i < qm.n):
            raise ValueError(f"id {i} out of range")
    return float(qm.dist[np.ix_(src, tgt)].min())


def diameter(qm: QuasiMetric) -> float:
    """Largest finite distance in the space (0 for a single point)."""
    d = qm.dist
    finite = d[np.isfinite(d)]
    return float(finite.max()) if finite.size else 0.0


def nearest(qm: QuasiMetric, candidates: Iterable[int],
            query, direction: Direction) -> NearestResult:
    """Nearest point of ``candidates`` to a query, one distance read per candidate.

    ``query`` is either a point id of the space or a :class:`QueryVectors`.
    INNER minimizes distance from the query to a candidate, OUTER the
    reverse.  Ties break to the lowest candidate id.
    """
    direction = Direction(direction)
    cand = sorted(set(int(i) for i in candidates))
    if not cand:
        raise ValueError("nearest requires a non-empty candidate set")
    for i in cand:
        if not (0 <= i < qm.n):
            raise ValueError(f"id {i} out of range")

    if isinstance(query, QueryVectors):
        vec = query.from_query if direction is Direction.INNER else query.to_query
        side = "from_query" if direction is Direction.INNER else "to_query"
        if vec is None:
            raise ValueError(f"query is missing the {side} side needed for {direction.value}")
        reader = _query_vector_reader(vec, qm.n, cand)
    else:
        q = int(query)
        if not (0 <= q < qm.n):
            raise ValueError(f"query id {q} out of range")
        if direction is Direction.INNER:
            reader = lambda c: float(qm.dist[q, c])
        else:
            reader = lambda c: float(qm.dist[c, q])

    best_id, best_d, evals = -1, math.inf, 0
    for c in cand:
        d = reader(c)
        evals += 1
        if d < best_d:
            best_id, best_d = c, d
    if best_id < 0:  # every candidate at +inf: keep lowest id
        best_id = cand[0]
    return NearestResult(index=best_id, distance=best_d, evaluations=evals)


def _query_vector_reader(vec: Sequence[float], n: int, cand: list[int]):
    arr = np.asarray(vec, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("query vector must be one-dimensional")
    if arr.shape[0] == n:
        return lambda c: float(arr[c])
    if arr.shape[0] == len(cand):
        pos = {c: i for i, c in enumerate(cand)}
        return lambda c: float(arr[pos[c]])
    raise ValueError(
        f"query vector has length {arr.shape[0]}, expected {n} (space size) "
        f"or {len(cand)} (candidate count)")


def transpose(qm: QuasiMetric) -> QuasiMetric:
    """Space with every distance reversed; swaps OUTER and INNER behavior."""
    return QuasiMetric(dist=qm.dist.T.copy(), mode=qm.mode)


def subspace(qm: QuasiMetric, ids: Iterable[int]) -> QuasiMetric:
    """Induced subspace on the given ids, rows/columns in sorted id order."""
    keep = sorted(set(int(i) for i in ids))
    if not keep:
        raise ValueError("subspace requires at least one id")
    for i in keep:
        if not (0 <= i < qm.n):
            raise ValueError(f"id {i} out of range")
    return QuasiMetric(dist=qm.dist[np.ix_(keep, keep)].copy(), mode=qm.mode)


# ---------------------------------------------------------------------------
# File formats.  Matrix files: first line n, then n whitespace-separated rows;
# the token `inf` (any case) marks an unreachable pair.  Edge lists: first
# line `n m`, then m lines `u v w`.  Lines starting with `#` are comments.
# ---------------------------------------------------------------------------

def _data_lines(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            out.append(stripped)
    return out


def _parse_value(token: str) -> float:
    if token.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(token)


def parse_matrix_text(text: str) -> np.ndarray:
    lines = _data_lines(text)
    if not lines:
        raise ValueError("empty matrix file")
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise ValueError(f"first line must be the point count, got {lines[0]!r}") from exc
    if n < 1:
        raise ValueError("point count must be at least 1")
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} matrix rows, found {len(lines) - 1}")
    rows = []
    for line in lines[1:]:
        tokens = line.split()
        if len(tokens) != n:
            raise ValueError(f"row has {len(tokens)} entries, expected {n}")
        rows.append([_parse_value(t) for t in tokens])
    return np.array(rows, dtype=np.float64)


def parse_edge_list_text(text: str) -> tuple[int, list[tuple[int, int, float]]]:
    lines = _data_lines(text)
    if not lines:
        raise ValueError("empty edge-list file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"first line must be 'n m', got {lines[0]!r}")
    n, m = int(head[0]), int(head[1])
    if len(lines) != m + 1:
        raise ValueError(f"expected {m} edges, found {len(lines) - 1}")
    edges = []
    for line in lines[1:]:
        tokens = line.split()
        if len(tokens) != 3:
            raise ValueError(f"edge line needs 'u v w', got {line!r}")
        edges.append((int(tokens[0]), int(tokens[1]), _parse_value(tokens[2])))
    return n, edges


def load_matrix(path, mode: Mode = Mode.STRICT) -> QuasiMetric:
    with open(path, "r", encoding="utf-8") as fh:
        matrix = parse_matrix_text(fh.read())
    return build_from_matrix(matrix, mode=mode)


def load_edge_list(path, mode: Mode = Mode.STRICT) -> QuasiMetric:
    with open(path, "r", encoding="utf-8") as fh:
        n, edges = parse_edge_list_text(fh.read())
    return build_from_digraph(n, edges, mode=mode)


def format_value(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return format(float(v), ".17g")


def save_matrix(path, matrix, header: Iterable[str] = ()) -> None:
    arr = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"{arr.shape[0]}\n")
        for row in arr:
            fh.write(" ".join(format_value(v) for v in row) + "\n")


def save_edge_list(path, n: int, edges: Sequence[tuple[int, int, float]],
                   header: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"{n} {len(edges)}\n")
        for u, v, w in edges:
            fh.write(f"{u} {v} {format_value(w)}\n")
