"""
Graphs - 圖與超圖構造

Constructions for every graph and hypergraph family used by the router:
projective planes, configuration-model hypergraphs and graphs, grid
hypergraphs, voltage coverings, Cayley graphs on Z_n^2, and the clique
expansion that turns a hypergraph into a weighted routing host.
"""

import enum
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from routing_errors import ConstructionError, ParameterError
from seeding import SeedLike, make_rng

logger = logging.getLogger("Graphs")

# Singer difference sets: the lines of PG(2,q) are the translates of D mod q^2+q+1.
SINGER_DIFFERENCE_SETS = {
    2: (0, 1, 3),
    3: (0, 1, 3, 9),
}


class GridModel(enum.Enum):
    TWO_D = "2D"
    THREE_D = "3D"


class LiftConvention(enum.Enum):
    """How a hyperedge voltage is spread over the lifted vertices, in listed vertex order."""
    FIRST_VERTEX = "first_vertex"  # only the leading vertex is shifted
    LAST_VERTEX = "last_vertex"    # only the trailing vertex is shifted
    ROTATION = "rotation"          # vertex i is shifted by i * s


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """r-uniform hypergraph. `d` is the common degree when `regular`, else the max degree."""

    num_vertices: int
    hyperedges: Tuple[Tuple[int, ...], ...]
    d: int
    r: int
    regular: bool = False

    def __post_init__(self):
        edges = tuple(tuple(int(v) for v in e) for e in self.hyperedges)
        object.__setattr__(self, "hyperedges", edges)
        if self.r < 2 or self.num_vertices < self.r:
            raise ParameterError(f"Need N >= r >= 2, got N={self.num_vertices}, r={self.r}")
        if self.d < 1:
            raise ParameterError(f"Degree must be >= 1, got {self.d}")
        for e in edges:
            if len(e) != self.r or len(set(e)) != self.r:
                raise ParameterError(f"Hyperedge {e} does not have {self.r} distinct vertices")
            if min(e) < 0 or max(e) >= self.num_vertices:
                raise ParameterError(f"Hyperedge {e} leaves the vertex range [0, {self.num_vertices})")
        if self.regular:
            degrees = self.degrees()
            if degrees.min() != self.d or degrees.max() != self.d:
                raise ParameterError(
                    f"Hypergraph flagged regular but degrees span [{degrees.min()}, {degrees.max()}]"
                )

    @property
    def num_hyperedges(self) -> int:
        return len(self.hyperedges)

    def edge_array(self) -> np.ndarray:
        return np.array(self.hyperedges, dtype=np.int64).reshape(-1, self.r)

    def degrees(self) -> np.ndarray:
        if not self.hyperedges:
            return np.zeros(self.num_vertices, dtype=np.int64)
        return np.bincount(self.edge_array().ravel(), minlength=self.num_vertices)

    def same_edges(self, other: "Hypergraph") -> bool:
        return self.num_vertices == other.num_vertices and self.hyperedges == other.hyperedges


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Symmetric nonnegative integer adjacency with zero diagonal."""

    num_vertices: int
    adjacency: sparse.csr_matrix
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        adj = sparse.csr_matrix(self.adjacency, dtype=np.int64)
        adj.eliminate_zeros()
        adj.sort_indices()
        n = self.num_vertices
        if n < 1 or adj.shape != (n, n):
            raise ParameterError(f"Adjacency shape {adj.shape} does not match N={n}")
        if adj.nnz and adj.data.min() < 0:
            raise ParameterError("Edge weights must be nonnegative")
        if adj.diagonal().any():
            raise ParameterError("Adjacency must have a zero diagonal")
        if (adj - adj.T).count_nonzero():
            raise ParameterError("Adjacency must be symmetric")
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_edges(
        cls,
        num_vertices: int,
        edges: Iterable[Tuple[int, int]],
        weights: Optional[Iterable[int]] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> "WeightedGraph":
        pairs = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        w = np.ones(len(pairs), dtype=np.int64) if weights is None else np.asarray(list(weights), dtype=np.int64)
        if len(w) != len(pairs):
            raise ParameterError("weights and edges differ in length")
        if len(pairs) and (pairs.min() < 0 or pairs.max() >= num_vertices):
            raise ParameterError(f"Edge endpoint outside [0, {num_vertices})")
        if len(pairs) and (pairs[:, 0] == pairs[:, 1]).any():
            raise ParameterError("Self-loops are not allowed")
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        data = np.concatenate([w, w])
        adj = sparse.coo_matrix((data, (rows, cols)), shape=(num_vertices, num_vertices)).tocsr()
        return cls(num_vertices, adj, dict(metadata or {}))

    def degrees(self) -> np.ndarray:
        """Weighted degrees."""
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    def support_degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    def is_regular(self) -> bool:
        deg = self.degrees()
        return bool(deg.size) and deg.min() == deg.max()

    @cached_property
    def edges(self) -> np.ndarray:
        """Support edges as an (m, 2) array with u < v, sorted lexicographically."""
        upper = sparse.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return np.stack([upper.row[order], upper.col[order]], axis=1).astype(np.int64)

    @cached_property
    def edge_weights(self) -> np.ndarray:
        u, v = self.edges[:, 0], self.edges[:, 1]
        return np.asarray(self.adjacency[u, v]).ravel()

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def neighbor_sets(self) -> List[Set[int]]:
        indptr, indices = self.adjacency.indptr, self.adjacency.indices
        return [set(indices[indptr[v]:indptr[v + 1]].tolist()) for v in range(self.num_vertices)]

    def neighbors(self, v: int) -> np.ndarray:
        indptr = self.adjacency.indptr
        return self.adjacency.indices[indptr[v]:indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def dense(self) -> np.ndarray:
        return self.adjacency.toarray().astype(np.float64)

    def support(self) -> sparse.csr_matrix:
        """Unweighted 0/1 adjacency."""
        sup = self.adjacency.copy()
        sup.data = np.ones_like(sup.data)
        return sup

    def is_connected(self) -> bool:
        count, _ = csgraph.connected_components(self.adjacency, directed=False)
        return count == 1

    def scaled(self, factor: int) -> "WeightedGraph":
        return WeightedGraph(self.num_vertices, self.adjacency * int(factor), dict(self.metadata))


@dataclass(frozen=True)
class GridSpec:
    n: int
    r: int
    model: GridModel = GridModel.TWO_D

    def __post_init__(self):
        if isinstance(self.model, str):
            object.__setattr__(self, "model", GridModel(self.model.upper()))
        if self.r < 2:
            raise ParameterError(f"Run length must be >= 2, got r={self.r}")
        if self.n < self.r:
            raise ParameterError(f"Grid side n={self.n} is smaller than run length r={self.r}")

    @property
    def num_vertices(self) -> int:
        return self.n * self.n


@dataclass(frozen=True)
class VoltageAssignment:
    base: Hypergraph
    k: int
    voltages: Tuple[int, ...]
    convention: LiftConvention = LiftConvention.FIRST_VERTEX

    def __post_init__(self):
        object.__setattr__(self, "voltages", tuple(int(s) for s in self.voltages))
        if isinstance(self.convention, str):
            object.__setattr__(self, "convention", LiftConvention(self.convention))
        if self.k < 1:
            raise ParameterError(f"Covering order must be >= 1, got k={self.k}")
        if len(self.voltages) != self.base.num_hyperedges:
            raise ParameterError(
                f"Expected {self.base.num_hyperedges} voltages, got {len(self.voltages)}"
            )
        if any(s < 0 or s >= self.k for s in self.voltages):
            raise ParameterError(f"Voltages must lie in [0, {self.k})")

    def offsets(self, edge_index: int) -> Tuple[int, ...]:
        """Sheet offset of each vertex of a hyperedge, in listed vertex order."""
        s = self.voltages[edge_index]
        r = self.base.r
        if self.convention is LiftConvention.FIRST_VERTEX:
            return (s,) + (0,) * (r - 1)
        if self.convention is LiftConvention.LAST_VERTEX:
            return tuple(0 if i < r - 1 else s for i in range(r))
        return tuple((i * s) % self.k for i in range(r))


# ---------------------------------------------------------------------------
# Hypergraph families
# ---------------------------------------------------------------------------

def build_projective_plane(q: int) -> Hypergraph:
    """
    Point-line incidence hypergraph of PG(2, q) for q in {2, 3}.

    Line i is the Singer difference set shifted by i, kept in difference-set
    order; lift conventions read that order.
    """
    if q not in SINGER_DIFFERENCE_SETS:
        raise ParameterError(f"Projective planes are available for q in {sorted(SINGER_DIFFERENCE_SETS)}, got q={q}")
    n = q * q + q + 1
    base = SINGER_DIFFERENCE_SETS[q]
    lines = [tuple((x + shift) % n for x in base) for shift in range(n)]
    return Hypergraph(n, tuple(lines), d=q + 1, r=q + 1, regular=True)


def _groups_suitable(leftovers: Sequence[int], r: int, seen: Set[Tuple[int, ...]], distinct: bool) -> bool:
    vertices = sorted(set(leftovers))
    if len(vertices) < r:
        return False
    if not distinct:
        return True
    # Any r-subset of the leftover vertices that is not already used will do.
    for combo in itertools.combinations(vertices, r):
        if combo not in seen:
            return True
    return False


def _try_grouping(
    stubs: np.ndarray,
    r: int,
    rng: np.random.Generator,
    distinct_groups: bool,
    patience: int,
) -> Optional[List[Tuple[int, ...]]]:
    accepted: List[Tuple[int, ...]] = []
    seen: Set[Tuple[int, ...]] = set()
    pending = stubs.copy()
    best, stale = len(pending), 0

    while pending.size:
        rng.shuffle(pending)
        leftovers: List[int] = []
        for group in pending.reshape(-1, r).tolist():
            key = tuple(sorted(group))
            if len(set(key)) < r or (distinct_groups and key in seen):
                leftovers.extend(key)
            else:
                accepted.append(key)
                seen.add(key)
        if not leftovers:
            return accepted
        if not _groups_suitable(leftovers, r, seen, distinct_groups):
            return None
        if len(leftovers) < best:
            best, stale = len(leftovers), 0
        else:
            stale += 1
            if stale > patience:
                return None
        pending = np.array(leftovers, dtype=np.int64)
    return accepted


def _configuration_model(
    num_vertices: int,
    degree: int,
    r: int,
    rng: np.random.Generator,
    distinct_groups: bool,
    budget: Optional[int],
) -> List[Tuple[int, ...]]:
    """
    Partition N*degree vertex stubs into groups of r. Defective groups are
    re-drawn from the leftover stubs; an attempt that stops making progress
    starts over and counts against the restart budget.
    """
    if budget is None:
        from routing_config import get_settings
        budget = get_settings().retry_budget
    stubs = np.repeat(np.arange(num_vertices, dtype=np.int64), degree)
    for attempt in range(1, budget + 1):
        groups = _try_grouping(stubs, r, rng, distinct_groups, patience=50)
        if groups is not None:
            if attempt > 1:
                logger.debug(f"Configuration model succeeded after {attempt} attempts")
            return sorted(groups)
    raise ConstructionError(
        f"Configuration model failed after {budget} attempts for N={num_vertices}, d={degree}, r={r}",
        attempts=budget,
    )


def build_random_regular_hypergraph(
    N: int, d: int, r: int, seed: SeedLike = None, budget: Optional[int] = None
) -> Hypergraph:
    """
    Sample a (d, r)-regular hypergraph with the configuration model.

    Args:
        N: number of vertices
        d: hyperedges per vertex
        r: vertices per hyperedge
        seed: root seed or Generator
        budget: restart budget (defaults to settings.retry_budget)

    Returns:
        regular Hypergraph, identical for identical seeds
    """
    if r < 2 or d < 1:
        raise ParameterError(f"Need d >= 1 and r >= 2, got d={d}, r={r}")
    if N < r:
        raise ParameterError(f"Need N >= r, got N={N}, r={r}")
    if (N * d) % r:
        raise ParameterError(f"N*d = {N * d} is not divisible by r = {r}")
    rng = make_rng(seed)
    groups = _configuration_model(N, d, r, rng, distinct_groups=False, budget=budget)
    return Hypergraph(N, tuple(groups), d=d, r=r, regular=True)


def _grid_runs(n: int, r: int, di: int, dj: int, step: int) -> List[Tuple[int, ...]]:
    runs = []
    span = step * (r - 1)
    for i in range(n):
        for j in range(n):
            end_i, end_j = i + di * span, j + dj * span
            if 0 <= end_i < n and 0 <= end_j < n:
                runs.append(tuple((i + di * step * t) * n + (j + dj * step * t) for t in range(r)))
    return runs


def build_grid_hypergraph(spec: GridSpec) -> Hypergraph:
    """
    Grid hypergraph on the n x n array (row-major indices).

    2D: every run of r consecutive vertices along a row or a column.
    3D: the 2D runs, runs along both diagonals, and stride-2 runs along rows
    and columns.
    """
    n, r = spec.n, spec.r
    runs = _grid_runs(n, r, 0, 1, 1) + _grid_runs(n, r, 1, 0, 1)
    if spec.model is GridModel.THREE_D:
        runs += _grid_runs(n, r, 1, 1, 1) + _grid_runs(n, r, 1, -1, 1)
        runs += _grid_runs(n, r, 0, 1, 2) + _grid_runs(n, r, 1, 0, 2)
    runs = sorted(tuple(sorted(run)) for run in runs)
    degrees = np.bincount(np.array(runs).ravel(), minlength=n * n)
    return Hypergraph(n * n, tuple(runs), d=int(degrees.max()), r=r, regular=False)


def clique_expansion(H: Hypergraph) -> WeightedGraph:
    """Weight on {u, v} = number of hyperedges containing both."""
    n = H.num_vertices
    if not H.hyperedges:
        return WeightedGraph(n, sparse.csr_matrix((n, n), dtype=np.int64))
    edges = H.edge_array()
    iu, ju = np.triu_indices(H.r, k=1)
    u = edges[:, iu].ravel()
    v = edges[:, ju].ravel()
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    adj = sparse.coo_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(n, n)).tocsr()
    return WeightedGraph(n, adj, {"kind": "clique_expansion", "d": H.d, "r": H.r, "regular": H.regular})


def voltage_covering(va: VoltageAssignment) -> Hypergraph:
    """
    k-fold lift of the base hypergraph. Lifted vertex (v, sheet) has index
    sheet * N + v.
    """
    base, k = va.base, va.k
    n = base.num_vertices
    lifted = []
    for idx, e in enumerate(base.hyperedges):
        offsets = va.offsets(idx)
        for sheet in range(k):
            lifted.append(tuple(sorted(((sheet + off) % k) * n + v for v, off in zip(e, offsets))))
    return Hypergraph(n * k, tuple(sorted(lifted)), d=base.d, r=base.r, regular=base.regular)


# ---------------------------------------------------------------------------
# Graph families
# ---------------------------------------------------------------------------

def build_random_regular_graph(N: int, d: int, seed: SeedLike = None, budget: Optional[int] = None) -> WeightedGraph:
    """Simple d-regular graph from the configuration model (no loops, no multi-edges)."""
    if d < 0 or d >= N:
        raise ParameterError(f"Need 0 <= d < N, got d={d}, N={N}")
    if (N * d) % 2:
        raise ParameterError(f"N*d = {N * d} is odd; no {d}-regular graph on {N} vertices")
    if d == 0:
        return WeightedGraph(N, sparse.csr_matrix((N, N), dtype=np.int64), {"kind": "random_regular", "d": 0})
    rng = make_rng(seed)
    pairs = _configuration_model(N, d, 2, rng, distinct_groups=True, budget=budget)
    return WeightedGraph.from_edges(N, pairs, metadata={"kind": "random_regular", "d": d})


def complete_graph(N: int) -> WeightedGraph:
    if N < 1:
        raise ParameterError(f"N must be positive, got {N}")
    return WeightedGraph.from_edges(N, itertools.combinations(range(N), 2), metadata={"kind": "complete"})


def cycle_graph(N: int) -> WeightedGraph:
    if N < 3:
        raise ParameterError(f"A cycle needs N >= 3, got {N}")
    return WeightedGraph.from_edges(N, [(v, (v + 1) % N) for v in range(N)], metadata={"kind": "cycle"})


def path_graph(N: int) -> WeightedGraph:
    return WeightedGraph.from_edges(N, [(v, v + 1) for v in range(N - 1)], metadata={"kind": "path"})


def union_layers(graphs: Sequence[WeightedGraph]) -> WeightedGraph:
    """Edgewise weight sum of layers on a common vertex set."""
    if not graphs:
        raise ParameterError("union_layers needs at least one graph")
    n = graphs[0].num_vertices
    for g in graphs[1:]:
        if g.num_vertices != n:
            raise ParameterError(f"Layer sizes differ: {n} vs {g.num_vertices}")
    total = graphs[0].adjacency.copy()
    for g in graphs[1:]:
        total = total + g.adjacency
    return WeightedGraph(n, total, {"kind": "union", "layers": len(graphs)})


def symmetrize_generators(n: int, generators: Iterable[Sequence[int]]) -> Tuple[Tuple[int, int], ...]:
    """Reduce mod n, add negations, deduplicate. Zero generators are rejected."""
    if n < 2:
        raise ParameterError(f"Modulus must be >= 2, got n={n}")
    symmetric = set()
    for g in generators:
        a, b = int(g[0]) % n, int(g[1]) % n
        if a == 0 and b == 0:
            raise ParameterError(f"Zero generator {tuple(g)} is not allowed")
        symmetric.add((a, b))
        symmetric.add(((-a) % n, (-b) % n))
    return tuple(sorted(symmetric))


def build_cayley_graph(n: int, generators: Sequence[Sequence[int]]) -> WeightedGraph:
    """Cay(Z_n^2, S) with S the symmetrized generator set; vertex (a, b) has index a*n + b."""
    symmetric = symmetrize_generators(n, generators)
    a, b = np.divmod(np.arange(n * n), n)
    rows, cols = [], []
    for ga, gb in symmetric:
        rows.append(a * n + b)
        cols.append(((a + ga) % n) * n + (b + gb) % n)
    rows_arr = np.concatenate(rows)
    cols_arr = np.concatenate(cols)
    adj = sparse.coo_matrix(
        (np.ones(len(rows_arr), dtype=np.int64), (rows_arr, cols_arr)), shape=(n * n, n * n)
    ).tocsr()
    meta = {
        "kind": "cayley",
        "n": n,
        "generators": tuple(tuple(int(x) % n for x in g) for g in generators),
        "symmetric_set": symmetric,
    }
    return WeightedGraph(n * n, adj, meta)


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

def hop_distances(g: WeightedGraph, sources: Optional[Sequence[int]] = None, block: int = 512) -> np.ndarray:
    """
    BFS hop counts on the unweighted support. Unreachable pairs are -1.

    Returns:
        int32 array of shape (len(sources), N), or (N, N) when sources is None
    """
    idx = np.arange(g.num_vertices) if sources is None else np.asarray(sources, dtype=np.int64)
    support = g.support()
    out = np.empty((len(idx), g.num_vertices), dtype=np.int32)
    for start in range(0, len(idx), block):
        chunk = idx[start:start + block]
        dist = csgraph.shortest_path(support, method="D", unweighted=True, directed=False, indices=chunk)
        dist = np.atleast_2d(dist)
        unreachable = np.isinf(dist)
        dist[unreachable] = -1
        out[start:start + len(chunk)] = dist.astype(np.int32)
    return out


# ---------------------------------------------------------------------------
# Text serialization
# ---------------------------------------------------------------------------

def format_hypergraph(H: Hypergraph) -> str:
    lines = [f"H {H.num_vertices} {H.d} {H.r}"]
    lines.extend(" ".join(str(v) for v in e) for e in H.hyperedges)
    return "\n".join(lines) + "\n"


def format_graph(g: WeightedGraph) -> str:
    lines = [f"G {g.num_vertices}"]
    for (u, v), w in zip(g.edges.tolist(), g.edge_weights.tolist()):
        lines.append(f"{u} {v} {w}")
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> List[List[str]]:
    return [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]


def _ints(row: Sequence[str]) -> List[int]:
    try:
        return [int(x) for x in row]
    except ValueError:
        raise ParameterError(f"Expected integers, got row '{' '.join(row)}'") from None


def parse_hypergraph(text: str) -> Hypergraph:
    rows = _content_lines(text)
    if not rows or rows[0][0] != "H" or len(rows[0]) != 4:
        raise ParameterError("Hypergraph text must start with 'H N d r'")
    n, d, r = _ints(rows[0][1:])
    edges = tuple(tuple(_ints(row)) for row in rows[1:])
    probe = Hypergraph(n, edges, d=max(d, 1), r=r, regular=False)
    degrees = probe.degrees()
    regular = bool(edges) and degrees.min() == degrees.max() == d
    return Hypergraph(n, edges, d=d, r=r, regular=regular)


def parse_graph(text: str) -> WeightedGraph:
    rows = _content_lines(text)
    if not rows or rows[0][0] != "G" or len(rows[0]) != 2:
        raise ParameterError("Graph text must start with 'G N'")
    (n,) = _ints(rows[0][1:])
    bad = [row for row in rows[1:] if len(row) != 3]
    if bad:
        raise ParameterError(f"Graph rows must be 'u v w', got '{' '.join(bad[0])}'")
    triples = [tuple(_ints(row)) for row in rows[1:]]
    return WeightedGraph.from_edges(n, [(u, v) for u, v, _ in triples], [w for _, _, w in triples])


def save_hypergraph(H: Hypergraph, path: Union[str, Path]) -> None:
    Path(path).write_text(format_hypergraph(H), encoding="utf-8")


def save_graph(g: WeightedGraph, path: Union[str, Path]) -> None:
    Path(path).write_text(format_graph(g), encoding="utf-8")


def load_hypergraph(path: Union[str, Path]) -> Hypergraph:
    return parse_hypergraph(Path(path).read_text(encoding="utf-8"))


def load_graph(path: Union[str, Path]) -> WeightedGraph:
    """Read either format; hypergraph files are clique-expanded."""
    text = Path(path).read_text(encoding="utf-8")
    first = text.lstrip().split(None, 1)[0] if text.strip() else ""
    if first == "H":
        return clique_expansion(parse_hypergraph(text))
    return parse_graph(text)
