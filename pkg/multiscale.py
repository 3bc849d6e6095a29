"""
Multiscale - 覆蓋塔與分層路由

Cyclic voltage coverings stacked into towers, routing that lifts a schedule
from one tower level to the next, and hierarchical block routing on an n x n
grid with random overlays between blocks.
"""

import itertools
import logging
import math
import statistics
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from graphs import (
    Hypergraph,
    LiftConvention,
    VoltageAssignment,
    WeightedGraph,
    build_projective_plane,
    build_random_regular_graph,
    clique_expansion,
    voltage_covering,
)
from route_valiant import PathOracle, Schedule, SigmaStrategy, Swap, as_permutation, route, valiant_paths
from routing_errors import DomainError, ParameterError, RoutingError
from seeding import SeedLike, derive_seed, make_rng, map_trials
from spectral import check_ramanujan_hypergraph, spectrum

logger = logging.getLogger("Multiscale")

EXHAUSTIVE_LIMIT = 10**6


# ---------------------------------------------------------------------------
# Voltage search
# ---------------------------------------------------------------------------

@dataclass
class VoltageSearchResult:
    k: int
    mode: str
    convention: str
    count: int
    total: int
    best_beta: float
    best_assignment: Tuple[int, ...]
    mean_beta: float

    @property
    def fraction(self) -> float:
        return self.count / self.total if self.total else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "mode": self.mode,
            "convention": self.convention,
            "ramanujan": self.count,
            "total": self.total,
            "fraction": round(self.fraction, 4),
            "best_beta": round(self.best_beta, 4),
            "mean_beta": round(self.mean_beta, 4),
            "best_assignment": list(self.best_assignment),
        }


def lift_beta(va: VoltageAssignment) -> Tuple[float, bool]:
    """(beta, Ramanujan flag) of the lifted hypergraph."""
    H = voltage_covering(va)
    s = spectrum(clique_expansion(H))
    return s.beta, check_ramanujan_hypergraph(H, s)


def search_ramanujan_voltages(
    base: Hypergraph,
    k: int,
    mode: str = "exhaustive",
    samples: int = 200,
    seed: SeedLike = None,
    convention: LiftConvention = LiftConvention.FIRST_VERTEX,
) -> VoltageSearchResult:
    """
    Fraction of Z_k voltage assignments whose lift is Ramanujan, with the
    lowest-beta assignment (first in enumeration order on ties).
    """
    convention = LiftConvention(convention)
    E = base.num_hyperedges
    if k < 2:
        raise ParameterError(f"Covering order must be >= 2, got k={k}")
    if mode == "exhaustive":
        if k ** E > EXHAUSTIVE_LIMIT:
            raise ParameterError(f"Exhaustive search over {k}^{E} assignments exceeds {EXHAUSTIVE_LIMIT}")
        assignments = list(itertools.product(range(k), repeat=E))
    elif mode == "sample":
        rng = make_rng(seed, "voltage_search", k)
        assignments = [tuple(int(x) for x in rng.integers(0, k, size=E)) for _ in range(samples)]
    else:
        raise ParameterError(f"Unknown search mode '{mode}'")

    count = 0
    betas = []
    best_beta, best = math.inf, assignments[0]
    for voltages in assignments:
        beta, ok = lift_beta(VoltageAssignment(base, k, voltages, convention))
        betas.append(beta)
        count += ok
        if beta < best_beta - 1e-12:
            best_beta, best = beta, voltages
    logger.debug(f"k={k} {mode}: {count}/{len(assignments)} Ramanujan, best beta {best_beta:.4f}")
    return VoltageSearchResult(k, mode, convention.value, count, len(assignments), best_beta, best,
                               statistics.fmean(betas))


def fano_covering_table(
    k_list: Sequence[int] = (2, 3, 4, 5, 7),
    samples: int = 200,
    seed: SeedLike = 0,
    exhaustive_limit: int = 20_000,
    convention: LiftConvention = LiftConvention.FIRST_VERTEX,
) -> List[Dict[str, Any]]:
    fano = build_projective_plane(2)
    rows = []
    for k in k_list:
        mode = "exhaustive" if k ** fano.num_hyperedges <= exhaustive_limit else "sample"
        rows.append(search_ramanujan_voltages(fano, k, mode, samples, seed, convention).to_dict())
    return rows


def pg23_ramanujan_fraction(k: int = 2, samples: int = 200, seed: SeedLike = 0) -> Dict[str, Any]:
    """Sampled Ramanujan fraction of k-fold lifts of PG(2,3); reported, not asserted."""
    return search_ramanujan_voltages(build_projective_plane(3), k, "sample", samples, seed).to_dict()


# ---------------------------------------------------------------------------
# Covering towers
# ---------------------------------------------------------------------------

@dataclass
class TowerSpec:
    """Levels 0..L; level l is the Z_{k^l} cover given by voltages mod k^l."""

    base: Hypergraph
    k: int
    L: int
    voltages: List[VoltageAssignment] = field(default_factory=list)
    betas: List[float] = field(default_factory=list)

    def __post_init__(self):
        if self.k < 2 or self.L < 0:
            raise ParameterError(f"Need k >= 2 and L >= 0, got k={self.k}, L={self.L}")
        if len(self.voltages) != self.L:
            raise ParameterError(f"Expected {self.L} level voltage assignments, got {len(self.voltages)}")

    @property
    def beta_bar(self) -> float:
        return max(self.betas) if self.betas else math.nan

    def num_vertices(self, level: int) -> int:
        return self.base.num_vertices * self.k ** level

    def hypergraph(self, level: int) -> Hypergraph:
        return self.base if level == 0 else voltage_covering(self.voltages[level - 1])

    def truncated(self, level: int) -> "TowerSpec":
        """Levels 0..level of this tower, reusing any covers already built."""
        if not 0 <= level <= self.L:
            raise ParameterError(f"Level must lie in [0, {self.L}], got {level}")
        sub = TowerSpec(self.base, self.k, level, self.voltages[:level], self.betas[:level + 1])
        for name in ("graphs", "oracles"):
            if name in self.__dict__:
                sub.__dict__[name] = self.__dict__[name][:level + 1]
        return sub

    @cached_property
    def graphs(self) -> List[WeightedGraph]:
        return [clique_expansion(self.hypergraph(level)) for level in range(self.L + 1)]

    @cached_property
    def oracles(self) -> List[PathOracle]:
        return [PathOracle(g) for g in self.graphs]


def _extend_voltages(base: Hypergraph, k: int, level: int, lower: Tuple[int, ...],
                     convention: LiftConvention, rng: np.random.Generator, limit: int = 512) -> Tuple[int, ...]:
    """Best next base-k digit for every hyperedge, by beta of the level-l cover."""
    E = base.num_hyperedges
    fold = k ** level
    step = k ** (level - 1)
    if k ** E <= limit:
        digit_sets = itertools.product(range(k), repeat=E)
    else:
        digit_sets = (tuple(int(x) for x in rng.integers(0, k, size=E)) for _ in range(limit))
    best_beta, best = math.inf, None
    for digits in digit_sets:
        voltages = tuple(s + step * t for s, t in zip(lower, digits))
        beta, _ = lift_beta(VoltageAssignment(base, fold, voltages, convention))
        if beta < best_beta - 1e-12:
            best_beta, best = beta, voltages
    return best


def build_covering_tower(
    base: Hypergraph,
    k: int = 2,
    L: int = 2,
    voltages: Optional[Sequence[int]] = None,
    convention: LiftConvention = LiftConvention.FIRST_VERTEX,
    seed: SeedLike = 0,
) -> TowerSpec:
    """
    Tower from one integer voltage per hyperedge in [0, k^L). Without an
    explicit vector, the best level-1 assignment is extended one base-k digit
    per level.
    """
    convention = LiftConvention(convention)
    top = k ** L
    if voltages is None:
        rng = make_rng(seed, "tower_voltages", k, L)
        if L == 0:
            s: Tuple[int, ...] = tuple(0 for _ in base.hyperedges)
        else:
            s = search_ramanujan_voltages(base, k, "exhaustive" if k ** base.num_hyperedges <= 4096 else "sample",
                                          seed=seed, convention=convention).best_assignment
            for level in range(2, L + 1):
                s = _extend_voltages(base, k, level, s, convention, rng)
    else:
        s = tuple(int(x) for x in voltages)
        if len(s) != base.num_hyperedges or any(x < 0 or x >= max(top, 1) for x in s):
            raise ParameterError(f"Tower voltages must be {base.num_hyperedges} values in [0, {top})")
    assignments = [VoltageAssignment(base, k ** level, tuple(x % k ** level for x in s), convention)
                   for level in range(1, L + 1)]
    spec = TowerSpec(base, k, L, assignments)
    spec.betas = [spectrum(g).beta for g in spec.graphs]
    logger.info(f"Tower k={k} L={L}: betas {[round(b, 3) for b in spec.betas]}")
    return spec


def project(spec: TowerSpec, level: int, x: np.ndarray) -> np.ndarray:
    """Covering map from level `level` to level `level - 1`."""
    return np.asarray(x) % spec.num_vertices(level - 1)


def _lift_table(spec: TowerSpec, level: int) -> Dict[Tuple[int, int], int]:
    """For a base pair (u, w) and sheet shift delta mod k^(level-1): the level-`level` sheet shift."""
    va = spec.voltages[level - 1]
    lower = spec.k ** (level - 1)
    fold = spec.k ** level
    table: Dict[Tuple[int, int, int], int] = {}
    for idx, e in enumerate(spec.base.hyperedges):
        offsets = va.offsets(idx)
        for (u, ou), (w, ow) in itertools.permutations(zip(e, offsets), 2):
            delta = (ow - ou) % fold
            key = (u, w, delta % lower)
            if key not in table:
                table[key] = delta
    return table


def lift_schedule(spec: TowerSpec, level: int, schedule: Schedule) -> Schedule:
    """Replace each level-(l-1) swap by the k disjoint level-l swaps over it."""
    table = _lift_table(spec, level)
    N0 = spec.base.num_vertices
    lower = spec.k ** (level - 1)
    fold = spec.k ** level
    steps = []
    for step in schedule.steps:
        lifted: List[Swap] = []
        for u_low, w_low in step:
            a, u = divmod(u_low, N0)
            b, w = divmod(w_low, N0)
            delta = table.get((u, w, (b - a) % lower))
            if delta is None:
                raise RoutingError(f"Swap {u_low}:{w_low} has no lift at level {level}")
            for t in range(spec.k):
                sheet = a + lower * t
                x = sheet * N0 + u
                y = ((sheet + delta) % fold) * N0 + w
                lifted.append((min(x, y), max(x, y)))
        steps.append(lifted)
    return Schedule(steps)


def fiber_permutation(spec: TowerSpec, level: int, pi: np.ndarray) -> np.ndarray:
    """Level-(l-1) permutation maximizing the number of pebbles whose target fiber it hits."""
    lower_n = spec.num_vertices(level - 1)
    src = project(spec, level, np.arange(len(pi)))
    dst = project(spec, level, pi)
    demand = np.zeros((lower_n, lower_n), dtype=np.int64)
    np.add.at(demand, (src, dst), 1)
    rows, cols = linear_sum_assignment(demand, maximize=True)
    tau = np.empty(lower_n, dtype=np.int64)
    tau[rows] = cols
    return tau


@dataclass
class TowerRouteResult:
    level_depths: List[int]
    total: int
    N: int
    cross_fiber_predicted: Optional[float]
    cross_fiber_measured: Optional[float]
    schedule: Schedule
    realized: bool

    @property
    def ratio(self) -> float:
        return self.total / math.log2(self.N) if self.N > 1 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "level_depths": self.level_depths,
            "T": self.total,
            "T_over_log2N": round(self.ratio, 3),
            "cross_fiber_predicted": self.cross_fiber_predicted,
            "cross_fiber_measured": self.cross_fiber_measured,
            "realized": self.realized,
        }


def _tower_schedule(spec: TowerSpec, level: int, pi: np.ndarray, seed: SeedLike, depths: List[int]) -> Schedule:
    if level == 0:
        result = route(spec.graphs[0], pi, SigmaStrategy.UNIFORM, derive_seed(seed, "tower", 0),
                       oracle=spec.oracles[0])
        depths.append(result.depth)
        return result.schedule
    tau = fiber_permutation(spec, level, pi)
    lifted = lift_schedule(spec, level, _tower_schedule(spec, level - 1, tau, seed, depths))
    occ = lifted.apply(len(pi))
    residual = np.empty(len(pi), dtype=np.int64)
    residual[np.arange(len(pi))] = pi[occ]
    result = route(spec.graphs[level], residual, SigmaStrategy.UNIFORM, derive_seed(seed, "tower", level),
                   oracle=spec.oracles[level])
    depths.append(result.depth)
    return lifted.extend(result.schedule)


def tower_route(spec: TowerSpec, pi: Sequence[int], seed: SeedLike = None) -> TowerRouteResult:
    """
    Route on the top level: the fiber permutation is routed one level down
    (recursively), lifted, and the leftover permutation is routed directly.
    `level_depths[l]` is the direct routing depth spent at level l.
    """
    top = spec.L
    N = spec.num_vertices(top)
    pi = as_permutation(pi, N)
    depths: List[int] = []
    schedule = _tower_schedule(spec, top, pi, seed, depths)
    realized = schedule.realizes(pi)
    if not realized:
        raise RoutingError("Tower schedule does not realize the permutation")
    predicted = measured = None
    if top >= 1:
        predicted = 1 - spec.k / N
        fibers = spec.num_vertices(top - 1)
        measured = float(np.mean(pi % fibers != np.arange(N) % fibers))
    return TowerRouteResult(depths, schedule.depth, N, predicted, measured, schedule, realized)


def tower_level_table(spec: TowerSpec, trials: int = 20, seed: SeedLike = 0) -> List[Dict[str, Any]]:
    """
    Per level l, over random permutations of level l:

    - `T`: median tower_route depth on the tower cut at level l
    - `T_cd`: median C + D of the direct two-phase path set on level l, the
      congestion-plus-dilation depth estimate
    """
    rows = []
    for level in range(spec.L + 1):
        sub = spec.truncated(level)
        N = sub.num_vertices(level)
        g, oracle = sub.graphs[level], sub.oracles[level]

        def trial(t: int, rng: np.random.Generator) -> Tuple[int, int]:
            pi = rng.permutation(N)
            ps = valiant_paths(g, pi, SigmaStrategy.UNIFORM, rng, oracle=oracle)
            return tower_route(sub, pi, rng).total, ps.congestion + ps.dilation

        results = map_trials(trial, trials, seed, f"tower_level:{level}")
        depth = statistics.median(r[0] for r in results)
        cd = statistics.median(r[1] for r in results)
        rows.append({
            "level": level,
            "N": N,
            "beta": round(spec.betas[level], 4),
            "T": depth,
            "T_over_log2N": round(depth / math.log2(N), 3),
            "T_cd": cd,
            "T_cd_over_log2N": round(cd / math.log2(N), 3),
            "cross_fiber": round(1 - spec.k / N, 4) if level else None,
        })
    return rows


def tower_prediction(L: int, k: int, N0: int, beta_bar: float) -> float:
    """(L log2 k + log2 N0) / (1 - beta_bar)."""
    if not beta_bar < 1:
        raise DomainError(f"Tower prediction needs beta_bar < 1, got {beta_bar}")
    return (L * math.log2(k) + math.log2(N0)) / (1 - beta_bar)


# ---------------------------------------------------------------------------
# Hierarchical block routing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HierarchySpec:
    n: int
    b: int

    def __post_init__(self):
        if self.b < 2:
            raise ParameterError(f"Block size must be >= 2, got b={self.b}")
        if self.n < self.b:
            raise ParameterError(f"Grid side n={self.n} is smaller than block size b={self.b}")
        for level in range(1, self.L):
            if self.n % self.b ** level:
                raise ParameterError(f"b^{level} = {self.b ** level} does not divide n = {self.n}")

    @property
    def L(self) -> int:
        levels, span = 0, 1
        while span < self.n:
            span *= self.b
            levels += 1
        return max(levels, 1)

    @property
    def N(self) -> int:
        return self.n * self.n

    def blocks_per_side(self, level: int) -> int:
        return self.n // self.b ** level

    def num_blocks(self, level: int) -> int:
        return self.blocks_per_side(level) ** 2

    def overlay_degree(self, level: int) -> int:
        blocks = self.num_blocks(level)
        d = min(8, blocks - 1)
        if (blocks * d) % 2:
            d -= 1
        return d

    def block_of(self, level: int, v: np.ndarray) -> np.ndarray:
        side = self.b ** level
        per_side = self.blocks_per_side(level)
        row, col = np.divmod(np.asarray(v), self.n)
        return (row // side) * per_side + col // side

    def block_cells(self, level: int, block: int) -> np.ndarray:
        """Grid vertices of a block in row-major order."""
        side = self.b ** level
        br, bc = divmod(block, self.blocks_per_side(level))
        rows = np.arange(br * side, (br + 1) * side)
        cols = np.arange(bc * side, (bc + 1) * side)
        return (rows[:, None] * self.n + cols[None, :]).ravel()


def block_swap_capacity(spec: HierarchySpec, level: int) -> int:
    """Atoms moved by swapping every block with a partner in one step."""
    return (spec.num_blocks(level) // 2) * spec.b ** (2 * level)


def boundary_capacity(N: int) -> float:
    return math.sqrt(N) * math.log2(N) if N > 1 else 0.0


def birkhoff_layers(demand: np.ndarray) -> List[np.ndarray]:
    """Split an integer matrix with equal line sums into permutations (row -> column)."""
    remaining = np.array(demand, dtype=np.int64, copy=True)
    sums = remaining.sum(axis=1)
    if remaining.size and (sums.min() != sums.max() or not np.array_equal(remaining.sum(axis=0), sums)):
        raise ParameterError("Demand matrix does not have equal row and column sums")
    layers = []
    for _ in range(int(sums[0]) if sums.size else 0):
        support = (remaining > 0).astype(np.int64)
        rows, cols = linear_sum_assignment(support, maximize=True)
        if not support[rows, cols].all():
            raise RoutingError("No perfect matching on the demand support")
        perm = np.empty(len(rows), dtype=np.int64)
        perm[rows] = cols
        remaining[rows, cols] -= 1
        layers.append(perm)
    return layers


def odd_even_transposition(line: Sequence[int], order: Sequence[int]) -> List[List[Swap]]:
    """
    Adjacent-swap rounds sorting the items on `line` (vertex list) so that the
    item at position i, whose destination position is order[i], ends there.
    """
    arr = list(order)
    m = len(arr)
    rounds: List[List[Swap]] = []
    parity = 0
    idle = 0
    while idle < 2:
        step = []
        for i in range(parity, m - 1, 2):
            if arr[i] > arr[i + 1]:
                arr[i], arr[i + 1] = arr[i + 1], arr[i]
                u, v = line[i], line[i + 1]
                step.append((min(u, v), max(u, v)))
        if step:
            rounds.append(step)
            idle = 0
        else:
            idle += 1
        parity ^= 1
    return rounds


def _merge_parallel(groups: List[List[List[Swap]]]) -> List[List[Swap]]:
    depth = max((len(g) for g in groups), default=0)
    return [[s for g in groups if t < len(g) for s in g[t]] for t in range(depth)]


def row_column_route(cells: np.ndarray, local_pi: np.ndarray) -> List[List[Swap]]:
    """
    Route a permutation inside one b x b block of the grid with adjacent
    swaps: columns, then rows, then columns. `local_pi[i]` is the destination
    cell index of the atom on cell i (row-major in the block).
    """
    b = math.isqrt(len(cells))
    src_row, src_col = np.divmod(np.arange(b * b), b)
    dst_row, dst_col = np.divmod(np.asarray(local_pi), b)

    # Colour the column-to-column multigraph with b matchings; colour = staging row.
    demand = np.zeros((b, b), dtype=np.int64)
    np.add.at(demand, (src_col, dst_col), 1)
    pending = {(c, d): [] for c in range(b) for d in range(b)}
    for i in range(b * b):
        pending[(int(src_col[i]), int(dst_col[i]))].append(i)
    stage_row = np.empty(b * b, dtype=np.int64)
    for colour, perm in enumerate(birkhoff_layers(demand)):
        for c in range(b):
            stage_row[pending[(c, int(perm[c]))].pop()] = colour

    grid = np.asarray(cells).reshape(b, b)
    steps: List[List[Swap]] = []

    # Columns: atom i moves from src_row to stage_row within src_col.
    groups = []
    for c in range(b):
        order = np.empty(b, dtype=np.int64)
        members = np.nonzero(src_col == c)[0]
        order[src_row[members]] = stage_row[members]
        groups.append(odd_even_transposition(grid[:, c].tolist(), order.tolist()))
    steps += _merge_parallel(groups)

    # Rows: within stage_row, move to dst_col.
    groups = []
    for r in range(b):
        order = np.empty(b, dtype=np.int64)
        members = np.nonzero(stage_row == r)[0]
        order[src_col[members]] = dst_col[members]
        groups.append(odd_even_transposition(grid[r, :].tolist(), order.tolist()))
    steps += _merge_parallel(groups)

    # Columns again: within dst_col, move to dst_row.
    groups = []
    for c in range(b):
        order = np.empty(b, dtype=np.int64)
        members = np.nonzero(dst_col == c)[0]
        order[stage_row[members]] = dst_row[members]
        groups.append(odd_even_transposition(grid[:, c].tolist(), order.tolist()))
    steps += _merge_parallel(groups)
    return steps


@dataclass
class HierarchyResult:
    level_depths: Dict[int, int]
    total: int
    flat: int
    level_betas: Dict[int, float]
    finest_schedule: Schedule

    @property
    def ratio(self) -> float:
        return self.total / self.flat if self.flat else 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level_depths": self.level_depths,
            "T_hier": self.total,
            "T_flat": self.flat,
            "ratio": round(self.ratio, 4),
            "level_betas": {k: round(v, 4) for k, v in self.level_betas.items()},
        }


def flat_overlay(N: int, seed: SeedLike = None) -> WeightedGraph:
    """Random regular overlay of degree 2*ceil(log2 N), kept below N."""
    d = min(2 * math.ceil(math.log2(N)), N - 1)
    if (N * d) % 2:
        d -= 1
    return build_random_regular_graph(N, d, seed)


def hierarchical_route(spec: HierarchySpec, pi: Sequence[int], seed: SeedLike = None,
                       flat: Optional[int] = None) -> HierarchyResult:
    """
    Coarse to fine: at each level l >= 1 the block-to-block demand is split
    into b^(2l) block permutations, each routed on a random overlay of the
    blocks (the level costs the deepest one); atoms then sit in their target
    block. Inside b x b blocks the finest level is row-column routing.
    """
    N = spec.N
    pi = as_permutation(pi, N)
    if flat is None:
        flat = route(flat_overlay(N, make_rng(seed, "flat_overlay", spec.n)), pi,
                     SigmaStrategy.UNIFORM, derive_seed(seed, "flat_route")).depth
    if spec.L == 1:
        return HierarchyResult({1: flat}, flat, flat, {}, Schedule([]))

    pos = np.arange(N)
    depths: Dict[int, int] = {}
    betas: Dict[int, float] = {}
    for level in range(spec.L - 1, 0, -1):
        blocks = spec.num_blocks(level)
        overlay = build_random_regular_graph(blocks, spec.overlay_degree(level),
                                             make_rng(seed, "hier_overlay", spec.n, spec.b, level))
        betas[level] = spectrum(overlay).beta
        oracle = PathOracle(overlay)
        cur = spec.block_of(level, pos)
        dst = spec.block_of(level, pi)
        demand = np.zeros((blocks, blocks), dtype=np.int64)
        np.add.at(demand, (cur, dst), 1)
        layers = birkhoff_layers(demand)
        depth = 0
        for j, perm in enumerate(layers):
            result = route(overlay, perm, SigmaStrategy.UNIFORM, derive_seed(seed, "hier_layer", level, j),
                           oracle=oracle)
            depth = max(depth, result.depth)
        depths[level] = depth

        # Layer j delivers one atom per block; arrivals fill target cells row-major by layer.
        queues: Dict[Tuple[int, int], List[int]] = {}
        for atom in range(N):
            queues.setdefault((int(cur[atom]), int(dst[atom])), []).append(atom)
        new_pos = np.empty(N, dtype=np.int64)
        for j, perm in enumerate(layers):
            for a in range(blocks):
                atom = queues[(a, int(perm[a]))].pop()
                new_pos[atom] = spec.block_cells(level, int(perm[a]))[j]
        pos = new_pos

    groups = []
    block_ids = spec.block_of(1, pi)
    for block in range(spec.num_blocks(1)):
        cells = spec.block_cells(1, block)
        atoms = np.nonzero(block_ids == block)[0]
        cell_index = {int(c): i for i, c in enumerate(cells)}
        local = np.empty(len(cells), dtype=np.int64)
        for atom in atoms:
            local[cell_index[int(pos[atom])]] = cell_index[int(pi[atom])]
        groups.append(row_column_route(cells, local))
    finest = Schedule(_merge_parallel(groups))
    depths[0] = finest.depth
    total = sum(depths.values())
    logger.debug(f"n={spec.n} b={spec.b}: levels {depths}, flat {flat}")
    return HierarchyResult(depths, total, flat, betas, finest)


def hierarchy_experiment(n: int, b: int, trials: int = 20, seed: SeedLike = 0) -> Dict[str, Any]:
    spec = HierarchySpec(n, b)

    def trial(t: int, rng: np.random.Generator) -> HierarchyResult:
        return hierarchical_route(spec, rng.permutation(spec.N), derive_seed(rng))

    results = map_trials(trial, trials, seed, f"hierarchy:{n}:{b}")
    hier = statistics.median(r.total for r in results)
    flat = statistics.median(r.flat for r in results)
    beta_bar = max((max(r.level_betas.values()) for r in results if r.level_betas), default=0.0)
    return {
        "n": n,
        "b": b,
        "L": spec.L,
        "T_hier": hier,
        "T_flat": flat,
        "ratio": round(hier / flat, 4) if flat else 1.0,
        "beta_bar": round(beta_bar, 4),
    }


def block_size_sweep(n: int = 16, b_list: Sequence[int] = (2, 4, 16), trials: int = 10,
                     seed: SeedLike = 0) -> List[Dict[str, Any]]:
    return [hierarchy_experiment(n, b, trials, seed) for b in b_list]


def tower_equivalence_table(
    cases: Sequence[Tuple[int, int]] = ((8, 2), (16, 4), (64, 8)),
    trials: int = 5,
    seed: SeedLike = 0,
) -> List[Dict[str, Any]]:
    """Hierarchy depth next to the tower prediction with fold b^2 over (n/b)^2 base blocks."""
    rows = []
    for n, b in cases:
        row = hierarchy_experiment(n, b, trials, seed)
        spec = HierarchySpec(n, b)
        prediction = tower_prediction(spec.L, b * b, (n // b) ** 2, row["beta_bar"])
        row["T_tower"] = round(prediction, 2)
        row["mismatch"] = round(abs(prediction - row["T_hier"]) / row["T_hier"], 4) if row["T_hier"] else None
        rows.append(row)
    return rows
