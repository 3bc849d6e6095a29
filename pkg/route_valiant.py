"""
Valiant Router - 兩階段路由

Canonical shortest paths, two-phase (scatter/gather) path sets, the matching
scheduler that turns paths into swap steps, congestion/dilation measurement,
derandomized intermediate destinations and capacity-limited schedules.

Pebble p starts on vertex p and must finish on pi[p]. A schedule step is a
matching of support edges; every matched pair swaps its two pebbles.
"""

import enum
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from graphs import WeightedGraph, hop_distances
from routing_errors import DisconnectedGraphError, ParameterError, RoutingError
from seeding import SeedLike, make_rng

logger = logging.getLogger("ValiantRouter")

Swap = Tuple[int, int]


class SigmaStrategy(enum.Enum):
    UNIFORM = "uniform"
    DERANDOMIZED = "derandomized"
    AFFINE = "affine"
    IDENTITY = "identity"   # single phase, straight to pi


def as_permutation(pi: Iterable[int], n: int) -> np.ndarray:
    """Validate and return pi as an int64 array."""
    arr = np.asarray(list(pi) if not isinstance(pi, np.ndarray) else pi, dtype=np.int64).ravel()
    if arr.size != n:
        raise ParameterError(f"Permutation has {arr.size} entries, expected {n}")
    if n and (arr.min() < 0 or arr.max() >= n or np.bincount(arr, minlength=n).max() != 1):
        raise ParameterError("Input is not a permutation of [0, N)")
    return arr


class PathOracle:
    """
    All-pairs canonical shortest paths on the unweighted support.

    next_hop[t, v] is the lowest-index neighbour of v one hop closer to t, so
    path(s, t) follows the BFS tree of t with lowest-index parents.
    """

    def __init__(self, g: WeightedGraph, block: int = 512):
        n = g.num_vertices
        self.graph = g
        self.num_vertices = n
        dist = hop_distances(g, block=block)
        if (dist < 0).any():
            raise DisconnectedGraphError("Canonical paths need a connected host")
        dtype = np.int16 if n < 32000 else np.int32
        self.dist = dist.astype(dtype)
        self.next_hop = np.empty((n, n), dtype=dtype)

        adj = g.adjacency
        deg = np.diff(adj.indptr)
        max_deg = int(deg.max()) if n else 0
        for start in range(0, n, block):
            stop = min(n, start + block)
            d_block = dist[start:stop].astype(np.int32)
            closer = d_block - 1
            hop = np.full((stop - start, n), -1, dtype=np.int32)
            # CSR neighbours are sorted, so the first match per rank is the lowest index.
            for rank in range(max_deg):
                xs = np.nonzero(deg > rank)[0]
                ys = adj.indices[adj.indptr[xs] + rank]
                ok = d_block[:, ys] == closer[:, xs]
                current = hop[:, xs]
                hop[:, xs] = np.where(current >= 0, current, np.where(ok, ys[None, :], -1))
            local = np.arange(stop - start)
            hop[local, np.arange(start, stop)] = np.arange(start, stop)
            self.next_hop[start:stop] = hop
        self.diameter = int(self.dist.max()) if n else 0

    def distance(self, s: int, t: int) -> int:
        return int(self.dist[t, s])

    def path(self, s: int, t: int) -> List[int]:
        """Vertex sequence from s to t; [s] when s == t."""
        out = [int(s)]
        v = int(s)
        row = self.next_hop[t]
        while v != t:
            v = int(row[v])
            out.append(v)
        return out

    def walk_arcs(self, sources: np.ndarray, targets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Directed arcs of every canonical path sources[i] -> targets[i], concatenated."""
        cur = np.asarray(sources, dtype=np.int64).copy()
        targets = np.asarray(targets, dtype=np.int64)
        froms, tos = [], []
        active = np.nonzero(cur != targets)[0]
        while active.size:
            nxt = self.next_hop[targets[active], cur[active]].astype(np.int64)
            froms.append(cur[active].copy())
            tos.append(nxt)
            cur[active] = nxt
            active = active[cur[active] != targets[active]]
        if not froms:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        return np.concatenate(froms), np.concatenate(tos)

    def arc_congestion(self, sources: np.ndarray, targets: np.ndarray) -> int:
        """Max number of paths using one directed arc."""
        u, v = self.walk_arcs(sources, targets)
        if not u.size:
            return 0
        return int(np.bincount(u * self.num_vertices + v).max())


def canonical_paths(g: WeightedGraph) -> PathOracle:
    return PathOracle(g)


@dataclass
class PathSet:
    """Per-pebble paths for each sequential phase, with measured C and D."""

    graph: WeightedGraph
    oracle: PathOracle
    phases: List[List[List[int]]]
    pi: np.ndarray
    sigma: Optional[np.ndarray]
    dilation: int = 0
    congestion: int = 0
    phase_congestion: List[int] = field(default_factory=list)
    total_hops: int = 0

    def __post_init__(self):
        n = self.graph.num_vertices
        self.phase_congestion = []
        for phase in self.phases:
            froms = [a for p in phase for a in p[:-1]]
            tos = [b for p in phase for b in p[1:]]
            if froms:
                codes = np.asarray(froms, dtype=np.int64) * n + np.asarray(tos, dtype=np.int64)
                self.phase_congestion.append(int(np.bincount(codes).max()))
            else:
                self.phase_congestion.append(0)
        lengths = np.zeros(len(self.pi), dtype=np.int64)
        for phase in self.phases:
            lengths += np.array([len(p) - 1 for p in phase], dtype=np.int64)
        self.dilation = int(lengths.max()) if lengths.size else 0
        self.total_hops = int(lengths.sum())
        self.congestion = max(self.phase_congestion, default=0)


@dataclass
class Schedule:
    steps: List[List[Swap]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.steps)

    @property
    def num_swaps(self) -> int:
        return sum(len(step) for step in self.steps)

    def validate(self, graph: Optional[WeightedGraph] = None) -> None:
        """Raise ParameterError unless every step is a matching of support edges."""
        for t, step in enumerate(self.steps):
            seen: Set[int] = set()
            for u, v in step:
                if u in seen or v in seen or u == v:
                    raise ParameterError(f"Step {t} is not a matching at pair {u}:{v}")
                seen.update((u, v))
                if graph is not None and not graph.has_edge(u, v):
                    raise ParameterError(f"Step {t} uses non-edge {u}:{v}")

    def apply(self, num_vertices: int, placement: Optional[np.ndarray] = None) -> np.ndarray:
        """Occupant of every vertex after running the schedule (identity placement by default)."""
        occ = np.arange(num_vertices) if placement is None else np.array(placement, copy=True)
        for step in self.steps:
            for u, v in step:
                occ[u], occ[v] = occ[v], occ[u]
        return occ

    def realizes(self, pi: np.ndarray) -> bool:
        pi = np.asarray(pi)
        occ = self.apply(len(pi))
        return bool(np.array_equal(occ[pi], np.arange(len(pi))))

    def extend(self, other: "Schedule") -> "Schedule":
        return Schedule(self.steps + other.steps)


@dataclass
class RoutingResult:
    depth: int
    schedule: Schedule
    measured_C: int
    measured_D: int
    realized: bool
    sigma: Optional[np.ndarray] = None
    phase_depths: List[int] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)
    strategy: str = SigmaStrategy.UNIFORM.value

    def to_dict(self) -> Dict[str, object]:
        return {
            "T": self.depth,
            "C": self.measured_C,
            "D": self.measured_D,
            "realized": self.realized,
            "phase_depths": self.phase_depths,
            "flags": self.flags,
            "strategy": self.strategy,
        }


# ---------------------------------------------------------------------------
# Path sets
# ---------------------------------------------------------------------------

def _resolve_sigma(
    g: WeightedGraph,
    pi: np.ndarray,
    strategy: SigmaStrategy,
    seed: SeedLike,
    oracle: PathOracle,
    sigma: Optional[Sequence[int]],
) -> Optional[np.ndarray]:
    n = g.num_vertices
    if sigma is not None:
        return as_permutation(sigma, n)
    if strategy is SigmaStrategy.IDENTITY:
        return None
    if strategy is SigmaStrategy.UNIFORM:
        return make_rng(seed).permutation(n)
    if strategy is SigmaStrategy.DERANDOMIZED:
        return derandomized_sigma(g, pi, oracle)
    raise ParameterError("The affine strategy needs an explicit sigma (see algebraic.affine_sigma_search)")


def valiant_paths(
    g: WeightedGraph,
    pi: Sequence[int],
    sigma_strategy: SigmaStrategy = SigmaStrategy.UNIFORM,
    seed: SeedLike = None,
    sigma: Optional[Sequence[int]] = None,
    oracle: Optional[PathOracle] = None,
) -> PathSet:
    """
    Two-phase canonical paths: scatter v -> sigma(v), then gather sigma(v) -> pi(v).
    With SigmaStrategy.IDENTITY there is a single phase v -> pi(v).
    """
    strategy = SigmaStrategy(sigma_strategy)
    n = g.num_vertices
    pi = as_permutation(pi, n)
    oracle = oracle or PathOracle(g)
    sig = _resolve_sigma(g, pi, strategy, seed, oracle, sigma)
    if sig is None:
        phases = [[oracle.path(v, int(pi[v])) for v in range(n)]]
    else:
        phases = [
            [oracle.path(v, int(sig[v])) for v in range(n)],
            [oracle.path(int(sig[v]), int(pi[v])) for v in range(n)],
        ]
    return PathSet(g, oracle, phases, pi, sig)


# ---------------------------------------------------------------------------
# Scheduler
# ---------------------------------------------------------------------------

class _Transposition:
    """
    Exchange of the pebbles on the two ends of a path; the middle pebbles end
    where they started. Odd-even transposition rounds on the path's target
    order finish within len(path) rounds.
    """

    def __init__(self, path: List[int]):
        self.path = path
        last = len(path) - 1
        self.keys = list(range(last + 1))
        self.keys[0], self.keys[last] = last, 0
        self.parity = 0
        self.queue: Deque[Swap] = deque()

    def done(self) -> bool:
        return not self.queue and all(a < b for a, b in zip(self.keys, self.keys[1:]))

    def next_round(self) -> None:
        keys = self.keys
        while not self.done() and not self.queue:
            for j in range(self.parity, len(keys) - 1, 2):
                if keys[j] > keys[j + 1]:
                    keys[j], keys[j + 1] = keys[j + 1], keys[j]
                    self.queue.append((self.path[j], self.path[j + 1]))
            self.parity ^= 1


class _PhaseScheduler:
    """Swap steps that carry every pebble of one phase from its start to its destination."""

    def __init__(self, graph: WeightedGraph, oracle: PathOracle, starts: List[int], dests: List[int],
                 capacity: Optional[int], max_steps: int):
        n = graph.num_vertices
        self.n = n
        self.oracle = oracle
        self.dist = oracle.dist
        self.neighbors = [graph.neighbors(v).tolist() for v in range(n)]
        self.capacity = capacity if capacity is not None else n
        self.max_steps = max_steps
        self.dest = list(dests)
        self.pos = list(starts)
        self.occ = [-1] * n
        for pebble, v in enumerate(self.pos):
            self.occ[v] = pebble
        self.steps: List[List[Swap]] = []

    def _swap(self, u: int, v: int, step: List[Swap]) -> None:
        a, b = self.occ[u], self.occ[v]
        self.occ[u], self.occ[v] = b, a
        self.pos[a], self.pos[b] = v, u
        step.append((min(u, v), max(u, v)))

    def _emit(self, step: List[Swap]) -> bool:
        if not step:
            return False
        if len(self.steps) >= self.max_steps:
            raise RoutingError(f"Scheduler exceeded {self.max_steps} steps")
        self.steps.append(step)
        return True

    def greedy_step(self) -> List[Swap]:
        """
        One matching of swaps, each lowering the pair's total remaining hops.

        The mover steps onto any neighbour one hop closer to its destination.
        Bigger cuts go first, then movers with more hops left, then vertex order.
        """
        dist = self.dist
        candidates = []
        for a, x in enumerate(self.pos):
            row = dist[self.dest[a]]
            left = int(row[x])
            if left == 0:
                continue
            for y in self.neighbors[x]:
                if row[y] != left - 1:
                    continue
                back = dist[self.dest[self.occ[y]]]
                gain = 1 + int(back[y]) - int(back[x])
                if gain >= 1:
                    candidates.append((-gain, -left, x, y))
        candidates.sort()
        used: Set[int] = set()
        step: List[Swap] = []
        for _, _, x, y in candidates:
            if len(step) >= self.capacity:
                break
            if x in used or y in used:
                continue
            used.update((x, y))
            self._swap(x, y, step)
        return step

    def _cycles(self) -> List[List[int]]:
        """Vertex cycles of the residual permutation: the pebble on c[i] belongs on c[i + 1]."""
        seen = [False] * self.n
        cycles = []
        for s in range(self.n):
            if seen[s] or self.dest[self.occ[s]] == s:
                continue
            cycle = []
            v = s
            while not seen[v]:
                seen[v] = True
                cycle.append(v)
                v = self.dest[self.occ[v]]
            cycles.append(cycle)
        return cycles

    def reflection_pairs(self) -> List[Swap]:
        """
        Vertex pairs of one reflection per residual cycle.

        Reflecting about axis a sends c[i] to c[a - i]; reflections about a and
        then a + 1 rotate the cycle by one. The axis with the smallest pair
        distance over both reflections is used. A 2-cycle is its own reflection.
        """
        pairs: List[Swap] = []
        for cycle in self._cycles():
            k = len(cycle)
            if k == 2:
                pairs.append((cycle[0], cycle[1]))
                continue
            c = np.asarray(cycle)
            d = self.dist[np.ix_(c, c)]
            idx = np.arange(k)
            cost = np.array([int(d[idx, (a - idx) % k].sum()) for a in range(k)])
            axis = int(np.argmin(cost + np.roll(cost, -1)))
            pairs.extend((cycle[i], cycle[(axis - i) % k]) for i in range(k) if i < (axis - i) % k)
        return pairs

    def run_transpositions(self, pairs: List[Swap]) -> None:
        """Carry out disjoint vertex transpositions along canonical paths; a path starts once it is free."""
        pending = [_Transposition(self.oracle.path(u, v)) for u, v in pairs]
        running: List[_Transposition] = []
        busy: Set[int] = set()
        while pending or running:
            waiting = []
            for op in pending:
                if busy.isdisjoint(op.path):
                    busy.update(op.path)
                    op.next_round()
                    running.append(op)
                else:
                    waiting.append(op)
            pending = waiting

            step: List[Swap] = []
            budget = self.capacity
            for op in running:
                # swaps of one round touch disjoint edges, so a round may span steps
                while op.queue and budget > 0:
                    u, v = op.queue.popleft()
                    self._swap(u, v, step)
                    budget -= 1
                if not op.queue:
                    op.next_round()
            for op in running:
                if op.done():
                    busy.difference_update(op.path)
            running = [op for op in running if not op.done()]
            self._emit(step)

    def run(self) -> List[List[Swap]]:
        for _ in range(max(0, self.oracle.diameter - 1)):
            if not self._emit(self.greedy_step()):
                break
        for _ in range(2):
            pairs = self.reflection_pairs()
            if not pairs:
                break
            self.run_transpositions(pairs)
        if any(self.dest[p] != v for p, v in enumerate(self.pos)):
            raise RoutingError("Residual permutation survived two reflection rounds")
        return self.steps


def _check_walks(ps: PathSet) -> None:
    nbrs = ps.graph.neighbor_sets
    n = ps.graph.num_vertices
    position = list(range(len(ps.pi)))
    for k, phase in enumerate(ps.phases):
        if len(phase) != len(position):
            raise ParameterError(f"Phase {k} has {len(phase)} paths for {len(position)} pebbles")
        ends = set()
        for p, walk in enumerate(phase):
            if not walk or walk[0] != position[p]:
                raise ParameterError(f"Phase {k} path of pebble {p} does not start at its position")
            for a, b in zip(walk, walk[1:]):
                if not (0 <= b < n) or b not in nbrs[a]:
                    raise ParameterError(f"Path of pebble {p} is not a walk at {a}->{b}")
            ends.add(walk[-1])
            position[p] = walk[-1]
        if len(ends) != len(phase):
            raise ParameterError(f"Phase {k} endpoints do not form a permutation")


def schedule_paths(ps: PathSet, capacity: Optional[int] = None) -> Tuple[Schedule, List[int]]:
    """
    Turn a path set into matching steps, phase after phase.

    Each phase opens with up to diameter - 1 greedy steps in which many pebbles
    move at once, every swap cutting the pair's total remaining hops. The
    residual permutation is then split per cycle into two reflections, each a
    set of vertex transpositions run as odd-even rounds along canonical paths,
    in parallel wherever the paths are disjoint. `capacity` caps swaps per step.

    Returns:
        (schedule, per-phase depths)
    """
    if capacity is not None and capacity < 1:
        raise ParameterError(f"Capacity must be >= 1, got {capacity}")
    _check_walks(ps)
    n = ps.graph.num_vertices
    diameter = ps.oracle.diameter
    max_steps = 4 * n * (diameter + 1) + diameter
    steps: List[List[Swap]] = []
    depths = []
    for phase in ps.phases:
        starts = [walk[0] for walk in phase]
        dests = [walk[-1] for walk in phase]
        phase_steps = _PhaseScheduler(ps.graph, ps.oracle, starts, dests, capacity, max_steps).run()
        depths.append(len(phase_steps))
        steps.extend(phase_steps)
    return Schedule(steps), depths


def _bound_flags(depth: int, C: int, D: int) -> List[str]:
    flags = []
    if depth > C * D:
        flags.append("depth_exceeds_CD")
    if depth > 2 * (C + D):
        flags.append("depth_exceeds_2(C+D)")
    return flags


def route(
    g: WeightedGraph,
    pi: Sequence[int],
    strategy: SigmaStrategy = SigmaStrategy.UNIFORM,
    seed: SeedLike = None,
    capacity: Optional[int] = None,
    oracle: Optional[PathOracle] = None,
    sigma: Optional[Sequence[int]] = None,
) -> RoutingResult:
    """
    valiant_paths -> schedule_paths -> verify.

    The identity permutation routes in zero steps regardless of strategy.
    """
    strategy = SigmaStrategy(strategy)
    n = g.num_vertices
    pi = as_permutation(pi, n)
    if np.array_equal(pi, np.arange(n)):
        return RoutingResult(0, Schedule([]), 0, 0, True, np.arange(n), [0], [], strategy.value)

    ps = valiant_paths(g, pi, strategy, seed, sigma=sigma, oracle=oracle)
    schedule, depths = schedule_paths(ps, capacity)
    realized = schedule.realizes(pi)
    if not realized:
        raise RoutingError("Schedule does not realize the requested permutation")
    flags = _bound_flags(schedule.depth, ps.congestion, ps.dilation)
    if flags:
        logger.debug(f"T={schedule.depth}, C={ps.congestion}, D={ps.dilation}: {', '.join(flags)}")
    return RoutingResult(
        depth=schedule.depth,
        schedule=schedule,
        measured_C=ps.congestion,
        measured_D=ps.dilation,
        realized=realized,
        sigma=ps.sigma,
        phase_depths=depths,
        flags=flags,
        strategy=strategy.value,
    )


def partial_matching_route(
    g: WeightedGraph,
    pi: Sequence[int],
    k: int,
    seed: SeedLike = None,
    strategy: SigmaStrategy = SigmaStrategy.UNIFORM,
    oracle: Optional[PathOracle] = None,
) -> RoutingResult:
    """route() with at most k swaps per step."""
    if k < 1:
        raise ParameterError(f"Capacity must be >= 1, got k={k}")
    return route(g, pi, strategy, seed, capacity=k, oracle=oracle)


# ---------------------------------------------------------------------------
# Derandomization
# ---------------------------------------------------------------------------

def _path_costs_from(oracle: PathOracle, source: int, weight: np.ndarray) -> np.ndarray:
    """Sum of arc weights along path(source, u) for every u."""
    n = oracle.num_vertices
    targets = np.arange(n)
    cur = np.full(n, source, dtype=np.int64)
    cost = np.zeros(n)
    active = np.nonzero(cur != targets)[0]
    while active.size:
        nxt = oracle.next_hop[targets[active], cur[active]].astype(np.int64)
        cost[active] += weight[cur[active], nxt]
        cur[active] = nxt
        active = active[cur[active] != targets[active]]
    return cost


def _path_costs_to(oracle: PathOracle, target: int, weight: np.ndarray) -> np.ndarray:
    """Sum of arc weights along path(u, target) for every u."""
    n = oracle.num_vertices
    cur = np.arange(n, dtype=np.int64)
    cost = np.zeros(n)
    row = oracle.next_hop[target]
    active = np.nonzero(cur != target)[0]
    while active.size:
        nxt = row[cur[active]].astype(np.int64)
        cost[active] += weight[cur[active], nxt]
        cur[active] = nxt
        active = active[cur[active] != target]
    return cost


def derandomized_sigma(g: WeightedGraph, pi: Sequence[int], oracle: Optional[PathOracle] = None) -> np.ndarray:
    """
    Choose sigma(0), sigma(1), ... greedily, each minimizing the increase of
    sum_e exp(lam * X_e^scatter) + exp(lam * X_e^gather) over realized loads,
    with lam = ln N / max(D, 1). Ties go to the lowest vertex.
    """
    n = g.num_vertices
    pi = as_permutation(pi, n)
    oracle = oracle or PathOracle(g)
    lam = math.log(max(n, 2)) / max(oracle.diameter, 1)
    growth = math.expm1(lam)
    scatter = np.zeros((n, n))
    gather = np.zeros((n, n))
    taken = np.zeros(n, dtype=bool)
    sigma = np.empty(n, dtype=np.int64)

    for v in range(n):
        w_s = np.exp(lam * scatter)
        w_g = np.exp(lam * gather)
        cost = (_path_costs_from(oracle, v, w_s) + _path_costs_to(oracle, int(pi[v]), w_g)) * growth
        cost[taken] = np.inf
        u = int(np.argmin(cost))
        sigma[v] = u
        taken[u] = True
        a, b = oracle.walk_arcs(np.array([v]), np.array([u]))
        scatter[a, b] += 1
        a, b = oracle.walk_arcs(np.array([u]), np.array([int(pi[v])]))
        gather[a, b] += 1
    return sigma


# ---------------------------------------------------------------------------
# Small-instance optimum and schedule text
# ---------------------------------------------------------------------------

def _all_matchings(edges: List[Swap]) -> List[List[Swap]]:
    out: List[List[Swap]] = []

    def extend(start: int, used: Set[int], current: List[Swap]) -> None:
        for i in range(start, len(edges)):
            u, v = edges[i]
            if u in used or v in used:
                continue
            current.append((u, v))
            out.append(list(current))
            extend(i + 1, used | {u, v}, current)
            current.pop()

    extend(0, set(), [])
    return out


def optimal_routing_depth(g: WeightedGraph, pi: Sequence[int], max_vertices: int = 8) -> int:
    """Exact minimum number of matching steps, by breadth-first search over placements."""
    n = g.num_vertices
    if n > max_vertices:
        raise ParameterError(f"Exact routing depth is limited to N <= {max_vertices}, got N={n}")
    pi = as_permutation(pi, n)
    goal = [0] * n
    for p in range(n):
        goal[int(pi[p])] = p
    goal_state = tuple(goal)
    start = tuple(range(n))
    if start == goal_state:
        return 0

    moves = []
    for matching in _all_matchings([tuple(e) for e in g.edges.tolist()]):
        perm = list(range(n))
        for u, v in matching:
            perm[u], perm[v] = v, u
        moves.append(perm)

    seen = {start}
    frontier = [start]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for state in frontier:
            for perm in moves:
                new = tuple(state[i] for i in perm)
                if new == goal_state:
                    return depth
                if new not in seen:
                    seen.add(new)
                    nxt.append(new)
        frontier = nxt
    raise RoutingError("Permutation is unreachable; the host is disconnected")


def format_schedule(schedule: Schedule) -> str:
    """One line per step, `u:v` pairs separated by spaces."""
    return "".join(" ".join(f"{u}:{v}" for u, v in step) + "\n" for step in schedule.steps)


def parse_schedule(text: str) -> Schedule:
    steps = []
    for line in text.splitlines():
        if not line.strip():
            continue
        step = []
        for token in line.split():
            try:
                u, v = token.split(":")
                step.append((int(u), int(v)))
            except ValueError as exc:
                raise ParameterError(f"Bad schedule token {token!r}") from exc
        steps.append(step)
    return Schedule(steps)


def apply_schedule(g: WeightedGraph, schedule: Schedule | str, pi: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Simulate a schedule on `g` from the identity placement.

    Accepts the text form as well. When `pi` is given, raises ParameterError unless the
    schedule delivers it.
    """
    if isinstance(schedule, str):
        schedule = parse_schedule(schedule)
    schedule.validate(g)
    occ = schedule.apply(g.num_vertices)
    if pi is not None and not schedule.realizes(np.asarray(pi)):
        raise ParameterError("Schedule does not realize the requested permutation")
    return occ
