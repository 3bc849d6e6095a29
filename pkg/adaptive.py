"""
Adaptive - 位移能量貪婪路由

Greedy matching on the displacement energy Phi = sum of squared distances
from each atom to its target, stall detection, the greedy-then-Valiant
hybrid, and multiplicative-weights selection among candidate overlays.
"""

import enum
import logging
import math
import statistics
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from graphs import WeightedGraph, build_random_regular_graph, complete_graph, hop_distances
from route_valiant import SigmaStrategy, Swap, as_permutation, route
from routing_errors import DisconnectedGraphError, ParameterError
from seeding import SeedLike, derive_seed, make_rng, map_trials
from spectral import spectrum

logger = logging.getLogger("Adaptive")


class DisplacementMetric(enum.Enum):
    GRID_MANHATTAN = "grid_manhattan"
    OVERLAY_BFS = "overlay_bfs"


def grid_distance_matrix(n: int) -> np.ndarray:
    r, c = np.divmod(np.arange(n * n), n)
    return (np.abs(r[:, None] - r[None, :]) + np.abs(c[:, None] - c[None, :])).astype(np.int64)


class DisplacementState:
    """Atom positions on an n x n grid of sites and the running potential Phi."""

    def __init__(
        self,
        n: int,
        targets: Sequence[int],
        metric: DisplacementMetric = DisplacementMetric.GRID_MANHATTAN,
        overlay: Optional[WeightedGraph] = None,
        dist: Optional[np.ndarray] = None,
    ):
        self.n = n
        N = n * n
        self.metric = DisplacementMetric(metric)
        self.targets = as_permutation(targets, N)
        if dist is not None:
            self.dist = dist
        elif self.metric is DisplacementMetric.GRID_MANHATTAN:
            self.dist = grid_distance_matrix(n)
        else:
            if overlay is None:
                raise ParameterError("The overlay_bfs metric needs an overlay")
            hops = hop_distances(overlay)
            if (hops < 0).any():
                raise DisconnectedGraphError("overlay_bfs metric on a disconnected overlay")
            self.dist = hops.astype(np.int64)
        self.pos = np.arange(N)
        self.occ = np.arange(N)
        self.phi = self.recompute_phi()

    @property
    def num_atoms(self) -> int:
        return len(self.targets)

    def rho(self) -> np.ndarray:
        return self.dist[self.pos, self.targets]

    def recompute_phi(self) -> int:
        return int((self.rho() ** 2).sum())

    def placed(self) -> bool:
        return self.phi == 0

    def swap_gains(self, edges: np.ndarray) -> np.ndarray:
        """Drop in Phi if each edge (u, v) were swapped alone."""
        u, v = edges[:, 0], edges[:, 1]
        ta = self.targets[self.occ[u]]
        tb = self.targets[self.occ[v]]
        D = self.dist
        return D[u, ta] ** 2 + D[v, tb] ** 2 - D[v, ta] ** 2 - D[u, tb] ** 2

    def apply(self, matching: Sequence[Swap], gains: Sequence[int]) -> None:
        for (u, v), gain in zip(matching, gains):
            a, b = self.occ[u], self.occ[v]
            self.occ[u], self.occ[v] = b, a
            self.pos[a], self.pos[b] = v, u
            self.phi -= int(gain)

    def residual_permutation(self) -> np.ndarray:
        """Permutation still to route: the atom on pos[a] must reach targets[a]."""
        residual = np.empty(self.num_atoms, dtype=np.int64)
        residual[self.pos] = self.targets
        return residual


@dataclass
class GreedyStep:
    matching: List[Swap]
    delta_phi: int


def greedy_matching_step(state: DisplacementState, overlay: WeightedGraph) -> GreedyStep:
    """
    Sort overlay edges by swap gain (ties by edge index), keep the
    vertex-disjoint ones with strictly positive gain, and apply them.
    """
    edges = overlay.edges
    if not len(edges) or state.placed():
        return GreedyStep([], 0)
    gains = state.swap_gains(edges)
    candidates = np.nonzero(gains > 0)[0]
    order = candidates[np.lexsort((candidates, -gains[candidates]))]
    used = np.zeros(state.num_atoms, dtype=bool)
    matching: List[Swap] = []
    chosen: List[int] = []
    for e in order:
        u, v = int(edges[e, 0]), int(edges[e, 1])
        if used[u] or used[v]:
            continue
        used[u] = used[v] = True
        matching.append((u, v))
        chosen.append(int(gains[e]))
    before = state.phi
    state.apply(matching, chosen)
    return GreedyStep(matching, before - state.phi)


@dataclass
class StallResult:
    T_stall: int
    stall_fraction: Optional[float]
    history: List[int]
    violations: int = 0
    state: Optional[DisplacementState] = field(default=None, repr=False)

    @property
    def first_step_reduction(self) -> Optional[float]:
        if len(self.history) < 2 or not self.history[0]:
            return None
        return (self.history[0] - self.history[1]) / self.history[0]


def run_greedy(state: DisplacementState, overlay: WeightedGraph, max_steps: Optional[int] = None) -> StallResult:
    """
    Greedy steps until Phi stops dropping (or max_steps). After every step
    Phi is recomputed from positions; a step whose recomputed Phi rose, or
    disagrees with the running total, counts as a violation and the running
    total is resynced.
    """
    phi0 = state.phi
    history = [phi0]
    violations = 0
    steps = 0
    while not state.placed() and (max_steps is None or steps < max_steps):
        before = state.phi
        step = greedy_matching_step(state, overlay)
        if step.delta_phi == 0:
            break
        steps += 1
        actual = state.recompute_phi()
        if actual != state.phi or actual > before:
            violations += 1
            logger.warning(f"Step {steps}: Phi {before} -> {actual}, running total {state.phi}")
            state.phi = actual
        history.append(state.phi)
    fraction = state.phi / phi0 if phi0 else None
    return StallResult(steps, fraction, history, violations, state)


def random_overlay(N: int, d: int, seed: SeedLike) -> WeightedGraph:
    if (N * d) % 2:
        d -= 1
    return build_random_regular_graph(N, min(d, N - 1), seed)


def run_greedy_until_stall(
    n: int,
    d: int = 8,
    seed: SeedLike = 0,
    metric: DisplacementMetric = DisplacementMetric.GRID_MANHATTAN,
    pi: Optional[Sequence[int]] = None,
    overlay: Optional[WeightedGraph] = None,
) -> StallResult:
    """Random permutation and d-regular overlay unless given; stall fraction is None when Phi_0 = 0."""
    N = n * n
    overlay = overlay or random_overlay(N, d, make_rng(seed, "greedy_overlay", n, d))
    targets = make_rng(seed, "greedy_pi", n).permutation(N) if pi is None else pi
    state = DisplacementState(n, targets, metric, overlay)
    return run_greedy(state, overlay)


@dataclass
class ConcentrationResult:
    alpha: float
    samples: int
    bins: int


def tail_fraction(phis: np.ndarray, reductions: np.ndarray, bins: int = 10) -> Tuple[float, int]:
    """
    Fraction of relative reductions below half their bin mean, with steps
    binned by Phi into equal-count chunks. Bins are halved until each holds
    at least five steps.
    """
    if not len(phis):
        return 0.0, 0
    order = np.argsort(phis, kind="stable")
    rel = reductions[order]
    while bins > 1 and len(rel) / bins < 5:
        logger.warning(f"{len(rel)} samples are too few for {bins} bins, widening")
        bins //= 2
    tail = 0
    for chunk in np.array_split(rel, bins):
        if len(chunk):
            tail += int((chunk < 0.5 * chunk.mean()).sum())
    return tail / len(rel), bins


def concentration_check(
    n: int,
    d: int = 8,
    trials: int = 20,
    seed: SeedLike = 0,
    pi: Optional[Sequence[int]] = None,
    overlay: Optional[WeightedGraph] = None,
    bins: int = 10,
) -> ConcentrationResult:
    """Pooled tail fraction of greedy steps over `trials` runs."""
    if trials < 20:
        raise ParameterError(f"Concentration needs at least 20 trials, got {trials}")
    N = n * n

    def trial(t: int, rng: np.random.Generator) -> List[Tuple[int, float]]:
        g = overlay or random_overlay(N, d, rng)
        targets = rng.permutation(N) if pi is None else pi
        history = run_greedy(DisplacementState(n, targets, overlay=g), g).history
        return [(history[i], (history[i] - history[i + 1]) / history[i]) for i in range(len(history) - 1)]

    pooled = [s for run in map_trials(trial, trials, seed, f"concentration:{n}:{d}") for s in run]
    phis = np.array([p for p, _ in pooled], dtype=np.float64)
    reductions = np.array([r for _, r in pooled], dtype=np.float64)
    alpha, used = tail_fraction(phis, reductions, bins)
    return ConcentrationResult(alpha, len(pooled), used)


@dataclass
class HybridResult:
    """
    Measured depths of greedy-then-route next to pure two-phase routing,
    plus the depth model that charges the residual its share of Phi.
    """

    N: int
    T_stall: int
    T_residual: int
    T_pure: int
    stall_fraction: Optional[float]
    beta: float

    @property
    def T_total(self) -> int:
        return self.T_stall + self.T_residual

    @property
    def speedup(self) -> float:
        return self.T_pure / self.T_total if self.T_total else 1.0

    @property
    def T_pure_model(self) -> float:
        if self.N < 2:
            return 0.0
        return 2 * math.log2(self.N) / (1 - self.beta) if self.beta < 1 else math.inf

    @property
    def T_hybrid_model(self) -> float:
        return self.T_stall + (self.stall_fraction or 0.0) * self.T_pure_model

    @property
    def model_ratio(self) -> float:
        return self.T_hybrid_model / self.T_pure_model if self.T_pure_model else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "T_stall": self.T_stall,
            "T_residual": self.T_residual,
            "T_total": self.T_total,
            "T_pure": self.T_pure,
            "speedup": round(self.speedup, 3),
            "stall_fraction": self.stall_fraction,
            "beta": round(self.beta, 4),
            "T_hybrid_model": round(self.T_hybrid_model, 2),
            "T_pure_model": round(self.T_pure_model, 2),
            "model_ratio": round(self.model_ratio, 4),
        }


def route_residual(overlay: WeightedGraph, state: DisplacementState, seed: SeedLike) -> int:
    """Depth of routing what greedy left unplaced; placed atoms stay put."""
    if state.placed():
        return 0
    return route(overlay, state.residual_permutation(), SigmaStrategy.IDENTITY, seed).depth


def hybrid_greedy_valiant(
    n: int,
    d: int = 8,
    seed: SeedLike = 0,
    pi: Optional[Sequence[int]] = None,
    overlay: Optional[WeightedGraph] = None,
) -> HybridResult:
    """
    Greedy until stall, then route the leftover permutation directly on the
    same overlay. T_pure routes the whole permutation in two uniform phases.
    The model charges the residual stall_fraction * 2 log2 N / (1 - beta).
    """
    N = n * n
    overlay = overlay or random_overlay(N, d, make_rng(seed, "greedy_overlay", n, d))
    targets = make_rng(seed, "greedy_pi", n).permutation(N) if pi is None else as_permutation(pi, N)
    stall = run_greedy(DisplacementState(n, targets, overlay=overlay), overlay)
    route_seed = derive_seed(seed, "hybrid_route")
    residual = route_residual(overlay, stall.state, route_seed)
    pure = route(overlay, targets, SigmaStrategy.UNIFORM, route_seed).depth
    beta = spectrum(overlay).beta
    result = HybridResult(N, stall.T_stall, residual, pure, stall.stall_fraction, beta)
    logger.debug(f"N={N}: hybrid {result.T_total} vs pure {pure}, model ratio {result.model_ratio:.3f}")
    return result


@dataclass
class OverlayFamily:
    names: List[str]
    graphs: List[WeightedGraph]
    weights: Optional[np.ndarray] = None
    eta: float = 0.5

    def __post_init__(self):
        if not self.graphs or len(self.names) != len(self.graphs):
            raise ParameterError("Overlay family needs one name per graph and at least one graph")
        n = self.graphs[0].num_vertices
        if any(g.num_vertices != n for g in self.graphs):
            raise ParameterError("Overlay family members must share the vertex set")
        if self.weights is None:
            self.weights = np.ones(len(self.graphs))
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if (self.weights <= 0).any():
            raise ParameterError("Overlay weights must be positive")

    def probabilities(self) -> np.ndarray:
        return self.weights / self.weights.sum()


def default_family(n: int, seed: SeedLike = 0, eta: Optional[float] = None) -> OverlayFamily:
    """{4-regular, 8-regular, complete} on n*n sites."""
    if eta is None:
        from routing_config import get_settings
        eta = get_settings().mw_eta
    N = n * n
    graphs = [random_overlay(N, 4, make_rng(seed, "mw_family", 4)),
              random_overlay(N, 8, make_rng(seed, "mw_family", 8)),
              complete_graph(N)]
    return OverlayFamily(["d4", "d8", "complete"], graphs, eta=eta)


@dataclass
class MWResult:
    T_MW: int
    competitive_ratio: float
    baselines: Dict[str, int]
    flagged: bool
    weights: np.ndarray
    T_greedy: int = 0
    finished_on: Optional[str] = None

    @property
    def T_best(self) -> int:
        return min(self.baselines.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "T_MW": self.T_MW,
            "T_greedy": self.T_greedy,
            "CR": round(self.competitive_ratio, 4),
            "baselines": self.baselines,
            "flagged": self.flagged,
            "finished_on": self.finished_on,
            "weights": [round(float(w), 4) for w in self.weights],
        }


def greedy_then_route(
    n: int,
    targets: np.ndarray,
    g: WeightedGraph,
    dist: np.ndarray,
    cap: int,
    seed: SeedLike,
) -> int:
    """Single-overlay baseline: greedy until stall or cap, then route the residual on g."""
    state = DisplacementState(n, targets, dist=dist)
    result = run_greedy(state, g, max_steps=cap)
    return result.T_stall + route_residual(g, state, seed)


def mw_overlay_selection(
    family: OverlayFamily,
    pi: Sequence[int],
    eta: Optional[float] = None,
    seed: SeedLike = 0,
) -> MWResult:
    """
    Each step samples overlay i with probability w_i / sum(w), takes its
    greedy step and multiplies w_i by exp(eta * clip(dPhi/Phi, 0, 1)).

    Greedy stops when every member stalls or after 50*log2(N) steps; what
    is left is then routed on the heaviest member and the run is flagged.
    Baselines run the same greedy-then-route protocol on one member each,
    and CR = T_MW / min(baselines).
    """
    N = family.graphs[0].num_vertices
    n = math.isqrt(N)
    if n * n != N:
        raise ParameterError(f"N={N} is not a square grid size")
    eta = family.eta if eta is None else eta
    targets = as_permutation(pi, N)
    cap = math.ceil(50 * math.log2(N)) if N > 1 else 1
    rng = make_rng(seed, "mw_select")
    route_seed = derive_seed(seed, "mw_route")
    weights = family.weights.copy()
    dist = grid_distance_matrix(n)

    state = DisplacementState(n, targets, dist=dist)
    steps = 0
    while not state.placed() and steps < cap:
        i = int(rng.choice(len(weights), p=weights / weights.sum()))
        before = state.phi
        step = greedy_matching_step(state, family.graphs[i])
        if step.delta_phi == 0 and all(
            not (state.swap_gains(g.edges) > 0).any() for g in family.graphs if len(g.edges)
        ):
            break
        steps += 1
        weights[i] *= math.exp(eta * min(max(step.delta_phi / before, 0.0), 1.0))

    flagged = not state.placed()
    finished_on = None
    T_mw = steps
    if flagged:
        heaviest = int(np.argmax(weights))
        finished_on = family.names[heaviest]
        T_mw += route_residual(family.graphs[heaviest], state, route_seed)
        logger.debug(f"MW greedy stopped after {steps} steps, routed the rest on {finished_on}")

    baselines = {
        name: greedy_then_route(n, targets, g, dist, cap, route_seed)
        for name, g in zip(family.names, family.graphs)
    }
    best = min(baselines.values())
    cr = T_mw / best if best else (1.0 if T_mw == 0 else math.inf)
    return MWResult(T_mw, cr, baselines, flagged, weights, steps, finished_on)


def mw_experiment(n: int = 6, trials: int = 20, seed: SeedLike = 0) -> Dict[str, Any]:
    """Per-trial competitive ratios plus mean T_MW over mean T_best."""
    family = default_family(n, seed)

    def trial(t: int, rng: np.random.Generator) -> MWResult:
        return mw_overlay_selection(family, rng.permutation(n * n), seed=rng)

    results = map_trials(trial, trials, seed, f"mw:{n}")
    ratios = [r.competitive_ratio for r in results]
    mean_mw = statistics.fmean(r.T_MW for r in results)
    mean_best = statistics.fmean(r.T_best for r in results)
    return {
        "N": n * n,
        "trials": trials,
        "mean_T_MW": round(mean_mw, 2),
        "mean_T_best": round(mean_best, 2),
        "ratio_of_means": round(mean_mw / mean_best, 4) if mean_best else None,
        "mean_CR": round(statistics.fmean(ratios), 4),
        "min_CR": round(min(ratios), 4),
        "max_CR": round(max(ratios), 4),
        "flagged": sum(r.flagged for r in results),
    }


def greedy_table(
    n_list: Sequence[int] = (4, 6, 8, 10, 12, 16),
    d: int = 8,
    trials: int = 20,
    seed: SeedLike = 0,
) -> List[Dict[str, Any]]:
    """Means over trials of T_stall, Phi_stall/Phi_0 and the step-0 reduction, plus step and violation counts."""
    rows = []
    for n in n_list:
        def trial(t: int, rng: np.random.Generator) -> StallResult:
            return run_greedy_until_stall(n, d, derive_seed(rng))

        results = map_trials(trial, trials, seed, f"greedy:{n}:{d}")
        fractions = [r.stall_fraction for r in results if r.stall_fraction is not None]
        firsts = [r.first_step_reduction for r in results if r.first_step_reduction is not None]
        rows.append({
            "N": n * n,
            "T_stall": round(statistics.fmean(r.T_stall for r in results), 3),
            "stall_fraction": round(statistics.fmean(fractions), 4) if fractions else None,
            "step0_delta": round(statistics.fmean(firsts), 4) if firsts else None,
            "steps": sum(r.T_stall for r in results),
            "violations": sum(r.violations for r in results),
        })
    return rows


def stall_scaling(
    n_list: Sequence[int] = (4, 6, 8, 10, 12, 16),
    d: int = 8,
    trials: int = 20,
    seed: SeedLike = 0,
) -> Dict[str, Any]:
    """Least-squares slope of mean T_stall against log2 N."""
    rows = greedy_table(n_list, d, trials, seed)
    x = np.log2([row["N"] for row in rows])
    y = np.array([row["T_stall"] for row in rows])
    slope = float(np.polyfit(x, y, 1)[0]) if len(rows) >= 2 else math.nan
    return {"rows": rows, "slope": round(slope, 4)}
