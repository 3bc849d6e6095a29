"""
Overlay - 容量與深度模型

Virtual overlays emulated with a limited number of swaps per step, unions of
random regular layers, crosstalk-limited capacity, and the end-to-end
comparison of overlay routing against the physical grid.
"""

import enum
import logging
import math
import statistics
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from graphs import (
    GridModel,
    GridSpec,
    WeightedGraph,
    build_grid_hypergraph,
    build_random_regular_graph,
    clique_expansion,
    union_layers,
)
from route_valiant import PathOracle, SigmaStrategy, partial_matching_route, route
from routing_errors import ParameterError
from seeding import SeedLike, derive_seed, make_rng, map_trials
from spectral import spectrum

logger = logging.getLogger("Overlay")


class OverlayConfig(BaseModel):
    """Layer count, per-layer capacity and degree, and crosstalk of a multi-layer overlay."""

    N: int = Field(ge=2)
    k0: int = Field(default=1, ge=1)
    L: int = Field(default=1, ge=1)
    d0: int = Field(default=8, ge=1)
    gamma: float = Field(default=0.0, ge=0.0, le=1.0)

    def effective(self) -> "CapacityEstimate":
        return effective_capacity(self.L, self.k0, self.gamma)

    def regime(self) -> str:
        return capacity_regime(self.effective().effective, self.N)


class CapacityRegime(enum.Enum):
    OPTIMAL = "Optimal, O(log N)"
    NEAR_OPTIMAL = "Near-optimal, O(log^2 N)"
    GRID_AOD = "Matches grid AOD"
    WORSE_THAN_GRID = "Worse than grid"


class CapacityEstimate(NamedTuple):
    direct: float
    checkerboard: Optional[float]
    effective: float


def overlay_depth(T_R: int, N: int, k: int) -> int:
    """Depth of emulating T_R overlay steps with k swaps per physical step."""
    if T_R < 0:
        raise ParameterError(f"T_R must be >= 0, got {T_R}")
    if k < 1:
        raise ParameterError(f"Capacity must be >= 1, got k={k}")
    return T_R * math.ceil(N / (2 * k))


def capacity_regime(k: float, N: int) -> str:
    """Classify k against N/2, N/log2 N and sqrt(N)."""
    if N < 2:
        return CapacityRegime.OPTIMAL.value
    if k >= N / 2:
        return CapacityRegime.OPTIMAL.value
    if k >= N / math.log2(N):
        return CapacityRegime.NEAR_OPTIMAL.value
    if k >= math.sqrt(N):
        return CapacityRegime.GRID_AOD.value
    return CapacityRegime.WORSE_THAN_GRID.value


def effective_capacity(L: int, k0: float, gamma: float) -> CapacityEstimate:
    """
    L*k0 / (1 + 2*gamma*(1 - 1/L)). Above gamma = 0.5 the checkerboard
    pattern (every other layer active, ceil(L/2)*k0) is offered as well.
    """
    if L < 1 or k0 < 1:
        raise ParameterError(f"Need L >= 1 and k0 >= 1, got L={L}, k0={k0}")
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError(f"gamma must lie in [0, 1], got {gamma}")
    direct = L * k0 / (1 + 2 * gamma * (1 - 1 / L))
    if gamma > 0.5:
        checkerboard = float(math.ceil(L / 2) * k0)
        return CapacityEstimate(direct, checkerboard, max(direct, checkerboard))
    return CapacityEstimate(direct, None, direct)


def crosstalk_table(
    L_list: Sequence[int] = (1, 2, 4, 8, 16),
    k0: int = 32,
    gamma_list: Sequence[float] = (0.0, 0.1, 0.2, 0.4, 0.6),
) -> List[Dict[str, Any]]:
    rows = []
    for gamma in gamma_list:
        for L in L_list:
            est = effective_capacity(L, k0, gamma)
            rows.append({
                "gamma": gamma,
                "L": L,
                "k_eff": round(est.effective, 2),
                "retention": round(est.effective / (L * k0), 4),
                "checkerboard": est.checkerboard is not None and est.checkerboard >= est.direct,
            })
    return rows


def build_layered_overlay(N: int, d0: int, L: int, seed: SeedLike = None) -> WeightedGraph:
    """Union of L independent random d0-regular layers."""
    layers = [build_random_regular_graph(N, d0, make_rng(seed, "layer", i)) for i in range(L)]
    return union_layers(layers)


def multilayer_beta_experiment(
    N: int = 256,
    d0: int = 8,
    L_list: Sequence[int] = (1, 2, 4, 8, 16),
    trials: int = 5,
    seed: SeedLike = 0,
) -> List[Dict[str, Any]]:
    """
    Mean beta of the L-layer union per L, the ratio beta_L*sqrt(L)/beta_1 and
    whether every union met lambda2 <= 2*sqrt(L*d0 - 1).
    """
    def measure(L: int) -> List[tuple]:
        def trial(t: int, rng: np.random.Generator) -> tuple:
            s = spectrum(build_layered_overlay(N, d0, L, rng))
            return s.beta, s.lambda2 <= 2 * math.sqrt(L * d0 - 1) + 1e-9

        return map_trials(trial, trials, seed, f"multilayer_beta:{N}:{d0}:{L}")

    measured = {L: measure(L) for L in sorted(set(L_list) | {1})}
    beta_one = statistics.fmean(b for b, _ in measured[1])
    rows = []
    for L in L_list:
        results = measured[L]
        mean_beta = statistics.fmean(b for b, _ in results)
        rows.append({
            "N": N,
            "d0": d0,
            "L": L,
            "beta": round(mean_beta, 4),
            "ratio": round(mean_beta * math.sqrt(L) / beta_one, 4) if beta_one else None,
            "ramanujan_all": all(ok for _, ok in results),
        })
        logger.debug(f"N={N} L={L}: mean beta {mean_beta:.4f}")
    return rows


def grid_expansion(n: int, r: int = 3) -> WeightedGraph:
    """Clique expansion of the 2D run-length-r grid hypergraph."""
    return clique_expansion(build_grid_hypergraph(GridSpec(n, r, GridModel.TWO_D)))


def _median_depth(g: WeightedGraph, perms: List[np.ndarray], seed: SeedLike, key: str,
                  capacity: Optional[int] = None) -> float:
    oracle = PathOracle(g)

    def trial(t: int, rng: np.random.Generator) -> int:
        route_seed = derive_seed(seed, key, t)
        if capacity is None:
            return route(g, perms[t], SigmaStrategy.UNIFORM, route_seed, oracle=oracle).depth
        return partial_matching_route(g, perms[t], capacity, route_seed, oracle=oracle).depth

    return statistics.median(map_trials(trial, len(perms), seed, key))


def end_to_end_overlay_speedup(
    n: int,
    L: int = 4,
    d0: int = 8,
    trials: int = 20,
    seed: SeedLike = 0,
    overlay: Optional[WeightedGraph] = None,
) -> Dict[str, Any]:
    """
    Median routed depth on the grid expansion divided by the median on an
    L-layer overlay, over one shared set of random permutations and
    intermediate-destination seeds.
    """
    N = n * n
    grid = grid_expansion(n)
    if overlay is None:
        overlay = build_layered_overlay(N, d0, L, make_rng(seed, "overlay", n, L))
    elif overlay.num_vertices != N:
        raise ParameterError(f"Overlay has {overlay.num_vertices} vertices, expected {N}")
    perms = [make_rng(seed, "pi", t).permutation(N) for t in range(trials)]
    t_grid = _median_depth(grid, perms, seed, "speedup_routes")
    t_overlay = _median_depth(overlay, perms, seed, "speedup_routes")
    logger.info(f"n={n} L={L}: grid median {t_grid}, overlay median {t_overlay}")
    return {
        "n": n,
        "N": N,
        "L": L,
        "d0": d0,
        "T_grid": t_grid,
        "T_overlay": t_overlay,
        "speedup": round(t_grid / t_overlay, 3) if t_overlay else math.inf,
    }


def _capacity_value(label: str, N: int) -> int:
    if label == "sqrtN":
        return max(1, math.isqrt(N))
    if label.startswith("N/"):
        return max(1, N // int(label[2:]))
    raise ParameterError(f"Unknown capacity label '{label}'")


def sparse_dense_comparison(
    N: int = 144,
    d_sparse: int = 8,
    d_dense: int = 24,
    capacities: Sequence[str] = ("N/2", "N/4", "N/8", "sqrtN"),
    trials: int = 10,
    seed: SeedLike = 0,
) -> List[Dict[str, Any]]:
    """Median capacity-limited depth on a sparse and a dense overlay per capacity."""
    sparse_g = build_random_regular_graph(N, d_sparse, make_rng(seed, "sparse"))
    dense_g = build_random_regular_graph(N, d_dense, make_rng(seed, "dense"))
    perms = [make_rng(seed, "pi", t).permutation(N) for t in range(trials)]
    rows = []
    for label in capacities:
        k = _capacity_value(label, N)
        t_sparse = _median_depth(sparse_g, perms, seed, f"sparse_dense:{label}", capacity=k)
        t_dense = _median_depth(dense_g, perms, seed, f"sparse_dense:{label}", capacity=k)
        rows.append({
            "capacity": label,
            "k": k,
            f"T_d{d_sparse}": t_sparse,
            f"T_d{d_dense}": t_dense,
            "regime": capacity_regime(k, N),
        })
    return rows
