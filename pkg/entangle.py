"""
Entangle - 糾纏輔助路由成本模型

Teleportation routing depth on a random entanglement overlay, Bell-pair
distribution cost, the number of routing rounds after which distribution
pays for itself, and a hybrid protocol that teleports only far-travelling
atoms and finishes the rest on the physical grid.
"""

import logging
import math
import statistics
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import linear_sum_assignment

from graphs import WeightedGraph, build_random_regular_graph
from overlay import grid_expansion
from route_valiant import PathOracle, SigmaStrategy, as_permutation, route
from routing_errors import ParameterError
from seeding import SeedLike, derive_seed, make_rng, map_trials

logger = logging.getLogger("Entangle")

CROSSOVER_SIZES = (256, 1024, 4096, 10_000, 40_000)


class EntanglementConfig(BaseModel):
    n: int = Field(ge=1)
    d_ent: int = Field(default=16, ge=0)
    k: Optional[int] = Field(default=None, ge=1)

    @property
    def N(self) -> int:
        return self.n * self.n

    @property
    def parallelism(self) -> int:
        return self.k if self.k is not None else self.N

    @property
    def mean_pair_distance(self) -> float:
        """Mean Manhattan distance between two uniform cells of the n x n grid."""
        return 2 * (self.n * self.n - 1) / (3 * self.n)


def side_length(N: int) -> int:
    n = math.isqrt(N)
    if n * n != N:
        raise ParameterError(f"N={N} is not a square grid size")
    return n


def distribution_cost(config: EntanglementConfig) -> int:
    """ceil((d_ent * N / 2) * mean distance / k): steps to move one Bell-pair half per overlay edge."""
    work = (config.d_ent * config.N / 2) * config.mean_pair_distance / config.parallelism
    return max(0, math.ceil(work - 1e-9))


def entanglement_overlay(N: int, d_ent: int, seed: SeedLike = None) -> WeightedGraph:
    d = min(d_ent, N - 1)
    if (N * d) % 2:
        d -= 1
    return build_random_regular_graph(N, d, seed)


def teleport_route_depth(
    N: int,
    d_ent: int = 16,
    seed: SeedLike = 0,
    pi: Optional[Sequence[int]] = None,
    trials: int = 20,
) -> int:
    """
    Matching depth on a random d_ent-regular overlay, which is the teleportation
    depth. With `pi` the single instance is routed, otherwise the lower median
    over `trials` random permutations.
    """
    g = entanglement_overlay(N, d_ent, make_rng(seed, "entangle_overlay", N, d_ent))
    oracle = PathOracle(g)
    if pi is not None:
        return route(g, as_permutation(pi, N), SigmaStrategy.UNIFORM, derive_seed(seed, "teleport"), oracle=oracle).depth

    def trial(t: int, rng: np.random.Generator) -> int:
        return route(g, rng.permutation(N), SigmaStrategy.UNIFORM, rng, oracle=oracle).depth

    return statistics.median_low(map_trials(trial, trials, seed, f"teleport:{N}:{d_ent}"))


def physical_depth_estimate(N: int) -> int:
    """Grid routing baseline ceil(3n/2)."""
    return math.ceil(3 * side_length(N) / 2)


def crossover_rounds(N: int, d_ent: int, T_route: float, T_phys: Optional[float] = None) -> float:
    """Rounds R at which T_dist + R*T_route equals R*T_phys."""
    if T_phys is None:
        T_phys = physical_depth_estimate(N)
    if T_phys <= T_route:
        logger.warning(f"N={N}: T_phys={T_phys} <= T_route={T_route}, entanglement never pays")
        return math.inf
    T_dist = distribution_cost(EntanglementConfig(n=side_length(N), d_ent=d_ent))
    return T_dist / (T_phys - T_route)


def amortized_cost(T_route: float, T_dist: float, R: float) -> float:
    if R <= 0:
        raise ParameterError(f"Round count must be positive, got R={R}")
    return T_route + T_dist / R


def crossover_table(
    N_list: Sequence[int] = CROSSOVER_SIZES,
    d_ent: int = 16,
    trials: int = 20,
    seed: SeedLike = 0,
    measure_limit: int = 1024,
) -> List[Dict[str, Any]]:
    """
    T_route is measured up to `measure_limit` atoms; larger sizes reuse the
    mean measured T_route/log2 N.
    """
    measured = {N: teleport_route_depth(N, d_ent, seed, trials=trials) for N in N_list if N <= measure_limit}
    scale = statistics.fmean(t / math.log2(N) for N, t in measured.items()) if measured else 1.0
    rows = []
    for N in N_list:
        t_route = measured.get(N, round(scale * math.log2(N)))
        t_phys = physical_depth_estimate(N)
        t_dist = distribution_cost(EntanglementConfig(n=side_length(N), d_ent=d_ent))
        r_break = crossover_rounds(N, d_ent, t_route, t_phys)
        rows.append({
            "N": N,
            "T_route": t_route,
            "T_phys": t_phys,
            "T_dist": t_dist,
            "R_break": round(r_break, 2) if math.isfinite(r_break) else r_break,
            "measured": N in measured,
        })
    return rows


def teleport_table(
    cases: Sequence[tuple] = ((100, 8), (256, 8), (256, 16), (1024, 16)),
    trials: int = 20,
    seed: SeedLike = 0,
) -> List[Dict[str, Any]]:
    rows = []
    for N, d in cases:
        depth = teleport_route_depth(N, d, seed, trials=trials)
        rows.append({"N": N, "d_ent": d, "T": depth, "T_over_log2N": round(depth / math.log2(N), 3)})
    return rows


@dataclass
class HybridTeleportResult:
    n: int
    threshold: int
    fraction_teleported: float
    T_teleport: int
    T_cleanup: int
    T_physical: int

    @property
    def T_total(self) -> int:
        return self.T_teleport + self.T_cleanup

    @property
    def speedup(self) -> float:
        return self.T_physical / self.T_total if self.T_total else math.inf

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "threshold": self.threshold,
            "fraction_teleported": round(self.fraction_teleported, 4),
            "T_teleport": self.T_teleport,
            "T_cleanup": self.T_cleanup,
            "T_total": self.T_total,
            "T_physical": self.T_physical,
            "speedup": round(self.speedup, 3) if math.isfinite(self.speedup) else self.speedup,
        }


def manhattan(n: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    ur, uc = np.divmod(np.asarray(u), n)
    vr, vc = np.divmod(np.asarray(v), n)
    return np.abs(ur - vr) + np.abs(uc - vc)


def teleport_plan(n: int, pi: np.ndarray, threshold: int) -> np.ndarray:
    """
    Teleport permutation: far atoms (Manhattan distance > threshold) go to
    their targets, atoms sitting on those targets move to the vacated cells
    (closest assignment), everyone else stays.
    """
    N = n * n
    far = manhattan(n, np.arange(N), pi) > threshold
    psi = np.arange(N)
    psi[far] = pi[far]
    claimed = np.zeros(N, dtype=bool)
    claimed[pi[far]] = True
    displaced = np.nonzero(~far & claimed)[0]
    vacated = np.nonzero(far & ~claimed)[0]
    if displaced.size:
        cost = manhattan(n, displaced[:, None], vacated[None, :])
        rows, cols = linear_sum_assignment(cost)
        psi[displaced[rows]] = vacated[cols]
    return psi


def hybrid_teleport(
    n: int,
    D_thresh: int,
    seed: SeedLike = 0,
    d_ent: int = 16,
    pi: Optional[Sequence[int]] = None,
    grid: Optional[WeightedGraph] = None,
) -> HybridTeleportResult:
    """
    Teleport far atoms over the overlay, then clean up on the 2D grid
    expansion with direct paths. Phases run one after the other.
    """
    if not 1 <= D_thresh:
        raise ParameterError(f"Threshold must be >= 1, got {D_thresh}")
    N = n * n
    pi = make_rng(seed, "hybrid_pi", n).permutation(N) if pi is None else as_permutation(pi, N)
    grid = grid or grid_expansion(n)
    grid_oracle = PathOracle(grid)

    psi = teleport_plan(n, pi, D_thresh)
    fraction = float(np.mean(manhattan(n, np.arange(N), pi) > D_thresh))
    if fraction:
        overlay = entanglement_overlay(N, d_ent, make_rng(seed, "entangle_overlay", N, d_ent))
        t_tele = route(overlay, psi, SigmaStrategy.UNIFORM, derive_seed(seed, "hybrid_teleport")).depth
    else:
        t_tele = 0
    residual = np.empty(N, dtype=np.int64)
    residual[psi] = pi
    t_clean = route(grid, residual, SigmaStrategy.IDENTITY, oracle=grid_oracle).depth
    t_phys = route(grid, pi, SigmaStrategy.IDENTITY, oracle=grid_oracle).depth
    logger.debug(f"n={n} D={D_thresh}: {fraction:.2%} teleported, T={t_tele}+{t_clean} vs {t_phys}")
    return HybridTeleportResult(n, D_thresh, fraction, t_tele, t_clean, t_phys)


def hybrid_threshold_table(
    n: int = 32,
    thresholds: Sequence[int] = (2, 4, 8, 16, 32, 64),
    seed: SeedLike = 0,
    d_ent: int = 16,
) -> List[Dict[str, Any]]:
    """All thresholds share one permutation and one grid."""
    pi = make_rng(seed, "hybrid_pi", n).permutation(n * n)
    grid = grid_expansion(n)
    return [hybrid_teleport(n, D, seed, d_ent, pi, grid).to_dict() for D in thresholds]
