"""
Spectral - 譜分析

Eigenvalue summaries, Ramanujan certificates and the closed-form diameter
and routing bounds for (d, r)-regular hypergraphs.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import eigsh

from graphs import (
    GridModel,
    GridSpec,
    Hypergraph,
    WeightedGraph,
    build_grid_hypergraph,
    clique_expansion,
    hop_distances,
)
from routing_errors import DomainError, ParameterError, ResourceError

logger = logging.getLogger("Spectral")

def _ramanujan_slack() -> float:
    from routing_config import get_settings
    return get_settings().ramanujan_slack


def _symmetry_tolerance() -> float:
    from routing_config import get_settings
    return get_settings().eigen_tolerance


@dataclass(frozen=True)
class SpectralSummary:
    lambda1: float
    lambda2: float
    lambdaN: float
    lambda_star: float
    beta: float
    ramanujan: bool
    diameter_bound: Optional[int]
    d_prime: float
    regular: bool = True
    eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False, compare=False)

    @classmethod
    def from_eigenvalues(
        cls,
        eigenvalues: Sequence[float],
        d_prime: Optional[float] = None,
        regular: bool = True,
    ) -> "SpectralSummary":
        """
        Summarize a spectrum. `d_prime` defaults to lambda1; regular spectra
        also get the graph Ramanujan flag and the diameter bound.
        """
        eig = np.sort(np.asarray(eigenvalues, dtype=np.float64))[::-1]
        if eig.size == 0:
            raise ParameterError("Empty spectrum")
        lam1 = float(eig[0])
        lam2 = float(eig[1]) if eig.size > 1 else lam1
        lamN = float(eig[-1]) if eig.size > 1 else lam1
        lam_star = max(lam2, abs(lamN)) if eig.size > 1 else 0.0
        ref = lam1 if d_prime is None else float(d_prime)
        beta = lam_star / ref if ref > 0 else math.inf

        bound = None
        if eig.size > 1 and 0 <= beta < 1:
            bound = diameter_bound(eig.size, ref, lam_star)
        ramanujan = bool(regular and eig.size > 1 and lam_star <= 2 * math.sqrt(max(ref - 1, 0)) + _ramanujan_slack())
        return cls(lam1, lam2, lamN, lam_star, beta, ramanujan, bound, ref, regular, eig)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "lambdaN": self.lambdaN,
            "lambda_star": self.lambda_star,
            "beta": self.beta,
            "ramanujan": self.ramanujan,
            "diameter_bound": self.diameter_bound,
        }


class BoundPair(NamedTuple):
    lambda_star: float
    beta: float


class RoutingBound(NamedTuple):
    bound: float
    coefficient: float


def _dense_budget() -> int:
    from routing_config import get_settings
    return get_settings().max_dense_vertices


def spectrum(g: WeightedGraph, reference: str = "auto", max_vertices: Optional[int] = None) -> SpectralSummary:
    """
    Full symmetric eigendecomposition of the weighted adjacency.

    Args:
        g: host graph
        reference: denominator of beta for non-regular graphs, "lambda1"
            (used by "auto") or "max_degree"
        max_vertices: dense budget, defaults to settings.max_dense_vertices

    Returns:
        SpectralSummary with eigenvalues sorted descending
    """
    budget = _dense_budget() if max_vertices is None else max_vertices
    if g.num_vertices > budget:
        raise ResourceError(
            f"Dense eigensolve on N={g.num_vertices} exceeds the budget of {budget} vertices; "
            f"use extreme_spectrum() for lambda2 and lambdaN only"
        )
    dense = g.dense()
    residual = np.abs(dense - dense.T).max() if dense.size else 0.0
    if residual > _symmetry_tolerance():
        raise ParameterError(f"Adjacency symmetry residual {residual:.3g} exceeds tolerance")
    eig = linalg.eigvalsh(dense)

    regular = g.is_regular()
    if regular:
        d_prime = float(g.degrees()[0])
    elif reference in ("auto", "lambda1"):
        d_prime = None
    elif reference == "max_degree":
        d_prime = float(g.degrees().max())
    else:
        raise ParameterError(f"Unknown beta reference '{reference}'")
    return SpectralSummary.from_eigenvalues(eig, d_prime=d_prime, regular=regular)


def extreme_spectrum(g: WeightedGraph) -> SpectralSummary:
    """lambda1, lambda2 and lambdaN by Lanczos iteration, for graphs past the dense budget."""
    n = g.num_vertices
    if n < 4:
        return spectrum(g)
    adj = g.adjacency.astype(np.float64)
    top = eigsh(adj, k=2, which="LA", return_eigenvectors=False)
    bottom = eigsh(adj, k=1, which="SA", return_eigenvectors=False)
    eig = np.concatenate([np.sort(top)[::-1], bottom])
    regular = g.is_regular()
    d_prime = float(g.degrees()[0]) if regular else None
    summary = SpectralSummary.from_eigenvalues(eig, d_prime=d_prime, regular=regular)
    # The three extreme values stand in for the whole spectrum; keep the true N for the bound.
    bound = diameter_bound(n, summary.d_prime, summary.lambda_star) if 0 <= summary.beta < 1 else None
    return SpectralSummary(
        summary.lambda1, summary.lambda2, summary.lambdaN, summary.lambda_star, summary.beta,
        summary.ramanujan, bound, summary.d_prime, regular, eig,
    )


def check_ramanujan_hypergraph(
    H: Hypergraph,
    s: Optional[SpectralSummary] = None,
    allow_irregular: bool = False,
) -> bool:
    """
    True iff every nontrivial eigenvalue of the clique expansion satisfies
    |lambda - (r-2)| <= 2*sqrt((d-1)(r-1)).

    Non-regular hypergraphs are rejected unless allow_irregular is set, in
    which case d is the maximum degree.
    """
    if not H.regular and not allow_irregular:
        raise ParameterError("check_ramanujan_hypergraph needs a regular hypergraph")
    d = H.d if H.regular else int(H.degrees().max())
    if s is None:
        s = spectrum(clique_expansion(H))
    nontrivial = np.asarray(s.eigenvalues)[1:]
    radius = 2 * math.sqrt(max((d - 1) * (H.r - 1), 0)) + _ramanujan_slack()
    return bool(np.all(np.abs(nontrivial - (H.r - 2)) <= radius))


def check_ramanujan_graph(d: float, s: SpectralSummary) -> bool:
    return bool(s.lambda_star <= 2 * math.sqrt(max(d - 1, 0)) + _ramanujan_slack())


def lambda_star_bound(d: int, r: int) -> BoundPair:
    """Upper end of the Ramanujan band, (r-2) + 2*sqrt((d-1)(r-1)), and its beta."""
    if d < 3 or r < 3:
        raise ParameterError(f"lambda_star_bound needs d >= 3 and r >= 3, got d={d}, r={r}")
    value = (r - 2) + 2 * math.sqrt((d - 1) * (r - 1))
    return BoundPair(value, value / (d * (r - 1)))


def diameter_bound(N: int, d_prime: float, lambda_star: float) -> int:
    """ceil(log(N-1) / log(d'/lambda*)) for a connected host with lambda* < d'."""
    if d_prime <= 0 or lambda_star >= d_prime:
        raise DomainError(f"Diameter bound is vacuous for beta = {lambda_star / d_prime if d_prime else math.inf:.4f}")
    if N <= 1:
        return 0
    if lambda_star <= 0 or N == 2:
        return 1
    value = math.log(N - 1) / math.log(d_prime / lambda_star)
    return max(1, math.ceil(value - 1e-12))


def routing_diameter_bound(N: int, beta: float) -> int:
    """Companion form ceil(2 log2 N / log2(1/beta))."""
    if not 0 <= beta < 1:
        raise DomainError(f"Bound is vacuous for beta = {beta}")
    if N <= 1:
        return 0
    if beta == 0:
        return 1
    return math.ceil(2 * math.log2(N) / math.log2(1 / beta) - 1e-12)


def exact_diameter(g: WeightedGraph) -> float:
    """Largest BFS eccentricity on the support; math.inf when disconnected."""
    if g.num_vertices == 1:
        return 0
    if not g.is_connected():
        return math.inf
    return int(hop_distances(g).max())


def cheeger_lower_bound(d_prime: float, lambda2: float) -> float:
    return (d_prime - lambda2) / 2


def tight_routing_bound(d: int, r: int, N: int) -> RoutingBound:
    """
    (4(d'+6) / (d' log2(1/beta)) + 19) * log2 N with beta from lambda_star_bound.

    Returns:
        RoutingBound(bound, coefficient of log2 N)
    """
    if N < 16:
        raise ParameterError(f"The routing bound needs N >= 16, got N={N}")
    beta = lambda_star_bound(d, r).beta
    d_prime = d * (r - 1)
    coefficient = 4 * (d_prime + 6) / (d_prime * math.log2(1 / beta)) + 19
    return RoutingBound(coefficient * math.log2(N), coefficient)


def routing_lower_bound(N: int, d_prime: float) -> int:
    """Counting bound ceil(log N / log d') on diameter and routing depth."""
    if d_prime <= 1:
        raise ParameterError(f"Need d' > 1, got {d_prime}")
    if N <= 1:
        return 0
    return math.ceil(math.log(N) / math.log(d_prime) - 1e-12)


def explicit_bounds_table(pairs: Sequence[tuple] = ((3, 3), (5, 3), (10, 3), (3, 5), (5, 5), (10, 5))) -> List[Dict[str, Any]]:
    rows = []
    for d, r in pairs:
        lam, beta = lambda_star_bound(d, r)
        coefficient = tight_routing_bound(d, r, 16).coefficient
        rows.append({
            "d": d,
            "r": r,
            "d_prime": d * (r - 1),
            "lambda_star": round(lam, 3),
            "beta": round(beta, 3),
            "coefficient": round(coefficient, 2),
        })
    return rows


def friedman_check(degrees: Sequence[int] = (4, 6, 8, 12, 16), N: int = 512, seed: int = 0) -> List[Dict[str, Any]]:
    """Measured beta of random d-regular graphs next to 2*sqrt(d-1)/d."""
    from graphs import build_random_regular_graph
    rows = []
    for d in degrees:
        s = spectrum(build_random_regular_graph(N, d, seed))
        rows.append({
            "d": d,
            "beta": round(s.beta, 4),
            "ramanujan_beta": round(2 * math.sqrt(d - 1) / d, 4),
            "ramanujan": s.ramanujan,
        })
    return rows


def grid_spectral_row(n: int, r: int = 3, model: GridModel = GridModel.TWO_D) -> Dict[str, Any]:
    """
    One row of the grid spectral table. beta is measured against the maximum
    weighted degree; d' is the largest support degree.
    """
    H = build_grid_hypergraph(GridSpec(n, r, model))
    g = clique_expansion(H)
    s = spectrum(g, reference="max_degree")
    return {
        "model": GridModel(model).value,
        "n": n,
        "N": n * n,
        "d_prime": int(g.support_degrees().max()),
        "weighted_degree": int(g.degrees().max()),
        "D": exact_diameter(g),
        "beta": s.beta,
        "beta_lambda1": s.lambda_star / s.lambda1,
        "ramanujan": check_ramanujan_hypergraph(H, s, allow_irregular=True),
    }


def grid_spectral_table(n_list: Sequence[int] = (8, 10, 12, 16), r: int = 3,
                        models: Sequence[GridModel] = (GridModel.TWO_D, GridModel.THREE_D)) -> List[Dict[str, Any]]:
    return [grid_spectral_row(n, r, model) for model in models for n in n_list]
