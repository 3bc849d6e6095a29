# /// script
# dependencies = [
#     "fastmcp",
#     "pydantic",
#     "numpy",
#     "scipy",
# ]
# ///

from fastmcp import FastMCP
import json
import logging
from typing import Any, Dict, List, Optional

from graphs import build_projective_plane, clique_expansion, parse_graph, parse_hypergraph
from harness import ExperimentConfig, list_experiments, recommend, run_experiment
from route_valiant import SigmaStrategy, format_schedule, route
from routing_config import environment_report, get_settings
from spectral import check_ramanujan_hypergraph, spectrum

logger = logging.getLogger("Server")

# Initialize FastMCP Server
mcp = FastMCP("Hyperroute")


def _failure(e: Exception) -> str:
    return json.dumps({"success": False, "error": f"{type(e).__name__}: {e}"}, ensure_ascii=False)


def _host_from_text(text: str):
    """Graph text (`G N` header) or hypergraph text (`H N d r` header)."""
    stripped = text.lstrip()
    if stripped.startswith("H"):
        H = parse_hypergraph(text)
        return clique_expansion(H), H
    return parse_graph(text), None


# Logic Implementations (Separated for Testing)

def spectrum_logic(graph_text: str) -> str:
    g, H = _host_from_text(graph_text)
    s = spectrum(g)
    report: Dict[str, Any] = {"success": True, "N": g.num_vertices, **s.to_dict()}
    if H is not None and H.regular:
        report["ramanujan_hypergraph"] = check_ramanujan_hypergraph(H, s)
    return json.dumps(report, ensure_ascii=False, indent=2)


def route_logic(
    graph_text: str,
    permutation: List[int],
    strategy: str = "uniform",
    capacity: Optional[int] = None,
    seed: Optional[int] = None,
    include_schedule: bool = False,
) -> str:
    g, _ = _host_from_text(graph_text)
    seed = get_settings().seed if seed is None else seed
    result = route(g, permutation, SigmaStrategy(strategy), seed, capacity=capacity)
    report = {"success": True, **result.to_dict()}
    if include_schedule:
        report["schedule"] = format_schedule(result.schedule)
    return json.dumps(report, ensure_ascii=False, indent=2, default=str)


def fano_logic() -> str:
    fano = build_projective_plane(2)
    s = spectrum(clique_expansion(fano))
    return json.dumps({
        "success": True,
        "eigenvalues": [round(float(x), 9) for x in s.eigenvalues],
        "beta": s.beta,
        "ramanujan": check_ramanujan_hypergraph(fano, s),
    }, ensure_ascii=False, indent=2)


def experiment_logic(
    experiment_id: str,
    overrides: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
    output_format: str = "json",
) -> str:
    artifact = run_experiment(ExperimentConfig(
        id=experiment_id, overrides=overrides or {}, seed=seed, trials=trials, output_format=output_format,
    ), write=False)
    return json.dumps({
        "success": True,
        "provenance": artifact.header,
        "rows": artifact.rows,
    }, ensure_ascii=False, indent=2, default=str)


def recommend_logic(k0: float, R: float, N: int, pi_known: bool = True) -> str:
    return json.dumps({"success": True, **recommend(k0, R, N, pi_known).to_dict()}, ensure_ascii=False, indent=2)


# ========================================
# MCP tools
# ========================================

@mcp.tool()
def hyperroute_spectrum(graph_text: str) -> str:
    """
    Spectral summary of a graph or hypergraph in the text format.

    Args:
        graph_text: `G N` followed by `u v w` lines, or `H N d r` followed by hyperedges

    Returns:
        JSON with lambda1, lambda2, lambdaN, lambda_star, beta, ramanujan, diameter_bound
    """
    try:
        return spectrum_logic(graph_text)
    except Exception as e:
        return _failure(e)


@mcp.tool()
def hyperroute_route(
    graph_text: str,
    permutation: List[int],
    strategy: str = "uniform",
    capacity: Optional[int] = None,
    seed: Optional[int] = None,
    include_schedule: bool = False,
) -> str:
    """
    Route one permutation with two-phase Valiant paths and matching swaps.

    Args:
        graph_text: host graph or hypergraph text
        permutation: permutation[v] is the destination of the pebble at v
        strategy: uniform | derandomized | identity
        capacity: swaps per step, unlimited when omitted
        seed: root seed
        include_schedule: also return the swap schedule, one step per line

    Returns:
        JSON with T, C, D and realized
    """
    try:
        return route_logic(graph_text, permutation, strategy, capacity, seed, include_schedule)
    except Exception as e:
        return _failure(e)


@mcp.tool()
def hyperroute_fano() -> str:
    """Spectrum and Ramanujan check of the Fano plane clique expansion (K7)."""
    try:
        return fano_logic()
    except Exception as e:
        return _failure(e)


@mcp.tool()
def hyperroute_list_experiments() -> str:
    """Registered experiment ids with their default parameters."""
    return json.dumps(list_experiments(), ensure_ascii=False, indent=2, default=str)


@mcp.tool()
def hyperroute_run_experiment(
    experiment_id: str,
    overrides: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
) -> str:
    """
    Run a registered experiment and return its rows with provenance.

    Args:
        experiment_id: one of hyperroute_list_experiments
        overrides: parameter overrides
        seed: root seed
        trials: trials per configuration
    """
    try:
        return experiment_logic(experiment_id, overrides, seed, trials)
    except Exception as e:
        return _failure(e)


@mcp.tool()
def hyperroute_recommend(k0: float, R: float, N: int, pi_known: bool = True) -> str:
    """
    Architecture recommendation for a selective-transfer capacity.

    Args:
        k0: swaps per step the hardware can do
        R: permutation rounds per computation
        N: atoms
        pi_known: whether permutations are known in advance
    """
    try:
        return recommend_logic(k0, R, N, pi_known)
    except Exception as e:
        return _failure(e)


@mcp.tool()
def hyperroute_environment() -> str:
    """Host facts (cores, memory, library versions) and the active settings."""
    return json.dumps({
        "environment": environment_report(),
        "settings": get_settings().model_dump(),
    }, ensure_ascii=False, indent=2, default=str)


if __name__ == "__main__":
    mcp.run(transport="stdio")
