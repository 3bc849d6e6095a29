"""
Harness - 實驗編排與決策報告

Registry of the reproducible experiment tables, seeded execution with
provenance, and the architecture recommendation for a given transfer
capacity.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

import adaptive
import algebraic
import entangle
import multiscale
import overlay
import spectral
from graphs import build_projective_plane
from routing_config import OUTPUT_FORMATS, get_settings
from routing_errors import ParameterError, UnknownExperimentError
from table_writer import provenance, render_table, write_table

logger = logging.getLogger("Harness")

Rows = List[Dict[str, Any]]


@dataclass
class Experiment:
    id: str
    description: str
    func: Callable[..., Rows]
    defaults: Dict[str, Any] = field(default_factory=dict)
    trials: Optional[int] = None


# ---------------------------------------------------------------------------
# Experiment bodies: func(seed, trials, **params) -> rows
# ---------------------------------------------------------------------------

def _spectral_gain(seed: int, trials: int, N_list, d0, L_list) -> Rows:
    rows = []
    for N in N_list:
        row: Dict[str, Any] = {"N": N}
        for r in overlay.multilayer_beta_experiment(N, d0, L_list, trials, seed):
            row[f"beta_L{r['L']}"] = r["beta"]
            row["ramanujan_all"] = row.get("ramanujan_all", True) and r["ramanujan_all"]
        rows.append(row)
    return rows


def _routing_speedup(seed: int, trials: int, n_list, L, d0) -> Rows:
    return [overlay.end_to_end_overlay_speedup(n, L, d0, trials, seed) for n in n_list]


def _crosstalk(seed: int, trials: int, L_list, k0, gamma_list) -> Rows:
    return overlay.crosstalk_table(L_list, k0, gamma_list)


def _sparse_dense(seed: int, trials: int, N, d_sparse, d_dense, capacities) -> Rows:
    return overlay.sparse_dense_comparison(N, d_sparse, d_dense, capacities, trials, seed)


def _qr(seed: int, trials: int, primes, degree) -> Rows:
    rows = []
    for p in primes:
        fam = algebraic.GeneratorFamily(algebraic.FamilyName.QR, p, degree)
        s = algebraic.cayley_spectrum_characters(p, fam.generators())
        rows.append({
            "p": p,
            "lambda_star": round(s.lambda_star, 4),
            "ratio": round(s.lambda_star / (2 * math.sqrt(degree - 1)), 4),
            "ramanujan": s.ramanujan,
        })
    return rows


def _barrier(seed: int, trials: int, degree, n_list, families) -> Rows:
    rows = []
    for family in families:
        rows.extend(algebraic.abelian_barrier_scan(degree, n_list, family, seed))
    return rows


def _affine(seed: int, trials: int, n_list, degree) -> Rows:
    return [algebraic.affine_comparison(n, trials, seed, degree) for n in n_list]


def _fano(seed: int, trials: int, k_list, samples) -> Rows:
    return multiscale.fano_covering_table(k_list, samples, seed)


def _tower(seed: int, trials: int, k, levels) -> Rows:
    spec = multiscale.build_covering_tower(build_projective_plane(2), k, levels, seed=seed)
    return multiscale.tower_level_table(spec, trials, seed)


def _teleport(seed: int, trials: int, cases) -> Rows:
    return entangle.teleport_table([tuple(c) for c in cases], trials, seed)


def _crossover(seed: int, trials: int, N_list, d_ent) -> Rows:
    return entangle.crossover_table(N_list, d_ent, trials, seed)


def _hybrid(seed: int, trials: int, n, thresholds, d_ent) -> Rows:
    return entangle.hybrid_threshold_table(n, thresholds, seed, d_ent)


def _greedy(seed: int, trials: int, n_list, d) -> Rows:
    result = adaptive.stall_scaling(n_list, d, trials, seed)
    return [{**row, "slope": result["slope"]} for row in result["rows"]]


def _mw(seed: int, trials: int, n) -> Rows:
    return [adaptive.mw_experiment(n, trials, seed)]


def _hierarchy(seed: int, trials: int, cases) -> Rows:
    return [multiscale.hierarchy_experiment(n, b, trials, seed) for n, b in cases]


def _tower_equiv(seed: int, trials: int, cases) -> Rows:
    return multiscale.tower_equivalence_table([tuple(c) for c in cases], trials, seed)


def _grid_spectral(seed: int, trials: int, n_list, r) -> Rows:
    return spectral.grid_spectral_table(n_list, r)


def _random_regular_beta(seed: int, trials: int, degrees, N) -> Rows:
    return spectral.friedman_check(degrees, N, seed)


def _explicit_bounds(seed: int, trials: int, pairs) -> Rows:
    return spectral.explicit_bounds_table([tuple(p) for p in pairs])


def _decisions(seed: int, trials: int, N, k0_list, R) -> Rows:
    return [recommend(k0, R, N).to_dict() for k0 in k0_list]


EXPERIMENTS: Dict[str, Experiment] = {
    e.id: e for e in [
        Experiment("appendix_a_spectral_gain", "Mean beta of unions of L random regular layers", _spectral_gain,
                   {"N_list": [64, 128, 256, 512], "d0": 8, "L_list": [1, 2, 4, 8, 16]}, 5),
        Experiment("appendix_a_routing_speedup", "Grid vs layered-overlay routing depth", _routing_speedup,
                   {"n_list": [10, 12], "L": 4, "d0": 8}, 20),
        Experiment("appendix_a_crosstalk", "Effective capacity under crosstalk", _crosstalk,
                   {"L_list": [1, 2, 4, 8, 16], "k0": 32, "gamma_list": [0.0, 0.1, 0.2, 0.4, 0.6]}),
        Experiment("appendix_b_sparse_dense", "Capacity-limited depth on sparse and dense overlays", _sparse_dense,
                   {"N": 144, "d_sparse": 8, "d_dense": 24, "capacities": ["N/2", "N/4", "N/8", "sqrtN"]}, 10),
        Experiment("appendix_c_qr", "Character spectra of QR Cayley graphs", _qr,
                   {"primes": [7, 11, 17, 31, 97], "degree": 8}),
        Experiment("appendix_c_barrier", "Beta of degree-8 Cayley graphs against n", _barrier,
                   {"degree": 8, "n_list": [7, 11, 17, 31, 41], "families": ["qr", "margulis", "random"]}),
        Experiment("appendix_c_affine", "Random vs affine vs translation intermediate maps", _affine,
                   {"n_list": [7, 11], "degree": 8}, 50),
        Experiment("appendix_d_fano", "Ramanujan fraction of Fano voltage lifts", _fano,
                   {"k_list": [2, 3, 4, 5, 7], "samples": 200}),
        Experiment("appendix_d_tower", "Routing depth per covering-tower level", _tower,
                   {"k": 2, "levels": 2}, 20),
        Experiment("appendix_e_teleport", "Teleportation routing depth", _teleport,
                   {"cases": [[100, 8], [256, 8], [256, 16], [1024, 16]]}, 20),
        Experiment("appendix_e_crossover", "Rounds until Bell-pair distribution pays off", _crossover,
                   {"N_list": list(entangle.CROSSOVER_SIZES), "d_ent": 16}, 20),
        Experiment("appendix_e_hybrid", "Hybrid teleport threshold sweep", _hybrid,
                   {"n": 32, "thresholds": [2, 4, 8, 16, 32, 64], "d_ent": 16}),
        Experiment("appendix_f_greedy", "Greedy displacement stall", _greedy,
                   {"n_list": [4, 6, 8, 10, 12, 16], "d": 8}, 20),
        Experiment("appendix_f_mw", "Multiplicative-weights overlay selection", _mw, {"n": 6}, 20),
        Experiment("appendix_g_hierarchy", "Hierarchical vs flat routing", _hierarchy,
                   {"cases": [[16, 4], [64, 8]]}, 5),
        Experiment("appendix_g_tower_equiv", "Hierarchy depth vs covering-tower prediction", _tower_equiv,
                   {"cases": [[8, 2], [16, 4], [64, 8]]}, 5),
        Experiment("grid_spectral", "Spectral parameters of grid hypergraphs", _grid_spectral,
                   {"n_list": [8, 10, 12, 16], "r": 3}),
        Experiment("random_regular_beta", "Beta of random regular overlays against 2*sqrt(d-1)/d", _random_regular_beta,
                   {"degrees": [4, 6, 8, 12, 16], "N": 512}),
        Experiment("explicit_bounds", "Closed-form Ramanujan routing bounds", _explicit_bounds,
                   {"pairs": [[3, 3], [5, 3], [10, 3], [3, 5], [5, 5], [10, 5]]}),
        Experiment("decision_table", "Architecture recommendation per capacity", _decisions,
                   {"N": 1024, "k0_list": [512, 256, 64, 32, 1], "R": 10}),
    ]
}


def list_experiments() -> List[Dict[str, Any]]:
    return [{"id": e.id, "description": e.description, "defaults": e.defaults, "trials": e.trials}
            for e in EXPERIMENTS.values()]


def get_experiment(experiment_id: str) -> Experiment:
    try:
        return EXPERIMENTS[experiment_id]
    except KeyError:
        raise UnknownExperimentError(
            f"Unknown experiment '{experiment_id}'. Known: {', '.join(sorted(EXPERIMENTS))}"
        ) from None


class ExperimentConfig(BaseModel):
    id: str
    overrides: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = Field(default=None, ge=0)
    trials: Optional[int] = Field(default=None, ge=1)
    output_format: Optional[str] = None
    output_path: Optional[str] = None

    @field_validator("output_format")
    @classmethod
    def _known_format(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        value = "markdown" if value.lower() == "md" else value.lower()
        if value not in OUTPUT_FORMATS:
            raise ValueError(f"output_format must be one of {OUTPUT_FORMATS}")
        return value


@dataclass
class ExperimentArtifact:
    rows: Rows
    header: Dict[str, Any]
    text: str
    path: Optional[Path] = None


def parse_override(value: str) -> Any:
    """JSON value, comma list of JSON values, or the raw string."""
    try:
        return json.loads(value)
    except ValueError:
        pass
    if "," in value:
        return [parse_override(part.strip()) for part in value.split(",")]
    return value


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentArtifact:
    """Run one registered experiment and write its table with a provenance header."""
    experiment = get_experiment(config.id)
    settings = get_settings()
    unknown = set(config.overrides) - set(experiment.defaults)
    if unknown:
        raise ParameterError(f"Unknown parameters for {config.id}: {', '.join(sorted(unknown))}")
    params = {**experiment.defaults, **config.overrides}
    seed = settings.seed if config.seed is None else config.seed
    trials = config.trials or settings.trials or experiment.trials or 1
    fmt = config.output_format or settings.output_format

    logger.info(f"Running {config.id} (seed={seed}, trials={trials})")
    rows = experiment.func(seed, trials, **params)
    header = provenance(config.id, seed, {**params, "trials": trials})
    text = render_table(rows, header, fmt)
    path = write_table(rows, header, fmt, config.output_path, settings.output_dir) if write else None
    logger.info(f"Finished {config.id}: {len(rows)} rows")
    return ExperimentArtifact(rows, header, text, path)


# ---------------------------------------------------------------------------
# Architecture recommendation
# ---------------------------------------------------------------------------

@dataclass
class DecisionReport:
    k0: float
    R: float
    N: int
    strategy: str
    predicted_depth: float
    formula: str
    advice: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "k0": self.k0,
            "R": self.R,
            "strategy": self.strategy,
            "predicted_depth": round(self.predicted_depth, 2),
            "formula": self.formula,
            "advice": self.advice,
        }


def recommend(k0: float, R: float, N: int, pi_known: bool = True) -> DecisionReport:
    """
    First matching row of: k0 >= N/2 single overlay, k0 >= N/log2 N
    multi-layer overlay, k0 >= sqrt(N) hierarchical routing, else grid.
    """
    if k0 < 1:
        raise ParameterError(f"k0 must be >= 1, got {k0}")
    if R < 0:
        raise ParameterError(f"R must be >= 0, got {R}")
    if N < 4:
        raise ParameterError(f"N must be >= 4, got {N}")
    log_n = math.log2(N)
    if k0 >= N / 2:
        strategy, depth, formula = "Single Ramanujan overlay, O(log N)", 2 * log_n, "2 log2 N"
    elif k0 >= N / log_n:
        layers = math.ceil(N / (2 * k0))
        strategy = f"Multi-layer overlay (L = {layers}), O(log N)"
        depth, formula = 2 * log_n, "2 log2 N"
    elif k0 >= math.sqrt(N):
        b = max(2, math.isqrt(int(k0)))
        strategy = f"Hierarchical block routing (b = {b}), O(log^2 N / log b)"
        depth, formula = log_n ** 2 / math.log2(b), "log2(N)^2 / log2 b"
    else:
        strategy = "Grid routing (no overlay), O(√N)"
        depth, formula = math.ceil(1.5 * math.sqrt(N)), "ceil(3 sqrt(N) / 2)"

    advice = []
    if R >= 4:
        n = math.isqrt(N)
        t_dist = entangle.distribution_cost(entangle.EntanglementConfig(n=n, d_ent=16))
        advice.append(
            f"Distribute Bell pairs once: amortized depth {entangle.amortized_cost(2 * log_n, t_dist, R):.1f} "
            f"per round over {R:g} rounds"
        )
    if not pi_known:
        advice.append("Permutation unknown in advance: run greedy displacement steps until stall, then Valiant")
    return DecisionReport(k0, R, N, strategy, depth, formula, advice)
