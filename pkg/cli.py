#!/usr/bin/env python3
"""
Hyperroute CLI - 命令行入口

One subcommand per reproduced table, plus graph construction, spectrum
reports, single routes, the architecture recommendation and the
acceptance suite. Library errors exit with status 2.
"""

import functools
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np

import acceptance
import adaptive
import algebraic
import entangle
import multiscale
import overlay
import spectral
from graphs import (
    GridModel,
    GridSpec,
    Hypergraph,
    build_grid_hypergraph,
    build_projective_plane,
    build_random_regular_graph,
    build_random_regular_hypergraph,
    clique_expansion,
    complete_graph,
    format_graph,
    format_hypergraph,
    load_graph,
)
from harness import ExperimentConfig, list_experiments, parse_override, recommend, run_experiment
from route_valiant import SigmaStrategy, format_schedule, route
from routing_config import OUTPUT_FORMATS, configure_logging, get_settings, load_settings, set_settings
from routing_errors import ParameterError, RoutingError
from seeding import random_permutation
from table_writer import provenance, render_table, write_table


def handle_errors(func):
    """Print RoutingError messages and exit 2 instead of a traceback."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except RoutingError as e:
            click.echo(f"❌ {type(e).__name__}: {e}", err=True)
            sys.exit(2)
    return wrapper


def _int_list(value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise ParameterError(f"Expected a comma-separated list of integers, got '{value}'") from None


def emit(rows: List[Dict[str, Any]], experiment_id: str, params: Dict[str, Any],
         fmt: Optional[str], output: Optional[str]) -> None:
    """Print a table with its provenance header, or write it when --output is given."""
    settings = get_settings()
    fmt = fmt or settings.output_format
    header = provenance(experiment_id, params.pop("seed", settings.seed), params)
    if output:
        path = write_table(rows, header, fmt, output)
        click.echo(f"✅ {len(rows)} rows -> {path}")
    else:
        click.echo(render_table(rows, header, fmt), nl=False)


def emit_json(payload: Any) -> None:
    click.echo(json.dumps(payload, ensure_ascii=False, indent=2, default=str))


def table_options(func):
    func = click.option("--output", "-o", default=None, help="Write the table to this path")(func)
    func = click.option("--out", "fmt", type=click.Choice(OUTPUT_FORMATS + ("md",)), default=None,
                        help="Table format")(func)
    func = click.option("--trials", type=int, default=None, help="Trials per configuration")(func)
    func = click.option("--seed", type=int, default=None, help="Root seed")(func)
    return func


def _seed(seed: Optional[int]) -> int:
    return get_settings().seed if seed is None else seed


def _trials(trials: Optional[int], default: int) -> int:
    return trials or get_settings().trials or default


def _fmt(fmt: Optional[str]) -> Optional[str]:
    return "markdown" if fmt == "md" else fmt


@click.group()
@click.option("--config", "config_path", default=None, help="key = value settings file")
@click.option("--output-dir", default=None, help="Default directory for written tables")
@click.option("--workers", type=int, default=None, help="Trial worker threads")
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
@handle_errors
def cli(config_path, output_dir, workers, log_level):
    """Permutation routing on Ramanujan hypergraphs and expander overlays."""
    settings = load_settings(config_path, {
        "output_dir": output_dir,
        "workers": workers,
        "log_level": log_level,
    })
    set_settings(settings)
    configure_logging(settings.log_level)


# ---------------------------------------------------------------------------
# Graphs and spectra
# ---------------------------------------------------------------------------

@cli.command()
@click.argument("kind", type=click.Choice(["projective", "random-hypergraph", "grid", "random-graph",
                                           "complete", "cayley", "overlay"]))
@click.option("--q", type=int, default=2, help="Projective plane order")
@click.option("--N", "N", type=int, default=64, help="Vertices")
@click.option("--d", type=int, default=3, help="Degree")
@click.option("--r", type=int, default=3, help="Hyperedge size / grid run length")
@click.option("--n", "n", type=int, default=8, help="Grid side or Cayley modulus")
@click.option("--model", type=click.Choice(["2D", "3D"]), default="2D")
@click.option("--family", type=click.Choice(["qr", "margulis", "random"]), default="qr")
@click.option("--layers", "L", type=int, default=1, help="Overlay layers")
@click.option("--expand", is_flag=True, help="Emit the clique expansion instead of the hypergraph")
@click.option("--seed", type=int, default=None)
@click.option("--output", "-o", default=None)
@handle_errors
def build(kind, q, N, d, r, n, model, family, L, expand, seed, output):
    """Build a hypergraph or graph and print it in the text format."""
    seed = _seed(seed)
    obj: Any
    if kind == "projective":
        obj = build_projective_plane(q)
    elif kind == "random-hypergraph":
        obj = build_random_regular_hypergraph(N, d, r, seed)
    elif kind == "grid":
        obj = build_grid_hypergraph(GridSpec(n, r, GridModel(model)))
    elif kind == "random-graph":
        obj = build_random_regular_graph(N, d, seed)
    elif kind == "complete":
        obj = complete_graph(N)
    elif kind == "cayley":
        obj = algebraic.GeneratorFamily(family, n, d, seed).graph()
    else:
        obj = overlay.build_layered_overlay(N, d, L, seed)
    if isinstance(obj, Hypergraph) and expand:
        obj = clique_expansion(obj)
    text = format_hypergraph(obj) if isinstance(obj, Hypergraph) else format_graph(obj)
    if output:
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"✅ {kind} ({obj.num_vertices} vertices) -> {output}")
    else:
        click.echo(text, nl=False)


@cli.command("spectrum")
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--iterative", is_flag=True, help="Only lambda1, lambda2, lambdaN via eigsh")
@handle_errors
def spectrum_cmd(files, iterative):
    """Spectral summary of each graph file as JSON."""
    reports = []
    for path in files:
        g = load_graph(path)
        s = spectral.extreme_spectrum(g) if iterative else spectral.spectrum(g)
        reports.append({"file": path, "N": g.num_vertices, **s.to_dict()})
    emit_json(reports[0] if len(reports) == 1 else reports)


def _read_permutation(spec: str, N: int) -> np.ndarray:
    if spec == "identity":
        return np.arange(N)
    if spec.startswith("random:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise ParameterError(f"Bad permutation seed in '{spec}'") from None
        return random_permutation(N, seed, "cli_perm")
    try:
        values = Path(spec).read_text(encoding="utf-8").split()
    except OSError as exc:
        raise ParameterError(f"Cannot read permutation file {spec}: {exc}") from exc
    return np.array([int(v) for v in values], dtype=np.int64)


@cli.command("route")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--perm", default="random:0", help="random:SEED, identity, or a file of target indices")
@click.option("--strategy", type=click.Choice([s.value for s in SigmaStrategy]), default="uniform")
@click.option("--capacity", type=int, default=None, help="Swaps allowed per step")
@click.option("--seed", type=int, default=None)
@click.option("--schedule-out", default=None, help="Write the schedule, one step per line")
@handle_errors
def route_cmd(graph_path, perm, strategy, capacity, seed, schedule_out):
    """Route one permutation and report T, C, D."""
    g = load_graph(graph_path)
    pi = _read_permutation(perm, g.num_vertices)
    result = route(g, pi, SigmaStrategy(strategy), _seed(seed), capacity=capacity)
    if schedule_out:
        Path(schedule_out).write_text(format_schedule(result.schedule), encoding="utf-8")
    emit_json(result.to_dict())


# ---------------------------------------------------------------------------
# Experiment tables
# ---------------------------------------------------------------------------

@cli.command("overlay-experiment")
@click.option("--n", "N", type=int, default=256, help="Atoms")
@click.option("--d0", type=int, default=8, help="Layer degree")
@click.option("--layers", default="1,2,4,8,16", help="Comma-separated layer counts")
@click.option("--report", type=click.Choice(["beta", "speedup", "crosstalk", "sparse-dense"]), default="beta")
@click.option("--k0", type=float, default=32, help="Per-layer capacity for the crosstalk report")
@table_options
@handle_errors
def overlay_experiment(N, d0, layers, report, k0, seed, trials, fmt, output):
    """Multi-layer overlay tables."""
    seed = _seed(seed)
    L_list = _int_list(layers)
    if report == "beta":
        trials = _trials(trials, 5)
        rows = overlay.multilayer_beta_experiment(N, d0, L_list, trials, seed)
    elif report == "speedup":
        trials = _trials(trials, 20)
        n = int(round(N ** 0.5))
        rows = [overlay.end_to_end_overlay_speedup(n, max(L_list), d0, trials, seed)]
    elif report == "crosstalk":
        rows = overlay.crosstalk_table(L_list, k0)
    else:
        trials = _trials(trials, 10)
        rows = overlay.sparse_dense_comparison(N, d0, 3 * d0, trials=trials, seed=seed)
    emit(rows, f"overlay_{report}", {"N": N, "d0": d0, "layers": L_list, "trials": trials, "seed": seed},
         _fmt(fmt), output)


@cli.command()
@click.option("--family", type=click.Choice(["qr", "margulis", "random"]), default="qr")
@click.option("--n", "n_list", default="7", help="Comma-separated moduli")
@click.option("--degree", type=int, default=8)
@click.option("--report", type=click.Choice(["spectrum", "barrier", "affine"]), default="spectrum")
@table_options
@handle_errors
def cayley(family, n_list, degree, report, seed, trials, fmt, output):
    """Abelian Cayley graph reports."""
    seed = _seed(seed)
    moduli = _int_list(n_list)
    if report == "spectrum":
        rows = []
        for n in moduli:
            fam = algebraic.GeneratorFamily(family, n, degree, seed)
            s = algebraic.cayley_spectrum_characters(n, fam.generators())
            rows.append({"family": family, "n": n, **s.to_dict(),
                         "ratio": round(s.lambda_star / (2 * (degree - 1) ** 0.5), 4)})
    elif report == "barrier":
        rows = algebraic.abelian_barrier_scan(degree, moduli, family, seed)
    else:
        trials = _trials(trials, 50)
        rows = [algebraic.affine_comparison(n, trials, seed, degree, family) for n in moduli]
    emit(rows, f"cayley_{report}", {"family": family, "n": moduli, "degree": degree, "seed": seed},
         _fmt(fmt), output)


@cli.command()
@click.option("--base", type=click.Choice(["fano", "pg23"]), default="fano")
@click.option("--k", type=int, default=2, help="Fold per level")
@click.option("--levels", type=int, default=2)
@click.option("--search", type=click.Choice(["exhaustive", "sample"]), default=None,
              help="Only run the voltage search at fold k")
@click.option("--samples", type=int, default=200)
@table_options
@handle_errors
def tower(base, k, levels, search, samples, seed, trials, fmt, output):
    """Voltage search and covering-tower routing tables."""
    seed = _seed(seed)
    base_graph = build_projective_plane(2 if base == "fano" else 3)
    if search:
        rows = [multiscale.search_ramanujan_voltages(base_graph, k, search, samples, seed).to_dict()]
    else:
        trials = _trials(trials, 20)
        spec = multiscale.build_covering_tower(base_graph, k, levels, seed=seed)
        rows = multiscale.tower_level_table(spec, trials, seed)
    emit(rows, f"tower_{base}", {"k": k, "levels": levels, "search": search, "seed": seed},
         _fmt(fmt), output)


@cli.command()
@click.option("--n", "n", type=int, default=16, help="Grid side")
@click.option("--b", "b_list", default="4", help="Comma-separated block sizes")
@click.option("--report", type=click.Choice(["route", "tower-equiv"]), default="route")
@table_options
@handle_errors
def hierarchy(n, b_list, report, seed, trials, fmt, output):
    """Hierarchical block routing against the flat overlay."""
    seed = _seed(seed)
    trials = _trials(trials, 20)
    blocks = _int_list(b_list)
    if report == "route":
        rows = multiscale.block_size_sweep(n, blocks, trials, seed)
    else:
        rows = multiscale.tower_equivalence_table([(n, b) for b in blocks], trials, seed)
    emit(rows, f"hierarchy_{report}", {"n": n, "b": blocks, "trials": trials, "seed": seed},
         _fmt(fmt), output)


@cli.command("entangle")
@click.option("--n", "n", type=int, default=16, help="Grid side")
@click.option("--dent", "d_ent", type=int, default=16, help="Entanglement overlay degree")
@click.option("--report", type=click.Choice(["crossover", "hybrid", "teleport"]), default="crossover")
@click.option("--thresholds", default="2,4,8,16,32,64")
@table_options
@handle_errors
def entangle_cmd(n, d_ent, report, thresholds, seed, trials, fmt, output):
    """Entanglement-assisted routing tables."""
    seed = _seed(seed)
    if report == "crossover":
        trials = _trials(trials, 20)
        rows = entangle.crossover_table(entangle.CROSSOVER_SIZES, d_ent, trials, seed)
    elif report == "hybrid":
        rows = entangle.hybrid_threshold_table(n, _int_list(thresholds), seed, d_ent)
    else:
        trials = _trials(trials, 20)
        rows = entangle.teleport_table(((n * n, d_ent),), trials, seed)
    emit(rows, f"entangle_{report}", {"n": n, "d_ent": d_ent, "seed": seed}, _fmt(fmt), output)


@cli.command("adaptive")
@click.option("--n", "n_list", default="8", help="Comma-separated grid sides")
@click.option("--d", type=int, default=8, help="Overlay degree")
@click.option("--report", type=click.Choice(["stall", "concentration", "hybrid", "mw"]), default="stall")
@table_options
@handle_errors
def adaptive_cmd(n_list, d, report, seed, trials, fmt, output):
    """Greedy displacement, hybrid and multiplicative-weights tables."""
    seed = _seed(seed)
    trials = _trials(trials, 20)
    sides = _int_list(n_list)
    if report == "stall":
        rows = adaptive.greedy_table(sides, d, trials, seed)
    elif report == "concentration":
        rows = []
        for n in sides:
            c = adaptive.concentration_check(n, d, trials, seed)
            rows.append({"N": n * n, "alpha": round(c.alpha, 4), "samples": c.samples, "bins": c.bins})
    elif report == "hybrid":
        rows = [{"N": n * n, **adaptive.hybrid_greedy_valiant(n, d, seed).to_dict()} for n in sides]
    else:
        rows = [adaptive.mw_experiment(n, trials, seed) for n in sides]
    emit(rows, f"adaptive_{report}", {"n": sides, "d": d, "trials": trials, "seed": seed}, _fmt(fmt), output)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@cli.command("recommend")
@click.option("--k0", type=float, required=True, help="Per-step selective-transfer capacity")
@click.option("--R", "R", type=float, default=1, help="Permutation rounds per computation")
@click.option("--N", "N", type=int, required=True, help="Atoms")
@click.option("--unknown-pi", is_flag=True, help="Permutation not known in advance")
@handle_errors
def recommend_cmd(k0, R, N, unknown_pi):
    """Pick an architecture for the given capacity."""
    emit_json(recommend(k0, R, N, pi_known=not unknown_pi).to_dict())


@cli.command()
@click.option("--seed", type=int, default=0)
@click.option("--only", default=None, help="Comma-separated criterion numbers")
@click.option("--routing-checks", type=int, default=10_000)
@click.option("--tamper", is_flag=True, help="Expect beta = 0 for Fano (negative control)")
@click.option("--output", "-o", default=None, help="Write the pass/fail matrix as JSON")
@handle_errors
def verify(seed, only, routing_checks, tamper, output):
    """Run the acceptance suite; nonzero exit on any failure."""
    report = acceptance.verify_all(seed, _int_list(only), tamper, routing_checks, echo=click.echo)
    if output:
        Path(output).write_text(json.dumps({
            "passed": report.passed,
            "monotone_steps": report.monotone_steps,
            "monotone_violations": report.monotone_violations,
            "matrix": report.matrix(),
        }, ensure_ascii=False, indent=2, default=str), encoding="utf-8")
    if report.passed:
        click.echo('\n🎉 ALL CRITERIA PASS')
    else:
        failed = ", ".join(str(c.number) for c in report.criteria if not c.passed)
        click.echo(f'\n❌ FAILED: criteria {failed}')
        sys.exit(1)


@cli.command("run")
@click.argument("experiment_id")
@click.option("--set", "overrides", multiple=True, help="Parameter override key=value")
@click.option("--seed", type=int, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--out", "fmt", type=click.Choice(OUTPUT_FORMATS + ("md",)), default=None)
@click.option("--output", "-o", default=None)
@handle_errors
def run_cmd(experiment_id, overrides, seed, trials, fmt, output):
    """Run a registered experiment and write its table."""
    parsed = {}
    for item in overrides:
        if "=" not in item:
            raise ParameterError(f"Override must be key=value, got '{item}'")
        key, value = item.split("=", 1)
        parsed[key.strip().replace("-", "_")] = parse_override(value.strip())
    artifact = run_experiment(ExperimentConfig(
        id=experiment_id, overrides=parsed, seed=seed, trials=trials,
        output_format=fmt, output_path=output,
    ))
    click.echo(f"✅ {experiment_id}: {len(artifact.rows)} rows -> {artifact.path}")


@cli.command("list")
def list_cmd():
    """List registered experiments."""
    for e in list_experiments():
        click.echo(f"{e['id']:28} {e['description']}")


def main(argv: Optional[Sequence[str]] = None):
    cli.main(args=argv, prog_name="hyperroute")


if __name__ == "__main__":
    main()
