"""Command-line entry point.

    multiplex-sir run --config exp.cfg [--set key=value ...] [--out DIR] [--strict] [--threads N]
    multiplex-sir run --preset fig4 [...]
    multiplex-sir presets [--show NAME]

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure, 3 a run
did not converge and ``--strict`` was given.
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field

from . import __version__
from .analysis import epidemic_threshold, immunization_threshold, sweep_phase_diagram
from .config import PRESETS, load_config, parse_config, preset_text, serialize_config
from .engine import ALL_STATES, InitialCondition, run_to_steady_state, write_text_atomic
from .errors import ConfigurationError, EdgeListParseError
from .immunization import apply_immunization
from .network import build_multiplex
from .seeding import IMMUNIZATION, INFECTION_SEEDS, MONTE_CARLO, derive_seed, rng
from .stochastic import run_ensemble_records, summarize_records

log = logging.getLogger("multiplex_sir")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_NOT_CONVERGED = 0, 1, 2, 3
METADATA = "metadata.cfg"


@dataclass
class ExperimentResult:
    outputs: dict = field(default_factory=dict)   # file name -> text
    warnings: list = field(default_factory=list)
    notes: list = field(default_factory=list)     # derived quantities for the sidecar
    converged: bool = True

    def not_converged(self, message):
        self.converged = False
        self.warnings.append(message)


def _csv(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_cell(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def _cell(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def infection_seeds(config, net, plan=None):
    """Explicit ``seed_nodes``, else ``seed_count`` nodes drawn outside the plan."""
    blocked = set(plan.nodes) if plan is not None else set()
    if config.seed_nodes:
        if blocked & set(config.seed_nodes):
            raise ConfigurationError("seed nodes overlap the immunized set", "seed_nodes")
        nodes = config.seed_nodes
    else:
        candidates = [i for i in range(net.n) if i not in blocked]
        if config.seed_count > len(candidates):
            raise ConfigurationError("not enough nodes left to seed", "seed_count")
        picked = rng(config.seed, INFECTION_SEEDS).choice(len(candidates), config.seed_count,
                                                          replace=False)
        nodes = [candidates[i] for i in picked]
    init = InitialCondition(tuple(nodes), config.seed_aware)
    init.check(net.n)
    return init


def build_network(config):
    net = build_multiplex(config.layer_spec("a"), config.layer_spec("b"))
    if net.n != config.n:
        raise ConfigurationError(f"layers have {net.n} nodes but n = {config.n}", "n")
    return net


def _plan(config, net):
    if not config.immunizes:
        return None
    return apply_immunization(net, config.strategy, config.v,
                              seed=derive_seed(config.seed, IMMUNIZATION))


THRESHOLD_HEADER = ("parameter", "strategy", "estimate", "lo", "hi", "s_lo", "s_hi", "flag",
                    "evaluations", "converged", "monotone")


def _threshold_row(parameter, strategy, res):
    return (parameter, strategy, res.estimate, res.lo, res.hi, res.s_lo, res.s_hi, res.flag,
            res.evaluations, res.converged, res.monotone)


def _threshold_warnings(result, res, what):
    if not res.converged:
        result.not_converged(f"{what}: a probe run hit max_steps")
    if res.flag != "bracketed":
        result.warnings.append(f"{what}: threshold not bracketed ({res.flag})")
    if not res.monotone:
        result.warnings.append(f"{what}: outbreak size not monotone inside the bracket")


def _run_single(config, net, result, threads):
    plan = _plan(config, net)
    init = infection_seeds(config, net, plan)
    summary, dist = run_to_steady_state(net, config.model_params(), init, plan)
    result.notes.append(f"infection seeds = {','.join(map(str, init.seed_nodes))}")
    result.outputs["summary.csv"] = _csv(
        ("s_a", "s_b", "steps", "converged", "residual"),
        [(summary.s_a, summary.s_b, summary.steps_taken, summary.converged,
          summary.residual_at_stop)])
    names = [s.name for s in ALL_STATES[:dist.p.shape[1]]]
    result.outputs["final_state.csv"] = _csv(
        ("node", "state", "probability"),
        [(i, name, float(v)) for i, row in enumerate(dist.p) for name, v in zip(names, row)])
    if not summary.converged:
        result.not_converged(f"steady state not reached in {summary.steps_taken} steps")


def _ensemble(config, net, result, threads):
    plan = _plan(config, net)
    init = infection_seeds(config, net, plan)
    base = derive_seed(config.seed, MONTE_CARLO)
    result.notes.append(f"infection seeds = {','.join(map(str, init.seed_nodes))}")
    result.notes.append(f"monte carlo base seed = {base}")
    records = run_ensemble_records(net, config.model_params(), init, plan, config.runs, base,
                                   threads)
    return plan, init, records


def _summary_rows(summary):
    return [(summary.runs, summary.s_b_mean, summary.s_b_std, summary.s_a_mean,
             summary.s_a_std, summary.fraction_extinct, summary.s_b_mean_outbreak)]


ENSEMBLE_HEADER = ("runs", "s_b_mean", "s_b_std", "s_a_mean", "s_a_std", "fraction_extinct",
                   "s_b_mean_outbreak")


def _run_ensemble(config, net, result, threads):
    _, _, records = _ensemble(config, net, result, threads)
    result.outputs["runs.csv"] = _runs_text(records)
    result.outputs["ensemble.csv"] = _csv(ENSEMBLE_HEADER,
                                          _summary_rows(summarize_records(records, net.n)))


def _runs_text(records):
    return _csv(("run", "s_a", "s_b", "steps"),
                [(r, float(a), float(b), s) for r, (a, b, s) in enumerate(records)])


def _run_cross_validate(config, net, result, threads):
    plan, init, records = _ensemble(config, net, result, threads)
    summary, _ = run_to_steady_state(net, config.model_params(), init, plan)
    mc = summarize_records(records, net.n)
    result.outputs["runs.csv"] = _runs_text(records)
    result.outputs["cross_validation.csv"] = _csv(
        ("s_b_mmca", "s_b_mc_mean", "s_b_mc_std", "s_b_gap", "s_a_mmca", "s_a_mc_mean",
         "runs", "fraction_extinct", "mmca_converged"),
        [(summary.s_b, mc.s_b_mean, mc.s_b_std, summary.s_b - mc.s_b_mean, summary.s_a,
          mc.s_a_mean, mc.runs, mc.fraction_extinct, summary.converged)])
    if not summary.converged:
        result.not_converged(f"steady state not reached in {summary.steps_taken} steps")


def _run_threshold(config, net, result, threads):
    init = infection_seeds(config, net)
    result.notes.append(f"infection seeds = {','.join(map(str, init.seed_nodes))}")
    res = epidemic_threshold(net, config.model_params(), init, config.threshold_query())
    result.outputs["threshold.csv"] = _csv(THRESHOLD_HEADER,
                                           [_threshold_row("beta_b", "none", res)])
    _threshold_warnings(result, res, "beta_bc")


def _run_immunization_threshold(config, net, result, threads):
    plan_seed = derive_seed(config.seed, IMMUNIZATION)
    result.notes.append(f"plan seed = {plan_seed}")
    res = immunization_threshold(net, config.model_params(), config.strategy,
                                 config.threshold_query(), seed=plan_seed)
    result.outputs["threshold.csv"] = _csv(THRESHOLD_HEADER,
                                           [_threshold_row("v", config.strategy, res)])
    _threshold_warnings(result, res, "v_c")


def _run_phase_diagram(config, net, result, threads):
    init = infection_seeds(config, net)
    plan_seed = derive_seed(config.seed, IMMUNIZATION)
    result.notes.append(f"infection seeds = {','.join(map(str, init.seed_nodes))}")
    if config.value.startswith("v_c"):
        result.notes.append(f"plan seed = {plan_seed}")
    diagram = sweep_phase_diagram(net, config.axis1, config.grid(1), config.axis2,
                                  config.grid(2), config.model_params(), init, config.value,
                                  config.threshold_query(), plan_seed, workers=threads)
    result.outputs["phase_diagram.csv"] = diagram.to_csv_text()
    for x, y, _, ok in diagram.rows():
        if not ok:
            result.not_converged(f"cell {config.axis1}={x!r}, {config.axis2}={y!r} "
                                 "did not converge or was not bracketed")


RUNNERS = {
    "single-run": _run_single,
    "ensemble": _run_ensemble,
    "threshold": _run_threshold,
    "immunization-threshold": _run_immunization_threshold,
    "phase-diagram": _run_phase_diagram,
    "cross-validate": _run_cross_validate,
}


def metadata_text(config, result):
    """Sidecar: provenance as comments, then the full config (re-runnable as is)."""
    lines = [f"# multiplex_sir {__version__}", f"# kind = {config.kind}"]
    lines.append(f"# layer_a graph seed = {config.layer_spec('a').seed}")
    lines.append(f"# layer_b graph seed = {config.layer_spec('b').seed}")
    lines.extend(f"# {note}" for note in result.notes)
    if config.kind == "phase-diagram":
        lines.append(f"# axis1 grid = {','.join(map(repr, config.grid(1)))}")
        lines.append(f"# axis2 grid = {','.join(map(repr, config.grid(2)))}")
    lines.append(f"# outputs = {','.join(sorted(result.outputs))}")
    lines.append(f"# warnings = {len(result.warnings)}")
    return "\n".join(lines) + "\n" + serialize_config(config)


def run_experiment(config, out_dir, threads=1):
    """Run ``config`` and write its CSVs plus the metadata sidecar into ``out_dir``.

    Everything is computed first and then written by this one function, one
    file at a time, each through a temp file and a rename.
    """
    config.validate()
    net = build_network(config)
    result = ExperimentResult()
    RUNNERS[config.kind](config, net, result, threads)
    for message in result.warnings:
        log.warning(message)
    os.makedirs(out_dir, exist_ok=True)
    for name in sorted(result.outputs):
        write_text_atomic(os.path.join(out_dir, name), result.outputs[name])
    write_text_atomic(os.path.join(out_dir, METADATA), metadata_text(config, result))
    return result


def _parser():
    parser = argparse.ArgumentParser(prog="multiplex-sir",
                                     description="Awareness and epidemic spreading on "
                                                 "two-layer networks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="flat key = value config file")
    source.add_argument("--preset", choices=list(PRESETS), help="named figure design")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config key (repeatable)")
    run.add_argument("--out", default="results", help="output directory (default: results)")
    run.add_argument("--strict", action="store_true",
                     help="exit 3 if any run fails to converge")
    run.add_argument("--threads", type=int, default=1, help="worker processes")
    presets = sub.add_parser("presets", help="list the named figure designs")
    presets.add_argument("--show", metavar="NAME", help="print one preset as a config file")
    return parser


def main(argv=None):
    logging.basicConfig(format="%(levelname)s: %(message)s", stream=sys.stderr)
    args = _parser().parse_args(argv)
    if args.command == "presets":
        try:
            if args.show:
                sys.stdout.write(preset_text(args.show))
            else:
                for name, (description, _) in PRESETS.items():
                    print(f"{name}\t{description}")
        except ConfigurationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    try:
        if args.threads < 1:
            raise ConfigurationError("must be at least 1", "threads")
        if args.config:
            config = load_config(args.config, args.set)
        else:
            config = parse_config(preset_text(args.preset), args.set)
        result = run_experiment(config, args.out, args.threads)
    except (ConfigurationError, EdgeListParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if args.config and not os.path.exists(args.config) else EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.strict and not result.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
