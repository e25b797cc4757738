"""Command-line entry point: generate, solve, eval, report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dataio, scenario
from .affinity import AffinityConfig, learn_cbtf_table
from .energy import (Partition, build_energy_model, energy_linear,
                     energy_quadratic, linking_to_partition)
from .errors import CamlinkError, InputError
from .ldd import run_ldd
from .metrics import evaluate
from .model import build_candidate_links
from .oracle import (brute_force_linear, brute_force_quadratic,
                     exact_linear_assignment, lrmcf_lower_bound)
from .qdd import run_qdd
from .report import plot_energy_curves
from .simnet import run_distributed
from .subgradient import StepSchedule, StoppingRule

ALGORITHMS = ("ldd", "qdd", "oracle-assignment", "oracle-brute-linear",
              "oracle-brute-quadratic", "oracle-lrmcf")


def _spec_from_file(path, seed):
    doc = json.loads(Path(path).read_text())
    mean_travel = {tuple(rec["edge"]): rec["mean"] for rec in doc["mean_travel"]}
    topology = scenario.make_topology(doc["cameras"],
                                      [tuple(e) for e in doc["edges"]],
                                      mean_travel)
    return scenario.ScenarioSpec(
        topology=topology,
        persons=doc.get("persons", 10),
        duration=doc.get("duration", 3600.0),
        appearance_separation=doc.get("appearance_separation", 0.9),
        brightness_shift={rec["camera"]: rec["offset"]
                          for rec in doc.get("brightness_shift", [])},
        noise=doc.get("noise", 0.0),
        seed=seed if seed is not None else doc.get("seed", 0),
        bins=doc.get("bins", 64),
        dwell_range=tuple(doc.get("dwell_range", (20.0, 40.0))))


def cmd_generate(args) -> int:
    if args.spec:
        spec = _spec_from_file(args.spec, args.seed)
    else:
        spec = scenario.benchmark_spec(seed=args.seed or 0)
    observations, truth = scenario.generate(spec)
    dataio.write_dataset(args.out, spec.topology, observations, truth)
    print(f"wrote {args.out}: {len(observations)} observations, "
          f"{spec.persons} persons, {len(spec.topology.cameras)} cameras")
    return 0


def _solve_decomposition(args, topology, links, model):
    schedule = StepSchedule(scale=args.step_scale)
    stop = StoppingRule(tolerance=args.tol, max_iters=args.max_iters)
    log = None
    if args.execution == "distributed":
        config, report, log = run_distributed(args.algo, topology, links,
                                              model, schedule, stop)
    elif args.algo == "ldd":
        config, report = run_ldd(links, model, topology, schedule, stop)
    else:
        config, report = run_qdd(links, model, schedule, stop)
    return config, report, log


def cmd_solve(args) -> int:
    topology, observations, truth = dataio.read_dataset(args.dataset)
    table = None
    config_affinity = AffinityConfig(appearance_mode=args.affinity,
                                     virtual_link_cost=args.virtual_cost)
    if args.affinity == "cbtf":
        if args.cbtf:
            table = dataio.read_cbtf(args.cbtf)
        elif truth is not None:
            table = learn_cbtf_table(topology, observations, truth)
        else:
            raise InputError("--affinity cbtf requires --cbtf or a dataset with truth")

    links = build_candidate_links(topology, observations)
    with_pairs = args.algo in ("qdd", "oracle-brute-quadratic", "oracle-lrmcf")
    model = build_energy_model(links, topology, config_affinity, table,
                               with_pairs=with_pairs)

    def out_path(ext: str) -> Path:
        return Path(str(args.out) + ext)

    metadata = {"algorithm": args.algo, "execution": args.execution,
                "seed": args.seed, "step_scale": args.step_scale,
                "virtual_cost": args.virtual_cost, "tolerance": args.tol,
                "max_iters": args.max_iters, "affinity": args.affinity}

    if args.algo == "oracle-lrmcf":
        bound = lrmcf_lower_bound(links, model,
                                  StepSchedule(scale=args.step_scale),
                                  iters=args.max_iters, cap=args.oracle_cap)
        out_path(".result.json").write_text(json.dumps(
            {"lrmcf_best_dual": bound, "metadata": metadata},
            sort_keys=True, indent=1) + "\n")
        print(f"lrmcf best dual bound: {bound}")
        return 0

    report = None
    log = None
    if args.algo in ("ldd", "qdd"):
        config, report, log = _solve_decomposition(args, topology, links, model)
    elif args.algo == "oracle-assignment":
        config, _energy = exact_linear_assignment(links, model)
    elif args.algo == "oracle-brute-linear":
        config, _energy = brute_force_linear(links, model, cap=args.oracle_cap)
    else:
        config, _energy = brute_force_quadratic(links, model, cap=args.oracle_cap)

    config.fill_pairs(links)
    partition = linking_to_partition(config, links)
    energies = {"linear": energy_linear(config, model)}
    if with_pairs:
        energies["quadratic"] = energy_quadratic(config, model, links)
    if report is not None:
        energies["best_dual"] = report.best_dual
        metadata["iterations"] = report.iterations
        metadata["converged_at"] = report.converged_at

    dataio.write_result(out_path(".result.json"), config, partition,
                        energies, metadata)
    if report is not None:
        dataio.write_report(out_path(".report.csv"), report)
        if not args.no_figures:
            plot_energy_curves(report, out_path(".energy.png"),
                               title=f"{args.algo} ({args.execution})")
    if log is not None:
        dataio.write_message_log(out_path(".messages.csv"), log)
    print(f"solved with {args.algo}: {partition.n_tracks} tracks, "
          f"energies {energies}")
    return 0


def cmd_eval(args) -> int:
    topology, observations, truth = dataio.read_dataset(args.dataset)
    if truth is None:
        raise InputError("dataset carries no truth block")
    doc = dataio.read_result(args.result)
    partition = Partition(tracks=doc["partition"])
    ev = evaluate(partition, truth)
    dataio.append_evaluation(args.result, ev)
    print(f"P={ev.precision:.4f} R={ev.recall:.4f} F={ev.f_measure:.4f} "
          f"K={ev.estimated_tracks} K*={ev.true_tracks}")
    return 0


def cmd_report(args) -> int:
    report = dataio.read_report(args.report)
    plot_energy_curves(report, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camlink",
        description="Camera-to-camera trajectory association via dual decomposition")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a synthetic dataset")
    gen.add_argument("--spec", help="scenario spec JSON (default: built-in benchmark preset)")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    sol = sub.add_parser("solve", help="associate observations in a dataset")
    sol.add_argument("dataset")
    sol.add_argument("--algo", choices=ALGORITHMS, default="ldd")
    sol.add_argument("--exec", dest="execution",
                     choices=("centralized", "distributed"), default="centralized")
    sol.add_argument("--seed", type=int, default=0)
    sol.add_argument("--step-scale", type=float, default=5.0)
    sol.add_argument("--virtual-cost", type=float, default=25.0)
    sol.add_argument("--tol", type=float, default=1e-6)
    sol.add_argument("--max-iters", type=int, default=5000)
    sol.add_argument("--affinity", choices=("direct", "cbtf"), default="direct")
    sol.add_argument("--cbtf", help="CBTF table JSON (else learned from truth)")
    sol.add_argument("--oracle-cap", type=int, default=10)
    sol.add_argument("--no-figures", action="store_true")
    sol.add_argument("--out", required=True,
                     help="output prefix; writes <out>.result.json etc.")
    sol.set_defaults(func=cmd_solve)

    ev = sub.add_parser("eval", help="score a result against dataset truth")
    ev.add_argument("result")
    ev.add_argument("dataset")
    ev.set_defaults(func=cmd_eval)

    rep = sub.add_parser("report", help="render energy curves from a report table")
    rep.add_argument("report")
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CamlinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
