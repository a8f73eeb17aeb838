"""Command-line interface.

Machine-readable JSON goes to stdout, human-readable summaries to stderr.
Exit codes: 0 pass, 1 numerical/hypothesis failure, 2 usage error. Stochastic
commands require an explicit --seed; rerunning any command with identical
arguments reproduces byte-identical JSON/CSV payloads (manifests differ only
in their duration field).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import (
    batch_instance_optimality,
    batch_lemma_decay,
    batch_postprocessing,
    batch_prop_iterate,
    check_livschitz,
    check_tropp_recovery,
    recovery_phase_sweep,
    sweep_to_csv,
)
from .dictionary import (
    Dictionary,
    coherence,
    gen_gaussian,
    gen_perturbed_identity,
    gen_union_of_bases,
    load_dictionary,
    load_dictionary_csv,
    load_vector_csv,
    save_dictionary,
    save_dictionary_csv,
    save_sparse_vector,
    save_vector_csv,
)
from .errors import GreedyLabError
from .greedy import (
    MODE_ADVERSARIAL,
    MODE_ARGMAX,
    GreedyConfig,
    run_omp,
    run_pga,
    run_womp,
)
from .oracle import best_n_term, sigma_profile
from .report import render_sweep_figures
from .rip import DEFAULT_ENUMERATION_BUDGET, rip_coherence_bound, rip_exact, rip_sampled

import numpy as np


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _shape(text: str) -> tuple[int, int]:
    try:
        m, n = text.lower().split("x")
        return int(m), int(n)
    except Exception as exc:
        raise argparse.ArgumentTypeError(f"expected MxN, got {text!r}") from exc


def _multiples(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except Exception as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("step multiples must be positive")
    return vals


def _load_any_dictionary(path: str) -> Dictionary:
    with open(path, "rb") as fh:
        magic = fh.read(8)
    if magic == b"GLABDICT":
        return load_dictionary(path)
    return load_dictionary_csv(path)


def _write_manifest(output: str, command: str, argv: list[str], seed, outputs, duration: float):
    manifest = {
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "version": __version__,
        "outputs": [str(p) for p in outputs],
        "duration_seconds": duration,
    }
    with open(f"{output}.manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# handlers: each returns (exit_code, json payload or None, output paths, summary)
# ---------------------------------------------------------------------------

def _cmd_dict_gen(args):
    if args.kind == "gaussian":
        if args.m is None or args.n is None:
            raise ValueError("gaussian needs --m and --n")
        d = gen_gaussian(args.m, args.n, args.seed)
    elif args.kind == "perturbed-identity":
        if args.n is None or args.eps is None:
            raise ValueError("perturbed-identity needs --n and --eps")
        d = gen_perturbed_identity(args.n, args.eps, args.seed)
    else:
        if args.m is None:
            raise ValueError("union-of-bases needs --m")
        d = gen_union_of_bases(args.m, args.seed)
    fmt = args.format or ("csv" if args.output.endswith(".csv") else "binary")
    if fmt == "csv":
        save_dictionary_csv(d, args.output)
    else:
        save_dictionary(d, args.output)
    payload = {
        "path": args.output,
        "format": fmt,
        "m": d.ambient_dim,
        "num_atoms": d.num_atoms,
        "label": d.label,
    }
    summary = f"wrote {args.output} ({fmt}, m={d.ambient_dim}, N={d.num_atoms})"
    return 0, payload, [args.output], summary


def _cmd_dict_coherence(args):
    d = _load_any_dictionary(args.path)
    mu = coherence(d)
    return 0, {"mu": mu}, [], f"coherence = {mu:.6g}"


def _cmd_dict_info(args):
    d = _load_any_dictionary(args.path)
    norms = np.linalg.norm(d.atoms, axis=0)
    payload = {
        "m": d.ambient_dim,
        "num_atoms": d.num_atoms,
        "label": d.label,
        "min_column_norm": float(norms.min()),
        "max_column_norm": float(norms.max()),
    }
    return 0, payload, [], f"{args.path}: m={d.ambient_dim}, N={d.num_atoms}"


def _cmd_rip(args):
    d = _load_any_dictionary(args.dict)
    if args.exact is not None:
        est = rip_exact(d, args.exact, budget=args.budget, workers=args.workers)
    elif args.sampled is not None:
        if args.trials is None or args.seed is None:
            raise ValueError("--sampled needs --trials and --seed")
        est = rip_sampled(d, args.sampled, args.trials, args.seed)
    else:
        est = rip_coherence_bound(d, args.bound)
    return 0, est.to_json_dict(), [], f"delta_{est.order} {est.kind}: {est.value:.6g}"


def _cmd_run(args):
    d = _load_any_dictionary(args.dict)
    target = load_vector_csv(args.target)
    if args.algo == "pga":
        trace = run_pga(d, target, args.steps)
    elif args.algo == "omp":
        trace = run_omp(d, target, args.steps, residual_tol=args.residual_tol)
    else:
        mode = MODE_ADVERSARIAL if args.mode == "adversarial-weak" else MODE_ARGMAX
        cfg = GreedyConfig(
            max_steps=args.steps,
            kappa=args.kappa,
            residual_tol=args.residual_tol,
            selection_mode=mode,
        )
        trace = run_womp(d, target, cfg)
    outputs = []
    if args.residual_out:
        save_vector_csv(trace.final_residual, args.residual_out)
        outputs.append(args.residual_out)
    if args.coefficients_out:
        save_sparse_vector(trace.final_coefficients, args.coefficients_out)
        outputs.append(args.coefficients_out)
    summary = (
        f"{trace.algorithm}: {trace.num_steps} steps, "
        f"final residual {trace.residual_norms[-1]:.6g}"
    )
    return 0, trace.to_json_dict(), outputs, summary


def _cmd_oracle(args):
    d = _load_any_dictionary(args.dict)
    target = load_vector_csv(args.target)
    if args.profile:
        sigmas = sigma_profile(d, target, args.n, budget=args.budget)
        payload = {"order": args.n, "sigmas": sigmas}
        summary = f"sigma profile up to order {args.n}"
    else:
        result = best_n_term(d, target, args.n, budget=args.budget)
        payload = result.to_json_dict()
        summary = f"sigma_{args.n} = {result.sigma:.6g}"
    return 0, payload, [], summary


def _report_result(report):
    code = 0 if report.passed else 1
    return code, report.to_json_dict(), [], report.summary()


def _cmd_certify_lemma_decay(args):
    d = _load_any_dictionary(args.dict)
    report = batch_lemma_decay(
        d, args.n, args.steps, args.trials, args.seed,
        budget=args.budget, workers=args.workers,
    )
    return _report_result(report)


def _cmd_certify_prop_iterate(args):
    d = _load_any_dictionary(args.dict)
    report = batch_prop_iterate(
        d, args.n, args.trials, args.seed,
        offset=args.offset, repeats=args.repeats,
        budget=args.budget, workers=args.workers,
    )
    return _report_result(report)


def _cmd_certify_instance_opt(args):
    d = _load_any_dictionary(args.dict)
    report = batch_instance_optimality(
        d, args.n, args.kappa, args.trials, args.seed,
        budget=args.budget, workers=args.workers,
    )
    return _report_result(report)


def _cmd_certify_postprocess(args):
    d = _load_any_dictionary(args.dict)
    report = batch_postprocessing(
        d, args.n, args.kappa, args.trials, args.seed,
        budget=args.budget, workers=args.workers,
    )
    return _report_result(report)


def _cmd_certify_tropp(args):
    d = _load_any_dictionary(args.dict)
    report = check_tropp_recovery(d, args.n, args.trials, args.seed)
    return _report_result(report)


def _cmd_certify_livschitz(args):
    d = _load_any_dictionary(args.dict)
    report = check_livschitz(d, args.n, args.trials, args.seed, budget=args.budget)
    return _report_result(report)


def _cmd_certify_sweep(args):
    if args.n_min > args.n_max:
        raise ValueError("--n-min must not exceed --n-max")
    orders = list(range(args.n_min, args.n_max + 1))
    tables = recovery_phase_sweep(
        args.shape, orders, args.trials, args.seed,
        kind=args.kind, step_multiples=args.multiples,
        oracle_budget=args.oracle_budget,
    )
    out = Path(args.output)
    written = []
    for mult in sorted(tables):
        if len(tables) == 1:
            path = out
        else:
            path = out.with_name(f"{out.stem}_x{mult}{out.suffix}")
        path.write_text(sweep_to_csv(tables[mult]))
        written.append(str(path))
    rows = sum(len(v) for v in tables.values())
    return 0, {"written": written, "rows": rows}, written, f"wrote {len(written)} sweep file(s)"


def _cmd_report(args):
    figures = render_sweep_figures(args.sweep, outdir=args.outdir, dpi=args.dpi)
    return 0, {"figures": figures}, figures, f"rendered {len(figures)} figure(s)"


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_budget(p):
    p.add_argument(
        "--budget", type=_positive_int, default=DEFAULT_ENUMERATION_BUDGET,
        help="enumeration budget for exhaustive searches",
    )


def _add_workers(p):
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="parallel fan-out bound (deterministic result)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greedylab",
        description="Greedy sparse approximation with exact oracles and certified bounds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command")

    # dict
    p_dict = sub.add_parser("dict", help="generate and inspect dictionaries")
    dict_sub = p_dict.add_subparsers(dest="dict_command")

    p_gen = dict_sub.add_parser("gen", help="generate a dictionary file")
    p_gen.add_argument("--kind", required=True,
                       choices=["gaussian", "perturbed-identity", "union-of-bases"])
    p_gen.add_argument("--m", type=_positive_int, help="ambient dimension")
    p_gen.add_argument("--n", type=_positive_int, help="number of atoms")
    p_gen.add_argument("--eps", type=float, help="perturbation magnitude")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("-o", "--output", required=True)
    p_gen.add_argument("--format", choices=["binary", "csv"])
    p_gen.set_defaults(handler=_cmd_dict_gen)

    p_coh = dict_sub.add_parser("coherence", help="print the coherence as JSON")
    p_coh.add_argument("path")
    p_coh.set_defaults(handler=_cmd_dict_coherence)

    p_info = dict_sub.add_parser("info", help="dimensions and norm diagnostics")
    p_info.add_argument("path")
    p_info.set_defaults(handler=_cmd_dict_info)

    # rip
    p_rip = sub.add_parser("rip", help="restricted isometry constants")
    p_rip.add_argument("--dict", required=True)
    mode = p_rip.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", type=_positive_int, metavar="N")
    mode.add_argument("--sampled", type=_positive_int, metavar="N")
    mode.add_argument("--bound", type=_positive_int, metavar="N")
    p_rip.add_argument("--trials", type=_positive_int)
    p_rip.add_argument("--seed", type=int)
    _add_budget(p_rip)
    _add_workers(p_rip)
    p_rip.set_defaults(handler=_cmd_rip)

    # run
    p_run = sub.add_parser("run", help="run a greedy algorithm on a target vector")
    p_run.add_argument("--algo", required=True, choices=["omp", "womp", "pga"])
    p_run.add_argument("--dict", required=True)
    p_run.add_argument("--target", required=True, help="dense vector CSV, one value per line")
    p_run.add_argument("--steps", type=_nonneg_int, required=True)
    p_run.add_argument("--kappa", type=float, default=1.0)
    p_run.add_argument("--mode", choices=["argmax", "adversarial-weak"], default="argmax")
    p_run.add_argument("--residual-tol", type=float, default=1e-12)
    p_run.add_argument("--residual-out", help="write the final residual to CSV")
    p_run.add_argument("--coefficients-out", help="write final coefficients as index,value CSV")
    p_run.set_defaults(handler=_cmd_run)

    # oracle
    p_or = sub.add_parser("oracle", help="exact best n-term approximation")
    p_or.add_argument("--dict", required=True)
    p_or.add_argument("--target", required=True)
    p_or.add_argument("--n", type=_nonneg_int, required=True)
    p_or.add_argument("--profile", action="store_true",
                      help="emit sigma_0..sigma_n instead of a single result")
    _add_budget(p_or)
    p_or.set_defaults(handler=_cmd_oracle)

    # certify
    p_cert = sub.add_parser("certify", help="certify inequalities on seeded instances")
    cert_sub = p_cert.add_subparsers(dest="certify_command")

    p_ld = cert_sub.add_parser("lemma-decay", help="per-step residual decay")
    p_ld.add_argument("--dict", required=True)
    p_ld.add_argument("--n", type=_positive_int, required=True, help="sparsity of g")
    p_ld.add_argument("--steps", type=_positive_int, required=True)
    p_ld.add_argument("--trials", type=_positive_int, required=True)
    p_ld.add_argument("--seed", type=int, required=True)
    _add_budget(p_ld)
    _add_workers(p_ld)
    p_ld.set_defaults(handler=_cmd_certify_lemma_decay)

    p_pi = cert_sub.add_parser("prop-iterate", help="iterated geometric decay")
    p_pi.add_argument("--dict", required=True)
    p_pi.add_argument("--n", type=_positive_int, required=True)
    p_pi.add_argument("--trials", type=_positive_int, required=True)
    p_pi.add_argument("--seed", type=int, required=True)
    p_pi.add_argument("--offset", type=_nonneg_int, default=1)
    p_pi.add_argument("--repeats", type=_nonneg_int, default=3)
    _add_budget(p_pi)
    _add_workers(p_pi)
    p_pi.set_defaults(handler=_cmd_certify_prop_iterate)

    p_io = cert_sub.add_parser("instance-opt", help="A*n-step instance optimality")
    p_po = cert_sub.add_parser("postprocess", help="top-n postprocessed near-best bound")
    for p in (p_io, p_po):
        p.add_argument("--dict", required=True)
        p.add_argument("--n", type=_positive_int, required=True)
        p.add_argument("--kappa", type=float, default=1.0)
        p.add_argument("--trials", type=_positive_int, required=True)
        p.add_argument("--seed", type=int, required=True)
        _add_budget(p)
        _add_workers(p)
    p_io.set_defaults(handler=_cmd_certify_instance_opt)
    p_po.set_defaults(handler=_cmd_certify_postprocess)

    p_tr = cert_sub.add_parser("tropp", help="coherence-gated exact recovery in n steps")
    p_tr.add_argument("--dict", required=True)
    p_tr.add_argument("--n", type=_positive_int, required=True)
    p_tr.add_argument("--trials", type=_positive_int, required=True)
    p_tr.add_argument("--seed", type=int, required=True)
    p_tr.set_defaults(handler=_cmd_certify_tropp)

    p_lv = cert_sub.add_parser("livschitz", help="2n-step factor-3 near-best bound")
    p_lv.add_argument("--dict", required=True)
    p_lv.add_argument("--n", type=_positive_int, required=True)
    p_lv.add_argument("--trials", type=_positive_int, required=True)
    p_lv.add_argument("--seed", type=int, required=True)
    _add_budget(p_lv)
    p_lv.set_defaults(handler=_cmd_certify_livschitz)

    p_sw = cert_sub.add_parser("sweep", help="empirical recovery phase sweep to CSV")
    p_sw.add_argument("--kind", choices=["gaussian", "orthonormal"], default="gaussian")
    p_sw.add_argument("--shape", type=_shape, action="append", required=True,
                      metavar="MxN", help="dictionary shape; repeatable")
    p_sw.add_argument("--n-min", type=_nonneg_int, default=0)
    p_sw.add_argument("--n-max", type=_nonneg_int, required=True)
    p_sw.add_argument("--trials", type=_positive_int, required=True)
    p_sw.add_argument("--seed", type=int, required=True)
    p_sw.add_argument("-o", "--output", required=True)
    p_sw.add_argument("--multiples", type=_multiples, default=(1, 2, 4),
                      help="step multiples, e.g. 1,2,4 (one CSV per multiple)")
    p_sw.add_argument("--oracle-budget", type=_positive_int,
                      default=DEFAULT_ENUMERATION_BUDGET)
    p_sw.set_defaults(handler=_cmd_certify_sweep)

    # report
    p_rep = sub.add_parser("report", help="render figures from an emitted sweep CSV")
    p_rep.add_argument("--sweep", required=True, help="sweep CSV path")
    p_rep.add_argument("--outdir", help="figure directory (default: beside the CSV)")
    p_rep.add_argument("--dpi", type=_positive_int, default=150)
    p_rep.set_defaults(handler=_cmd_report)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_help(sys.stderr)
        return 2
    start = time.monotonic()
    try:
        code, payload, outputs, summary = args.handler(args)
    except GreedyLabError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    except (ValueError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    duration = time.monotonic() - start
    for out in outputs:
        _write_manifest(out, args.command, argv, getattr(args, "seed", None), outputs, duration)
    if payload is not None:
        print(json.dumps(payload))
    if summary:
        print(summary, file=sys.stderr)
    return code


def run() -> None:
    raise SystemExit(main())
