"""Command-line harness: fits, benchmarks and d-separation checks.

Every fit writes a per-iteration trace CSV and a summary JSON echoing
the configuration; `mog bench` runs the multi-restart comparison and
writes one trace per (method, restart) next to the benchmark summary.
Summaries are deterministic for a fixed config and seed apart from the
wall-time fields.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import METHOD_CODES, optimizer_config, run_benchmark
from .data import (
    MogGenSpec,
    generate_alignments,
    generate_corpus,
    generate_mog,
    load_alignments,
    load_docword,
    load_points_csv,
)
from .graph import check_collapsible, parse_graph_file
from .models import (
    LdaModel,
    LdaPriors,
    MogModel,
    QuantModel,
    QuantPrior,
    default_mog_priors,
    lda_topics,
)
from .optimize import run

__all__ = ["main"]


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _add_optimizer_flags(parser):
    parser.add_argument(
        "--method",
        default="vbem",
        choices=sorted(METHOD_CODES),
        help="optimizer: vbem or conjugate gradients with the fr/pr/hs beta rule",
    )
    parser.add_argument("--tol", type=float, default=1e-6, help="stopping tolerance")
    parser.add_argument("--max-iter", type=int, default=5000, help="iteration cap")
    parser.add_argument("--seed", type=int, default=0, help="initialization seed")
    parser.add_argument("--out", default=".", help="output directory")


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fit(model, args):
    config = optimizer_config(args.method, tol=args.tol, max_iter=args.max_iter)
    state, trace = run(model, model.init_state(args.seed), config)
    return state, trace


def _fit_summary(args, trace, extra_config=None):
    config = {
        "method": args.method,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "seed": args.seed,
    }
    config.update(extra_config or {})
    return {
        "config": config,
        "final_bound": trace.final_bound,
        "iterations": trace.n_iter,
        "converged": trace.converged,
        "reason": trace.reason,
        "elapsed_ms": trace.records[-1].elapsed_ms,
    }


def _mog_data(args):
    if args.data is not None:
        return load_points_csv(args.data), {"data": str(args.data)}
    if args.model_config is not None:
        cfg = _load_json(args.model_config)
        spec = MogGenSpec(
            R=cfg["R"], n_per_cluster=cfg["n_per_cluster"], seed=cfg["seed"]
        )
    elif args.R is not None:
        spec = MogGenSpec(R=args.R, n_per_cluster=args.n_per_cluster, seed=args.gen_seed)
    else:
        raise ValueError("give --data, --model-config or --R")
    echo = {"R": spec.R, "n_per_cluster": spec.n_per_cluster, "gen_seed": spec.seed}
    return generate_mog(spec), echo


def _add_mog_data_flags(parser):
    parser.add_argument("--data", help="points CSV (one observation per row)")
    parser.add_argument("--model-config", help="generator spec JSON")
    parser.add_argument("--R", type=float, help="cluster separation for generated data")
    parser.add_argument("--n-per-cluster", type=int, default=100)
    parser.add_argument("--gen-seed", type=int, default=0, help="data generation seed")
    parser.add_argument("--k", type=int, default=5, help="mixture components")


def cmd_mog_fit(args):
    data, echo = _mog_data(args)
    model = MogModel(data, default_mog_priors(data, K=args.k))
    state, trace = _fit(model, args)
    out = _out_dir(args)
    trace.write_csv(out / "trace.csv")
    post = model.posterior(state)
    summary = _fit_summary(args, trace, {"model": "mog", "k": args.k, **echo})
    summary["posterior"] = {
        "alpha": post.alpha.concentration.tolist(),
        "components": [
            {
                "m": c.m.tolist(),
                "kappa": c.kappa,
                "nu": c.nu,
                "S": c.S.tolist(),
            }
            for c in post.components
        ],
    }
    _write_json(out / "summary.json", summary)
    print(f"bound {trace.final_bound:.6f} after {trace.n_iter} iterations")
    return 0


def cmd_mog_bench(args):
    data, echo = _mog_data(args)
    model = MogModel(data, default_mog_priors(data, K=args.k))
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    summary, traces = run_benchmark(
        model,
        methods,
        restarts=args.restarts,
        threshold_nats=args.threshold_nats,
        tol=args.tol,
        max_iter=args.max_iter,
        base_seed=args.seed,
    )
    out = _out_dir(args)
    for code, method_traces in traces.items():
        for i, trace in enumerate(method_traces):
            trace.write_csv(out / f"trace_{code}_{i:03d}.csv")
    payload = summary.to_dict()
    payload["config"] = {
        "methods": methods,
        "restarts": args.restarts,
        "threshold_nats": args.threshold_nats,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "seed": args.seed,
        "k": args.k,
        **echo,
    }
    _write_json(out / "bench_summary.json", payload)
    for code in methods:
        row = summary.methods[code]
        shown = "inf" if row.successes == 0 else f"{row.iterations_to_best:.2f}"
        print(
            f"{code}: iterations-to-best {shown} "
            f"({row.successes}/{row.restarts} restarts at best)"
        )
    return 0


def cmd_lda_fit(args):
    if args.docword is not None:
        corpus = load_docword(args.docword, args.vocab)
        echo = {"docword": str(args.docword)}
        k = args.k
        if k is None:
            raise ValueError("--k is required with --docword")
    elif args.model_config is not None:
        cfg = _load_json(args.model_config)
        corpus, _ = generate_corpus(
            cfg["k"],
            cfg["n_docs"],
            cfg["vocab_size"],
            cfg["doc_len"],
            cfg.get("alpha", 0.1),
            cfg.get("beta", 0.1),
            cfg["seed"],
        )
        echo = {f"gen_{key}": value for key, value in sorted(cfg.items())}
        k = args.k if args.k is not None else cfg["k"]
    else:
        raise ValueError("give --docword or --model-config")
    model = LdaModel(corpus, LdaPriors(alpha=args.alpha, beta=args.beta, K=k))
    state, trace = _fit(model, args)
    out = _out_dir(args)
    trace.write_csv(out / "trace.csv")
    post = model.posterior(state)
    summary = _fit_summary(
        args, trace,
        {"model": "lda", "k": k, "alpha": args.alpha, "beta": args.beta, **echo},
    )
    summary["posterior"] = {
        "alpha_prime": post.alpha_prime.tolist(),
        "beta_prime": post.beta_prime.tolist(),
    }
    _write_json(out / "summary.json", summary)
    topics = lda_topics(post, top_n=args.top_words, vocab=corpus.vocab)
    _write_json(
        out / "topics.json",
        [
            {
                "topic": i,
                "words": [{"word": w, "weight": x} for w, x in words],
            }
            for i, words in enumerate(topics)
        ],
    )
    print(f"bound {trace.final_bound:.6f} after {trace.n_iter} iterations")
    return 0


def cmd_quant_fit(args):
    if args.alignments is not None:
        alignments = load_alignments(args.alignments)
        echo = {"alignments": str(args.alignments)}
    elif args.model_config is not None:
        cfg = _load_json(args.model_config)
        alignments, _ = generate_alignments(
            cfg["m"],
            cfg["n_reads"],
            cfg["ambiguity"],
            cfg.get("noise_sigma", 0.0),
            cfg["seed"],
        )
        echo = {f"gen_{key}": value for key, value in sorted(cfg.items())}
    else:
        raise ValueError("give --alignments or --model-config")
    model = QuantModel(alignments, QuantPrior(args.alpha0))
    state, trace = _fit(model, args)
    out = _out_dir(args)
    trace.write_csv(out / "trace.csv")
    post = model.posterior_theta(state)
    mean = post.concentration / post.total
    with open(out / "abundances.csv", "w") as fh:
        fh.write("transcript,mean,concentration\n")
        for m in range(alignments.n_transcripts):
            fh.write(f"{m},{float(mean[m])!r},{float(post.concentration[m])!r}\n")
    summary = _fit_summary(
        args, trace, {"model": "quant", "alpha0": args.alpha0, **echo}
    )
    summary["posterior"] = {
        "concentration": post.concentration.tolist(),
        "mean": mean.tolist(),
    }
    _write_json(out / "summary.json", summary)
    print(f"bound {trace.final_bound:.6f} after {trace.n_iter} iterations")
    return 0


def cmd_dsep_check(args):
    dag, observed, parameterized, collapsed = parse_graph_file(args.graph)
    report = check_collapsible(dag, observed, parameterized, collapsed)
    print(f"collapsible: {'yes' if report.collapsible else 'no'}")
    for a, b in report.failing_pairs:
        print(f"entangled: {a} -- {b}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cvbopt",
        description="Collapsed variational inference: fits, benchmarks, graph checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mog = sub.add_parser("mog", help="Bayesian mixture of Gaussians")
    mog_sub = mog.add_subparsers(dest="subcommand", required=True)
    mog_fit = mog_sub.add_parser("fit", help="single fit")
    _add_mog_data_flags(mog_fit)
    _add_optimizer_flags(mog_fit)
    mog_fit.set_defaults(handler=cmd_mog_fit)
    mog_bench = mog_sub.add_parser("bench", help="multi-restart comparison")
    _add_mog_data_flags(mog_bench)
    _add_optimizer_flags(mog_bench)
    mog_bench.add_argument(
        "--methods", default="vbem,fr,pr,hs", help="comma-separated method codes"
    )
    mog_bench.add_argument("--restarts", type=int, default=20)
    mog_bench.add_argument("--threshold-nats", type=float, default=10.0)
    mog_bench.set_defaults(handler=cmd_mog_bench)

    lda = sub.add_parser("lda", help="latent Dirichlet allocation")
    lda_sub = lda.add_subparsers(dest="subcommand", required=True)
    lda_fit = lda_sub.add_parser("fit", help="single fit")
    lda_fit.add_argument("--docword", help="UCI docword file")
    lda_fit.add_argument("--vocab", help="vocabulary file, one word per line")
    lda_fit.add_argument("--model-config", help="generator spec JSON")
    lda_fit.add_argument("--k", type=int, help="topic count")
    lda_fit.add_argument("--alpha", type=float, default=0.1)
    lda_fit.add_argument("--beta", type=float, default=0.1)
    lda_fit.add_argument("--top-words", type=int, default=10)
    _add_optimizer_flags(lda_fit)
    lda_fit.set_defaults(handler=cmd_lda_fit)

    quant = sub.add_parser("quant", help="transcript quantification")
    quant_sub = quant.add_subparsers(dest="subcommand", required=True)
    quant_fit = quant_sub.add_parser("fit", help="single fit")
    quant_fit.add_argument("--alignments", help="alignment file")
    quant_fit.add_argument("--model-config", help="generator spec JSON")
    quant_fit.add_argument("--alpha0", type=float, default=1.0)
    _add_optimizer_flags(quant_fit)
    quant_fit.set_defaults(handler=cmd_quant_fit)

    dsep = sub.add_parser("dsep", help="d-separation checks")
    dsep_sub = dsep.add_subparsers(dest="subcommand", required=True)
    dsep_check = dsep_sub.add_parser("check", help="collapsibility of a graph file")
    dsep_check.add_argument("graph", help="graph description file")
    dsep_check.set_defaults(handler=cmd_dsep_check)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError, RuntimeError, KeyError, np.linalg.LinAlgError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
