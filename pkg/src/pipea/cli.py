"""Command-line entry point: align, synth, and sweep subcommands.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
degeneracy. ``PIPEA_THREADS`` caps BLAS-level parallelism for a run.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .aligner import PipeAligner
from .config import PipelineConfig, parse_config_file, resolve_config
from .encoder import import_similarity, write_dense_matrix
from .errors import ConfigError, ParameterError, PipeaError
from .kg import generate_synthetic_pair, load_openea_dataset, write_openea_dataset

logger = logging.getLogger("pipea")

EXIT_CODES = {"config": 2, "data": 3, "numerical": 4}

SWEEPABLE = {"alpha": "alpha", "beta": "beta", "k": "topk", "delta": "delta"}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--alpha", type=float, help="walk stop probability")
    parser.add_argument("--beta", type=float, help="intra/inter balance")
    parser.add_argument("--topk", type=int, dest="k", help="cross-graph candidates per row")
    parser.add_argument("--delta", type=float, help="sparsification threshold")
    parser.add_argument("--rank", type=int, dest="d", help="embedding rank")
    parser.add_argument("--epsilon", type=float, help="token match score")
    parser.add_argument("--l1", type=int, help="propagation iterations")
    parser.add_argument("--l2", type=int, help="refinement iterations")
    parser.add_argument("--sinkhorn-q", type=int, dest="q", help="sinkhorn iterations")
    parser.add_argument("--hops", type=int, help="built-in encoder hops")
    parser.add_argument("--rng-seed", type=int, dest="rng_seed")
    parser.add_argument("--decode", choices=("sinkhorn", "raw"))
    parser.add_argument("--propagation", choices=("auto", "dense", "push"))
    parser.add_argument("--no-refine", action="store_const", const=True, dest="no_refine")
    parser.add_argument("--no-initial", action="store_const", const=True, dest="no_initial")
    parser.add_argument(
        "--no-propagation", action="store_const", const=True, dest="no_propagation"
    )


def _add_dataset_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", required=True, help="OpenEA-format directory")
    parser.add_argument(
        "--train-ratio", type=float, default=0.01, help="fraction of links used as seeds"
    )
    parser.add_argument(
        "--encoder",
        choices=("builtin", "none"),
        help="initial similarity source (default: builtin unless --similarity)",
    )
    parser.add_argument("--similarity", help="imported similarity matrix (.tsv/.f32)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pipea",
        description="Weakly supervised entity alignment via cross-graph propagation",
    )
    parser.add_argument("--version", action="version", version=f"pipea {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_align = sub.add_parser("align", help="run the full pipeline on one dataset")
    _add_dataset_flags(p_align)
    _add_config_flags(p_align)
    p_align.add_argument("--dump-similarity", help="write the final similarity (.tsv/.f32)")
    p_align.add_argument("--out", required=True, help="output directory")

    p_synth = sub.add_parser("synth", help="generate a synthetic aligned graph pair")
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--edge-prob", type=float, required=True)
    p_synth.add_argument("--perturb", type=float, default=0.0)
    p_synth.add_argument("--seed-ratio", type=float, required=True)
    p_synth.add_argument("--rng-seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="output directory")

    p_sweep = sub.add_parser("sweep", help="grid-run align over hyperparameter ranges")
    _add_dataset_flags(p_sweep)
    _add_config_flags(p_sweep)
    for name, flag in SWEEPABLE.items():
        p_sweep.add_argument(
            f"--{flag}-range",
            dest=f"{name}_range",
            help=f"comma-separated {name} values to sweep",
        )
    p_sweep.add_argument("--out", required=True, help="output directory")
    return parser


def _resolve_run_config(args) -> PipelineConfig:
    file_overrides = parse_config_file(args.config) if args.config else {}
    flag_overrides = {
        name: getattr(args, name)
        for name in PipelineConfig.__dataclass_fields__
        if hasattr(args, name)
    }
    return resolve_config(file_overrides, flag_overrides)


def _load_similarity(args, bundle):
    if args.similarity:
        if args.encoder == "builtin":
            raise ConfigError("--similarity conflicts with --encoder builtin")
        return import_similarity(args.similarity, bundle)
    if args.encoder == "none":
        raise ConfigError("--encoder none requires --similarity <path>")
    return None  # builtin encoder


def _fit_aligner(bundle, config: PipelineConfig, similarity):
    aligner = PipeAligner.from_config(config)
    aligner.fit(bundle, similarity=similarity)
    return aligner


def _write_report(aligner: PipeAligner, args, out_dir: Path, config: PipelineConfig):
    report = aligner.evaluate_report(ks=(1, 10))
    payload = report.to_json_dict()
    payload["decode"] = config.decode
    payload["dataset"] = str(args.dataset)
    payload["train_ratio"] = args.train_ratio
    payload["timestamp"] = datetime.now(timezone.utc).isoformat()
    (out_dir / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    result = aligner.predict()
    src_labels = aligner.bundle_.source.entity_labels
    tgt_labels = aligner.bundle_.target.entity_labels
    lines = [f"{src_labels[s]}\t{tgt_labels[t]}" for s, t in result.predicted_pairs]
    (out_dir / "predictions.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    (out_dir / "config_resolved.txt").write_text(
        config.to_file_text(), encoding="utf-8"
    )

    trace = getattr(aligner, "refinement_trace_", None)
    if trace:
        with (out_dir / "refine_trace.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "hits_at_1"])
            writer.writerows(trace)
    return report


def cmd_align(args) -> int:
    config = _resolve_run_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = load_openea_dataset(args.dataset, args.train_ratio, rng_seed=config.rng_seed)
    similarity = _load_similarity(args, bundle)
    aligner = _fit_aligner(bundle, config, similarity)
    report = _write_report(aligner, args, out_dir, config)
    if args.dump_similarity:
        write_dense_matrix(args.dump_similarity, aligner.similarity_)
    hits1 = report.hits_at.get(1)
    hits10 = report.hits_at.get(10)
    logger.info(
        "H@1=%.4f H@10=%.4f MRR=%.4f over %d test pairs",
        hits1, hits10, report.mrr, report.num_test,
    )
    print(f"H@1={hits1:.4f} H@10={hits10:.4f} MRR={report.mrr:.4f} -> {out_dir}")
    return 0


def cmd_synth(args) -> int:
    bundle = generate_synthetic_pair(
        n=args.n,
        edge_prob=args.edge_prob,
        perturb=args.perturb,
        seed_ratio=args.seed_ratio,
        rng_seed=args.rng_seed,
    )
    write_openea_dataset(bundle, args.out)
    print(
        f"wrote {bundle.source.entity_count}+{bundle.target.entity_count} entities, "
        f"{len(bundle.seeds.train_pairs)} train / {len(bundle.seeds.test_pairs)} test "
        f"links -> {args.out}"
    )
    return 0


def _parse_range(flag: str, raw: str):
    kind = int if flag == "topk" else float
    try:
        values = [kind(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--{flag}-range {raw!r} is not a comma-separated list") from None
    if not values:
        raise ConfigError(f"--{flag}-range {raw!r} is empty")
    return values


def cmd_sweep(args) -> int:
    base_config = _resolve_run_config(args)
    ranges = {}
    for name, flag in SWEEPABLE.items():
        raw = getattr(args, f"{name}_range")
        if raw is not None:
            ranges[name] = _parse_range(flag, raw)
    if not ranges:
        raise ParameterError(
            "sweep needs at least one of "
            + ", ".join(f"--{flag}-range" for flag in SWEEPABLE.values())
        )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = load_openea_dataset(
        args.dataset, args.train_ratio, rng_seed=base_config.rng_seed
    )
    similarity = _load_similarity(args, bundle)

    names = list(ranges)
    rows = []
    for combo in itertools.product(*(ranges[n] for n in names)):
        overrides = dict(zip(names, combo))
        config = resolve_config(base_config.to_dict(), overrides)
        aligner = _fit_aligner(bundle, config, similarity)
        report = aligner.evaluate_report(ks=(1, 10))
        rows.append(
            {
                "alpha": config.alpha,
                "beta": config.beta,
                "k": config.k,
                "delta": config.delta,
                "hits_at_1": report.hits_at[1],
                "hits_at_10": report.hits_at[10],
                "mrr": report.mrr,
            }
        )
        logger.info("sweep cell %s -> H@1=%.4f", overrides, report.hits_at[1])
    csv_path = out_dir / "sweep.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} sweep rows -> {csv_path}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)

    threads = os.environ.get("PIPEA_THREADS")
    limiter = None
    if threads:
        try:
            from threadpoolctl import threadpool_limits

            limiter = threadpool_limits(limits=int(threads))
        except (ImportError, ValueError) as exc:
            logger.warning("ignoring PIPEA_THREADS=%r: %s", threads, exc)

    handlers = {"align": cmd_align, "synth": cmd_synth, "sweep": cmd_sweep}
    try:
        return handlers[args.command](args)
    except PipeaError as exc:
        print(f"pipea: error [{exc.category}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    finally:
        if limiter is not None:
            limiter.unregister()


if __name__ == "__main__":
    sys.exit(main())
