"""Command-line entry point: ``motifreg <stage> --expression Y.tsv --promoters S.fa --out DIR``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from motifreg.expression import ExpressionError
from motifreg.io import InputError, write_expression_tsv, write_fasta
from motifreg.pruning import TAU_TERMS
from motifreg.pipeline import STAGES, PipelineConfig, StageError, run_pipeline
from motifreg.synth import synthesize

log = logging.getLogger("motifreg")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--expression", required=True, help="gene x sample TSV")
    p.add_argument("--promoters", required=True, help="promoter FASTA")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON config; command-line flags override it")
    p.add_argument("--word-lengths", type=_int_list)
    p.add_argument("--deltas", type=_int_list, help="interaction ranges, ascending")
    p.add_argument("--dict-batch", type=int)
    p.add_argument("--model-budget", type=int)
    p.add_argument("--o-max", type=int)
    basis = p.add_mutually_exclusive_group()
    basis.add_argument("--components", type=_int_list, help="1-based component numbers")
    basis.add_argument("--top-k", type=int)
    p.add_argument("--lof", choices=("wgcv", "wmbic"))
    p.add_argument("--tau-term", choices=TAU_TERMS)
    p.add_argument("--flank", type=int)
    p.add_argument("--flank-method", choices=("chisq", "lattice"))
    p.add_argument("--n-permutations", type=int)
    p.add_argument("--positive-genes")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, dest="n_jobs")


_CONFIG_FLAGS = (
    "word_lengths",
    "deltas",
    "dict_batch",
    "model_budget",
    "o_max",
    "components",
    "top_k",
    "lof",
    "tau_term",
    "flank",
    "flank_method",
    "n_permutations",
    "positive_genes",
    "seed",
    "n_jobs",
)


def config_from_args(args) -> PipelineConfig:
    base = {}
    if args.config:
        try:
            with open(args.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(base, dict):
            raise InputError(f"{args.config}: config must be a JSON object")
    for name in _CONFIG_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            base[name] = value
    if args.components is not None:
        base["top_k"] = None
    elif args.top_k is not None:
        base["components"] = None
    return PipelineConfig.from_dict(base)


def cmd_stage(args) -> int:
    config = config_from_args(args)
    run_pipeline(config, args.expression, args.promoters, args.out, until=args.command)
    log.info("wrote %s artifacts to %s", args.command, args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    data = synthesize(
        args.seed,
        n_genes=args.genes,
        length=args.length,
        n_planted=args.planted,
        word_length=args.word_length,
        delta=args.delta,
        n_samples=args.samples,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_fasta(out / "promoters.fa", data.promoters)
    write_expression_tsv(out / "expression.tsv", data.expression)
    (out / "positive_genes.txt").write_text("".join(g + "\n" for g in data.positive_genes))
    truth = {
        "seed": args.seed,
        "element": str(data.element),
        "planted_genes": data.planted_genes,
    }
    (out / "truth.json").write_text(json.dumps(truth, indent=2) + "\n")
    log.info("planted %s in %d promoters", data.element, len(data.planted_genes))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="motifreg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "basis": "SVD basis and scree table",
        "dict": "word dictionary (step A)",
        "build": "forward model building (step B)",
        "prune": "backward pruning (step C)",
        "validate": "model report and effect curves",
        "run": "all stages plus permutation study and plot data",
    }
    for stage in STAGES:
        p = sub.add_parser(stage, help=helps[stage])
        _add_pipeline_args(p)
        p.set_defaults(func=cmd_stage)
    p = sub.add_parser("synth", help="write a planted-pair fixture")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--genes", type=int, default=1000)
    p.add_argument("--length", type=int, default=500)
    p.add_argument("--planted", type=int, default=150)
    p.add_argument("--word-length", type=int, default=6)
    p.add_argument("--delta", type=int, default=50)
    p.add_argument("--samples", type=int, default=6)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except StageError as exc:
        if isinstance(exc.cause, (InputError, OSError, ExpressionError)):
            log.error("%s", exc)
            return EXIT_INPUT
        log.error("%s", exc)
        return EXIT_INTERNAL
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - last resort
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
