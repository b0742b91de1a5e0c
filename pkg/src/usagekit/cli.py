"""Command-line entry point.

Subcommands: evaluate, compare, agreement, annotate, preprocess, split,
feasibility. Settings come from an optional TOML config file; flags override
config values, and the effective configuration is echoed into every JSON
report. Exit codes: 0 ok, 2 usage error, 3 data contract violation,
4 transport failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from . import corpus_io, feasibility
from .annotation import (
    CHAIN_OF_THOUGHT,
    PLAIN,
    EndpointConfig,
    annotate_corpus,
    builtin_template,
)
from .corpus_stats import (
    SignificanceConfig,
    inter_annotator_agreement,
    permutation_test,
    score_corpus,
)
from .dataset import FilterConfig, FilterStats, preprocess, read_reviews, split_reviews, write_reviews_jsonl
from .embedding import EmbeddingBackendConfig
from .errors import CacheFormatError, ContractViolation, RemoteError
from .similarity import BetaParams, Similarity, SimilarityConfig
from .wms import WmsConfig, corpus_wms

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONTRACT = 3
EXIT_TRANSPORT = 4


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _pick(flag_value, config: dict, section: str, key: str, default):
    """Flag beats config file beats default."""
    if flag_value is not None:
        return flag_value
    return config.get(section, {}).get(key, default)


def _similarity_from(args, config: dict) -> tuple[Similarity, dict]:
    stage1 = BetaParams(
        _pick(getattr(args, "stage1_alpha", None), config, "similarity", "stage1_alpha", 1.35),
        _pick(getattr(args, "stage1_beta", None), config, "similarity", "stage1_beta", 1.65),
    )
    stage2 = BetaParams(
        _pick(getattr(args, "stage2_alpha", None), config, "similarity", "stage2_alpha", 14.72),
        _pick(getattr(args, "stage2_beta", None), config, "similarity", "stage2_beta", 3.39),
    )
    backend = EmbeddingBackendConfig(
        kind=_pick(getattr(args, "backend", None), config, "backend", "kind", "deterministic-test"),
        endpoint=_pick(getattr(args, "endpoint", None), config, "backend", "endpoint", None),
        cache_path=_pick(getattr(args, "cache_path", None), config, "backend", "cache_path", None),
    )
    sim_config = SimilarityConfig(stage1=stage1, stage2=stage2, backend=backend)
    effective = {
        "similarity": {
            "stage1": [stage1.alpha, stage1.beta],
            "stage2": [stage2.alpha, stage2.beta],
        },
        "backend": {
            "kind": backend.kind,
            "endpoint": backend.endpoint,
            "cache_path": str(backend.cache_path) if backend.cache_path else None,
        },
    }
    return Similarity(sim_config), effective


def _wms_config_from(args, config: dict) -> WmsConfig:
    return WmsConfig(
        sim_floor=_pick(getattr(args, "wms_floor", None), config, "wms", "sim_floor", 1e-6),
        unit=_pick(getattr(args, "wms_unit", None), config, "wms", "unit", "usage-option"),
        clamp=_pick(getattr(args, "wms_clamp", None), config, "wms", "clamp", True),
    )


def _add_similarity_flags(parser):
    parser.add_argument("--backend", choices=["deterministic-test", "exact-match", "file-cache", "remote-service"])
    parser.add_argument("--endpoint", help="embedding service URL (remote-service / file-cache)")
    parser.add_argument("--cache-path", dest="cache_path", help="embedding cache file (file-cache)")
    parser.add_argument("--stage1-alpha", dest="stage1_alpha", type=float)
    parser.add_argument("--stage1-beta", dest="stage1_beta", type=float)
    parser.add_argument("--stage2-alpha", dest="stage2_alpha", type=float)
    parser.add_argument("--stage2-beta", dest="stage2_beta", type=float)


def _write_json(doc: dict, out_path: str | None):
    text = json.dumps(doc, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="usagekit", description=__doc__)
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--jobs", type=int, default=1, help="worker parallelism bound")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="score predictions against references")
    p_eval.add_argument("--predictions", required=True)
    p_eval.add_argument("--references", required=True)
    p_eval.add_argument("--metric", choices=["hams4", "wms", "both"], default=None)
    p_eval.add_argument("--wms-unit", dest="wms_unit", choices=["usage-option", "whitespace-token"])
    p_eval.add_argument("--wms-floor", dest="wms_floor", type=float)
    p_eval.add_argument("--out", help="write the JSON report here instead of stdout")
    _add_similarity_flags(p_eval)

    p_cmp = sub.add_parser("compare", help="paired permutation test between two systems")
    p_cmp.add_argument("--predictions-a", dest="predictions_a", required=True)
    p_cmp.add_argument("--predictions-b", dest="predictions_b", required=True)
    p_cmp.add_argument("--references", required=True)
    p_cmp.add_argument("--resamples", type=int)
    p_cmp.add_argument("--alpha", type=float)
    p_cmp.add_argument("--corrections", type=int)
    p_cmp.add_argument("--seed", type=int)
    p_cmp.add_argument("--out")
    _add_similarity_flags(p_cmp)

    p_agr = sub.add_parser("agreement", help="inter-annotator agreement over label files")
    p_agr.add_argument("labels", nargs="*", help="prediction-format JSONL files, one per annotator")
    p_agr.add_argument("--labels-dir", dest="labels_dir", help="directory of label files")
    p_agr.add_argument("--out")
    _add_similarity_flags(p_agr)

    p_ann = sub.add_parser("annotate", help="label reviews with a prompted chat model")
    p_ann.add_argument("--reviews", required=True, help="JSON Lines of review records")
    p_ann.add_argument("--style", choices=["plain", "cot"], default="plain")
    p_ann.add_argument("--shots", type=int, choices=[2, 6], default=2)
    p_ann.add_argument("--endpoint")
    p_ann.add_argument("--model", default=None)
    p_ann.add_argument("--temperature", type=float)
    p_ann.add_argument("--max-retries", dest="max_retries", type=int)
    p_ann.add_argument("--rps", dest="rps", type=float, help="request rate limit per second")
    p_ann.add_argument("--out", required=True)
    p_ann.add_argument("--dry-run", dest="dry_run", action="store_true")

    p_pre = sub.add_parser("preprocess", help="filter a raw review dump")
    p_pre.add_argument("--input", required=True, help="TSV or JSON Lines, optionally .gz")
    p_pre.add_argument("--out", required=True, help="filtered reviews (JSON Lines)")
    p_pre.add_argument("--stats-out", dest="stats_out", help="write filter stats JSON here")
    p_pre.add_argument("--min-words", dest="min_words", type=int)
    p_pre.add_argument("--max-words", dest="max_words", type=int)
    p_pre.add_argument("--bot-threshold", dest="bot_threshold", type=int)
    p_pre.add_argument("--exclude-category", dest="exclude_category", action="append",
                       help="repeatable; replaces the default exclusion list")

    p_split = sub.add_parser("split", help="draw the prompt/eval/train/validation splits")
    p_split.add_argument("--input", required=True)
    p_split.add_argument("--out-dir", dest="out_dir", required=True)
    p_split.add_argument("--seed", type=int, default=None)

    p_fea = sub.add_parser("feasibility", help="FLOPs break-even estimates")
    p_fea.add_argument("--table", action="store_true", help="print the five reference rows")
    p_fea.add_argument("--llm-flops-per-token", dest="llm_flops_per_token", type=float)
    p_fea.add_argument("--tokens-per-request", dest="tokens_per_request", type=float)
    p_fea.add_argument("--annotation-requests", dest="annotation_requests", type=int)
    p_fea.add_argument("--base-training-flops", dest="base_training_flops", type=float)
    p_fea.add_argument("--small-flops-per-request", dest="small_flops_per_request", type=float)
    p_fea.add_argument("--json", dest="as_json", action="store_true")

    return parser


def _cmd_evaluate(args, config: dict) -> int:
    sim, effective = _similarity_from(args, config)
    metric = _pick(args.metric, config, "metrics", "metric", "hams4")
    predictions = corpus_io.read_predictions(args.predictions)
    references = corpus_io.read_references(args.references)
    corpus = corpus_io.build_corpus(predictions, references)
    effective["metric"] = metric

    extras: dict = {"corpus_size": len(corpus)}
    report = score_corpus(corpus, sim, jobs=args.jobs)
    wms_score = None
    if metric in ("wms", "both"):
        wms_cfg = _wms_config_from(args, config)
        wms_score = corpus_wms(corpus, wms_cfg, sim)
        extras["wms"] = wms_score
        effective["wms"] = {"sim_floor": wms_cfg.sim_floor, "unit": wms_cfg.unit, "clamp": wms_cfg.clamp}

    print(corpus_io.format_report_table(report, wms_score))
    _write_json(corpus_io.report_document(report, effective, extras), args.out)
    return EXIT_OK


def _cmd_compare(args, config: dict) -> int:
    sim, effective = _similarity_from(args, config)
    sig = SignificanceConfig(
        resamples=_pick(args.resamples, config, "significance", "resamples", 10_000),
        alpha=_pick(args.alpha, config, "significance", "alpha", 0.05),
        corrections=_pick(args.corrections, config, "significance", "corrections", 7),
        seed=_pick(args.seed, config, "significance", "seed", 0),
    )
    references = corpus_io.read_references(args.references)
    corpus_a = corpus_io.build_corpus(corpus_io.read_predictions(args.predictions_a), references)
    corpus_b = corpus_io.build_corpus(corpus_io.read_predictions(args.predictions_b), references)
    result = permutation_test(corpus_a, corpus_b, sig, sim, jobs=args.jobs)
    effective["significance"] = {
        "resamples": sig.resamples,
        "alpha": sig.alpha,
        "corrections": sig.corrections,
        "alpha_corrected": sig.alpha_corrected,
        "seed": sig.seed,
    }
    doc = {
        "schema_version": corpus_io.SCHEMA_VERSION,
        "config": effective,
        "observed_diff": result.observed_diff,
        "p_value": result.p_value,
        "significant": result.significant,
    }
    verdict = "significant" if result.significant else "not significant"
    print(
        f"HAMS4 diff {result.observed_diff:+.4f}, p = {result.p_value:.5f} "
        f"({verdict} at alpha* = {sig.alpha_corrected:.5f})"
    )
    _write_json(doc, args.out)
    return EXIT_OK


def _cmd_agreement(args, config: dict) -> int:
    sim, effective = _similarity_from(args, config)
    paths = [Path(p) for p in args.labels]
    if args.labels_dir:
        paths.extend(sorted(Path(args.labels_dir).glob("*.jsonl")))
    if len(paths) < 2:
        raise ContractViolation("agreement needs at least two label files")
    label_sets = [(p.stem, corpus_io.read_predictions(p)) for p in paths]
    result = inter_annotator_agreement(label_sets, sim)
    print(f"mean pairwise score {result.mean:.4f} (std {result.std:.4f}, n={len(label_sets)} annotators)")
    doc = {
        "schema_version": corpus_io.SCHEMA_VERSION,
        "config": effective,
        "mean": result.mean,
        "std": result.std,
        "annotators": list(result.annotators),
        "pairwise": [[float(x) for x in row] for row in result.pairwise],
    }
    _write_json(doc, args.out)
    return EXIT_OK


def _cmd_annotate(args, config: dict) -> int:
    style = CHAIN_OF_THOUGHT if args.style == "cot" else PLAIN
    template = builtin_template(style, args.shots)
    cfg = EndpointConfig(
        url=_pick(args.endpoint, config, "annotation", "endpoint", os.environ.get("USAGEKIT_CHAT_ENDPOINT")),
        model_id=_pick(args.model, config, "annotation", "model", "gpt-4"),
        temperature=_pick(args.temperature, config, "annotation", "temperature", 0.2),
        max_retries=_pick(args.max_retries, config, "annotation", "max_retries", 5),
        parallelism=max(1, args.jobs),
        requests_per_second=_pick(args.rps, config, "annotation", "requests_per_second", None),
        dry_run=args.dry_run,
    )
    stats = FilterStats()
    reviews = read_reviews(args.reviews, stats)
    records = annotate_corpus(reviews, template, cfg, args.out)
    ok = sum(1 for r in records if r.parse_status == "ok")
    print(f"labeled {len(records)} reviews ({ok} parsed ok) -> {args.out}")
    return EXIT_OK


def _cmd_preprocess(args, config: dict) -> int:
    excluded = args.exclude_category
    kwargs = {}
    if excluded:
        kwargs["excluded_categories"] = frozenset(excluded)
    cfg = FilterConfig(
        min_words=_pick(args.min_words, config, "preprocess", "min_words", 5),
        max_words=_pick(args.max_words, config, "preprocess", "max_words", 400),
        bot_threshold=_pick(args.bot_threshold, config, "preprocess", "bot_threshold", 30),
        **kwargs,
    )
    stats = FilterStats()
    reviews = read_reviews(args.input, stats)
    kept, filter_stats = preprocess(reviews, cfg)
    filter_stats.malformed = stats.malformed
    write_reviews_jsonl(kept, args.out)
    doc = {"schema_version": corpus_io.SCHEMA_VERSION, "stats": filter_stats.to_dict()}
    if args.stats_out:
        _write_json(doc, args.stats_out)
    print(json.dumps(doc["stats"], indent=2))
    return EXIT_OK


def _cmd_split(args, config: dict) -> int:
    seed = _pick(args.seed, config, "split", "seed", 0)
    reviews = read_reviews(args.input)
    splits = split_reviews(reviews, seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, part in splits.items():
        write_reviews_jsonl(part, out_dir / f"{name}.jsonl")
    sizes = {name: len(part) for name, part in splits.items()}
    print(json.dumps({"seed": seed, "sizes": sizes}))
    return EXIT_OK


def _cmd_feasibility(args, config: dict) -> int:
    if args.table:
        rows = feasibility.reference_table()
    else:
        if args.llm_flops_per_token is None:
            raise ContractViolation("either --table or --llm-flops-per-token is required")
        model = feasibility.FeasibilityModel(
            llm_flops_per_token=args.llm_flops_per_token,
            tokens_per_request=args.tokens_per_request or feasibility.TOKENS_PER_REQUEST,
            n_annotation_requests=args.annotation_requests or feasibility.N_ANNOTATION_REQUESTS,
            base_training_flops=args.base_training_flops or feasibility.BASE_TRAINING_FLOPS,
            small_model_flops_per_request=args.small_flops_per_request
            or feasibility.SMALL_MODEL_FLOPS_PER_REQUEST,
        )
        rows = [feasibility.row_for(model)]
    if args.as_json:
        print(json.dumps([row.to_dict() for row in rows], indent=2))
    else:
        print(feasibility.format_table(rows))
    return EXIT_OK


_COMMANDS = {
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
    "agreement": _cmd_agreement,
    "annotate": _cmd_annotate,
    "preprocess": _cmd_preprocess,
    "split": _cmd_split,
    "feasibility": _cmd_feasibility,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _load_config(args.config)
        return _COMMANDS[args.command](args, config)
    except (ContractViolation, CacheFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except RemoteError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint():  # console-script shim
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
