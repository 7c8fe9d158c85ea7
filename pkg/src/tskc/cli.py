"""Command-line interface: ingest reviews, cache kernel matrices, run
experiments, and aggregate reports.

Every kernel and run command writes a manifest recording the configuration
and input checksums; reruns from the same manifest inputs produce byte
identical outputs at any thread count. Exit codes: 0 success, 1 usage
error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from tskc import __version__, corpus, evaluation, matrix
from tskc.errors import DataError, NumericalError
from tskc.ngrams import FAMILIES, KernelConfig
from tskc.tkc import TkcConfig, run_single_round, run_tkc

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

ENV_DATASET_DIR = "TSKC_DATASET_DIR"

_PREDICTIONS_FILE = "predictions.tsv"
_TRACE_FILE = "trace.tsv"
_EVAL_FILE = "eval.json"
_MANIFEST_FILE = "manifest.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_text(path: str, content: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(content)


def _write_json(path: str, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _experiment_spec(args, documents) -> corpus.ExperimentSpec:
    domains = sorted({doc.domain for doc in documents})
    if args.mode == "multi_source":
        sources = tuple(args.source) if args.source else tuple(
            domain for domain in domains if domain != args.target
        )
    else:
        if not args.source or len(args.source) != 1:
            raise ValueError("single_source mode requires exactly one --source")
        sources = tuple(args.source)
    kernel_cfg = KernelConfig(
        family=args.kernel,
        p_min=args.p_min,
        p_max=args.p_max,
        lowercase=not args.no_lowercase,
    )
    return corpus.ExperimentSpec(
        mode=args.mode, sources=sources, target=args.target, kernel=kernel_cfg
    )


def _base_manifest(command: str, args, spec: corpus.ExperimentSpec) -> dict:
    return {
        "tool": "tskc",
        "tool_version": __version__,
        "command": command,
        "mode": spec.mode,
        "sources": list(spec.sources),
        "target": spec.target,
        "kernel": {
            "family": spec.kernel.family,
            "p_min": spec.kernel.p_min,
            "p_max": spec.kernel.p_max,
            "lowercase": spec.kernel.lowercase,
        },
        "inputs": {
            "corpus": os.path.abspath(args.corpus),
            "corpus_sha256": _sha256(args.corpus),
        },
        "threads": args.threads,
    }


def cmd_ingest(args) -> int:
    input_dir = args.input_dir or os.environ.get(ENV_DATASET_DIR)
    if not input_dir:
        raise ValueError(f"no input directory given and {ENV_DATASET_DIR} is not set")
    report = corpus.ingest_mdsd(input_dir)
    if not report.documents:
        raise DataError(f"no documents ingested from {input_dir}")
    corpus.save_canonical(report.documents, args.out)
    for domain, counts in sorted(report.domain_label_counts().items()):
        print(f"{domain}: {counts['negative']} negative, {counts['positive']} positive")
    print(
        f"ingested {len(report.documents)} documents"
        f" ({report.excluded_neutral} neutral excluded,"
        f" {len(report.errors)} record errors,"
        f" {report.replacement_count} invalid byte sequences replaced)"
    )
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    for error in report.errors:
        print(f"record error: {error}", file=sys.stderr)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_kernel(args) -> int:
    documents = corpus.load_canonical(args.corpus)
    spec = _experiment_spec(args, documents)
    train_docs, test_docs = corpus.make_split(documents, spec)
    km = matrix.transductive_pipeline(
        [doc.text for doc in train_docs],
        [doc.text for doc in test_docs],
        spec.kernel,
        threads=args.threads,
        stage=args.stage,
    )
    try:
        matrix.save_matrix(km, args.out)
    except BaseException:
        if os.path.exists(args.out):
            os.remove(args.out)
        raise
    manifest = _base_manifest("kernel", args, spec)
    manifest["stage"] = args.stage
    manifest["outputs"] = {"cache": os.path.abspath(args.out)}
    _write_json(args.out + ".manifest.json", manifest)
    print(f"wrote {args.out} ({km.m} train + {km.n} test samples, stage {km.stage})")
    return EXIT_OK


def _verify_cache_manifest(args, spec: corpus.ExperimentSpec, corpus_sha: str) -> None:
    manifest_path = args.cache + ".manifest.json"
    if not os.path.isfile(manifest_path):
        raise DataError(f"cache manifest not found: {manifest_path}")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        cached = json.load(fh)
    expected = {
        "mode": spec.mode,
        "sources": list(spec.sources),
        "target": spec.target,
        "kernel": {
            "family": spec.kernel.family,
            "p_min": spec.kernel.p_min,
            "p_max": spec.kernel.p_max,
            "lowercase": spec.kernel.lowercase,
        },
        "corpus_sha256": corpus_sha,
    }
    actual = {
        "mode": cached.get("mode"),
        "sources": cached.get("sources"),
        "target": cached.get("target"),
        "kernel": cached.get("kernel"),
        "corpus_sha256": cached.get("inputs", {}).get("corpus_sha256"),
    }
    mismatched = [key for key in expected if expected[key] != actual[key]]
    if mismatched:
        raise DataError(
            f"cache {args.cache} does not match the requested configuration"
            f" (mismatched: {', '.join(mismatched)})"
        )


def _finish_pipeline(km: matrix.KernelMatrix, threads: int) -> matrix.KernelMatrix:
    if km.stage == "raw":
        km = matrix.normalize(km)
    if km.stage == "normalized":
        km = matrix.rbf_transform(km)
    if km.stage == "rbf":
        km = matrix.transductive_product(km, threads=threads)
    return km


def cmd_run(args) -> int:
    documents = corpus.load_canonical(args.corpus)
    spec = _experiment_spec(args, documents)
    train_docs, test_docs = corpus.make_split(documents, spec)
    corpus_sha = _sha256(args.corpus)

    if args.cache:
        _verify_cache_manifest(args, spec, corpus_sha)
        km = matrix.load_matrix(args.cache)
        if (km.m, km.n) != (len(train_docs), len(test_docs)):
            raise DataError(
                f"cache holds {km.m}+{km.n} samples, split has"
                f" {len(train_docs)}+{len(test_docs)}"
            )
        km = _finish_pipeline(km, args.threads)
    else:
        km = matrix.transductive_pipeline(
            [doc.text for doc in train_docs],
            [doc.text for doc in test_docs],
            spec.kernel,
            threads=args.threads,
        )

    labels = np.asarray([doc.label for doc in train_docs], dtype=np.int64)
    cfg = TkcConfig(r=args.r, lam=args.lam, c=corpus.NUM_CLASSES)
    trace = run_tkc(km, labels, cfg) if args.tkc else run_single_round(km, labels, cfg)

    method = args.name or (spec.kernel.family + ("+tkc" if args.tkc else ""))
    os.makedirs(args.out, exist_ok=True)

    pred_lines = ["id\tpredicted\tgold"]
    for doc, label_id in zip(test_docs, trace.final_labels):
        gold = "unlabeled" if doc.label is None else corpus.LABEL_NAMES[doc.label]
        pred_lines.append(f"{doc.id}\t{corpus.LABEL_NAMES[int(label_id)]}\t{gold}")
    _write_text(os.path.join(args.out, _PREDICTIONS_FILE), "\n".join(pred_lines) + "\n")
    _write_text(os.path.join(args.out, _TRACE_FILE), "\n".join(trace.report_lines()) + "\n")

    manifest = _base_manifest("run", args, spec)
    manifest["method"] = method
    manifest["tkc"] = {"enabled": bool(args.tkc), "r": args.r, "lam": args.lam}
    if args.cache:
        manifest["inputs"]["cache"] = os.path.abspath(args.cache)
    manifest["outputs"] = {
        "predictions": _PREDICTIONS_FILE,
        "trace": _TRACE_FILE,
    }

    gold_mask = [doc.label is not None for doc in test_docs]
    if any(gold_mask):
        pred = np.asarray(
            [int(p) for p, keep in zip(trace.final_labels, gold_mask) if keep], dtype=np.int64
        )
        gold = np.asarray(
            [doc.label for doc, keep in zip(test_docs, gold_mask) if keep], dtype=np.int64
        )
        result = evaluation.accuracy(pred, gold)
        payload = {
            "accuracy": result.accuracy,
            "n": result.n,
            "correct": result.correct,
            "per_class": {
                str(cls): {"correct": hit, "total": total}
                for cls, (hit, total) in result.per_class.items()
            },
        }
        _write_json(os.path.join(args.out, _EVAL_FILE), payload)
        manifest["outputs"]["eval"] = _EVAL_FILE
        print(f"{method}: accuracy {result.accuracy * 100.0:.1f}% over {result.n} test documents")
    else:
        print(f"{method}: no gold labels on the test set, skipped evaluation")

    _write_json(os.path.join(args.out, _MANIFEST_FILE), manifest)
    if trace.promoted_class_counts:
        summary = ", ".join(
            f"{corpus.LABEL_NAMES.get(cls, cls)}={count}"
            for cls, count in trace.promoted_class_counts.items()
        )
        print(f"promoted {int(trace.promoted.size)} test samples ({summary})")
    print(f"wrote {args.out}")
    return EXIT_OK


def _load_run(run_dir: str) -> dict:
    manifest_path = os.path.join(run_dir, _MANIFEST_FILE)
    if not os.path.isfile(manifest_path):
        raise DataError(f"no manifest in run directory {run_dir}")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    predictions_path = os.path.join(run_dir, _PREDICTIONS_FILE)
    if not os.path.isfile(predictions_path):
        raise DataError(f"no predictions file in run directory {run_dir}")
    ids: list[str] = []
    pred: list[int] = []
    gold: list[int] = []
    with open(predictions_path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    for line_number, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataError(f"{predictions_path}: line {line_number}: expected 3 fields")
        doc_id, pred_name, gold_name = fields
        if pred_name not in corpus.LABEL_IDS:
            raise DataError(
                f"{predictions_path}: line {line_number}: unknown predicted label {pred_name!r}"
            )
        ids.append(doc_id)
        pred.append(corpus.LABEL_IDS[pred_name])
        gold.append(corpus.LABEL_IDS.get(gold_name, 0))
    return {
        "dir": run_dir,
        "method": manifest.get("method", "unknown"),
        "sources": tuple(manifest.get("sources", [])),
        "target": manifest.get("target", ""),
        "ids": ids,
        "pred": np.asarray(pred, dtype=np.int64),
        "gold": np.asarray(gold, dtype=np.int64),
    }


def cmd_report(args) -> int:
    runs = [_load_run(run_dir) for run_dir in args.run_dirs]
    groups: dict[tuple, list[dict]] = {}
    for run in runs:
        groups.setdefault((run["sources"], run["target"]), []).append(run)

    entries: list[evaluation.ReportEntry] = []
    for (sources, target), group in groups.items():
        reference = group[0]
        for run in group[1:]:
            if run["ids"] != reference["ids"] or not np.array_equal(
                run["gold"], reference["gold"]
            ):
                raise DataError(
                    f"mismatched test sets between {reference['dir']} and {run['dir']}"
                )
        labeled = reference["gold"] != 0
        if not labeled.any():
            raise DataError(f"no gold labels in runs for setting {sources}->{target}")
        gold = reference["gold"][labeled]
        baselines = [run for run in group if run["method"] == args.baseline]
        if not baselines:
            raise DataError(
                f"baseline method {args.baseline!r} not found for setting {sources}->{target}"
            )
        baseline = baselines[0]
        baseline_pred = baseline["pred"][labeled]
        baseline_acc = evaluation.accuracy(baseline_pred, gold).accuracy
        for run in group:
            pred = run["pred"][labeled]
            acc = evaluation.accuracy(pred, gold).accuracy
            if run is baseline:
                entries.append(
                    evaluation.ReportEntry(
                        method=run["method"], sources=sources, target=target,
                        accuracy_percent=acc * 100.0,
                    )
                )
                continue
            test = evaluation.mcnemar(pred, baseline_pred, gold)
            entries.append(
                evaluation.ReportEntry(
                    method=run["method"], sources=sources, target=target,
                    accuracy_percent=acc * 100.0,
                    significant=bool(test.significant_at_0_01 and acc > baseline_acc),
                    mcnemar_statistic=test.statistic,
                    mcnemar_method=test.method,
                )
            )

    print(evaluation.format_report(entries), end="")
    if args.out:
        _write_text(args.out, evaluation.format_report_tsv(entries))
        print(f"wrote {args.out}")
    return EXIT_OK


def _add_split_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="canonical corpus TSV")
    parser.add_argument(
        "--mode", choices=("multi_source", "single_source"), default="multi_source"
    )
    parser.add_argument(
        "--source", action="append",
        help="source domain (repeatable; multi_source defaults to all non-target domains)",
    )
    parser.add_argument("--target", required=True, help="target (test) domain")
    parser.add_argument("--kernel", choices=FAMILIES, default="presence")
    parser.add_argument("--p-min", type=int, default=5)
    parser.add_argument("--p-max", type=int, default=8)
    parser.add_argument("--no-lowercase", action="store_true")
    parser.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tskc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tskc {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    ingest = commands.add_parser("ingest", help="convert raw review files to the canonical TSV")
    ingest.add_argument(
        "input_dir", nargs="?",
        help=f"dataset directory (default: ${ENV_DATASET_DIR})",
    )
    ingest.add_argument("--out", required=True, help="output corpus TSV path")
    ingest.set_defaults(func=cmd_ingest)

    kernel = commands.add_parser("kernel", help="compute and cache a kernel matrix")
    _add_split_flags(kernel)
    kernel.add_argument("--stage", choices=matrix.STAGES, default="transductive")
    kernel.add_argument("--out", required=True, help="output cache path")
    kernel.set_defaults(func=cmd_kernel)

    run = commands.add_parser("run", help="run an experiment and write predictions")
    _add_split_flags(run)
    run.add_argument("--cache", help="kernel cache file to reuse")
    run.add_argument("--r", type=int, default=1000, help="test samples promoted between rounds")
    run.add_argument("--lambda", dest="lam", type=float, default=1e-5,
                     help="ridge regularization")
    run.add_argument("--tkc", action=argparse.BooleanOptionalAction, default=True,
                     help="run the two-round classifier (--no-tkc for single round)")
    run.add_argument("--name", help="method name recorded in the manifest")
    run.add_argument("--out", required=True, help="output directory")
    run.set_defaults(func=cmd_run)

    report = commands.add_parser("report", help="aggregate run outputs into a table")
    report.add_argument("run_dirs", nargs="+", help="run output directories")
    report.add_argument("--baseline", required=True, help="baseline method name")
    report.add_argument("--out", help="optional TSV output path")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, TypeError) as err:
        print(f"tskc: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as err:
        print(f"tskc: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as err:
        print(f"tskc: numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
