import json
import os
import subprocess
import sys

import numpy as np
import pytest

SRC_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")

POSITIVE_WORDS = ["wonderful", "great", "lovely", "superb", "delightful", "charming"]
NEGATIVE_WORDS = ["terrible", "awful", "boring", "dreadful", "horrid", "clumsy"]


def run_cli(*args, cwd=None):
    env = dict(os.environ)
    env["PYTHONPATH"] = SRC_DIR + os.pathsep + env.get("PYTHONPATH", "")
    return subprocess.run(
        [sys.executable, "-m", "tskc", *map(str, args)],
        capture_output=True, text=True, env=env, cwd=cwd,
    )


def _review(rating, text):
    return f"<review>\n<rating>\n{rating}\n</rating>\n<review_text>\n{text}\n</review_text>\n</review>\n"


def _domain_files(rng, root, domain, per_polarity=8):
    domain_dir = root / domain
    domain_dir.mkdir()
    positive = []
    negative = []
    for _ in range(per_polarity):
        good = rng.choice(POSITIVE_WORDS, size=3).tolist()
        bad = rng.choice(NEGATIVE_WORDS, size=3).tolist()
        positive.append(_review("5.0", f"this {domain} item was {good[0]} and {good[1]} truly {good[2]}"))
        negative.append(_review("1.0", f"this {domain} item was {bad[0]} and {bad[1]} sadly {bad[2]}"))
    (domain_dir / "positive.review").write_text("".join(positive), encoding="utf-8")
    (domain_dir / "negative.review").write_text("".join(negative), encoding="utf-8")


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    dataset = root / "dataset"
    dataset.mkdir()
    rng = np.random.default_rng(229)
    for domain in ("books", "dvd", "kitchen"):
        _domain_files(rng, dataset, domain)
    corpus_path = root / "corpus.tsv"
    result = run_cli("ingest", dataset, "--out", corpus_path)
    assert result.returncode == 0, result.stderr
    return root, corpus_path


_RUN_FLAGS = ("--p-min", 1, "--p-max", 2, "--target", "books")


def test_ingest_reports_counts(workspace):
    root, corpus_path = workspace
    assert corpus_path.exists()
    rerun = run_cli("ingest", root / "dataset", "--out", root / "again.tsv")
    assert rerun.returncode == 0
    assert "books: 8 negative, 8 positive" in rerun.stdout
    assert "ingested 48 documents" in rerun.stdout
    assert (root / "again.tsv").read_bytes() == corpus_path.read_bytes()


def test_ingest_missing_directory_exits_2(workspace):
    root, _ = workspace
    result = run_cli("ingest", root / "missing", "--out", root / "x.tsv")
    assert result.returncode == 2
    assert "data error" in result.stderr


def test_usage_errors_exit_1(workspace):
    root, corpus_path = workspace
    result = run_cli("run", "--corpus", corpus_path, "--target", "books",
                     "--mode", "single_source", "--out", root / "nope")
    assert result.returncode == 1
    result = run_cli("kernel", "--corpus", corpus_path, "--target", "books",
                     "--kernel", "sorcery", "--out", root / "nope.tskm")
    assert result.returncode == 1


def test_kernel_cache_is_reproducible_and_usable(workspace):
    root, corpus_path = workspace
    cache_a = root / "a.tskm"
    cache_b = root / "b.tskm"
    for cache in (cache_a, cache_b):
        result = run_cli("kernel", "--corpus", corpus_path, *_RUN_FLAGS, "--out", cache)
        assert result.returncode == 0, result.stderr
    assert cache_a.read_bytes() == cache_b.read_bytes()
    assert json.loads((root / "a.tskm.manifest.json").read_text())["stage"] == "transductive"

    from_cache = root / "run_cache"
    direct = root / "run_direct"
    result = run_cli("run", "--corpus", corpus_path, *_RUN_FLAGS, "--cache", cache_a,
                     "--r", 4, "--out", from_cache)
    assert result.returncode == 0, result.stderr
    result = run_cli("run", "--corpus", corpus_path, *_RUN_FLAGS, "--r", 4, "--out", direct)
    assert result.returncode == 0, result.stderr
    assert (from_cache / "predictions.tsv").read_bytes() == (direct / "predictions.tsv").read_bytes()


def test_raw_stage_cache_resumes_pipeline(workspace):
    root, corpus_path = workspace
    raw_cache = root / "raw.tskm"
    result = run_cli("kernel", "--corpus", corpus_path, *_RUN_FLAGS,
                     "--stage", "raw", "--out", raw_cache)
    assert result.returncode == 0, result.stderr
    resumed = root / "run_resumed"
    result = run_cli("run", "--corpus", corpus_path, *_RUN_FLAGS, "--cache", raw_cache,
                     "--r", 4, "--out", resumed)
    assert result.returncode == 0, result.stderr
    direct = root / "run_direct"
    assert (resumed / "predictions.tsv").read_bytes() == (direct / "predictions.tsv").read_bytes()


def test_cache_mismatch_rejected(workspace):
    root, corpus_path = workspace
    result = run_cli("run", "--corpus", corpus_path, "--p-min", 1, "--p-max", 2,
                     "--target", "dvd", "--cache", root / "a.tskm", "--out", root / "bad")
    assert result.returncode == 2
    assert "does not match" in result.stderr


def test_no_tkc_equals_r_zero_byte_identical(workspace):
    root, corpus_path = workspace
    no_tkc = root / "run_no_tkc"
    r_zero = root / "run_r_zero"
    result = run_cli("run", "--corpus", corpus_path, *_RUN_FLAGS, "--no-tkc", "--out", no_tkc)
    assert result.returncode == 0, result.stderr
    result = run_cli("run", "--corpus", corpus_path, *_RUN_FLAGS, "--tkc", "--r", 0, "--out", r_zero)
    assert result.returncode == 0, result.stderr
    assert (no_tkc / "predictions.tsv").read_bytes() == (r_zero / "predictions.tsv").read_bytes()


def test_runs_are_deterministic_across_thread_counts(workspace):
    root, corpus_path = workspace
    runs = []
    for name, threads in (("det_a", 1), ("det_b", 1), ("det_c", 3)):
        out = root / name
        result = run_cli("run", "--corpus", corpus_path, *_RUN_FLAGS,
                         "--r", 4, "--threads", threads, "--out", out)
        assert result.returncode == 0, result.stderr
        runs.append(out)
    for other in runs[1:]:
        for filename in ("predictions.tsv", "trace.tsv", "eval.json"):
            assert (runs[0] / filename).read_bytes() == (other / filename).read_bytes()


def test_run_outputs_manifest_and_eval(workspace):
    root, corpus_path = workspace
    out = root / "run_direct"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["tool"] == "tskc"
    assert manifest["method"] == "presence+tkc"
    assert manifest["target"] == "books"
    assert sorted(manifest["sources"]) == ["dvd", "kitchen"]
    assert len(manifest["inputs"]["corpus_sha256"]) == 64
    evaluation = json.loads((out / "eval.json").read_text())
    assert evaluation["n"] == 16
    assert evaluation["accuracy"] >= 0.75


def test_report_aggregates_runs(workspace):
    root, corpus_path = workspace
    baseline = root / "rep_baseline"
    improved = root / "rep_tkc"
    result = run_cli("run", "--corpus", corpus_path, *_RUN_FLAGS, "--no-tkc",
                     "--name", "base", "--out", baseline)
    assert result.returncode == 0, result.stderr
    result = run_cli("run", "--corpus", corpus_path, *_RUN_FLAGS, "--r", 4,
                     "--name", "tkc", "--out", improved)
    assert result.returncode == 0, result.stderr
    table_out = root / "report.tsv"
    result = run_cli("report", baseline, improved, "--baseline", "base", "--out", table_out)
    assert result.returncode == 0, result.stderr
    lines = result.stdout.splitlines()
    assert lines[0].split() == ["method", "DK->B"]
    assert lines[1].startswith("base")
    assert lines[2].startswith("tkc")
    tsv_lines = table_out.read_text().splitlines()
    assert tsv_lines[0].startswith("method\tsource_domains")
    assert len(tsv_lines) == 3


def test_report_rejects_mismatched_test_sets(workspace):
    root, corpus_path = workspace
    other_target = root / "rep_other"
    result = run_cli("run", "--corpus", corpus_path, "--p-min", 1, "--p-max", 2,
                     "--target", "dvd", "--no-tkc", "--name", "base", "--out", other_target)
    assert result.returncode == 0, result.stderr
    # Same setting key requires identical test documents; forge a conflict by
    # rewriting the manifest target.
    manifest_path = other_target / "manifest.json"
    manifest = json.loads(manifest_path.read_text())
    manifest["target"] = "books"
    manifest["sources"] = ["dvd", "kitchen"]
    manifest_path.write_text(json.dumps(manifest))
    result = run_cli("report", root / "rep_baseline", other_target, "--baseline", "base")
    assert result.returncode == 2
    assert "mismatched test sets" in result.stderr


def test_report_requires_known_baseline(workspace):
    root, _ = workspace
    result = run_cli("report", root / "rep_baseline", "--baseline", "missing")
    assert result.returncode == 2
    assert "baseline" in result.stderr
