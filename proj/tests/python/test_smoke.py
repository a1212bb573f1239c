import json
import os
import subprocess

import pytest

import iccc

DATA = os.environ.get(
    "ICCC_TEST_DATA",
    os.path.join(os.path.dirname(__file__), "..", "data"))
CONLLU = os.path.join(DATA, "minicorpus.conllu")
RECORDS = os.path.join(DATA, "minicorpus.jsonl")
ICCC_BIN = os.environ.get("ICCC_BIN")


def test_quota():
    assert iccc.iccc_quota(0.3, 64) == 19
    assert iccc.iccc_quota(0.01, 64) == 1
    assert iccc.iccc_quota(0.0, 64) == 0


def test_ingest_coco():
    records = iccc.ingest(os.path.join(DATA, "coco_sample.json"))
    assert len(records) == 25
    assert {"dataset", "image_id", "caption_id", "text"} <= set(records[0])


def test_extract_matches_golden():
    with open(os.path.join(DATA, "golden.conllu")) as f:
        text = f.read()
    with open(os.path.join(DATA, "golden_units.json")) as f:
        golden = json.load(f)
    got = {a["caption_id"]: a["units"] for a in iccc.extract(text)}
    assert set(got) == set(golden)
    for cid, units in golden.items():
        assert got[cid] == units, cid


def test_extract_subset_of_types():
    with open(os.path.join(DATA, "golden.conllu")) as f:
        first = iccc.extract(f.read(), ["noun"])[0]["units"]
    assert first["noun"]
    assert first["ent"] == [] and first["verb"] == []


def test_construct_and_recount(tmp_path):
    out = tmp_path / "train.jsonl"
    stats = iccc.construct(CONLLU, RECORDS, out, p_c=0.3, p_s=0.15,
                           batch_size=64, seed=3, preset="instructblip")
    recount = iccc.compute_stats(out)
    for key in ("records", "by_kind", "by_op", "by_concept_type",
                "batch_sizes", "iccc_per_batch"):
        assert stats[key] == recount[key], key
    assert recount["full_batch_iccc_fraction_min"] == pytest.approx(19 / 64)
    assert recount["full_batch_iccc_fraction_max"] == pytest.approx(19 / 64)
    assert not (tmp_path / "train.jsonl.partial").exists()

    again = tmp_path / "again.jsonl"
    iccc.construct(CONLLU, RECORDS, again, p_c=0.3, p_s=0.15, batch_size=64,
                   seed=3, preset="instructblip", workers=4)
    assert out.read_bytes() == again.read_bytes()


def test_build_base(tmp_path):
    rows = iccc.build_base(CONLLU, tmp_path / "base.tsv", records=RECORDS)
    kinds = {r[0] for r in rows}
    assert kinds == {"entity", "predicate", "attribute"}
    assert all(count >= 5 for _, _, count in rows)


def test_errors(tmp_path):
    with pytest.raises(iccc.ConfigError):
        iccc.construct(CONLLU, RECORDS, tmp_path / "x.jsonl", p_c=1.5)
    with pytest.raises(iccc.ConfigError):
        iccc.construct(CONLLU, RECORDS, tmp_path / "x.jsonl", types="color")
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"kind": "original"}\n')
    with pytest.raises(iccc.SchemaError):
        iccc.compute_stats(bad)
    assert issubclass(iccc.SchemaError, iccc.Error)


needs_cli = pytest.mark.skipif(not ICCC_BIN, reason="ICCC_BIN not set")


def run_cli(*args, cwd=None, env=None):
    return subprocess.run([ICCC_BIN, *args], cwd=cwd, env=env,
                          capture_output=True, text=True)


@needs_cli
def test_cli_pipeline(tmp_path):
    env = dict(os.environ, ICCC_WORKDIR=str(tmp_path))
    r = run_cli("ingest", "--jsonl", RECORDS, env=env)
    assert r.returncode == 0, r.stderr
    records = tmp_path / "records.jsonl"
    assert sum(1 for _ in records.open()) == 1000

    r = run_cli("extract", "--conllu", CONLLU, "--records", str(records),
                "--types", "noun,ent", env=env)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "annotations.jsonl").exists()

    r = run_cli("build-base", "--conllu", CONLLU, "--min-count", "3",
                "--top-drop", "0.01", env=env)
    assert r.returncode == 0, r.stderr
    base = tmp_path / "concepts.tsv"
    assert base.exists()

    r = run_cli("construct", "--conllu", CONLLU, "--records", str(records),
                "--base", str(base), "--p-c", "0.3", "--p-s", "0.2",
                "--batch-size", "32", "--seed", "11", "--types", "ent,attr",
                "--preset", "blip2", "--samples-per-caption", "2", env=env)
    assert r.returncode == 0, r.stderr
    stats = json.loads(r.stdout)
    assert set(stats["by_concept_type"]) <= {"ent", "attr"}
    train = tmp_path / "iccc_train.jsonl"

    r = run_cli("stats", str(train))
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["records"] == stats["records"]

    r = run_cli("validate", "--records", str(records), "--conllu", CONLLU,
                "--training", str(train))
    assert r.returncode == 0, r.stdout + r.stderr


@needs_cli
def test_cli_random_baseline(tmp_path):
    out = tmp_path / "random.jsonl"
    r = run_cli("construct", "--conllu", CONLLU, "--records", RECORDS,
                "--random-baseline", "--out", str(out))
    assert r.returncode == 0, r.stderr
    assert set(json.loads(r.stdout)["by_concept_type"]) == {"none"}


@needs_cli
def test_cli_rejects(tmp_path):
    r = run_cli("validate", "--conllu", os.path.join(DATA, "broken.conllu"))
    assert r.returncode == 1
    assert "FAIL" in r.stdout
    r = run_cli("construct", "--conllu", CONLLU, "--p-s", "2",
                "--out", str(tmp_path / "x.jsonl"))
    assert r.returncode == 2


def test_per_dataset_base(tmp_path):
    stats = iccc.construct(CONLLU, RECORDS, tmp_path / "pd.jsonl",
                           per_dataset_base=True, min_count=2, top_drop=0.0)
    assert stats["by_kind"]["iccc"] > 0
