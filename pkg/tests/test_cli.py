import hashlib
import json
import random

import pytest

from cefraug.cli import main
from cefraug.corpus import CEFRLevel, load_corpus
from cefraug.error_model import apply_default_rule

from conftest import ARABIC_LEXICON


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_jsonl(path, records):
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


@pytest.fixture
def zaebuc_like(tmp_path):
    """214 essays with the familiar skewed level distribution."""
    rng = random.Random(5)
    counts = {"A2": 7, "B1": 110, "B2": 80, "C1": 11, "UNASSESSABLE": 6}
    records = []
    i = 0
    for band, n in counts.items():
        for _ in range(n):
            text = " ".join(rng.choices(ARABIC_LEXICON, k=rng.randint(20, 60))) + "."
            records.append({"id": f"z{i:03d}", "text": text, "level_gold": band})
            i += 1
    path = tmp_path / "zaebuc_like.jsonl"
    _write_jsonl(path, records)
    return path


@pytest.fixture
def paired_corpus(tmp_path):
    rng = random.Random(11)
    tags = ["OT", "OH", "OD", "OM", "OW", "OR"]
    records = []
    for i in range(30):
        words = rng.choices(ARABIC_LEXICON, k=25)
        level = rng.choice(["B1", "B2"])
        records.append({"id": f"c{i:02d}", "text": " ".join(words) + ".",
                        "level_gold": level})
        bad = list(words)
        done = 0
        for j in rng.sample(range(len(bad)), len(bad)):
            if done == 3:
                break
            out = apply_default_rule(rng.choice(tags), bad[j])
            if out:
                bad[j] = out
                done += 1
        records.append({"id": f"c{i:02d}-err", "text": " ".join(bad) + ".",
                        "level_gold": level, "provenance": "injected",
                        "paired_id": f"c{i:02d}"})
    path = tmp_path / "paired.jsonl"
    _write_jsonl(path, records)
    return path


@pytest.fixture
def plan_file(tmp_path):
    path = tmp_path / "plan.json"
    path.write_text(json.dumps({"B1": 6, "B2": 4}), encoding="utf-8")
    return path


class TestStats:
    def test_table_reproduces_level_counts(self, zaebuc_like, capsys):
        assert main(["stats", "--corpus", str(zaebuc_like)]) == 0
        out = capsys.readouterr().out
        b1_row = next(line for line in out.splitlines() if line.startswith("B1"))
        assert "110" in b1_row and "51" in b1_row

    def test_json_format(self, zaebuc_like, capsys):
        assert main(["stats", "--corpus", str(zaebuc_like), "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["levels"]["B1"] == {"count": 110, "percent": 51}
        assert doc["total"] == 214

    def test_missing_corpus_single_line_error(self, tmp_path, capsys):
        assert main(["stats", "--corpus", str(tmp_path / "nope.jsonl")]) == 1
        err = capsys.readouterr().err
        assert err.startswith("error: ")
        assert err.count("\n") == 1


class TestUnknownCommand:
    def test_exit_one_with_usage(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0


class TestGenerate:
    def test_mock_run_twice_byte_identical(self, tmp_path, plan_file):
        outs = []
        for name in ("g1.jsonl", "g2.jsonl"):
            out = tmp_path / name
            code = main(["generate", "--plan", str(plan_file), "--out", str(out),
                         "--mock", "--seed", "7"])
            assert code == 0
            outs.append(out)
        assert _sha(outs[0]) == _sha(outs[1])

    def test_report_and_manifest_written(self, tmp_path, plan_file):
        out = tmp_path / "gen.jsonl"
        assert main(["generate", "--plan", str(plan_file), "--out", str(out),
                     "--mock", "--seed", "1"]) == 0
        report = json.loads((tmp_path / "gen.jsonl.report.json").read_text())
        assert report["generated"] == {"B1": 6, "B2": 4}
        manifest = json.loads((tmp_path / "gen.jsonl.manifest.json").read_text())
        assert manifest["command"] == "generate"
        assert manifest["seed"] == 7 or manifest["seed"] == 1
        assert str(out) in manifest["outputs"]

    def test_no_api_key_without_mock(self, tmp_path, plan_file, monkeypatch, capsys):
        monkeypatch.delenv("LLM_API_KEY", raising=False)
        out = tmp_path / "gen.jsonl"
        assert main(["generate", "--plan", str(plan_file), "--out", str(out),
                     "--seed", "1"]) == 1
        assert "LLM_API_KEY" in capsys.readouterr().err
        assert not out.exists()


class TestProfileCommands:
    def test_build_then_match(self, tmp_path, zaebuc_like, capsys):
        profiles = tmp_path / "profiles.json"
        assert main(["profile", "build", "--corpus", str(zaebuc_like),
                     "--out", str(profiles)]) == 0
        report = tmp_path / "match.json"
        assert main(["profile", "match", "--corpus", str(zaebuc_like),
                     "--profiles", str(profiles), "--report", str(report),
                     "--format", "table"]) == 0
        doc = json.loads(report.read_text())
        assert "overall_agreement" in doc
        assert "overall" in capsys.readouterr().out


class TestErrorsTrainAndInject:
    def test_full_controlled_cycle(self, tmp_path, paired_corpus, zaebuc_like):
        models = tmp_path / "models"
        assert main(["errors", "train", "--corpus", str(paired_corpus),
                     "--out-dir", str(models)]) == 0
        for name in ("type_model.json", "realization_model.json",
                     "error_profiles.json"):
            assert (models / name).exists()

        out = tmp_path / "injected.jsonl"
        audit = tmp_path / "audit.jsonl"
        assert main(["inject", "--corpus", str(zaebuc_like),
                     "--profiles", str(models / "error_profiles.json"),
                     "--path", "controlled", "--models", str(models),
                     "--seed", "3", "--out", str(out), "--audit", str(audit)]) == 0
        combined = load_corpus(out)
        injected = [e for e in combined if e.provenance == "injected"]
        assert injected
        for record_line in audit.read_text(encoding="utf-8").splitlines():
            record = json.loads(record_line)
            assert "spans" in record
        assert len(audit.read_text().splitlines()) == len(injected)

        report = tmp_path / "verify.json"
        assert main(["verify", "--original", str(zaebuc_like),
                     "--injected", str(out),
                     "--profiles", str(models / "error_profiles.json"),
                     "--report", str(report)]) == 0
        doc = json.loads(report.read_text())
        assert any("aggregate_similarity" in v for v in doc.values())

    def test_inject_deterministic(self, tmp_path, paired_corpus, zaebuc_like):
        models = tmp_path / "models"
        main(["errors", "train", "--corpus", str(paired_corpus),
              "--out-dir", str(models)])
        hashes = []
        for name in ("i1.jsonl", "i2.jsonl"):
            out = tmp_path / name
            assert main(["inject", "--corpus", str(zaebuc_like),
                         "--profiles", str(models / "error_profiles.json"),
                         "--path", "controlled", "--models", str(models),
                         "--seed", "3", "--out", str(out),
                         "--audit", str(tmp_path / (name + ".audit"))]) == 0
            hashes.append(_sha(out))
        assert hashes[0] == hashes[1]

    def test_inject_llm_mock(self, tmp_path, paired_corpus, zaebuc_like):
        models = tmp_path / "models"
        main(["errors", "train", "--corpus", str(paired_corpus),
              "--out-dir", str(models)])
        out = tmp_path / "llm.jsonl"
        assert main(["inject", "--corpus", str(zaebuc_like),
                     "--profiles", str(models / "error_profiles.json"),
                     "--path", "llm", "--mock", "--seed", "3",
                     "--out", str(out), "--audit", str(tmp_path / "a.jsonl")]) == 0
        assert any(e.provenance == "injected" for e in load_corpus(out))

    def test_failed_inject_leaves_no_partial_outputs(self, tmp_path, zaebuc_like,
                                                     paired_corpus, capsys):
        models = tmp_path / "models"
        main(["errors", "train", "--corpus", str(paired_corpus),
              "--out-dir", str(models)])
        out = tmp_path / "never.jsonl"
        code = main(["inject", "--corpus", str(zaebuc_like),
                     "--profiles", str(models / "error_profiles.json"),
                     "--path", "controlled", "--models", str(tmp_path / "missing"),
                     "--seed", "3", "--out", str(out),
                     "--audit", str(tmp_path / "never-audit.jsonl")])
        assert code == 1
        assert not out.exists()
        assert not (tmp_path / "never-audit.jsonl").exists()
        assert not list(tmp_path.glob(".*.tmp-*"))


class TestEvaluateCommand:
    def _triple_corpus(self, tmp_path):
        rng = random.Random(2)
        bands = ["A2", "B1", "B2", "C1"]
        records = []
        for i in range(24):
            records.append({"id": f"t{i:02d}", "text": "نص قصير للتجربة هنا.",
                            "rater_triple": sorted(rng.choices(bands, k=3))})
        path = tmp_path / "triples.jsonl"
        _write_jsonl(path, records)
        preds = tmp_path / "preds.jsonl"
        with preds.open("w") as fh:
            for rec in records:
                fh.write(json.dumps({"id": rec["id"], "band": rng.choice(bands)}) + "\n")
        return path, preds

    def test_both_settings(self, tmp_path, capsys):
        corpus, preds = self._triple_corpus(tmp_path)
        report = tmp_path / "eval.json"
        assert main(["evaluate", "--corpus", str(corpus), "--predictions",
                     str(preds), "--setting", "both", "--report", str(report),
                     "--format", "table"]) == 0
        doc = json.loads(report.read_text())
        assert set(doc) >= {"average_reference", "multi_reference"}
        assert doc["multi_reference"]["accuracy"] >= doc["average_reference"]["accuracy"]
        out = capsys.readouterr().out
        assert "QWK" in out

    def test_requires_some_scorer(self, tmp_path, capsys):
        corpus, _ = self._triple_corpus(tmp_path)
        assert main(["evaluate", "--corpus", str(corpus),
                     "--report", str(tmp_path / "r.json")]) == 1

    def test_baseline_profiles_path(self, tmp_path, zaebuc_like):
        profiles = tmp_path / "profiles.json"
        main(["profile", "build", "--corpus", str(zaebuc_like), "--out", str(profiles)])
        report = tmp_path / "eval.json"
        assert main(["evaluate", "--corpus", str(zaebuc_like),
                     "--baseline-profiles", str(profiles),
                     "--setting", "average", "--report", str(report)]) == 0
        doc = json.loads(report.read_text())
        assert "average_reference" in doc
