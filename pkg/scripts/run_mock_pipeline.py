#!/usr/bin/env python3
"""End-to-end offline pipeline demo using the deterministic mock gateway.

Builds a small ZAEBUC-shaped seed corpus (with rater triples and aligned
corrections), then runs: stats -> profile build -> generate (mock) ->
errors train -> inject (controlled + llm-mock) -> verify -> evaluate.
All artifacts land in the --out-dir working directory.

Usage: python scripts/run_mock_pipeline.py [--out-dir demo_run] [--seed 7]
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from cefraug.cli import main as cli
from cefraug.corpus import ASSESSABLE_LEVELS, CEFRLevel
from cefraug.error_model import apply_default_rule

SEED_VOCAB = [
    "المدرسة", "الطلاب", "يذهبون", "إلى", "كل", "يوم", "وهم", "سعداء",
    "غرفة", "جميلة", "كتبوا", "الدرس", "في", "الصباح", "هذا", "البيت",
    "أحمد", "قرأ", "كتاب", "المكتبة", "مدينة", "كبيرة", "حديقة", "واسعة",
    "لأن", "التعلم", "مهم", "جدا", "عندما", "يعود", "الجميع", "مساء",
]
ERROR_TAGS = ["OT", "OH", "OD", "OM", "OW", "OR"]


def _seed_essay(rng: random.Random, mean_words: int, mean_slen: float) -> list[str]:
    words: list[str] = []
    target = max(8, int(rng.gauss(mean_words, mean_words * 0.1)))
    while len(words) < target:
        slen = max(3, int(rng.gauss(mean_slen, mean_slen * 0.25)))
        words.extend(rng.choices(SEED_VOCAB, k=slen))
        words.append(".")
    return words


def build_seed_corpus(path: Path, seed: int) -> None:
    """ZAEBUC-shaped seed data: triples, skewed levels, aligned corrections.

    Per-level length statistics follow the mock generator's targets so
    profiles built here transfer to mock-generated text.
    """
    rng = random.Random(seed)
    counts = {"A2": 7, "B1": 55, "B2": 40, "C1": 11}
    stats = {"A2": (117, 10.5), "B1": (189, 14.6), "B2": (240, 17.3),
             "C1": (263, 19.1)}
    records = []
    i = 0
    for band, n in counts.items():
        level = CEFRLevel.parse(band)
        for _ in range(n):
            tokens = _seed_essay(rng, *stats[band])
            text = " ".join(t for t in tokens).replace(" .", ".")
            jitter = [max(1, min(6, level.numeric + rng.choice((-1, 0, 0, 1))))
                      for _ in range(3)]
            triple = [ASSESSABLE_LEVELS[j - 1].value for j in jitter]
            # the erroneous twin is the "as written" essay the raters saw
            bad = list(tokens)
            target = max(1, 8 - level.numeric)
            done = 0
            for j in rng.sample(range(len(bad)), len(bad)):
                if done == target:
                    break
                if bad[j] == ".":
                    continue
                out = apply_default_rule(rng.choice(ERROR_TAGS), bad[j])
                if out:
                    bad[j] = out
                    done += 1
            records.append({"id": f"seed{i:03d}", "text": text,
                            "level_gold": band, "rater_triple": triple,
                            "topic": "Development"})
            records.append({"id": f"seed{i:03d}-err",
                            "text": " ".join(bad).replace(" .", "."),
                            "level_gold": band, "rater_triple": triple,
                            "provenance": "injected",
                            "paired_id": f"seed{i:03d}", "topic": "Development"})
            i += 1
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    print(f"seed corpus: {i} originals + {i} as-written twins -> {path}")


def run(cmd: list[str]) -> None:
    print(f"\n$ cefraug {' '.join(cmd)}")
    code = cli(cmd)
    if code != 0:
        sys.exit(f"command failed with exit code {code}")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default="demo_run")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    seed_corpus = out / "seed_corpus.jsonl"
    build_seed_corpus(seed_corpus, args.seed)
    run(["stats", "--corpus", str(seed_corpus)])

    profiles = out / "level_profiles.json"
    run(["profile", "build", "--corpus", str(seed_corpus), "--out", str(profiles)])

    plan = out / "plan.json"
    plan.write_text(json.dumps({lvl.value: 20 for lvl in ASSESSABLE_LEVELS}),
                    encoding="utf-8")
    generated = out / "generated.jsonl"
    run(["generate", "--plan", str(plan), "--out", str(generated),
         "--profiles", str(profiles), "--mock", "--seed", str(args.seed)])
    run(["stats", "--corpus", str(generated)])
    run(["profile", "match", "--corpus", str(generated), "--profiles", str(profiles),
         "--report", str(out / "gate_report.json"), "--format", "table"])

    models = out / "models"
    run(["errors", "train", "--corpus", str(seed_corpus), "--out-dir", str(models)])

    injected = out / "injected.jsonl"
    run(["inject", "--corpus", str(generated),
         "--profiles", str(models / "error_profiles.json"),
         "--path", "controlled", "--models", str(models),
         "--seed", str(args.seed), "--out", str(injected),
         "--audit", str(out / "audit.jsonl")])
    run(["verify", "--original", str(generated), "--injected", str(injected),
         "--profiles", str(models / "error_profiles.json"),
         "--report", str(out / "fidelity.json")])

    injected_llm = out / "injected_llm.jsonl"
    run(["inject", "--corpus", str(generated),
         "--profiles", str(models / "error_profiles.json"),
         "--path", "llm", "--mock", "--seed", str(args.seed),
         "--out", str(injected_llm), "--audit", str(out / "audit_llm.jsonl")])

    run(["evaluate", "--corpus", str(seed_corpus),
         "--baseline-profiles", str(profiles), "--setting", "both",
         "--report", str(out / "evaluation.json"), "--format", "table"])

    fidelity = json.loads((out / "fidelity.json").read_text())
    print("\nfidelity by level:")
    for band, payload in fidelity.items():
        print(f"  {band}: cosine {payload['aggregate_similarity']:.3f}, "
              f"TV {payload['tv_distance']:.3f}")
    print(f"\nall artifacts in {out}/")


if __name__ == "__main__":
    main()
