"""Single entry point for the pipeline.

Subcommands: profile build, profile match, generate, errors train, inject,
verify, evaluate, stats. Declared outputs are staged to temp files and
renamed only when the whole command succeeds, and every run that produces
artifacts also writes a `<first output>.manifest.json` describing inputs,
outputs, seed and versions.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Optional

from . import __version__
from .corpus import CEFRLevel, Corpus, load_corpus, save_corpus
from .errors import ToolkitError
from . import error_model as em
from . import evaluation as ev
from .generation import (generate_corpus, load_cefr_guidelines,
                         load_prompt_bank, quality_gate)
from .injection import (InjectionPlan, inject_controlled, inject_via_llm,
                        verify_injection)
from .llm_gateway import GatewayConfig, HttpGateway, MockGateway
from .profiling import build_all_profiles, load_profiles, save_profiles


class _Outputs:
    """Stage writes, rename on success, clean up on failure."""

    def __init__(self):
        self._staged: list[tuple[Path, Path]] = []

    def stage(self, final: str | Path) -> Path:
        final = Path(final)
        tmp = final.with_name(f".{final.name}.tmp-{os.getpid()}")
        self._staged.append((tmp, final))
        return tmp

    def commit(self) -> list[Path]:
        finals = []
        for tmp, final in self._staged:
            os.replace(tmp, final)
            finals.append(final)
        self._staged.clear()
        return finals

    def abort(self) -> None:
        for tmp, _ in self._staged:
            tmp.unlink(missing_ok=True)
        self._staged.clear()


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(command: str, args: argparse.Namespace,
                    inputs: list[str], outputs: list[Path],
                    started: float) -> None:
    if not outputs:
        return
    manifest = {
        "command": command,
        "arguments": {k: (str(v) if isinstance(v, Path) else v)
                      for k, v in vars(args).items() if k != "func"},
        "inputs": {str(p): _sha256(Path(p)) for p in inputs if Path(p).is_file()},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "wall_time_s": round(time.monotonic() - started, 3),
        "finished_at": datetime.now(timezone.utc).isoformat(),
    }
    path = Path(str(outputs[0]) + ".manifest.json")
    tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}")
    tmp.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    os.replace(tmp, path)


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ToolkitError("config file must hold a flat JSON object")
    return doc


def _make_gateway(args: argparse.Namespace, config: dict):
    if getattr(args, "mock", False):
        return MockGateway(seed=getattr(args, "seed", 0) or 0)
    return HttpGateway(GatewayConfig.from_dict(config))


def _load_plan(path: str) -> dict[CEFRLevel, int]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return {CEFRLevel.parse(band): int(quota) for band, quota in doc.items()}


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True),
                    encoding="utf-8")


# --- command handlers ----------------------------------------------------

def _cmd_profile_build(args, outputs: _Outputs) -> tuple[list[str], list[Path]]:
    corpus = load_corpus(args.corpus)
    profiles = build_all_profiles(corpus)
    if not profiles:
        raise ToolkitError("corpus has no labeled essays; nothing to profile")
    save_profiles(profiles, outputs.stage(args.out))
    return [args.corpus], [Path(args.out)]


def _cmd_profile_match(args, outputs: _Outputs) -> tuple[list[str], list[Path]]:
    corpus = load_corpus(args.corpus)
    profiles = load_profiles(args.profiles)
    report = quality_gate(corpus, profiles)
    _write_json(report.to_dict(), outputs.stage(args.report))
    if args.format == "table":
        print(f"{'level':<8}{'agreement':>10}")
        for level, agr in sorted(report.per_level_agreement.items(),
                                 key=lambda kv: kv[0].numeric):
            print(f"{level.value:<8}{agr:>10.3f}")
        print(f"{'overall':<8}{report.overall_agreement:>10.3f}")
    return [args.corpus, args.profiles], [Path(args.report)]


def _cmd_generate(args, outputs: _Outputs) -> tuple[list[str], list[Path]]:
    config = _load_config(args.config)
    bank = load_prompt_bank(args.bank)
    plan = _load_plan(args.plan)
    profiles = load_profiles(args.profiles) if args.profiles else None
    guidelines = load_cefr_guidelines(args.guidelines) if args.guidelines else None
    client = _make_gateway(args, config)
    corpus, report = generate_corpus(bank, plan, client, seed=args.seed,
                                     profiles=profiles, guidelines=guidelines,
                                     workers=args.workers)
    save_corpus(corpus, outputs.stage(args.out))
    _write_json(report.to_dict(), outputs.stage(str(args.out) + ".report.json"))
    inputs = [p for p in (args.bank, args.plan, args.profiles, args.guidelines,
                          args.config) if p]
    return inputs, [Path(args.out), Path(str(args.out) + ".report.json")]


def _cmd_errors_train(args, outputs: _Outputs) -> tuple[list[str], list[Path]]:
    corpus = load_corpus(args.corpus)
    analysis = em.analyze_pairs(corpus)
    if not analysis.transformations:
        raise ToolkitError("corpus contains no aligned error pairs to train on")
    type_model = em.train_error_type_model(analysis.transformations,
                                           analysis.clean_word_counts,
                                           smoothing=args.smoothing)
    realization = em.train_realization_model(analysis.transformations)
    profiles = em.build_all_error_profiles(corpus, granularity=args.granularity)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "type_model.json", out_dir / "realization_model.json",
             out_dir / "error_profiles.json"]
    em.save_type_model(type_model, outputs.stage(paths[0]))
    em.save_realization_model(realization, outputs.stage(paths[1]))
    em.save_error_profiles(profiles, outputs.stage(paths[2]))
    return [args.corpus], paths


def _cmd_inject(args, outputs: _Outputs) -> tuple[list[str], list[Path]]:
    config = _load_config(args.config)
    corpus = load_corpus(args.corpus)
    profiles = em.load_error_profiles(args.profiles)
    path = "controlled" if args.path == "controlled" else "llm_per_type"

    type_model = realization = instructions = client = None
    inputs = [args.corpus, args.profiles]
    if path == "controlled":
        if not args.models:
            raise ToolkitError("--models is required for the controlled path")
        models_dir = Path(args.models)
        type_model = em.load_type_model(models_dir / "type_model.json")
        realization = em.load_realization_model(models_dir / "realization_model.json")
        inputs += [str(models_dir / "type_model.json"),
                   str(models_dir / "realization_model.json")]
    else:
        instructions = em.load_error_instructions(args.instructions)
        client = _make_gateway(args, config)
        if args.instructions:
            inputs.append(args.instructions)

    essays = list(corpus)
    already_paired = {e.paired_id for e in essays if e.paired_id is not None}
    injected = []
    records = []
    skipped_no_profile = 0
    for essay in essays:
        if essay.paired_id is not None or essay.id in already_paired:
            continue  # an erroneous twin, or an original that already has one
        level = essay.level_gold
        if level is None or level not in profiles:
            skipped_no_profile += 1
            continue
        plan = InjectionPlan(level=level, profile=profiles[level], seed=args.seed,
                             path=path, max_errors=args.max_errors,
                             reference_tokens=args.reference_tokens)
        if path == "controlled":
            out_essay, record = inject_controlled(essay, plan, type_model, realization)
        else:
            out_essay, record = inject_via_llm(essay, plan, client, instructions)
        injected.append(out_essay)
        records.append(record)

    if not injected:
        raise ToolkitError("no essays were eligible for injection")
    combined = Corpus(essays + injected)
    save_corpus(combined, outputs.stage(args.out))
    with outputs.stage(args.audit).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
    if skipped_no_profile:
        print(f"skipped {skipped_no_profile} essays without a matching error profile",
              file=sys.stderr)
    return inputs, [Path(args.out), Path(args.audit)]


def _cmd_verify(args, outputs: _Outputs) -> tuple[list[str], list[Path]]:
    original = load_corpus(args.original)
    injected = load_corpus(args.injected)
    profiles = em.load_error_profiles(args.profiles)
    payload: dict = {}
    for level, profile in sorted(profiles.items(), key=lambda kv: kv[0].numeric):
        members = [e for e in injected
                   if e.paired_id is not None and e.level_gold is level]
        if not members:
            continue
        report = verify_injection(original, members, profile,
                                  threshold=args.threshold)
        payload[level.value] = report.to_dict()
    if not payload:
        raise ToolkitError("injected corpus contains no paired essays at profiled levels")
    _write_json(payload, outputs.stage(args.report))
    return [args.original, args.injected, args.profiles], [Path(args.report)]


def _cmd_evaluate(args, outputs: _Outputs) -> tuple[list[str], list[Path]]:
    corpus = load_corpus(args.corpus)
    inputs = [args.corpus]
    if args.predictions:
        preds = ev.load_external_predictions(args.predictions, corpus)
        inputs.append(args.predictions)
    elif args.baseline_profiles:
        preds = ev.baseline_profile_scorer(corpus, load_profiles(args.baseline_profiles))
        inputs.append(args.baseline_profiles)
    else:
        raise ToolkitError("either --predictions or --baseline-profiles is required")

    reports = {}
    if args.setting in ("average", "both"):
        reports["average_reference"] = ev.evaluate_average_reference(preds, corpus)
    if args.setting in ("multi", "both"):
        reports["multi_reference"] = ev.evaluate_multi_reference(preds, corpus)
    payload = {name: r.to_dict() for name, r in reports.items()}
    payload["scorer"] = preds.source
    _write_json(payload, outputs.stage(args.report))
    if args.format == "table":
        print(f"{'setting':<20}{'QWK':>8}{'Acc':>8}{'F1':>8}{'P':>8}{'R':>8}")
        for name, r in reports.items():
            print(f"{name:<20}{r.qwk:>8.4f}{r.accuracy:>8.4f}"
                  f"{r.macro_f1:>8.4f}{r.macro_p:>8.4f}{r.macro_r:>8.4f}")
    return inputs, [Path(args.report)]


def _cmd_stats(args, outputs: _Outputs) -> tuple[list[str], list[Path]]:
    corpus = load_corpus(args.corpus)
    counts = corpus.level_counts()
    total = len(corpus)
    rows = []
    for level in list(CEFRLevel):
        n = counts.get(level, 0)
        pct = round(100.0 * n / total) if total else 0
        rows.append((level.value, n, pct))
    if args.format == "json":
        print(json.dumps({
            "total": total,
            "levels": {band: {"count": n, "percent": pct} for band, n, pct in rows},
        }, indent=2))
    else:
        print(f"{'level':<14}{'count':>7}{'percent':>9}")
        for band, n, pct in rows:
            print(f"{band:<14}{n:>7}{pct:>8}%")
        print(f"{'Total':<14}{total:>7}{100 if total else 0:>8}%")
    return [args.corpus], []


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cefraug",
                                     description="CEFR essay profiling, generation, "
                                                 "error injection and evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_profile = sub.add_parser("profile", help="build or apply level profiles")
    profile_sub = p_profile.add_subparsers(dest="subcommand", required=True)
    p_build = profile_sub.add_parser("build")
    p_build.add_argument("--corpus", required=True)
    p_build.add_argument("--out", required=True)
    p_build.set_defaults(func=_cmd_profile_build, command_name="profile build")
    p_match = profile_sub.add_parser("match")
    p_match.add_argument("--corpus", required=True)
    p_match.add_argument("--profiles", required=True)
    p_match.add_argument("--report", required=True)
    p_match.add_argument("--format", choices=("json", "table"), default="json")
    p_match.set_defaults(func=_cmd_profile_match, command_name="profile match")

    p_gen = sub.add_parser("generate", help="generate a level-labeled corpus")
    p_gen.add_argument("--bank", default=None, help="prompt bank JSON (default: shipped bank)")
    p_gen.add_argument("--plan", required=True, help="per-level quota JSON")
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--profiles", default=None)
    p_gen.add_argument("--guidelines", default=None)
    p_gen.add_argument("--mock", action="store_true")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--workers", type=int, default=1)
    p_gen.add_argument("--config", default=None)
    p_gen.set_defaults(func=_cmd_generate, command_name="generate")

    p_errors = sub.add_parser("errors", help="train error models")
    errors_sub = p_errors.add_subparsers(dest="subcommand", required=True)
    p_train = errors_sub.add_parser("train")
    p_train.add_argument("--corpus", required=True)
    p_train.add_argument("--out-dir", required=True)
    p_train.add_argument("--granularity", choices=("coarse", "fine"), default="fine")
    p_train.add_argument("--smoothing", type=float, default=0.1)
    p_train.set_defaults(func=_cmd_errors_train, command_name="errors train")

    p_inject = sub.add_parser("inject", help="inject learner errors")
    p_inject.add_argument("--corpus", required=True)
    p_inject.add_argument("--profiles", required=True, help="error profiles JSON")
    p_inject.add_argument("--path", choices=("controlled", "llm"), required=True)
    p_inject.add_argument("--models", default=None)
    p_inject.add_argument("--instructions", default=None)
    p_inject.add_argument("--seed", type=int, required=True)
    p_inject.add_argument("--out", required=True)
    p_inject.add_argument("--audit", required=True)
    p_inject.add_argument("--max-errors", type=int, default=None)
    p_inject.add_argument("--reference-tokens", type=float, default=None)
    p_inject.add_argument("--mock", action="store_true")
    p_inject.add_argument("--config", default=None)
    p_inject.set_defaults(func=_cmd_inject, command_name="inject")

    p_verify = sub.add_parser("verify", help="check injected-corpus fidelity")
    p_verify.add_argument("--original", required=True)
    p_verify.add_argument("--injected", required=True)
    p_verify.add_argument("--profiles", required=True)
    p_verify.add_argument("--report", required=True)
    p_verify.add_argument("--threshold", type=float, default=0.8)
    p_verify.set_defaults(func=_cmd_verify, command_name="verify")

    p_eval = sub.add_parser("evaluate", help="score CEFR predictions")
    p_eval.add_argument("--corpus", required=True)
    p_eval.add_argument("--predictions", default=None)
    p_eval.add_argument("--baseline-profiles", default=None)
    p_eval.add_argument("--setting", choices=("average", "multi", "both"),
                        default="average")
    p_eval.add_argument("--report", required=True)
    p_eval.add_argument("--format", choices=("json", "table"), default="json")
    p_eval.set_defaults(func=_cmd_evaluate, command_name="evaluate")

    p_stats = sub.add_parser("stats", help="corpus level distribution")
    p_stats.add_argument("--corpus", required=True)
    p_stats.add_argument("--format", choices=("json", "table"), default="table")
    p_stats.set_defaults(func=_cmd_stats, command_name="stats")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    outputs = _Outputs()
    started = time.monotonic()
    try:
        inputs, finals = args.func(args, outputs)
        outputs.commit()
        _write_manifest(args.command_name, args, inputs, finals, started)
    except (ToolkitError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        outputs.abort()
        message = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
