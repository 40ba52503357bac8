"""Prompt bank management, level-conditioned request building, and batch
essay generation with a profile-based quality gate."""

from __future__ import annotations

import json
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .corpus import ASSESSABLE_LEVELS, CEFRLevel, Corpus, Essay
from .errors import AuthenticationError, GatewayError, ToolkitError
from .llm_gateway import ChatRequest, stable_seed
from .profiling import (LevelProfile, agreement, assign_nearest_level,
                        extract_features)


class Tier(Enum):
    BEGINNER = "Beginner"
    INTERMEDIATE = "Intermediate"
    ADVANCED = "Advanced"

    @property
    def levels(self) -> tuple[CEFRLevel, CEFRLevel]:
        return _TIER_LEVELS[self]


_TIER_LEVELS = {
    Tier.BEGINNER: (CEFRLevel.A1, CEFRLevel.A2),
    Tier.INTERMEDIATE: (CEFRLevel.B1, CEFRLevel.B2),
    Tier.ADVANCED: (CEFRLevel.C1, CEFRLevel.C2),
}


def tier_for_level(level: CEFRLevel) -> Tier:
    for tier, levels in _TIER_LEVELS.items():
        if level in levels:
            return tier
    raise ValueError(f"level {level.value} maps to no tier")


@dataclass(frozen=True)
class EssayPrompt:
    id: str
    topic: str
    tier: Tier
    text_ar: str
    text_en: Optional[str] = None

    def __post_init__(self):
        if not self.text_ar.strip():
            raise ValueError(f"prompt {self.id!r}: text_ar must be non-empty")


class PromptBank:
    def __init__(self, prompts: Sequence[EssayPrompt]):
        self._prompts = tuple(prompts)
        seen = set()
        for p in self._prompts:
            if p.id in seen:
                raise ToolkitError(f"duplicate prompt id {p.id!r}")
            seen.add(p.id)

    def __len__(self) -> int:
        return len(self._prompts)

    def __iter__(self):
        return iter(self._prompts)

    @property
    def prompts(self) -> tuple[EssayPrompt, ...]:
        return self._prompts

    def counts_by_topic_tier(self) -> dict[str, dict[Tier, int]]:
        tally: dict[str, dict[Tier, int]] = defaultdict(lambda: {t: 0 for t in Tier})
        for p in self._prompts:
            tally[p.topic][p.tier] += 1
        return {topic: dict(counts) for topic, counts in tally.items()}

    def counts_by_tier(self) -> dict[Tier, int]:
        tally = Counter(p.tier for p in self._prompts)
        return {t: tally.get(t, 0) for t in Tier}

    def for_level(self, level: CEFRLevel) -> list[EssayPrompt]:
        tier = tier_for_level(level)
        return sorted((p for p in self._prompts if p.tier is tier), key=lambda p: p.id)


def load_prompt_bank(path: str | Path | None = None) -> PromptBank:
    """Load a prompt bank JSON array; defaults to the shipped 152-prompt bank."""
    if path is None:
        raw = resources.files("cefraug").joinpath("data/prompt_bank.json") \
            .read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    entries = json.loads(raw)
    prompts = []
    for e in entries:
        try:
            tier = Tier(e["tier"])
        except ValueError:
            raise ToolkitError(f"prompt {e.get('id')!r}: unknown tier {e.get('tier')!r}") from None
        prompts.append(EssayPrompt(id=e["id"], topic=e["topic"], tier=tier,
                                   text_ar=e["text_ar"], text_en=e.get("text_en")))
    return PromptBank(prompts)


def load_cefr_guidelines(path: str | Path | None = None) -> dict[CEFRLevel, str]:
    if path is None:
        raw = resources.files("cefraug").joinpath("data/cefr_guidelines.json") \
            .read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    doc = json.loads(raw)
    return {CEFRLevel.parse(band): text for band, text in doc.items()}


@dataclass(frozen=True)
class GenerationJob:
    prompt: EssayPrompt
    target_level: CEFRLevel
    guidelines: str
    essays_per_prompt: int = 1
    profile: Optional[LevelProfile] = None

    def __post_init__(self):
        if self.essays_per_prompt < 1:
            raise ValueError("essays_per_prompt must be >= 1")
        if self.target_level not in self.prompt.tier.levels:
            raise ValueError(
                f"target level {self.target_level.value} is outside prompt "
                f"{self.prompt.id!r} tier {self.prompt.tier.value}")
        if not self.guidelines.strip():
            raise ValueError("guidelines must be non-empty")


_SYSTEM_TEMPLATE = (
    "You are an expert Arabic writing assistant that imitates learner essays.\n"
    "Control instructions:\n"
    "- Write exactly one essay in Modern Standard Arabic.\n"
    "- The essay must read like it was written by a learner at CEFR level {level}.\n"
    "- CEFR level guidelines: {guidelines}\n"
    "- Output Arabic text only: no translations, no headings, no commentary,\n"
    "  and never copy instruction text into the essay."
)

_PROFILE_BLOCK = (
    "Match this linguistic profile (average per essay):\n{profile_json}\n"
)


def _profile_payload(profile: LevelProfile) -> str:
    f = profile.features
    return json.dumps({
        "words": round(f.n_words, 2),
        "sentences": round(f.n_sentences, 2),
        "avg_word_length": round(f.avg_word_len, 2),
        "avg_sentence_length": round(f.avg_sent_len, 2),
        "type_token_ratio": f.ttr,
        "sentence_complexity": round(f.sentence_complexity, 2),
    }, ensure_ascii=False)


def build_generation_request(job: GenerationJob) -> ChatRequest:
    """Assemble the chat request for one generation job.

    Instructions are English; the essay prompt stays Arabic. A1 and C2 carry
    no corpus profile, so those jobs fall back to rubric-only instructions.
    """
    profile = job.profile
    if profile is not None and job.target_level in (CEFRLevel.A1, CEFRLevel.C2):
        warnings.warn(f"no corpus profile exists for {job.target_level.value}; "
                      "falling back to rubric-only instructions")
        profile = None
    system = _SYSTEM_TEMPLATE.format(level=job.target_level.value,
                                     guidelines=job.guidelines.strip())
    user_parts = [f"Target CEFR level: {job.target_level.value}"]
    if profile is not None:
        user_parts.append(_PROFILE_BLOCK.format(profile_json=_profile_payload(profile)))
    user_parts.append(f"Topic: {job.prompt.topic}")
    user_parts.append(f"Essay prompt (Arabic): {job.prompt.text_ar}")
    user_parts.append("Write the essay now, in Arabic only.")
    return ChatRequest(system_message=system, user_message="\n".join(user_parts))


@dataclass
class GenerationReport:
    planned: dict[CEFRLevel, int]
    generated: dict[CEFRLevel, int]
    failures: list[dict] = field(default_factory=list)
    exact_duplicates: int = 0

    def to_dict(self) -> dict:
        return {
            "planned": {l.value: n for l, n in sorted(self.planned.items(),
                                                      key=lambda kv: kv[0].numeric)},
            "generated": {l.value: n for l, n in sorted(self.generated.items(),
                                                        key=lambda kv: kv[0].numeric)},
            "failures": self.failures,
            "exact_duplicates": self.exact_duplicates,
        }


def _repetitions(quota: int, n_prompts: int) -> list[int]:
    base, extra = divmod(quota, n_prompts)
    return [base + (1 if i < extra else 0) for i in range(n_prompts)]


def generate_corpus(bank: PromptBank, plan: Mapping[CEFRLevel, int], client,
                    seed: int,
                    profiles: Optional[Mapping[CEFRLevel, LevelProfile]] = None,
                    guidelines: Optional[Mapping[CEFRLevel, str]] = None,
                    workers: int = 1,
                    ) -> tuple[Corpus, GenerationReport]:
    """Generate `plan[level]` essays per level, spread over the level's prompts.

    Essays are ordered by (level, prompt id, repetition) regardless of
    completion order; every job derives its own seed, so `workers > 1`
    never changes the output. Failed calls are recorded and skipped, never
    silently substituted.
    """
    if not plan:
        raise ValueError("generation plan is empty")
    for level, quota in plan.items():
        if quota < 1:
            raise ValueError(f"quota for {level.value} must be >= 1")
    guidelines = guidelines or load_cefr_guidelines()
    profiles = profiles or {}

    jobs: list[tuple[CEFRLevel, EssayPrompt, int]] = []
    for level in sorted(plan, key=lambda l: l.numeric):
        prompts = bank.for_level(level)
        if not prompts:
            raise ToolkitError(f"prompt bank has no prompts for level {level.value}")
        reps = _repetitions(plan[level], len(prompts))
        for prompt, n_reps in zip(prompts, reps):
            for rep in range(n_reps):
                jobs.append((level, prompt, rep))

    def run_job(job_spec):
        level, prompt, rep = job_spec
        job = GenerationJob(prompt=prompt, target_level=level,
                            guidelines=guidelines[level],
                            profile=profiles.get(level))
        request = build_generation_request(job)
        return client.complete(request,
                               seed=stable_seed(seed, prompt.id, level.value, rep))

    results: list = [None] * len(jobs)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(run_job, spec): i for i, spec in enumerate(jobs)}
            for future, i in futures.items():
                try:
                    results[i] = future.result()
                except AuthenticationError:
                    raise
                except GatewayError as exc:
                    results[i] = exc
    else:
        for i, spec in enumerate(jobs):
            try:
                results[i] = run_job(spec)
            except AuthenticationError:
                raise  # credentials will fail every job; abort the run
            except GatewayError as exc:
                results[i] = exc

    essays: list[Essay] = []
    report = GenerationReport(planned=dict(plan),
                              generated={l: 0 for l in plan})
    seen_texts: set[str] = set()
    for (level, prompt, rep), result in zip(jobs, results):
        if isinstance(result, GatewayError):
            report.failures.append({"prompt_id": prompt.id, "level": level.value,
                                    "repetition": rep, "error": str(result)})
            continue
        if result.text in seen_texts:
            report.exact_duplicates += 1
        seen_texts.add(result.text)
        essays.append(Essay(
            id=f"g-{prompt.id}-{level.value.lower()}-{rep:02d}",
            text=result.text,
            topic=prompt.topic,
            prompt_id=prompt.id,
            level_gold=level,
            provenance="generated"))
        report.generated[level] += 1
    return Corpus(essays), report


@dataclass
class GateReport:
    per_essay: list[tuple[str, CEFRLevel, Optional[CEFRLevel]]]  # id, predicted, target
    overall_agreement: float
    per_level_agreement: dict[CEFRLevel, float]
    mismatched_ids: list[str]

    def to_dict(self) -> dict:
        return {
            "overall_agreement": self.overall_agreement,
            "per_level_agreement": {l.value: a for l, a in sorted(
                self.per_level_agreement.items(), key=lambda kv: kv[0].numeric)},
            "mismatched_ids": self.mismatched_ids,
            "per_essay": [{"id": i, "predicted": p.value,
                           "target": t.value if t else None}
                          for i, p, t in self.per_essay],
        }


def quality_gate(corpus: Corpus,
                 profiles: Mapping[CEFRLevel, LevelProfile]) -> GateReport:
    """Predict a level for every essay via nearest profile and score agreement."""
    if len(corpus) == 0:
        raise ValueError("cannot gate an empty corpus")
    if not profiles:
        raise ValueError("at least one level profile is required")
    per_essay = []
    for essay in corpus:
        predicted = assign_nearest_level(extract_features(essay), profiles)
        per_essay.append((essay.id, predicted, essay.level_gold))
    labeled = [(p, t) for _, p, t in per_essay if t is not None and t.is_assessable]
    overall = agreement([p for p, _ in labeled], [t for _, t in labeled]) if labeled else 0.0
    per_level: dict[CEFRLevel, float] = {}
    for level in ASSESSABLE_LEVELS:
        pairs = [(p, t) for p, t in labeled if t is level]
        if pairs:
            per_level[level] = agreement([p for p, _ in pairs], [t for _, t in pairs])
    mismatched = [i for i, p, t in per_essay if t is not None and p is not t]
    return GateReport(per_essay=per_essay, overall_agreement=overall,
                      per_level_agreement=per_level, mismatched_ids=mismatched)
