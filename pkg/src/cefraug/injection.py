"""Turn clean essays into erroneous ones under a target error profile.

Two paths:

* controlled — per-token error-type prediction, level filtering, and
  pattern-based realization. Per-essay error counts scale with essay length
  relative to the profile's reference length, and per-tag counts follow the
  profile distribution through largest-remainder quotas, so the injected
  corpus converges to the profile.
* llm_per_type — one gateway round-trip per sampled error instruction, each
  feeding the previous iteration's text forward; the final record comes
  from re-aligning output against input.

Both paths are bit-deterministic for a fixed seed: every essay derives its
own RNG stream from (seed, essay id).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from .corpus import CEFRLevel, Corpus, Essay
from .errors import AuthenticationError, GatewayError, ToolkitError
from .error_model import (NO_ERROR, AlignedSpan, ErrorInstruction, ErrorProfile,
                          ErrorTag, ErrorTypeClassifier, RealizationModel,
                          align_pair, apply_default_rule, tag_error)
from .llm_gateway import ChatRequest, stable_seed
from .profiling import cosine_similarity, detokenize, tokenize

INJECTION_PATHS = ("controlled", "llm_per_type")


@dataclass(frozen=True)
class InjectionPlan:
    level: CEFRLevel
    profile: ErrorProfile
    seed: int
    path: str = "controlled"
    max_errors: Optional[int] = None
    # Mean token count of the essays the profile was built from; scales the
    # per-essay error target so short essays are not over-corrupted.
    reference_tokens: Optional[float] = None
    stochastic: bool = False

    def __post_init__(self):
        if self.profile.level is not self.level:
            raise ValueError(
                f"plan level {self.level.value} does not match profile level "
                f"{self.profile.level.value}")
        if self.path not in INJECTION_PATHS:
            raise ValueError(f"unknown injection path {self.path!r}")
        if self.max_errors is not None and self.max_errors < 0:
            raise ValueError("max_errors must be >= 0")


@dataclass(frozen=True)
class InjectionSpan:
    position: int
    source: str
    target: str
    tag: ErrorTag


@dataclass
class InjectionRecord:
    essay_id: str
    spans: list[InjectionSpan] = field(default_factory=list)
    verified_similarity: Optional[float] = None
    partial: bool = False
    skipped_tokens: int = 0

    def to_dict(self) -> dict:
        return {
            "essay_id": self.essay_id,
            "spans": [{"position": s.position, "source": s.source,
                       "target": s.target, "tag": str(s.tag)} for s in self.spans],
            "verified_similarity": self.verified_similarity,
            "partial": self.partial,
            "skipped_tokens": self.skipped_tokens,
        }


def predict_error_types(tokens: Sequence[str],
                        model: ErrorTypeClassifier) -> list[Mapping[ErrorTag, float]]:
    """One tag distribution (including the no-error outcome) per token."""
    return [model.distribution(tok) for tok in tokens]


def filter_by_level(distributions: Sequence[Mapping[ErrorTag, float]],
                    profile: ErrorProfile) -> list[dict[ErrorTag, float]]:
    """Zero out tags outside the profile support, re-weight the rest.

    Mass predicted for unsupported tags moves to the no-error outcome; the
    surviving error mass is redistributed proportionally to
    P(tag | word) * profile weight.
    """
    filtered = []
    for dist in distributions:
        no_error = dist.get(NO_ERROR, 0.0)
        raw: dict[ErrorTag, float] = {}
        for tag, p in dist.items():
            if tag == NO_ERROR:
                continue
            w = profile.weight(tag)
            if w > 0:
                raw[tag] = p * w
            else:
                no_error += p
        error_mass = 1.0 - no_error
        total_raw = sum(raw.values())
        out: dict[ErrorTag, float] = {NO_ERROR: no_error}
        if total_raw > 0 and error_mass > 0:
            for tag, r in raw.items():
                out[tag] = r / total_raw * error_mass
        else:
            out[NO_ERROR] = 1.0
        filtered.append(out)
    return filtered


@dataclass(frozen=True)
class RealizationOutcome:
    word: str
    skipped: bool
    pattern: Optional[object] = None


def realize(word: str, tag: ErrorTag, model: RealizationModel,
            rng: Optional[random.Random] = None) -> RealizationOutcome:
    """Corrupt `word` per the tag's realization distribution.

    Deterministic mode picks the most probable applicable pattern;
    passing an RNG samples among applicable patterns instead. When no
    stored pattern applies, the tag's fallback character rule is tried;
    failing that, the word comes back unchanged with a skip flag.
    """
    dist = model.distribution_for(tag)  # raises for an unknown tag
    candidates = []
    for pattern, prob in dist.items():
        out = pattern.apply(word)
        if out is not None and out != word:
            candidates.append((pattern, prob, out))
    if candidates:
        if rng is None:
            pattern, _, out = max(candidates, key=lambda c: (c[1], c[0]))
        else:
            weights = [c[1] for c in candidates]
            pattern, _, out = rng.choices(candidates, weights=weights)[0]
        return RealizationOutcome(word=out, skipped=False, pattern=pattern)
    fallback = apply_default_rule(str(tag), word)
    if fallback is not None:
        return RealizationOutcome(word=fallback, skipped=False, pattern=None)
    return RealizationOutcome(word=word, skipped=True, pattern=None)


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _tag_quotas(profile: ErrorProfile, total: int,
                rng: random.Random) -> list[tuple[ErrorTag, int]]:
    """Allocate `total` errors across supported tags proportionally.

    Whole parts are assigned outright; fractional remainders are resolved
    by systematic sampling so each tag's expected count equals
    total * profile weight exactly, which makes the corpus-level tag
    distribution converge to the profile.
    """
    tags = sorted(profile.support, key=str)
    if not tags or total <= 0:
        return []
    quotas = [profile.tag_dist[t] * total for t in tags]
    alloc = [math.floor(q) for q in quotas]
    leftovers = total - sum(alloc)
    if leftovers > 0:
        # Thresholds u, u+1, ... laid over the cumulative remainders pick
        # each tag with probability equal to its fractional remainder.
        u = rng.random()
        cum = 0.0
        for i, q in enumerate(quotas):
            frac = q - alloc[i]
            if math.floor(cum + frac - u) > math.floor(cum - u):
                alloc[i] += 1
            cum += frac
        # Float drift can drop/add a slot at the boundary; patch it up.
        drift = total - sum(alloc)
        order = sorted(range(len(tags)),
                       key=lambda i: (-(quotas[i] - math.floor(quotas[i])), str(tags[i])))
        idx = 0
        while drift != 0 and idx < len(order):
            i = order[idx]
            if drift > 0:
                alloc[i] += 1
                drift -= 1
            elif alloc[i] > math.floor(quotas[i]):
                alloc[i] -= 1
                drift += 1
            idx += 1
    return [(t, a) for t, a in zip(tags, alloc) if a > 0]


def inject_controlled(essay: Essay, plan: InjectionPlan,
                      type_model: ErrorTypeClassifier,
                      realization_model: RealizationModel,
                      ) -> tuple[Essay, InjectionRecord]:
    if plan.path != "controlled":
        raise ValueError("plan path must be 'controlled'")
    out_id = f"{essay.id}-err"
    record = InjectionRecord(essay_id=out_id)
    tokens = tokenize(essay.text)
    rng = random.Random(stable_seed(plan.seed, essay.id))

    scale = 1.0
    if plan.reference_tokens and plan.reference_tokens > 0:
        scale = len(tokens) / plan.reference_tokens
    target = _round_half_up(plan.profile.avg_errors_per_essay * scale)
    if plan.max_errors is not None:
        target = min(target, plan.max_errors)
    if target <= 0 or plan.profile.avg_errors_per_essay == 0:
        return _erroneous_copy(essay, out_id, essay.text), record

    dists = filter_by_level(predict_error_types(tokens, type_model), plan.profile)
    replacements: dict[int, str] = {}
    realize_rng = rng if plan.stochastic else None
    for tag, quota in _tag_quotas(plan.profile, target, rng):
        # Tokens ranked by this tag's filtered probability, ties by index.
        ranked = sorted((i for i in range(len(tokens))
                         if i not in replacements and dists[i].get(tag, 0.0) > 0),
                        key=lambda i: (-dists[i][tag], i))
        placed = 0
        for i in ranked:
            if placed == quota:
                break
            outcome = realize(tokens[i], tag, realization_model, realize_rng)
            if outcome.skipped:
                record.skipped_tokens += 1
                continue
            replacements[i] = outcome.word
            record.spans.append(InjectionSpan(position=i, source=tokens[i],
                                              target=outcome.word, tag=tag))
            placed += 1

    new_tokens: list[str] = []
    for i, tok in enumerate(tokens):
        if i in replacements:
            new_tokens.extend(t for t in replacements[i].split(" ") if t)
        else:
            new_tokens.append(tok)
    record.spans.sort(key=lambda s: s.position)
    text = detokenize(new_tokens) if new_tokens else essay.text
    return _erroneous_copy(essay, out_id, text), record


def _erroneous_copy(essay: Essay, out_id: str, text: str) -> Essay:
    return Essay(id=out_id, text=text, topic=essay.topic,
                 prompt_id=essay.prompt_id, level_gold=essay.level_gold,
                 rater_triple=essay.rater_triple, provenance="injected",
                 paired_id=essay.id)


def sample_error_instructions(profile: ErrorProfile, rng: random.Random,
                              instructions: Mapping[str, ErrorInstruction],
                              ) -> list[tuple[ErrorTag, ErrorInstruction, int]]:
    """Weighted random per-tag instruction counts for one essay.

    The total number of draws is the (stochastically rounded) average error
    count; draws fall on tags proportionally to their average per-essay
    counts. Every supported tag must have an instruction entry.
    """
    avg = profile.avg_errors_per_essay
    if avg <= 0:
        return []
    tags = sorted(profile.support, key=str)
    for tag in tags:
        if str(tag) not in instructions:
            raise ToolkitError(f"no instruction entry for error tag {tag}")
    total = int(avg) + (1 if rng.random() < avg - int(avg) else 0)
    if total == 0:
        return []
    weights = [profile.avg_count_by_tag.get(t, profile.tag_dist[t]) for t in tags]
    counts: dict[ErrorTag, int] = {}
    for tag in rng.choices(tags, weights=weights, k=total):
        counts[tag] = counts.get(tag, 0) + 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], str(kv[0])))
    return [(tag, instructions[str(tag)], n) for tag, n in ordered]


_INJECT_SYSTEM_TEMPLATE = (
    "You are a helpful assistant simulating an Arabic learner's writing mistakes.\n"
    "Inject exactly {count} erroneous tokens of error type {tag} into the essay "
    "supplied by the user.\n"
    "Error type definition: {description}\n"
    "Example: correct \"{example_correct}\" -> erroneous \"{example_erroneous}\"\n"
    "Rules:\n"
    "- Introduce only this one error type; keep every other token exactly as it is.\n"
    "- Preserve sentence order and meaning; add no commentary.\n"
    "- Reply with the full essay text in Arabic only."
)


def build_injection_prompt(essay_text: str, tag: ErrorTag,
                           instruction: ErrorInstruction, count: int) -> ChatRequest:
    if count < 1:
        raise ValueError("count must be >= 1")
    system = _INJECT_SYSTEM_TEMPLATE.format(
        count=count, tag=str(tag),
        description=instruction.description,
        example_correct=instruction.example_correct or "NULL",
        example_erroneous=instruction.example_erroneous or "NULL")
    return ChatRequest(system_message=system, user_message=essay_text)


def inject_via_llm(essay: Essay, plan: InjectionPlan, client,
                   instructions: Mapping[str, ErrorInstruction],
                   ) -> tuple[Essay, InjectionRecord]:
    if plan.path != "llm_per_type":
        raise ValueError("plan path must be 'llm_per_type'")
    out_id = f"{essay.id}-err"
    record = InjectionRecord(essay_id=out_id)
    rng = random.Random(stable_seed(plan.seed, essay.id))
    sampled = sample_error_instructions(plan.profile, rng, instructions)
    current = essay.text
    for step, (tag, instruction, count) in enumerate(sampled):
        request = build_injection_prompt(current, tag, instruction, count)
        try:
            response = client.complete(request,
                                       seed=stable_seed(plan.seed, essay.id, step))
        except AuthenticationError:
            raise  # credentials will fail every essay; abort the run
        except GatewayError:
            record.partial = True
            break
        current = response.text
    record.spans = realign_spans(essay.text, current)
    return _erroneous_copy(essay, out_id, current), record


def realign_spans(original_text: str, erroneous_text: str) -> list[InjectionSpan]:
    """Recover labeled spans by aligning the final text against the input."""
    spans = []
    for span in align_pair(tokenize(original_text), tokenize(erroneous_text)):
        if span.is_identity:
            continue
        spans.append(InjectionSpan(
            position=span.source_index,
            source=" ".join(span.source),
            target=" ".join(span.target),
            tag=tag_error(span)))
    return spans


@dataclass
class FidelityReport:
    aggregate_similarity: float
    tv_distance: float
    per_essay: dict[str, float]
    fraction_above_threshold: float
    threshold: float
    zero_error_essays: int
    aggregate_dist: dict[ErrorTag, float]

    @property
    def mean_essay_similarity(self) -> float:
        if not self.per_essay:
            return 0.0
        return sum(self.per_essay.values()) / len(self.per_essay)

    def to_dict(self) -> dict:
        return {
            "aggregate_similarity": self.aggregate_similarity,
            "tv_distance": self.tv_distance,
            "mean_essay_similarity": self.mean_essay_similarity,
            "fraction_above_threshold": self.fraction_above_threshold,
            "threshold": self.threshold,
            "zero_error_essays": self.zero_error_essays,
            "aggregate_dist": {str(t): p for t, p in sorted(
                self.aggregate_dist.items(), key=lambda kv: str(kv[0]))},
            "per_essay": dict(sorted(self.per_essay.items())),
        }


def _dist_similarity(counts: Mapping[ErrorTag, float],
                     profile_dist: Mapping[ErrorTag, float]) -> float:
    keys = sorted(set(counts) | set(profile_dist), key=str)
    total = sum(counts.values())
    if total == 0:
        return 0.0
    p = [counts.get(k, 0.0) / total for k in keys]
    q = [profile_dist.get(k, 0.0) for k in keys]
    if not any(q):
        return 0.0
    return cosine_similarity(p, q)


def verify_injection(original: Corpus, injected, profile: ErrorProfile,
                     threshold: float = 0.8) -> FidelityReport:
    """Compare the injected corpus's tag distribution to the target profile.

    `injected` is any iterable of essays; only paired (erroneous) ones are
    scored, and each must resolve against the original corpus.
    """
    paired = [e for e in injected if e.paired_id is not None]
    if not paired:
        raise ToolkitError("no paired (injected) essays to verify")
    aggregate: dict[ErrorTag, float] = {}
    per_essay: dict[str, float] = {}
    zero = 0
    for essay in paired:
        if essay.paired_id not in original:
            raise ToolkitError(
                f"paired original {essay.paired_id!r} for essay {essay.id!r} "
                "is missing from the original corpus")
        source = original.by_id(essay.paired_id)
        counts: dict[ErrorTag, float] = {}
        for span in realign_spans(source.text, essay.text):
            key = profile.project(span.tag)
            counts[key] = counts.get(key, 0.0) + 1.0
            aggregate[key] = aggregate.get(key, 0.0) + 1.0
        if not counts:
            zero += 1
        per_essay[essay.id] = _dist_similarity(counts, profile.tag_dist)

    total = sum(aggregate.values())
    agg_dist = {t: c / total for t, c in aggregate.items()} if total else {}
    keys = sorted(set(agg_dist) | set(profile.tag_dist), key=str)
    tv = 0.5 * sum(abs(agg_dist.get(k, 0.0) - profile.tag_dist.get(k, 0.0)) for k in keys)
    above = sum(1 for s in per_essay.values() if s >= threshold)
    return FidelityReport(
        aggregate_similarity=_dist_similarity(aggregate, profile.tag_dist),
        tv_distance=tv,
        per_essay=per_essay,
        fraction_above_threshold=above / len(per_essay) if per_essay else 0.0,
        threshold=threshold,
        zero_error_essays=zero,
        aggregate_dist=agg_dist,
    )
