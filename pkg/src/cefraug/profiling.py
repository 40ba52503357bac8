"""Per-essay linguistic features and per-level aggregate profiles.

Feature vectors hold surface counts (words, sentences, tokens, vocabulary),
average lengths, type-token ratio, and a clause-depth proxy for syntactic
complexity. Level profiles are component-wise means over all essays of a
level; essays are matched to profiles by max-normalized cosine similarity.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .corpus import ASSESSABLE_LEVELS, CEFRLevel, Corpus, Essay
from .errors import ToolkitError

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)
_WORD_RE = re.compile(r"\w", re.UNICODE)
# Sentence terminators: Latin ./!/? plus Arabic question mark and semicolon,
# split only when followed by whitespace or end of text.
_SENT_SPLIT_RE = re.compile(r"(?<=[.!?؟؛])\s+")


def tokenize(text: str) -> list[str]:
    """Split text into word and punctuation tokens (Arabic and Latin)."""
    return _TOKEN_RE.findall(text)


def split_sentences(text: str) -> list[str]:
    text = text.strip()
    if not text:
        return []
    return [s.strip() for s in _SENT_SPLIT_RE.split(text) if s.strip()]


_ATTACHING_PUNCT = frozenset({".", ",", "!", "?", "؟", "؛", "،", ":", ";"})


def detokenize(tokens: Sequence[str]) -> str:
    """Inverse-ish of `tokenize`: spaces between words, punctuation attached."""
    out: list[str] = []
    for t in tokens:
        if out and t in _ATTACHING_PUNCT:
            out[-1] += t
        else:
            out.append(t)
    return " ".join(out)


def type_token_ratio(tokens: Sequence[str]) -> float:
    """Unique tokens over total tokens; 0.0 for empty input by convention."""
    if not tokens:
        return 0.0
    return len(set(tokens)) / len(tokens)


# Markers whose presence signals clause embedding; the count-based depth
# below is a stand-in for real tree depth and is deliberately crude.
_SUBORD_MARKERS = frozenset({
    "أن", "إن", "لأن", "الذي", "التي", "الذين", "اللذين", "إذا", "عندما",
    "بينما", "حتى", "كي", "لكي", "لو", "كما", "حيث", "بما",
    "that", "which", "who", "because", "if", "when", "while", "since",
    "although", "whereas",
})
_CLAUSE_PUNCT = frozenset({"،", ",", ";", "؛", ":"})


def clause_depth(sentence: str) -> int:
    """Approximate syntactic depth: 1 + subordination markers + clause punctuation."""
    tokens = tokenize(sentence)
    if not tokens:
        return 0
    return 1 + sum(t in _SUBORD_MARKERS or t in _CLAUSE_PUNCT for t in tokens)


def sentence_complexity(sentences: Sequence[str],
                        depth_fn: Callable[[str], float] = clause_depth) -> float:
    """Mean per-sentence depth; 0.0 for empty input."""
    if not sentences:
        return 0.0
    depths = []
    for i, sent in enumerate(sentences):
        try:
            d = depth_fn(sent)
        except Exception as exc:
            raise ToolkitError(f"depth provider failed for sentence {i}: {exc}") from exc
        if d < 0:
            raise ToolkitError(f"depth provider returned negative depth for sentence {i}")
        depths.append(d)
    return sum(depths) / len(depths)


NUMERIC_FEATURES = ("n_words", "n_sentences", "n_tokens", "n_vocab",
                    "avg_word_len", "avg_sent_len", "ttr", "sentence_complexity")


@dataclass(frozen=True)
class FeatureVector:
    n_words: float = 0.0
    n_sentences: float = 0.0
    n_tokens: float = 0.0
    n_vocab: float = 0.0
    avg_word_len: float = 0.0
    avg_sent_len: float = 0.0
    ttr: float = 0.0
    sentence_complexity: float = 0.0
    pos_freq: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name in NUMERIC_FEATURES:
            if getattr(self, name) < 0:
                raise ValueError(f"feature {name} must be non-negative")
        if self.n_vocab > self.n_tokens:
            raise ValueError("n_vocab cannot exceed n_tokens")
        if not 0.0 <= self.ttr <= 1.0:
            raise ValueError("ttr must lie in [0, 1]")

    def numeric_values(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in NUMERIC_FEATURES)

    def to_dict(self) -> dict:
        d = {name: getattr(self, name) for name in NUMERIC_FEATURES}
        if self.pos_freq:
            d["pos_freq"] = dict(sorted(self.pos_freq.items()))
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "FeatureVector":
        kwargs = {name: d.get(name, 0.0) for name in NUMERIC_FEATURES}
        kwargs["pos_freq"] = dict(d.get("pos_freq") or {})
        return cls(**kwargs)


def text_features(text: str,
                  depth_fn: Callable[[str], float] = clause_depth,
                  pos_fn: Optional[Callable[[Sequence[str]], Sequence[str]]] = None,
                  ) -> FeatureVector:
    tokens = tokenize(text)
    if not tokens:
        return FeatureVector()
    words = [t for t in tokens if _WORD_RE.search(t)]
    sentences = split_sentences(text)
    pos_freq: dict[str, float] = {}
    if pos_fn is not None and words:
        tags = list(pos_fn(words))
        if len(tags) != len(words):
            raise ToolkitError("pos provider must return one tag per word token")
        for tag in tags:
            pos_freq[tag] = pos_freq.get(tag, 0.0) + 1.0
        pos_freq = {t: c / len(tags) for t, c in pos_freq.items()}
    return FeatureVector(
        n_words=float(len(words)),
        n_sentences=float(len(sentences)),
        n_tokens=float(len(tokens)),
        n_vocab=float(len(set(tokens))),
        avg_word_len=(sum(len(w) for w in words) / len(words)) if words else 0.0,
        avg_sent_len=(len(words) / len(sentences)) if sentences else 0.0,
        ttr=type_token_ratio(tokens),
        sentence_complexity=sentence_complexity(sentences, depth_fn),
        pos_freq=pos_freq,
    )


def extract_features(essay: Union[Essay, str],
                     depth_fn: Callable[[str], float] = clause_depth,
                     pos_fn: Optional[Callable[[Sequence[str]], Sequence[str]]] = None,
                     ) -> FeatureVector:
    text = essay.text if isinstance(essay, Essay) else essay
    return text_features(text, depth_fn=depth_fn, pos_fn=pos_fn)


@dataclass(frozen=True)
class LevelProfile:
    level: CEFRLevel
    features: FeatureVector
    support: int

    def __post_init__(self):
        if self.support < 1:
            raise ValueError("profile support must be >= 1")


def build_level_profile(corpus: Corpus, level: CEFRLevel,
                        depth_fn: Callable[[str], float] = clause_depth,
                        pos_fn=None) -> LevelProfile:
    """Component-wise mean of feature vectors over all essays at `level`."""
    members = [e for e in corpus if e.level_gold is level]
    if not members:
        raise ValueError(f"no essays at level {level.value}; profile unavailable")
    vectors = [extract_features(e, depth_fn=depth_fn, pos_fn=pos_fn) for e in members]
    n = len(vectors)
    means = {name: sum(getattr(v, name) for v in vectors) / n for name in NUMERIC_FEATURES}
    pos_keys = sorted({k for v in vectors for k in v.pos_freq})
    pos_mean = {k: sum(v.pos_freq.get(k, 0.0) for v in vectors) / n for k in pos_keys}
    return LevelProfile(level=level, features=FeatureVector(**means, pos_freq=pos_mean),
                        support=n)


def build_all_profiles(corpus: Corpus, depth_fn=clause_depth, pos_fn=None,
                       ) -> dict[CEFRLevel, LevelProfile]:
    profiles = {}
    for level in ASSESSABLE_LEVELS:
        if any(e.level_gold is level for e in corpus):
            profiles[level] = build_level_profile(corpus, level, depth_fn, pos_fn)
    return profiles


# --- similarity ----------------------------------------------------------

VectorLike = Union[FeatureVector, Sequence[float]]


def _paired_vectors(p: VectorLike, q: VectorLike) -> tuple[list[float], list[float]]:
    if isinstance(p, FeatureVector) and isinstance(q, FeatureVector):
        pv = list(p.numeric_values())
        qv = list(q.numeric_values())
        # POS frequencies enter only when both sides actually carry them.
        if p.pos_freq and q.pos_freq:
            keys = sorted(set(p.pos_freq) | set(q.pos_freq))
            pv += [p.pos_freq.get(k, 0.0) for k in keys]
            qv += [q.pos_freq.get(k, 0.0) for k in keys]
        return pv, qv
    if isinstance(p, FeatureVector) or isinstance(q, FeatureVector):
        raise TypeError("cannot mix FeatureVector and raw sequence arguments")
    pv, qv = list(p), list(q)
    if len(pv) != len(qv):
        raise ValueError(f"vector lengths differ: {len(pv)} vs {len(qv)}")
    return pv, qv


def cosine_similarity(p: VectorLike, q: VectorLike) -> float:
    """Plain cosine between two vectors; rejects zero vectors."""
    pv, qv = _paired_vectors(p, q)
    norm_p = math.sqrt(sum(x * x for x in pv))
    norm_q = math.sqrt(sum(x * x for x in qv))
    if norm_p == 0.0 or norm_q == 0.0:
        raise ValueError("cosine similarity undefined for a zero vector")
    dot = sum(x * y for x, y in zip(pv, qv))
    return dot / (norm_p * norm_q)


def _profile_scales(profiles: Sequence[LevelProfile], pos_keys: Sequence[str]) -> list[float]:
    scales = []
    for i, name in enumerate(NUMERIC_FEATURES):
        m = max(getattr(p.features, name) for p in profiles)
        scales.append(1.0 / m if m > 0 else 0.0)
    for k in pos_keys:
        m = max(p.features.pos_freq.get(k, 0.0) for p in profiles)
        scales.append(1.0 / m if m > 0 else 0.0)
    return scales


def assign_nearest_level(v: FeatureVector,
                         profiles: Mapping[CEFRLevel, LevelProfile]) -> CEFRLevel:
    """Pick the level whose profile is most cosine-similar to `v`.

    Each component is first divided by its maximum across the profiles so
    count-scale components cannot drown the ratio-scale ones; ties break
    toward the lower band.
    """
    if not profiles:
        raise ValueError("at least one level profile is required")
    ordered = sorted(profiles.values(), key=lambda p: p.level.numeric)
    pos_keys: list[str] = []
    if v.pos_freq and any(p.features.pos_freq for p in ordered):
        pos_keys = sorted({k for p in ordered for k in p.features.pos_freq})
    scales = _profile_scales(ordered, pos_keys)

    def scaled(fv: FeatureVector) -> list[float]:
        vals = list(fv.numeric_values()) + [fv.pos_freq.get(k, 0.0) for k in pos_keys]
        return [x * s for x, s in zip(vals, scales)]

    sv = scaled(v)
    if not any(sv):
        raise ValueError("zero feature vector cannot be assigned a level")
    best_level, best_sim = None, -2.0
    for prof in ordered:
        sim = cosine_similarity(sv, scaled(prof.features))
        if sim > best_sim:
            best_level, best_sim = prof.level, sim
    return best_level


def agreement(predicted: Sequence[CEFRLevel], gold: Sequence[CEFRLevel]) -> float:
    """Fraction of positions where prediction equals gold."""
    if len(predicted) != len(gold):
        raise ValueError(f"length mismatch: {len(predicted)} predictions vs {len(gold)} gold")
    if not predicted:
        raise ValueError("agreement undefined for empty input")
    return sum(p is g for p, g in zip(predicted, gold)) / len(predicted)


# --- profile persistence -------------------------------------------------

PROFILE_FILE_VERSION = "profile-v1"


def save_profiles(profiles: Mapping[CEFRLevel, LevelProfile], path: str | Path) -> None:
    doc: dict = {"version": PROFILE_FILE_VERSION}
    for level in sorted(profiles, key=lambda l: l.numeric):
        prof = profiles[level]
        doc[level.value] = {**prof.features.to_dict(), "support": prof.support}
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=2), encoding="utf-8")


def load_profiles(path: str | Path) -> dict[CEFRLevel, LevelProfile]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("version") != PROFILE_FILE_VERSION:
        raise ToolkitError(f"unsupported profile file version {doc.get('version')!r}")
    profiles = {}
    for band, payload in doc.items():
        if band == "version":
            continue
        level = CEFRLevel.parse(band)
        support = int(payload.pop("support", 1))
        profiles[level] = LevelProfile(level=level,
                                       features=FeatureVector.from_dict(payload),
                                       support=support)
    return profiles
