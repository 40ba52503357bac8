"""Essay corpus data model: CEFR levels, rater triples, JSONL persistence, splits.

Essays are immutable after construction; every "mutation" builds a new
Corpus. Erroneous essays point at their correct counterpart through
``paired_id``.
"""

from __future__ import annotations

import json
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import CorpusFormatError


class CEFRLevel(Enum):
    A1 = "A1"
    A2 = "A2"
    B1 = "B1"
    B2 = "B2"
    C1 = "C1"
    C2 = "C2"
    UNASSESSABLE = "UNASSESSABLE"

    @property
    def is_assessable(self) -> bool:
        return self is not CEFRLevel.UNASSESSABLE

    @property
    def numeric(self) -> int:
        """Integer score 1..6 (A1=1 ... C2=6). Undefined for UNASSESSABLE."""
        if not self.is_assessable:
            raise ValueError("UNASSESSABLE has no numeric score")
        return _BAND_TO_NUMERIC[self]

    @classmethod
    def from_numeric(cls, score: int) -> "CEFRLevel":
        try:
            return _NUMERIC_TO_BAND[score]
        except KeyError:
            raise ValueError(f"numeric CEFR score must be 1..6, got {score!r}") from None

    @classmethod
    def parse(cls, band: str) -> "CEFRLevel":
        try:
            return cls(band)
        except ValueError:
            raise ValueError(f"unknown CEFR band {band!r}") from None


ASSESSABLE_LEVELS: tuple[CEFRLevel, ...] = (
    CEFRLevel.A1, CEFRLevel.A2, CEFRLevel.B1,
    CEFRLevel.B2, CEFRLevel.C1, CEFRLevel.C2,
)
_BAND_TO_NUMERIC = {lvl: i + 1 for i, lvl in enumerate(ASSESSABLE_LEVELS)}
_NUMERIC_TO_BAND = {i + 1: lvl for i, lvl in enumerate(ASSESSABLE_LEVELS)}

PROVENANCES = ("human", "generated", "injected")
SPLITS = ("train", "dev", "test")


@dataclass(frozen=True)
class RaterTriple:
    """Exactly three independent rater annotations for one essay."""

    ratings: tuple[CEFRLevel, CEFRLevel, CEFRLevel]

    def __post_init__(self):
        if len(self.ratings) != 3:
            raise ValueError(f"rater triple must hold exactly 3 ratings, got {len(self.ratings)}")

    @property
    def all_assessable(self) -> bool:
        return all(r.is_assessable for r in self.ratings)


def rounded_average_level(triple: RaterTriple) -> CEFRLevel:
    """Collapse three rater scores to one band via the rounded mean.

    Half values round up (3.5 -> 4); computed with exact rational
    arithmetic so no float edge case can flip a band.
    """
    if not triple.all_assessable:
        raise ValueError("cannot average a triple containing UNASSESSABLE ratings")
    mean = Fraction(sum(r.numeric for r in triple.ratings), 3)
    return CEFRLevel.from_numeric(int(mean + Fraction(1, 2)))


@dataclass(frozen=True)
class Essay:
    id: str
    text: str
    topic: str = ""
    prompt_id: Optional[str] = None
    level_gold: Optional[CEFRLevel] = None
    rater_triple: Optional[RaterTriple] = None
    provenance: str = "human"
    paired_id: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("essay id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"essay {self.id!r}: text is empty after trimming")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"essay {self.id!r}: unknown provenance {self.provenance!r}")
        if self.provenance == "injected" and not self.paired_id:
            raise ValueError(f"essay {self.id!r}: injected essays must carry paired_id")


class Corpus:
    """Ordered, id-indexed collection of essays with optional split labels."""

    def __init__(self, essays: Iterable[Essay], split: Optional[Mapping[str, str]] = None):
        self._essays: tuple[Essay, ...] = tuple(essays)
        self._by_id: dict[str, Essay] = {}
        for e in self._essays:
            if e.id in self._by_id:
                raise ValueError(f"duplicate essay id {e.id!r}")
            self._by_id[e.id] = e
        for e in self._essays:
            if e.paired_id is not None and e.paired_id not in self._by_id:
                raise ValueError(f"essay {e.id!r}: paired_id {e.paired_id!r} not found in corpus")
        if split is not None:
            for eid, label in split.items():
                if eid not in self._by_id:
                    raise ValueError(f"split label for unknown essay id {eid!r}")
                if label not in SPLITS:
                    raise ValueError(f"unknown split label {label!r} for essay {eid!r}")
        self._split: Optional[dict[str, str]] = dict(split) if split is not None else None

    def __len__(self) -> int:
        return len(self._essays)

    def __iter__(self) -> Iterator[Essay]:
        return iter(self._essays)

    def __getitem__(self, i: int) -> Essay:
        return self._essays[i]

    @property
    def essays(self) -> tuple[Essay, ...]:
        return self._essays

    @property
    def split(self) -> Optional[Mapping[str, str]]:
        return self._split

    def by_id(self, essay_id: str) -> Essay:
        return self._by_id[essay_id]

    def __contains__(self, essay_id: str) -> bool:
        return essay_id in self._by_id

    def subset(self, *, split: Optional[str] = None,
               level: Optional[CEFRLevel] = None,
               provenance: Optional[str] = None) -> "Corpus":
        keep = []
        for e in self._essays:
            if split is not None and (self._split or {}).get(e.id) != split:
                continue
            if level is not None and e.level_gold is not level:
                continue
            if provenance is not None and e.provenance != provenance:
                continue
            keep.append(e)
        sub_split = None
        if self._split is not None:
            sub_split = {e.id: self._split[e.id] for e in keep if e.id in self._split}
        return Corpus(keep, split=sub_split)

    def training_subset(self) -> "Corpus":
        """Train-split essays minus UNASSESSABLE ones (those never train a model)."""
        sub = self.subset(split="train")
        keep = [e for e in sub if e.level_gold is not CEFRLevel.UNASSESSABLE]
        return Corpus(keep)

    def level_counts(self) -> dict[CEFRLevel, int]:
        counts: dict[CEFRLevel, int] = defaultdict(int)
        for e in self._essays:
            if e.level_gold is not None:
                counts[e.level_gold] += 1
        return dict(counts)


# --- JSONL persistence -------------------------------------------------

_CORE_KEYS = {"id", "text", "topic", "prompt_id", "level_gold",
              "rater_triple", "provenance", "paired_id"}
# "split" is an extension key so split corpora survive a save/load cycle.
_KNOWN_KEYS = _CORE_KEYS | {"split"}


def _essay_from_record(rec: dict, line: int) -> tuple[Essay, Optional[str]]:
    if not isinstance(rec, dict):
        raise CorpusFormatError("record is not a JSON object", line=line)
    for key in rec:
        if key not in _KNOWN_KEYS:
            raise CorpusFormatError(f"unknown key {key!r}", line=line, field=key)
    for key in ("id", "text"):
        if key not in rec:
            raise CorpusFormatError("required key missing", line=line, field=key)
        if not isinstance(rec[key], str):
            raise CorpusFormatError("must be a string", line=line, field=key)

    level = None
    if rec.get("level_gold") is not None:
        try:
            level = CEFRLevel.parse(rec["level_gold"])
        except (ValueError, TypeError) as exc:
            raise CorpusFormatError(str(exc), line=line, field="level_gold") from None

    triple = None
    if rec.get("rater_triple") is not None:
        raw = rec["rater_triple"]
        if not isinstance(raw, list) or len(raw) != 3:
            raise CorpusFormatError("must be an array of 3 band strings",
                                    line=line, field="rater_triple")
        try:
            triple = RaterTriple(tuple(CEFRLevel.parse(b) for b in raw))
        except (ValueError, TypeError) as exc:
            raise CorpusFormatError(str(exc), line=line, field="rater_triple") from None

    split_label = rec.get("split")
    if split_label is not None and split_label not in SPLITS:
        raise CorpusFormatError(f"unknown split label {split_label!r}",
                                line=line, field="split")
    try:
        essay = Essay(
            id=rec["id"],
            text=rec["text"],
            topic=rec.get("topic") or "",
            prompt_id=rec.get("prompt_id"),
            level_gold=level,
            rater_triple=triple,
            provenance=rec.get("provenance") or "human",
            paired_id=rec.get("paired_id"),
        )
    except ValueError as exc:
        raise CorpusFormatError(str(exc), line=line) from None
    return essay, split_label


def load_corpus(path: str | Path) -> Corpus:
    """Read a JSON-lines corpus file (UTF-8, one essay object per line)."""
    path = Path(path)
    essays: list[Essay] = []
    split: dict[str, str] = {}
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON: {exc.msg}", line=line_no) from None
            essay, split_label = _essay_from_record(rec, line_no)
            if essay.id in seen:
                raise CorpusFormatError(f"duplicate essay id {essay.id!r}",
                                        line=line_no, field="id")
            seen.add(essay.id)
            essays.append(essay)
            if split_label is not None:
                split[essay.id] = split_label
    return Corpus(essays, split=split if split else None)


def essay_to_record(essay: Essay, split_label: Optional[str] = None) -> dict:
    rec: dict = {"id": essay.id, "text": essay.text}
    if essay.topic:
        rec["topic"] = essay.topic
    if essay.prompt_id is not None:
        rec["prompt_id"] = essay.prompt_id
    if essay.level_gold is not None:
        rec["level_gold"] = essay.level_gold.value
    if essay.rater_triple is not None:
        rec["rater_triple"] = [r.value for r in essay.rater_triple.ratings]
    rec["provenance"] = essay.provenance
    if essay.paired_id is not None:
        rec["paired_id"] = essay.paired_id
    if split_label is not None:
        rec["split"] = split_label
    return rec


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for e in corpus:
            label = (corpus.split or {}).get(e.id)
            fh.write(json.dumps(essay_to_record(e, label), ensure_ascii=False))
            fh.write("\n")


# --- splitting ----------------------------------------------------------

def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _largest_remainder(group_sizes: Sequence[int], total: int) -> list[int]:
    """Apportion `total` slots across groups proportionally to their sizes."""
    n = sum(group_sizes)
    if n == 0 or total <= 0:
        return [0] * len(group_sizes)
    quotas = [gs * total / n for gs in group_sizes]
    alloc = [math.floor(q) for q in quotas]
    leftovers = total - sum(alloc)
    order = sorted(range(len(group_sizes)),
                   key=lambda i: (-(quotas[i] - alloc[i]), i))
    for i in order[:leftovers]:
        alloc[i] += 1
    return alloc


def split_corpus(corpus: Corpus, ratios: tuple[float, float, float], seed: int) -> Corpus:
    """Partition a corpus into train/dev/test.

    Dev and test sizes are round(ratio * N); the remainder goes to train.
    Stratified by gold level whenever any essay carries one; deterministic
    for a fixed seed.
    """
    r_train, r_dev, r_test = ratios
    if any(r < 0 for r in ratios):
        raise ValueError("split ratios must be non-negative")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {sum(ratios)!r}")

    n = len(corpus)
    if n == 0:
        return Corpus((), split={})
    n_dev = _round_half_up(r_dev * n)
    n_test = min(_round_half_up(r_test * n), n - n_dev)

    has_labels = any(e.level_gold is not None for e in corpus)
    strata: dict[str, list[Essay]] = defaultdict(list)
    for e in corpus:
        key = e.level_gold.value if (has_labels and e.level_gold is not None) else "~none"
        strata[key].append(e)
    keys = sorted(strata)
    sizes = [len(strata[k]) for k in keys]

    dev_alloc = _largest_remainder(sizes, n_dev)
    test_alloc = _largest_remainder(sizes, n_test)
    # A tiny stratum can be over-subscribed by the two independent
    # apportionments; push the surplus to strata with spare capacity.
    for i in range(len(keys)):
        while dev_alloc[i] + test_alloc[i] > sizes[i]:
            test_alloc[i] -= 1
            for j in range(len(keys)):
                if j != i and dev_alloc[j] + test_alloc[j] < sizes[j]:
                    test_alloc[j] += 1
                    break

    rng = random.Random(seed)
    labels: dict[str, str] = {}
    for i, key in enumerate(keys):
        members = list(strata[key])
        rng.shuffle(members)
        for j, essay in enumerate(members):
            if j < dev_alloc[i]:
                labels[essay.id] = "dev"
            elif j < dev_alloc[i] + test_alloc[i]:
                labels[essay.id] = "test"
            else:
                labels[essay.id] = "train"
    return Corpus(corpus.essays, split=labels)
