"""Error taxonomy, pair alignment, rule-based tagging, and the two
count-based models used by the controlled injector.

The alignment is a weighted token-level edit search (substitution cost =
normalized character edit distance) that also proposes 2-1 and 1-2 spans so
missing/extra whitespace shows up as single spans. Tagging covers the
character-level-detectable orthographic classes; morphological, syntactic
and semantic classes need external annotation and fall back to UNK.

The realization model stores, per error tag, generalized character edits
learned from aligned pairs (falling back to memorized word pairs), with
exact count-ratio probabilities. The error-type model is a per-word
maximum-likelihood table with additive smoothing and a global backoff; it
stands in for a fine-tuned token classifier behind the same interface.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from difflib import SequenceMatcher
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Protocol, Sequence

from .corpus import CEFRLevel, Corpus
from .errors import ToolkitError
from .profiling import tokenize

COARSE_TAGS = ("M", "O", "S", "P", "X", "Comb", "SPLIT", "MERGE", "DELETE", "UNK", "NONE")


@dataclass(frozen=True, order=True)
class ErrorTag:
    coarse: str
    fine: Optional[str] = None

    def __post_init__(self):
        if self.coarse not in COARSE_TAGS:
            raise ValueError(f"unknown coarse tag {self.coarse!r}")
        if self.coarse in ("UNK", "NONE") and self.fine is not None:
            raise ValueError(f"{self.coarse} carries no fine class")
        if self.fine is not None and self.fine in FINE_TO_COARSE \
                and FINE_TO_COARSE[self.fine] != self.coarse:
            raise ValueError(
                f"fine tag {self.fine!r} belongs to coarse class "
                f"{FINE_TO_COARSE[self.fine]!r}, not {self.coarse!r}")

    def __str__(self) -> str:
        return self.fine if self.fine is not None else self.coarse

    @property
    def coarse_tag(self) -> "ErrorTag":
        return ErrorTag(self.coarse)

    @classmethod
    def parse(cls, name: str) -> "ErrorTag":
        if name in FINE_TO_COARSE:
            return cls(FINE_TO_COARSE[name], name)
        if name in COARSE_TAGS:
            return cls(name)
        raise ValueError(f"unknown error tag {name!r}")


@dataclass(frozen=True)
class ErrorInstruction:
    fine_tag: str
    coarse_tag: str
    description: str
    example_correct: Optional[str]
    example_erroneous: Optional[str]


def load_error_instructions(path: str | Path | None = None) -> dict[str, ErrorInstruction]:
    """Load the error-instruction repository (packaged copy by default)."""
    if path is None:
        raw = resources.files("cefraug").joinpath("data/error_instructions.json") \
            .read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    entries = json.loads(raw)
    repo: dict[str, ErrorInstruction] = {}
    for e in entries:
        instr = ErrorInstruction(
            fine_tag=e["fine_tag"], coarse_tag=e["coarse_tag"],
            description=e["description"],
            example_correct=e.get("example_correct"),
            example_erroneous=e.get("example_erroneous"))
        if instr.fine_tag in repo:
            raise ToolkitError(f"duplicate instruction for tag {instr.fine_tag!r}")
        repo[instr.fine_tag] = instr
    return repo


def _builtin_taxonomy() -> dict[str, str]:
    raw = resources.files("cefraug").joinpath("data/error_instructions.json") \
        .read_text(encoding="utf-8")
    return {e["fine_tag"]: e["coarse_tag"] for e in json.loads(raw)}


FINE_TO_COARSE: dict[str, str] = _builtin_taxonomy()

NO_ERROR = ErrorTag("NONE")
UNKNOWN = ErrorTag("UNK")


@dataclass(frozen=True)
class Transformation:
    source: Optional[str]  # correct side; None when an extra word appears
    target: Optional[str]  # erroneous side; None when a word goes missing
    tag: ErrorTag

    def __post_init__(self):
        if self.source is None and self.target is None:
            raise ValueError("source and target cannot both be NULL")


# --- token alignment ------------------------------------------------------

@lru_cache(maxsize=1 << 16)
def _char_distance(a: str, b: str) -> float:
    """Levenshtein distance normalized by the longer string, in [0, 1]."""
    if a == b:
        return 0.0
    if not a or not b:
        return 1.0
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1] / max(len(a), len(b))


@dataclass(frozen=True)
class AlignedSpan:
    source: tuple[str, ...]
    target: tuple[str, ...]
    source_index: int
    target_index: int
    cost: float

    @property
    def is_identity(self) -> bool:
        return self.source == self.target


_GAP_COST = 1.0
_MULTI_COST = 0.25  # cost of an exact-concatenation 2-1 or 1-2 span


def _banded_alignment(correct: Sequence[str], erroneous: Sequence[str],
                      width: int) -> Optional[tuple[list[AlignedSpan], float]]:
    """Minimum-cost DP restricted to cells with |i - j| <= width."""
    n, m = len(correct), len(erroneous)
    INF = float("inf")
    cost = [dict() for _ in range(n + 1)]
    back: list[dict] = [dict() for _ in range(n + 1)]
    cost[0][0] = 0.0
    for i in range(n + 1):
        row = cost[i]
        for j in range(max(0, i - width), min(m, i + width) + 1):
            base = row.get(j, INF)
            if base == INF:
                continue

            def relax(di: int, dj: int, step: float):
                ni, nj = i + di, j + dj
                if abs(ni - nj) > width:
                    return
                if base + step < cost[ni].get(nj, INF) - 1e-12:
                    cost[ni][nj] = base + step
                    back[ni][nj] = (di, dj, step)

            if i < n and j < m:
                relax(1, 1, _char_distance(correct[i], erroneous[j]))
            if i < n:
                relax(1, 0, _GAP_COST)
            if j < m:
                relax(0, 1, _GAP_COST)
            if i + 1 < n and j < m and correct[i] + correct[i + 1] == erroneous[j]:
                relax(2, 1, _MULTI_COST)
            if i < n and j + 1 < m and correct[i] == erroneous[j] + erroneous[j + 1]:
                relax(1, 2, _MULTI_COST)

    if m not in cost[n]:
        return None
    spans: list[AlignedSpan] = []
    i, j = n, m
    while i or j:
        di, dj, step = back[i][j]
        i, j = i - di, j - dj
        spans.append(AlignedSpan(
            source=tuple(correct[i:i + di]),
            target=tuple(erroneous[j:j + dj]),
            source_index=i, target_index=j, cost=step))
    spans.reverse()
    return spans, cost[n][m]


def align_pair(correct: Sequence[str], erroneous: Sequence[str]) -> list[AlignedSpan]:
    """Monotone minimum-cost alignment over tokens.

    Supports 1-1, 2-1 (split context), 1-2 (merge context), 1-0 (missing
    word) and 0-1 (extra word) spans. 2-1/1-2 spans are only proposed when
    the concatenation matches exactly, i.e. for pure whitespace errors.
    Total cost is zero iff the sequences are identical.

    The search trims the common prefix/suffix, then runs a banded DP whose
    band widens until the optimum provably cannot lie outside it, so the
    result matches the exhaustive search while staying near-linear on
    lightly-edited pairs.
    """
    correct = list(correct)
    erroneous = list(erroneous)
    n, m = len(correct), len(erroneous)
    prefix = 0
    while prefix < n and prefix < m and correct[prefix] == erroneous[prefix]:
        prefix += 1
    suffix = 0
    while (suffix < n - prefix and suffix < m - prefix
           and correct[n - 1 - suffix] == erroneous[m - 1 - suffix]):
        suffix += 1

    core_c = correct[prefix:n - suffix]
    core_e = erroneous[prefix:m - suffix]
    skew = abs(len(core_c) - len(core_e))
    width = skew + 32
    while True:
        result = _banded_alignment(core_c, core_e, width)
        full_width = width >= len(core_c) + len(core_e)
        if result is not None:
            core_spans, total = result
            # Any path escaping the band makes more than (width - skew)
            # off-diagonal moves, each costing at least _MULTI_COST.
            if full_width or total <= (width - skew) * _MULTI_COST:
                break
        if full_width:
            raise AssertionError("unbounded alignment failed")  # unreachable
        width *= 2

    spans = [AlignedSpan(source=(correct[k],), target=(erroneous[k],),
                         source_index=k, target_index=k, cost=0.0)
             for k in range(prefix)]
    for span in core_spans:
        spans.append(AlignedSpan(source=span.source, target=span.target,
                                 source_index=span.source_index + prefix,
                                 target_index=span.target_index + prefix,
                                 cost=span.cost))
    for k in range(suffix):
        i = n - suffix + k
        j = m - suffix + k
        spans.append(AlignedSpan(source=(correct[i],), target=(erroneous[j],),
                                 source_index=i, target_index=j, cost=0.0))
    return spans


# --- rule-based tagging ---------------------------------------------------

_ALEF_FAMILY = ("أ", "إ", "آ", "ا")
_OT_PAIRS = {("ة", "ه"), ("ه", "ة")}
_OA_PAIRS = {("ى", "ي"), ("ي", "ى"), ("ى", "ا"), ("ا", "ى")}
_OH_PAIRS = {(a, b) for a in _ALEF_FAMILY for b in _ALEF_FAMILY if a != b} | {
    ("ؤ", "و"), ("و", "ؤ"), ("ئ", "ي"), ("ي", "ئ"), ("ء", "ئ"), ("ئ", "ء"),
}


def _classify_char_pair(c: str, e: str) -> str:
    pair = (c, e)
    if pair in _OT_PAIRS:
        return "OT"
    if pair in _OA_PAIRS:
        return "OA"
    if pair in _OH_PAIRS:
        return "OH"
    return "OR"


def _adjacent_swap(c: str, e: str) -> Optional[tuple[str, str]]:
    """The swapped pair when `e` is `c` with exactly two adjacent chars
    transposed, else None."""
    if len(c) != len(e) or c == e:
        return None
    diffs = [i for i in range(len(c)) if c[i] != e[i]]
    if len(diffs) == 2 and diffs[1] == diffs[0] + 1:
        i = diffs[0]
        if c[i] == e[i + 1] and c[i + 1] == e[i]:
            return c[i], c[i + 1]
    return None


def _word_pair_evidence(c: str, e: str) -> set[str]:
    if _adjacent_swap(c, e) is not None:
        return {"OC"}
    evidence: set[str] = set()
    sm = SequenceMatcher(None, c, e, autojunk=False)
    for op, i1, i2, j1, j2 in sm.get_opcodes():
        if op == "equal":
            continue
        if op == "replace":
            sc, se = c[i1:i2], e[j1:j2]
            if len(sc) == 2 and len(se) == 2 and sc == se[::-1] and sc[0] != sc[1]:
                evidence.add("OC")
            else:
                for k in range(min(len(sc), len(se))):
                    evidence.add(_classify_char_pair(sc[k], se[k]))
                if len(se) > len(sc):
                    evidence.add("OD")
                elif len(sc) > len(se):
                    evidence.add("OM")
        elif op == "insert":
            evidence.add("OD")
        elif op == "delete":
            seg = c[i1:i2]
            if seg == "ا" and i2 == len(c) and i1 >= 1 and c[i1 - 1] == "و":
                evidence.add("OW")
            else:
                evidence.add("OM")
    return evidence


def tag_error(span: AlignedSpan) -> ErrorTag:
    """Deterministic tag for a non-identity span.

    Character-diff rules cover the orthographic subfamily; SPLIT, MERGE,
    DELETE and XM come from span shape. Anything else is UNK.
    """
    if span.is_identity:
        raise ValueError("cannot tag an identity span")
    ns, nt = len(span.source), len(span.target)
    if ns == 2 and nt == 1:
        return ErrorTag.parse("SPLIT") if "".join(span.source) == span.target[0] else UNKNOWN
    if ns == 1 and nt == 2:
        return ErrorTag.parse("MERGE") if "".join(span.target) == span.source[0] else UNKNOWN
    if ns == 1 and nt == 0:
        return ErrorTag.parse("XM")
    if ns == 0 and nt == 1:
        return ErrorTag.parse("DELETE")
    if ns == 1 and nt == 1:
        # An exact adjacent transposition is reliable at any edit distance;
        # mostly-different words otherwise are lexical/morphological
        # replacements the character rules cannot classify.
        if _adjacent_swap(span.source[0], span.target[0]) is not None:
            return ErrorTag.parse("OC")
        if _char_distance(span.source[0], span.target[0]) > 0.5:
            return UNKNOWN
        evidence = _word_pair_evidence(span.source[0], span.target[0])
        if len(evidence) == 1:
            name = next(iter(evidence))
        elif len(evidence) == 2:
            name = "+".join(sorted(evidence))
        else:
            return UNKNOWN
        return ErrorTag.parse(name) if name in FINE_TO_COARSE else UNKNOWN
    return UNKNOWN


# --- edit patterns --------------------------------------------------------

@dataclass(frozen=True, order=True)
class EditPattern:
    """A reusable corruption: generalized character edit or memorized pair."""

    kind: str
    args: tuple[str, ...] = ()

    def apply(self, word: str) -> Optional[str]:
        """Corrupted form of `word`, or None when the pattern does not apply."""
        k, a = self.kind, self.args
        if k == "suffix_sub":
            old, new = a
            if word.endswith(old) and len(word) > len(old):
                return word[: -len(old)] + new
        elif k == "char_sub":
            old, new = a
            if old in word:
                return word.replace(old, new, 1)
        elif k == "insert_after":
            anchor, ch = a
            if anchor == "^":
                return ch + word
            idx = word.find(anchor)
            if idx != -1:
                return word[: idx + 1] + ch + word[idx + 1:]
        elif k == "delete_after":
            ch, prev = a
            if prev == "^":
                if word.startswith(ch) and len(word) > len(ch):
                    return word[len(ch):]
            else:
                idx = word.find(prev + ch)
                if idx != -1 and len(word) > 1:
                    out = word[: idx + 1] + word[idx + 1 + len(ch):]
                    if out:
                        return out
        elif k == "swap_adjacent":
            x, y = a
            idx = word.find(x + y)
            if idx != -1:
                return word[:idx] + y + x + word[idx + 2:]
        elif k == "word_pair":
            src, tgt = a
            if word == src:
                return tgt
        elif k == "insert_word":
            return word + " " + a[0]
        elif k == "drop_word":
            if word == a[0]:
                return ""
        else:
            raise ValueError(f"unknown pattern kind {k!r}")
        return None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "args": list(self.args)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "EditPattern":
        return cls(kind=d["kind"], args=tuple(d["args"]))


def generalize_pattern(source: Optional[str], target: Optional[str]) -> EditPattern:
    """Distill a transformation into a generalized edit when possible."""
    if source is None:
        return EditPattern("insert_word", (target,))
    if target is None:
        return EditPattern("drop_word", (source,))
    if " " in source or " " in target:
        return EditPattern("word_pair", (source, target))
    swap = _adjacent_swap(source, target)
    if swap is not None:
        return EditPattern("swap_adjacent", swap)
    ops = [op for op in SequenceMatcher(None, source, target, autojunk=False).get_opcodes()
           if op[0] != "equal"]
    if len(ops) == 1:
        op, i1, i2, j1, j2 = ops[0]
        sc, se = source[i1:i2], target[j1:j2]
        if op == "replace":
            if len(sc) == 1 and len(se) == 1:
                if i2 == len(source) and j2 == len(target):
                    return EditPattern("suffix_sub", (sc, se))
                return EditPattern("char_sub", (sc, se))
            if len(sc) == 2 and len(se) == 2 and sc == se[::-1] and sc[0] != sc[1]:
                return EditPattern("swap_adjacent", (sc[0], sc[1]))
        elif op == "insert" and len(se) == 1:
            if i1 == 0:
                return EditPattern("insert_after", ("^", se))
            if j2 == len(target):
                return EditPattern("suffix_sub", (source[i1 - 1], source[i1 - 1] + se))
            return EditPattern("insert_after", (source[i1 - 1], se))
        elif op == "delete" and len(sc) == 1:
            if i1 == 0:
                return EditPattern("delete_after", (sc, "^"))
            if i2 == len(source):
                return EditPattern("suffix_sub", (source[i1 - 1] + sc, source[i1 - 1]))
            return EditPattern("delete_after", (sc, source[i1 - 1]))
    return EditPattern("word_pair", (source, target))


# Fallback corruption rules, one per realizable tag, used when no learned
# pattern applies to a word.
_OR_CONFUSABLE = (("س", "ص"), ("ص", "س"), ("ت", "ط"), ("ط", "ت"), ("د", "ض"),
                  ("ض", "د"), ("ذ", "ظ"), ("ظ", "ذ"), ("ق", "ك"), ("ك", "ق"),
                  ("ح", "ه"), ("ر", "ز"))
_P_SWAPS = {"،": ".", ".": "،", "؟": ".", "!": ".", "؛": ","}
_CLITICS = ("و", "ف", "ب", "ك", "ل")


def _rule_ot(w: str) -> Optional[str]:
    return w[:-1] + "ه" if w.endswith("ة") and len(w) > 1 else None


def _rule_oa(w: str) -> Optional[str]:
    if w.endswith("ي") and len(w) > 1:
        return w[:-1] + "ى"
    if w.endswith("ى") and len(w) > 1:
        return w[:-1] + "ي"
    return None


def _rule_oh(w: str) -> Optional[str]:
    for old, new in (("أ", "ا"), ("إ", "ا"), ("آ", "ا"), ("ؤ", "و"),
                     ("ئ", "ي"), ("ا", "أ")):
        if old in w:
            return w.replace(old, new, 1)
    return None


def _rule_od(w: str) -> Optional[str]:
    return w[:1] + "ا" + w[1:] if len(w) >= 2 else None


def _rule_om(w: str) -> Optional[str]:
    if len(w) < 3:
        return None
    i = len(w) // 2
    return w[:i] + w[i + 1:]


def _rule_ow(w: str) -> Optional[str]:
    return w[:-1] if w.endswith("وا") and len(w) > 2 else None


def _rule_or(w: str) -> Optional[str]:
    for old, new in _OR_CONFUSABLE:
        if old in w:
            return w.replace(old, new, 1)
    return None


def _rule_oc(w: str) -> Optional[str]:
    for i in range(len(w) - 1):
        if w[i] != w[i + 1]:
            return w[:i] + w[i + 1] + w[i] + w[i + 2:]
    return None


def _rule_p(w: str) -> Optional[str]:
    return _P_SWAPS.get(w)


def _rule_sf(w: str) -> Optional[str]:
    return w[1:] if w[:1] in ("ف", "و") and len(w) > 2 else None


def _rule_xg(w: str) -> Optional[str]:
    return w[:-1] if w.endswith("ة") and len(w) > 2 else w + "ة"


def _rule_xf(w: str) -> Optional[str]:
    return w[2:] if w.startswith("ال") and len(w) > 3 else "ال" + w


def _rule_xm(w: str) -> Optional[str]:
    return ""


def _rule_delete(w: str) -> Optional[str]:
    return w + " " + w


def _rule_merge(w: str) -> Optional[str]:
    return w[0] + " " + w[1:] if len(w) >= 3 and w[0] in _CLITICS else None


DEFAULT_RULES: dict[str, Callable[[str], Optional[str]]] = {
    "OT": _rule_ot, "OA": _rule_oa, "OH": _rule_oh, "OD": _rule_od,
    "OM": _rule_om, "OW": _rule_ow, "OR": _rule_or, "OC": _rule_oc,
    "P": _rule_p, "SF": _rule_sf, "XG": _rule_xg, "XF": _rule_xf,
    "XM": _rule_xm, "DELETE": _rule_delete, "MERGE": _rule_merge,
    "O": _rule_om,
}


def apply_default_rule(tag_name: str, word: str) -> Optional[str]:
    """Apply a tag's fallback corruption rule; None when inapplicable."""
    rule = DEFAULT_RULES.get(tag_name)
    if rule is None or not word:
        return None
    out = rule(word)
    return out if out != word else None


# --- extraction over paired corpora ----------------------------------------

@dataclass
class PairAnalysis:
    transformations: list[Transformation]
    clean_word_counts: Counter
    by_essay: dict[str, list[Transformation]]


def analyze_pairs(corpus: Corpus,
                  tagger: Callable[[AlignedSpan], ErrorTag] = tag_error) -> PairAnalysis:
    """Align every erroneous essay against its correct counterpart.

    Returns the labeled transformation multiset, per-essay breakdowns, and
    counts of tokens that came through unchanged (the no-error events the
    type model trains on).
    """
    transformations: list[Transformation] = []
    clean: Counter = Counter()
    by_essay: dict[str, list[Transformation]] = {}
    for essay in corpus:
        if essay.paired_id is None:
            continue
        correct = corpus.by_id(essay.paired_id)
        spans = align_pair(tokenize(correct.text), tokenize(essay.text))
        found: list[Transformation] = []
        for span in spans:
            if span.is_identity:
                clean[span.source[0]] += 1
                continue
            found.append(Transformation(
                source=" ".join(span.source) if span.source else None,
                target=" ".join(span.target) if span.target else None,
                tag=tagger(span)))
        by_essay[essay.id] = found
        transformations.extend(found)
    return PairAnalysis(transformations, clean, by_essay)


def extract_transformations(corpus: Corpus,
                            tagger: Callable[[AlignedSpan], ErrorTag] = tag_error,
                            ) -> list[Transformation]:
    return analyze_pairs(corpus, tagger).transformations


# --- error-type model -------------------------------------------------------

class ErrorTypeClassifier(Protocol):
    """Anything that maps a word to a tag distribution can drive injection."""

    def distribution(self, word: str) -> Mapping[ErrorTag, float]: ...


@dataclass
class ErrorTypeModel:
    lexicon: dict[str, dict[ErrorTag, float]]
    backoff: dict[ErrorTag, float]
    smoothing: float
    counts: dict[str, dict[ErrorTag, int]] = field(default_factory=dict)

    def distribution(self, word: str) -> Mapping[ErrorTag, float]:
        return self.lexicon.get(word, self.backoff)


def _smoothed(counts: Mapping[ErrorTag, float], support: Sequence[ErrorTag],
              alpha: float) -> dict[ErrorTag, float]:
    total = sum(counts.values()) + alpha * len(support)
    return {t: (counts.get(t, 0.0) + alpha) / total for t in support}


def train_error_type_model(transformations: Sequence[Transformation],
                           clean_word_counts: Mapping[str, int],
                           smoothing: float = 0.1) -> ErrorTypeModel:
    """Per-word MLE over observed tags plus the no-error event.

    Clean occurrences feed the NO_ERROR mass; unseen words get the global
    (smoothed) tag distribution as backoff.
    """
    if not transformations and not clean_word_counts:
        raise ValueError("cannot train an error-type model on empty data")
    word_counts: dict[str, Counter] = defaultdict(Counter)
    for t in transformations:
        if t.source is not None:
            word_counts[t.source][t.tag] += 1
    for word, n in clean_word_counts.items():
        if n:
            word_counts[word][NO_ERROR] += n
    support = sorted({tag for c in word_counts.values() for tag in c} | {NO_ERROR},
                     key=str)
    lexicon = {w: _smoothed(c, support, smoothing) for w, c in word_counts.items()}
    global_counts: Counter = Counter()
    for c in word_counts.values():
        global_counts.update(c)
    backoff = _smoothed(global_counts, support, smoothing)
    return ErrorTypeModel(lexicon=lexicon, backoff=backoff, smoothing=smoothing,
                          counts={w: dict(c) for w, c in word_counts.items()})


# --- realization model --------------------------------------------------------

@dataclass
class RealizationModel:
    table: dict[ErrorTag, dict[EditPattern, float]]
    counts: dict[ErrorTag, dict[EditPattern, int]]

    def distribution_for(self, tag: ErrorTag) -> dict[EditPattern, float]:
        if tag not in self.table:
            raise ValueError(f"no realization distribution for tag {tag}")
        return self.table[tag]

    def tags(self) -> set[ErrorTag]:
        return set(self.table)


def train_realization_model(transformations: Sequence[Transformation]) -> RealizationModel:
    """Exact MLE: P(pattern | tag) = count(pattern, tag) / count(tag)."""
    if not transformations:
        raise ValueError("cannot train a realization model on empty data")
    counts: dict[ErrorTag, Counter] = defaultdict(Counter)
    for t in transformations:
        counts[t.tag][generalize_pattern(t.source, t.target)] += 1
    table = {}
    for tag, pattern_counts in counts.items():
        total = sum(pattern_counts.values())
        table[tag] = {p: c / total for p, c in pattern_counts.items()}
    return RealizationModel(table=table,
                            counts={t: dict(c) for t, c in counts.items()})


# --- error profiles -----------------------------------------------------------

@dataclass(frozen=True)
class ErrorProfile:
    level: CEFRLevel
    tag_dist: Mapping[ErrorTag, float]
    avg_errors_per_essay: float
    avg_count_by_tag: Mapping[ErrorTag, float]

    def __post_init__(self):
        if self.avg_errors_per_essay < 0:
            raise ValueError("avg_errors_per_essay must be >= 0")
        if self.tag_dist:
            total = sum(self.tag_dist.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"tag distribution sums to {total!r}, not 1")
        count_total = sum(self.avg_count_by_tag.values())
        if abs(count_total - self.avg_errors_per_essay) > 1e-6:
            raise ValueError("avg_count_by_tag must sum to avg_errors_per_essay")

    @property
    def support(self) -> frozenset[ErrorTag]:
        return frozenset(t for t, p in self.tag_dist.items() if p > 0)

    def weight(self, tag: ErrorTag) -> float:
        """Profile mass for a tag: exact key first, else its coarse class."""
        if tag in self.tag_dist:
            return self.tag_dist[tag]
        return self.tag_dist.get(tag.coarse_tag, 0.0)

    def project(self, tag: ErrorTag) -> ErrorTag:
        """Map a tag onto the profile's key space (exact else coarse)."""
        if tag in self.tag_dist:
            return tag
        coarse = tag.coarse_tag
        return coarse if coarse in self.tag_dist else tag


def build_error_profile(corpus: Corpus, level: CEFRLevel,
                        granularity: str = "coarse",
                        tagger: Callable[[AlignedSpan], ErrorTag] = tag_error,
                        ) -> ErrorProfile:
    """Tag distribution and average error counts for one CEFR level.

    Only paired (erroneous) essays at the level contribute; an error-free
    level has no usable distribution and is rejected as degenerate.
    """
    if granularity not in ("coarse", "fine"):
        raise ValueError(f"granularity must be 'coarse' or 'fine', got {granularity!r}")
    members = [e for e in corpus if e.level_gold is level and e.paired_id is not None]
    if not members:
        raise ValueError(f"no paired essays at level {level.value}")
    analysis = analyze_pairs(corpus, tagger)
    tag_counts: Counter = Counter()
    total = 0
    for e in members:
        for t in analysis.by_essay.get(e.id, []):
            key = t.tag.coarse_tag if granularity == "coarse" else t.tag
            tag_counts[key] += 1
            total += 1
    if total == 0:
        raise ValueError(f"level {level.value} is error-free; profile is degenerate")
    n = len(members)
    return ErrorProfile(
        level=level,
        tag_dist={t: c / total for t, c in tag_counts.items()},
        avg_errors_per_essay=total / n,
        avg_count_by_tag={t: c / n for t, c in tag_counts.items()},
    )


def build_all_error_profiles(corpus: Corpus, granularity: str = "coarse",
                             ) -> dict[CEFRLevel, ErrorProfile]:
    profiles = {}
    for level in CEFRLevel:
        if not level.is_assessable:
            continue
        if any(e.level_gold is level and e.paired_id is not None for e in corpus):
            profiles[level] = build_error_profile(corpus, level, granularity)
    return profiles


# --- persistence ---------------------------------------------------------------

TYPE_MODEL_VERSION = "type-model-v1"
REALIZATION_MODEL_VERSION = "realization-model-v1"
ERROR_PROFILE_VERSION = "error-profile-v1"


def save_type_model(model: ErrorTypeModel, path: str | Path) -> None:
    doc = {
        "version": TYPE_MODEL_VERSION,
        "smoothing": model.smoothing,
        "lexicon": {w: {str(t): p for t, p in sorted(d.items(), key=lambda kv: str(kv[0]))}
                    for w, d in sorted(model.lexicon.items())},
        "backoff": {str(t): p for t, p in sorted(model.backoff.items(), key=lambda kv: str(kv[0]))},
        "counts": {w: {str(t): c for t, c in sorted(d.items(), key=lambda kv: str(kv[0]))}
                   for w, d in sorted(model.counts.items())},
    }
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=2), encoding="utf-8")


def load_type_model(path: str | Path) -> ErrorTypeModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("version") != TYPE_MODEL_VERSION:
        raise ToolkitError(f"unsupported type-model version {doc.get('version')!r}")
    parse = ErrorTag.parse
    return ErrorTypeModel(
        lexicon={w: {parse(t): p for t, p in d.items()} for w, d in doc["lexicon"].items()},
        backoff={parse(t): p for t, p in doc["backoff"].items()},
        smoothing=doc["smoothing"],
        counts={w: {parse(t): c for t, c in d.items()}
                for w, d in doc.get("counts", {}).items()},
    )


def save_realization_model(model: RealizationModel, path: str | Path) -> None:
    doc = {"version": REALIZATION_MODEL_VERSION, "tags": {}}
    for tag in sorted(model.table, key=str):
        entries = []
        for pattern in sorted(model.table[tag]):
            entries.append({**pattern.to_dict(),
                            "count": model.counts[tag][pattern],
                            "probability": model.table[tag][pattern]})
        doc["tags"][str(tag)] = entries
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=2), encoding="utf-8")


def load_realization_model(path: str | Path) -> RealizationModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("version") != REALIZATION_MODEL_VERSION:
        raise ToolkitError(f"unsupported realization-model version {doc.get('version')!r}")
    table: dict[ErrorTag, dict[EditPattern, float]] = {}
    counts: dict[ErrorTag, dict[EditPattern, int]] = {}
    for tag_name, entries in doc["tags"].items():
        tag = ErrorTag.parse(tag_name)
        table[tag] = {}
        counts[tag] = {}
        for e in entries:
            pattern = EditPattern.from_dict(e)
            table[tag][pattern] = e["probability"]
            counts[tag][pattern] = e["count"]
    return RealizationModel(table=table, counts=counts)


def save_error_profiles(profiles: Mapping[CEFRLevel, ErrorProfile], path: str | Path) -> None:
    doc: dict = {"version": ERROR_PROFILE_VERSION}
    for level in sorted(profiles, key=lambda l: l.numeric):
        prof = profiles[level]
        doc[level.value] = {
            "tag_dist": {str(t): p for t, p in sorted(prof.tag_dist.items(), key=lambda kv: str(kv[0]))},
            "avg_errors_per_essay": prof.avg_errors_per_essay,
            "avg_count_by_tag": {str(t): c for t, c in sorted(prof.avg_count_by_tag.items(), key=lambda kv: str(kv[0]))},
        }
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=2), encoding="utf-8")


def load_error_profiles(path: str | Path) -> dict[CEFRLevel, ErrorProfile]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("version") != ERROR_PROFILE_VERSION:
        raise ToolkitError(f"unsupported error-profile version {doc.get('version')!r}")
    profiles = {}
    for band, payload in doc.items():
        if band == "version":
            continue
        level = CEFRLevel.parse(band)
        profiles[level] = ErrorProfile(
            level=level,
            tag_dist={ErrorTag.parse(t): p for t, p in payload["tag_dist"].items()},
            avg_errors_per_essay=payload["avg_errors_per_essay"],
            avg_count_by_tag={ErrorTag.parse(t): c
                              for t, c in payload["avg_count_by_tag"].items()},
        )
    return profiles
