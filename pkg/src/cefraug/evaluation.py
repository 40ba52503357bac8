"""Scoring of CEFR predictions: QWK, accuracy, macro P/R/F1 under the
average-reference and multi-reference protocols.

UNASSESSABLE gold essays count as automatic accuracy misses but are
excluded from QWK (they have no ordinal position) and from the macro
per-class tallies; their count is reported on the side.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Mapping, Optional, Sequence

from .corpus import (ASSESSABLE_LEVELS, CEFRLevel, Corpus, Essay, RaterTriple,
                     rounded_average_level)
from .errors import ToolkitError
from .profiling import LevelProfile, assign_nearest_level, extract_features

AVERAGE_REFERENCE = "average_reference"
MULTI_REFERENCE = "multi_reference"


def qwk(preds: Sequence[Hashable], golds: Sequence[Hashable],
        classes: Sequence[Hashable]) -> float:
    """Quadratic weighted kappa over an ordered label set.

    1 - sum(w*O) / sum(w*E) with w_ij = (i-j)^2/(k-1)^2 and E the outer
    product of the two marginals scaled to n. A degenerate denominator
    (single class on both sides) yields 1.0 on perfect agreement, else 0.0.
    """
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} vs {len(golds)}")
    if not preds:
        raise ValueError("qwk undefined for empty input")
    index = {c: i for i, c in enumerate(classes)}
    if len(index) != len(classes):
        raise ValueError("classes must be distinct")
    for label in list(preds) + list(golds):
        if label not in index:
            raise ValueError(f"label {label!r} not in classes")
    k = len(classes)
    n = len(preds)
    observed = [[0.0] * k for _ in range(k)]
    gold_marginal = [0.0] * k
    pred_marginal = [0.0] * k
    for p, g in zip(preds, golds):
        i, j = index[g], index[p]
        observed[i][j] += 1
        gold_marginal[i] += 1
        pred_marginal[j] += 1

    def weight(i: int, j: int) -> float:
        return ((i - j) ** 2) / ((k - 1) ** 2) if k > 1 else 0.0

    num = sum(weight(i, j) * observed[i][j] for i in range(k) for j in range(k))
    den = sum(weight(i, j) * gold_marginal[i] * pred_marginal[j] / n
              for i in range(k) for j in range(k))
    if den == 0.0:
        return 1.0 if all(p == g for p, g in zip(preds, golds)) else 0.0
    return 1.0 - num / den


def macro_metrics(preds: Sequence[Hashable], golds: Sequence[Hashable],
                  classes: Sequence[Hashable],
                  ) -> tuple[float, float, float, float, dict]:
    """(macro P, macro R, macro F1, accuracy, confusion).

    Macro averages run over classes present in gold; a class never
    predicted contributes precision 0. Confusion rows are gold labels.
    """
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} vs {len(golds)}")
    if not preds:
        raise ValueError("metrics undefined for empty input")
    confusion: dict = {g: {p: 0 for p in classes} for g in classes}
    for p, g in zip(preds, golds):
        confusion[g][p] += 1
    present = [c for c in classes if any(confusion[c].values())]
    precisions, recalls, f1s = [], [], []
    for c in present:
        tp = confusion[c][c]
        fp = sum(confusion[g][c] for g in classes if g != c)
        fn = sum(confusion[c][p] for p in classes if p != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(f1)
    accuracy = sum(p == g for p, g in zip(preds, golds)) / len(preds)
    macro_p = sum(precisions) / len(precisions) if precisions else 0.0
    macro_r = sum(recalls) / len(recalls) if recalls else 0.0
    macro_f1 = sum(f1s) / len(f1s) if f1s else 0.0
    return macro_p, macro_r, macro_f1, accuracy, confusion


@dataclass(frozen=True)
class PredictionSet:
    predictions: Mapping[str, CEFRLevel]
    source: str
    fallback_ids: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.predictions)


@dataclass
class EvalReport:
    setting: str
    rule: str
    qwk: float
    accuracy: float
    macro_p: float
    macro_r: float
    macro_f1: float
    confusion: dict[str, dict[str, int]]
    n: int
    unassessable: int

    def to_dict(self) -> dict:
        return {
            "setting": self.setting,
            "rule": self.rule,
            "qwk": self.qwk,
            "qwk_x100": self.qwk * 100.0,
            "accuracy": self.accuracy,
            "macro_p": self.macro_p,
            "macro_r": self.macro_r,
            "macro_f1": self.macro_f1,
            "n": self.n,
            "unassessable": self.unassessable,
            "confusion": self.confusion,
        }


def _check_coverage(preds: PredictionSet, corpus: Corpus) -> None:
    for essay in corpus:
        if essay.id not in preds.predictions:
            raise ValueError(f"no prediction for essay {essay.id!r}")


def _score(preds_by_id: Mapping[str, CEFRLevel],
           golds_by_id: Mapping[str, CEFRLevel],
           setting: str, rule: str) -> EvalReport:
    ids = list(golds_by_id)
    n = len(ids)
    unassessable = [i for i in ids if not golds_by_id[i].is_assessable]
    assessable = [i for i in ids if golds_by_id[i].is_assessable]

    hits = sum(preds_by_id[i] is golds_by_id[i] for i in assessable)
    accuracy = hits / n  # unassessable golds are automatic misses

    if assessable:
        a_preds = [preds_by_id[i] for i in assessable]
        a_golds = [golds_by_id[i] for i in assessable]
        kappa = qwk(a_preds, a_golds, ASSESSABLE_LEVELS)
        macro_p, macro_r, macro_f1, _, _ = macro_metrics(a_preds, a_golds,
                                                         ASSESSABLE_LEVELS)
    else:
        kappa = macro_p = macro_r = macro_f1 = 0.0

    confusion: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for i in ids:
        confusion[golds_by_id[i].value][preds_by_id[i].value] += 1
    confusion_out = {g: dict(row) for g, row in sorted(confusion.items())}
    return EvalReport(setting=setting, rule=rule, qwk=kappa, accuracy=accuracy,
                      macro_p=macro_p, macro_r=macro_r, macro_f1=macro_f1,
                      confusion=confusion_out, n=n, unassessable=len(unassessable))


def _average_gold(essay: Essay) -> CEFRLevel:
    if essay.rater_triple is not None:
        if not essay.rater_triple.all_assessable:
            return CEFRLevel.UNASSESSABLE
        return rounded_average_level(essay.rater_triple)
    if essay.level_gold is not None:
        return essay.level_gold
    raise ValueError(f"essay {essay.id!r} has neither a rater triple nor a gold level")


def evaluate_average_reference(preds: PredictionSet, corpus: Corpus) -> EvalReport:
    """Gold = rounded average of the rater triple (or the stored gold level)."""
    _check_coverage(preds, corpus)
    golds = {e.id: _average_gold(e) for e in corpus}
    return _score({e.id: preds.predictions[e.id] for e in corpus}, golds,
                  AVERAGE_REFERENCE, "gold=rounded-average")


def _closest_member(prediction: CEFRLevel, triple: RaterTriple) -> CEFRLevel:
    members = [r for r in triple.ratings if r.is_assessable]
    if not members:
        return CEFRLevel.UNASSESSABLE
    if prediction in members:
        return prediction
    # Nearest by numeric distance, ties toward the lower band.
    return min(members, key=lambda r: (abs(r.numeric - prediction.numeric), r.numeric))


def evaluate_multi_reference(preds: PredictionSet, corpus: Corpus) -> EvalReport:
    """Any rater label may serve as reference: gold = the triple member
    closest to the prediction (exact match preferred)."""
    _check_coverage(preds, corpus)
    golds = {}
    for e in corpus:
        if e.rater_triple is None:
            raise ValueError(f"essay {e.id!r} has no rater triple; "
                             "multi-reference evaluation needs all three labels")
        golds[e.id] = _closest_member(preds.predictions[e.id], e.rater_triple)
    return _score({e.id: preds.predictions[e.id] for e in corpus}, golds,
                  MULTI_REFERENCE, "gold=closest-triple-member")


def baseline_profile_scorer(corpus: Corpus,
                            profiles: Mapping[CEFRLevel, LevelProfile]) -> PredictionSet:
    """Nearest-profile assignment as a native baseline scorer.

    Essays with a zero feature vector cannot be matched; they get the
    corpus-majority band and are reported in `fallback_ids`.
    """
    if not profiles:
        raise ValueError("at least one level profile is required")
    counts = Counter(e.level_gold for e in corpus
                     if e.level_gold is not None and e.level_gold.is_assessable)
    majority = counts.most_common(1)[0][0] if counts else CEFRLevel.B1
    predictions: dict[str, CEFRLevel] = {}
    fallbacks = []
    for essay in corpus:
        try:
            predictions[essay.id] = assign_nearest_level(extract_features(essay), profiles)
        except ValueError:
            predictions[essay.id] = majority
            fallbacks.append(essay.id)
    return PredictionSet(predictions=predictions, source="profile-baseline",
                         fallback_ids=tuple(fallbacks))


def load_external_predictions(path: str | Path, corpus: Corpus) -> PredictionSet:
    """Read a predictions JSONL file ({id, band} per line) and validate it."""
    path = Path(path)
    predictions: dict[str, CEFRLevel] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ToolkitError(f"line {line_no}: invalid JSON: {exc.msg}") from None
            essay_id = rec.get("id")
            if essay_id not in corpus:
                raise ToolkitError(f"line {line_no}: unknown essay id {essay_id!r}")
            if essay_id in predictions:
                raise ToolkitError(f"line {line_no}: duplicate prediction for {essay_id!r}")
            band = rec.get("band")
            try:
                level = CEFRLevel.parse(band)
            except (ValueError, TypeError):
                raise ToolkitError(f"line {line_no}: unknown band {band!r}") from None
            if not level.is_assessable:
                raise ToolkitError(f"line {line_no}: predictions must be assessable bands")
            predictions[essay_id] = level
    return PredictionSet(predictions=predictions, source=str(path))
