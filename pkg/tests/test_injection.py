import random
from collections import Counter

import pytest

from cefraug.corpus import CEFRLevel, Corpus, Essay
from cefraug.errors import GatewayError
from cefraug.error_model import (NO_ERROR, ErrorProfile, ErrorTag,
                                 Transformation, align_pair,
                                 apply_default_rule, load_error_instructions,
                                 tag_error, train_error_type_model,
                                 train_realization_model)
from cefraug.injection import (InjectionPlan, build_injection_prompt,
                               filter_by_level, inject_controlled,
                               inject_via_llm, predict_error_types, realize,
                               sample_error_instructions, verify_injection)
from cefraug.llm_gateway import MockGateway, stable_seed
from cefraug.profiling import tokenize

from conftest import make_essay

OT = ErrorTag.parse("OT")
OH = ErrorTag.parse("OH")
OD = ErrorTag.parse("OD")
OM = ErrorTag.parse("OM")
OW = ErrorTag.parse("OW")

INSTRUCTIONS = load_error_instructions()


def _profile(tag_probs, avg, level=CEFRLevel.B1):
    return ErrorProfile(level=level, tag_dist=dict(tag_probs),
                        avg_errors_per_essay=avg,
                        avg_count_by_tag={t: p * avg for t, p in tag_probs.items()})


def _models(tag_words):
    """Train tiny models: tag_words maps tag -> words it corrupts."""
    transformations, clean = [], {}
    for tag, words in tag_words.items():
        for w in words:
            out = apply_default_rule(str(tag), w)
            assert out is not None
            transformations.extend([Transformation(w, out, tag)] * 2)
            clean[w] = 2
    type_model = train_error_type_model(transformations, clean, smoothing=0.0)
    realization = train_realization_model(transformations)
    return type_model, realization


class TestPredict:
    def test_unseen_token_gets_backoff(self):
        tm, _ = _models({OT: ["غرفة"]})
        dists = predict_error_types(["مجهول"], tm)
        assert dists == [tm.backoff]

    def test_trained_token_argmax(self):
        tm, _ = _models({OT: ["غرفة"]})
        dist = predict_error_types(["غرفة"], tm)[0]
        assert max(dist, key=dist.get) in (OT, NO_ERROR)
        assert dist[OT] == 0.5

    def test_empty_sentence(self):
        tm, _ = _models({OT: ["غرفة"]})
        assert predict_error_types([], tm) == []


class TestFilter:
    def test_unsupported_tag_becomes_no_error(self):
        dists = [{OH: 0.6, NO_ERROR: 0.3, OT: 0.1}]
        out = filter_by_level(dists, _profile({OT: 1.0}, avg=1.0))[0]
        assert max(out, key=out.get) == NO_ERROR
        assert OH not in out
        assert out[NO_ERROR] == pytest.approx(0.9)
        assert out[OT] == pytest.approx(0.1)

    def test_uniform_support_keeps_distribution(self):
        dist = {OT: 0.3, OH: 0.2, NO_ERROR: 0.5}
        out = filter_by_level([dist], _profile({OT: 0.5, OH: 0.5}, avg=2.0))[0]
        for tag, p in dist.items():
            assert out[tag] == pytest.approx(p, abs=1e-12)

    def test_empty_support_all_no_error(self):
        dist = {OT: 0.7, NO_ERROR: 0.3}
        out = filter_by_level([dist], _profile({}, avg=0.0))[0]
        assert out == {NO_ERROR: 1.0}


class TestRealize:
    def test_canonical_ot(self):
        _, rm = _models({OT: ["غرفة", "مدرسة"]})
        outcome = realize("غرفة", OT, rm)
        assert outcome.word == "غرفه"
        assert not outcome.skipped

    def test_learned_rule_generalizes(self):
        _, rm = _models({OD: ["هذا"]})
        outcome = realize("هذه", OD, rm)  # insert_after rule learned on هذا
        assert not outcome.skipped
        assert outcome.word != "هذه"

    def test_inapplicable_word_skipped(self):
        _, rm = _models({OT: ["غرفة"]})
        outcome = realize("كتاب", OT, rm)  # no final taa-marbuta anywhere
        assert outcome.skipped
        assert outcome.word == "كتاب"

    def test_unknown_tag_rejected(self):
        _, rm = _models({OT: ["غرفة"]})
        with pytest.raises(ValueError):
            realize("كتاب", OW, rm)

    def test_stochastic_mode_samples_applicable(self):
        _, rm = _models({OT: ["غرفة"]})
        rng = random.Random(0)
        outcome = realize("غرفة", OT, rm, rng)
        assert outcome.word == "غرفه"


def _hundred_token_essay():
    # 100 tokens, a fixed share of them realizable for OT
    words = (["غرفة", "مدرسة", "سيارة", "حديقة"] * 5 +
             ["كتاب", "قلم", "درس", "بيت"] * 20)
    assert len(words) == 100
    return make_essay("fix", " ".join(words), CEFRLevel.B1)


class TestInjectControlled:
    def test_zero_average_returns_unchanged_copy(self):
        tm, rm = _models({OT: ["غرفة"]})
        essay = make_essay("e", "غرفة جميلة هنا.", CEFRLevel.B1)
        plan = InjectionPlan(level=CEFRLevel.B1, profile=_profile({}, 0.0), seed=1)
        out, record = inject_controlled(essay, plan, tm, rm)
        assert out.text == essay.text
        assert record.spans == []
        assert out.provenance == "injected"
        assert out.paired_id == "e"

    def test_exactly_three_ot_spans(self):
        tm, rm = _models({OT: ["غرفة", "مدرسة", "سيارة", "حديقة"]})
        essay = _hundred_token_essay()
        plan = InjectionPlan(level=CEFRLevel.B1, profile=_profile({OT: 1.0}, 3.0),
                             seed=5)
        out, record = inject_controlled(essay, plan, tm, rm)
        assert len(record.spans) == 3
        assert all(s.tag == OT for s in record.spans)
        eligible = {i for i, t in enumerate(tokenize(essay.text))
                    if apply_default_rule("OT", t) is not None}
        assert {s.position for s in record.spans} <= eligible
        # re-alignment recovers exactly the recorded spans
        spans = [s for s in align_pair(tokenize(essay.text), tokenize(out.text))
                 if not s.is_identity]
        assert {s.source_index for s in spans} == {s.position for s in record.spans}
        assert all(str(tag_error(s)) == "OT" for s in spans)

    def test_deterministic_under_seed(self):
        tm, rm = _models({OT: ["غرفة", "مدرسة"], OM: ["كتاب", "درس", "بيت"]})
        essay = _hundred_token_essay()
        plan = InjectionPlan(level=CEFRLevel.B1,
                             profile=_profile({OT: 0.5, OM: 0.5}, 4.0), seed=5)
        out1, rec1 = inject_controlled(essay, plan, tm, rm)
        out2, rec2 = inject_controlled(essay, plan, tm, rm)
        assert out1.text == out2.text
        assert rec1.spans == rec2.spans

    def test_untouched_tokens_stay_identical(self):
        tm, rm = _models({OT: ["غرفة", "مدرسة", "سيارة"]})
        essay = _hundred_token_essay()
        plan = InjectionPlan(level=CEFRLevel.B1, profile=_profile({OT: 1.0}, 4.0),
                             seed=2)
        out, record = inject_controlled(essay, plan, tm, rm)
        touched = {s.position for s in record.spans}
        non_identity = {s.source_index for s in
                        align_pair(tokenize(essay.text), tokenize(out.text))
                        if not s.is_identity}
        assert non_identity == touched

    def test_max_errors_cap(self):
        tm, rm = _models({OT: ["غرفة", "مدرسة", "سيارة", "حديقة"]})
        essay = _hundred_token_essay()
        plan = InjectionPlan(level=CEFRLevel.B1, profile=_profile({OT: 1.0}, 10.0),
                             seed=2, max_errors=2)
        _, record = inject_controlled(essay, plan, tm, rm)
        assert len(record.spans) == 2

    def test_length_scaling(self):
        tm, rm = _models({OM: ["كتاب", "قلم", "درس", "بيت"]})
        short = make_essay("s", "كتاب قلم درس بيت كتاب", CEFRLevel.B1)
        plan = InjectionPlan(level=CEFRLevel.B1, profile=_profile({OM: 1.0}, 8.0),
                             seed=3, reference_tokens=20.0)
        _, record = inject_controlled(short, plan, tm, rm)
        # 8 errors * (5/20 tokens) = 2
        assert len(record.spans) == 2

    def test_level_mismatch_rejected(self):
        with pytest.raises(ValueError):
            InjectionPlan(level=CEFRLevel.B2, profile=_profile({OT: 1.0}, 1.0), seed=0)


class TestSampleInstructions:
    def test_monte_carlo_ratio(self):
        profile = _profile({OT: 2 / 3, OH: 1 / 3}, avg=3.0)
        rng = random.Random(123)
        totals = Counter()
        for _ in range(10_000):
            for tag, _instr, count in sample_error_instructions(profile, rng,
                                                                INSTRUCTIONS):
                totals[tag] += count
        ratio = totals[OT] / totals[OH]
        assert abs(ratio - 2.0) / 2.0 <= 0.05

    def test_single_tag_profile(self):
        profile = _profile({OT: 1.0}, avg=4.0)
        sampled = sample_error_instructions(profile, random.Random(1), INSTRUCTIONS)
        assert len(sampled) == 1
        tag, instr, count = sampled[0]
        assert tag == OT and count == 4
        assert instr.example_correct == "غرفة"

    def test_zero_average_empty(self):
        profile = _profile({}, avg=0.0)
        assert sample_error_instructions(profile, random.Random(1), INSTRUCTIONS) == []

    def test_missing_instruction_entry_rejected(self):
        profile = _profile({OT: 1.0}, avg=1.0)
        with pytest.raises(Exception):
            sample_error_instructions(profile, random.Random(1), {})


class TestBuildInjectionPrompt:
    def test_contains_definition_and_example(self):
        request = build_injection_prompt("نص المقال هنا.", OT, INSTRUCTIONS["OT"], 2)
        assert "غرفة" in request.system_message
        assert "غرفه" in request.system_message
        assert INSTRUCTIONS["OT"].description in request.system_message
        assert request.user_message == "نص المقال هنا."

    def test_zero_count_rejected(self):
        with pytest.raises(ValueError):
            build_injection_prompt("نص", OT, INSTRUCTIONS["OT"], 0)

    def test_pure(self):
        a = build_injection_prompt("نص", OT, INSTRUCTIONS["OT"], 1)
        b = build_injection_prompt("نص", OT, INSTRUCTIONS["OT"], 1)
        assert a == b


class _CountingGateway(MockGateway):
    pass


class _FailingGateway(MockGateway):
    def __init__(self, fail_after, **kwargs):
        super().__init__(**kwargs)
        self.fail_after = fail_after

    def complete(self, request, *, seed=None):
        if self.calls >= self.fail_after:
            self.calls += 1
            raise GatewayError("simulated outage")
        return super().complete(request, seed=seed)


class TestInjectViaLLM:
    def test_zero_instructions_unchanged(self):
        essay = make_essay("e", "غرفة جميلة هنا.", CEFRLevel.B1)
        plan = InjectionPlan(level=CEFRLevel.B1, profile=_profile({}, 0.0), seed=1,
                             path="llm_per_type")
        out, record = inject_via_llm(essay, plan, MockGateway(), INSTRUCTIONS)
        assert out.text == essay.text
        assert record.spans == []

    def test_mock_applies_requested_type(self):
        essay = make_essay("e", "غرفة كبيرة ومدرسة جميلة وسيارة سريعة هنا",
                           CEFRLevel.B1)
        plan = InjectionPlan(level=CEFRLevel.B1, profile=_profile({OT: 1.0}, 2.0),
                             seed=7, path="llm_per_type")
        out, record = inject_via_llm(essay, plan, MockGateway(seed=7), INSTRUCTIONS)
        assert out.text != essay.text
        assert record.spans
        assert {str(s.tag) for s in record.spans} == {"OT"}

    def test_one_gateway_call_per_sampled_tag(self):
        essay = make_essay("e", "غرفة أحمد الجديدة هنا هذا اليوم.", CEFRLevel.B1)
        profile = _profile({OT: 1 / 3, OH: 1 / 3, OD: 1 / 3}, avg=30.0)
        plan = InjectionPlan(level=CEFRLevel.B1, profile=profile, seed=11,
                             path="llm_per_type")
        client = _CountingGateway(seed=3)
        # with 30 draws over three tags, all three are sampled w.h.p.
        sampled = sample_error_instructions(profile, random.Random(stable_seed(11, "e")),
                                            INSTRUCTIONS)
        inject_via_llm(essay, plan, client, INSTRUCTIONS)
        assert client.calls == len(sampled) == 3

    def test_client_failure_yields_partial(self):
        essay = make_essay("e", "غرفة أحمد الجديدة هنا هذا اليوم.", CEFRLevel.B1)
        profile = _profile({OT: 1 / 3, OH: 1 / 3, OD: 1 / 3}, avg=30.0)
        plan = InjectionPlan(level=CEFRLevel.B1, profile=profile, seed=11,
                             path="llm_per_type")
        client = _FailingGateway(fail_after=1, seed=3)
        out, record = inject_via_llm(essay, plan, client, INSTRUCTIONS)
        assert record.partial
        assert out.text  # last successful intermediate survives

    def test_deterministic(self):
        essay = make_essay("e", "غرفة كبيرة ومدرسة جميلة هنا", CEFRLevel.B1)
        plan = InjectionPlan(level=CEFRLevel.B1, profile=_profile({OT: 1.0}, 2.0),
                             seed=7, path="llm_per_type")
        out1, _ = inject_via_llm(essay, plan, MockGateway(seed=7), INSTRUCTIONS)
        out2, _ = inject_via_llm(essay, plan, MockGateway(seed=7), INSTRUCTIONS)
        assert out1.text == out2.text


def _verified_pairs(histogram):
    """Build (original, injected) corpora whose tag histogram is exact."""
    originals, injected = [], []
    i = 0
    for tag, count in histogram.items():
        word = {"OT": "غرفة", "OH": "أحمد", "OD": "هذا"}[str(tag)]
        for _ in range(count):
            out = apply_default_rule(str(tag), word)
            originals.append(Essay(id=f"o{i}", text=f"{word} هنا"))
            injected.append(Essay(id=f"o{i}-err", text=f"{out} هنا",
                                  provenance="injected", paired_id=f"o{i}",
                                  level_gold=CEFRLevel.B1))
            i += 1
    return Corpus(originals), injected


class TestVerifyInjection:
    def test_exact_histogram_similarity_one(self):
        profile = _profile({OT: 0.5, OH: 0.25, OD: 0.25}, avg=1.0)
        original, injected = _verified_pairs({OT: 2, OH: 1, OD: 1})
        report = verify_injection(original, injected, profile)
        assert report.aggregate_similarity == pytest.approx(1.0, abs=1e-12)
        assert report.tv_distance == pytest.approx(0.0, abs=1e-12)

    def test_disjoint_supports_zero(self):
        profile = _profile({OM: 1.0}, avg=1.0)
        original, injected = _verified_pairs({OT: 3})
        report = verify_injection(original, injected, profile)
        assert report.aggregate_similarity == 0.0

    def test_unpaired_essay_rejected(self):
        profile = _profile({OT: 1.0}, avg=1.0)
        original, injected = _verified_pairs({OT: 1})
        bad = Essay(id="stray-err", text="نص", provenance="injected",
                    paired_id="missing")
        with pytest.raises(Exception):
            verify_injection(original, injected + [bad], profile)

    def test_controlled_path_fidelity_small(self, rng):
        words_by_tag = {OT: ["غرفة", "مدرسة", "سيارة", "حديقة", "مدينة"],
                        OM: ["كتاب", "قلم", "درس", "بيت", "سوق"],
                        OH: ["أحمد", "أستاذ", "إنسان", "مساء", "سؤال"]}
        tm, rm = _models(words_by_tag)
        profile = _profile({OT: 0.5, OM: 0.3, OH: 0.2}, avg=5.0)
        vocab = [w for ws in words_by_tag.values() for w in ws]
        originals = [make_essay(f"e{k}", " ".join(rng.choices(vocab, k=30)),
                                CEFRLevel.B1) for k in range(120)]
        corpus = Corpus(originals)
        plan = InjectionPlan(level=CEFRLevel.B1, profile=profile, seed=17,
                             reference_tokens=30.0)
        injected = [inject_controlled(e, plan, tm, rm)[0] for e in corpus]
        report = verify_injection(corpus, injected, profile)
        assert report.aggregate_similarity >= 0.9
        assert report.fraction_above_threshold >= 0.8
