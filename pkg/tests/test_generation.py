import json
import random

import pytest

from cefraug.corpus import CEFRLevel, Corpus
from cefraug.errors import GatewayError, ToolkitError
from cefraug.generation import (EssayPrompt, GenerationJob, PromptBank, Tier,
                                build_generation_request, generate_corpus,
                                load_cefr_guidelines, load_prompt_bank,
                                quality_gate, tier_for_level)
from cefraug.llm_gateway import MockGateway
from cefraug.profiling import agreement, build_level_profile

from conftest import ARABIC_LEXICON, make_essay


class TestPromptBank:
    def test_shipped_bank_totals(self):
        bank = load_prompt_bank()
        assert len(bank) == 152
        tiers = bank.counts_by_tier()
        assert (tiers[Tier.BEGINNER], tiers[Tier.INTERMEDIATE],
                tiers[Tier.ADVANCED]) == (47, 53, 52)

    def test_hobbies_tier_counts(self):
        tally = load_prompt_bank().counts_by_topic_tier()["Hobbies"]
        assert (tally[Tier.BEGINNER], tally[Tier.INTERMEDIATE],
                tally[Tier.ADVANCED]) == (3, 2, 2)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "bank.json"
        path.write_text("[]", encoding="utf-8")
        assert len(load_prompt_bank(path)) == 0

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "bank.json"
        entry = {"id": "x", "topic": "T", "tier": "Beginner", "text_ar": "نص"}
        path.write_text(json.dumps([entry, entry]), encoding="utf-8")
        with pytest.raises(ToolkitError):
            load_prompt_bank(path)

    def test_unknown_tier_rejected(self, tmp_path):
        path = tmp_path / "bank.json"
        path.write_text(json.dumps([{"id": "x", "topic": "T", "tier": "Expert",
                                     "text_ar": "نص"}]), encoding="utf-8")
        with pytest.raises(ToolkitError):
            load_prompt_bank(path)

    def test_tier_level_mapping(self):
        assert Tier.BEGINNER.levels == (CEFRLevel.A1, CEFRLevel.A2)
        assert Tier.INTERMEDIATE.levels == (CEFRLevel.B1, CEFRLevel.B2)
        assert Tier.ADVANCED.levels == (CEFRLevel.C1, CEFRLevel.C2)
        assert tier_for_level(CEFRLevel.C2) is Tier.ADVANCED


def _prompt(tier=Tier.INTERMEDIATE):
    return EssayPrompt(id="p1", topic="Hobbies", tier=tier, text_ar="اكتب عن هوايتك.")


def _b1_profile():
    essay = make_essay("seed", "نص جميل هنا. جملة ثانية قصيرة فيه.", CEFRLevel.B1)
    return build_level_profile(Corpus([essay]), CEFRLevel.B1)


GUIDELINES = load_cefr_guidelines()


class TestBuildGenerationRequest:
    def test_profile_ttr_appears_verbatim(self):
        profile = _b1_profile()
        job = GenerationJob(prompt=_prompt(), target_level=CEFRLevel.B1,
                            guidelines=GUIDELINES[CEFRLevel.B1], profile=profile)
        request = build_generation_request(job)
        assert str(profile.features.ttr) in request.user_message
        assert "اكتب عن هوايتك." in request.user_message
        assert "B1" in request.user_message

    def test_a1_job_is_rubric_only(self):
        job = GenerationJob(prompt=_prompt(Tier.BEGINNER), target_level=CEFRLevel.A1,
                            guidelines=GUIDELINES[CEFRLevel.A1])
        request = build_generation_request(job)
        assert "linguistic profile" not in request.user_message

    def test_a1_with_profile_warns_and_drops_it(self):
        job = GenerationJob(prompt=_prompt(Tier.BEGINNER), target_level=CEFRLevel.A1,
                            guidelines=GUIDELINES[CEFRLevel.A1], profile=_b1_profile())
        with pytest.warns(UserWarning):
            request = build_generation_request(job)
        assert "linguistic profile" not in request.user_message

    def test_empty_guidelines_rejected(self):
        with pytest.raises(ValueError):
            GenerationJob(prompt=_prompt(), target_level=CEFRLevel.B1, guidelines=" ")

    def test_level_outside_tier_rejected(self):
        with pytest.raises(ValueError):
            GenerationJob(prompt=_prompt(Tier.BEGINNER), target_level=CEFRLevel.C1,
                          guidelines="x")

    def test_pure_function(self):
        job = GenerationJob(prompt=_prompt(), target_level=CEFRLevel.B2,
                            guidelines=GUIDELINES[CEFRLevel.B2])
        assert build_generation_request(job) == build_generation_request(job)


class _FailingClient(MockGateway):
    """Mock gateway that fails for one specific prompt id marker."""

    def __init__(self, fail_marker, **kwargs):
        super().__init__(**kwargs)
        self.fail_marker = fail_marker

    def complete(self, request, *, seed=None):
        if self.fail_marker in request.user_message:
            raise GatewayError("simulated outage")
        return super().complete(request, seed=seed)


class TestGenerateCorpus:
    def test_single_prompt_single_repetition(self):
        bank = PromptBank([_prompt()])
        corpus, report = generate_corpus(bank, {CEFRLevel.B1: 1},
                                         MockGateway(seed=1), seed=1)
        assert len(corpus) == 1
        essay = corpus[0]
        assert essay.provenance == "generated"
        assert essay.level_gold is CEFRLevel.B1
        assert essay.prompt_id == "p1"
        assert report.generated[CEFRLevel.B1] == 1

    def test_deterministic_under_fixed_seed(self):
        bank = PromptBank([_prompt()])
        c1, _ = generate_corpus(bank, {CEFRLevel.B1: 3}, MockGateway(seed=0), seed=9)
        c2, _ = generate_corpus(bank, {CEFRLevel.B1: 3}, MockGateway(seed=0), seed=9)
        assert [e.text for e in c1] == [e.text for e in c2]

    def test_repetitions_differ(self):
        bank = PromptBank([_prompt()])
        corpus, _ = generate_corpus(bank, {CEFRLevel.B1: 3}, MockGateway(seed=0), seed=9)
        texts = [e.text for e in corpus]
        assert len(set(texts)) == 3

    def test_worker_count_never_changes_output(self):
        prompts = [EssayPrompt(id=f"p{i}", topic="T", tier=Tier.INTERMEDIATE,
                               text_ar="نص السؤال هنا") for i in range(3)]
        bank = PromptBank(prompts)
        serial, _ = generate_corpus(bank, {CEFRLevel.B1: 9}, MockGateway(seed=1),
                                    seed=6, workers=1)
        threaded, _ = generate_corpus(bank, {CEFRLevel.B1: 9}, MockGateway(seed=1),
                                      seed=6, workers=4)
        assert [(e.id, e.text) for e in serial] == [(e.id, e.text) for e in threaded]

    def test_failures_recorded_not_substituted(self):
        prompts = [_prompt(),
                   EssayPrompt(id="p2", topic="Hobbies", tier=Tier.INTERMEDIATE,
                               text_ar="عبارة فاشلة")]
        bank = PromptBank(prompts)
        client = _FailingClient("عبارة فاشلة", seed=0)
        corpus, report = generate_corpus(bank, {CEFRLevel.B1: 2}, client, seed=4)
        assert len(corpus) == 1
        assert report.generated[CEFRLevel.B1] == 1
        assert len(report.failures) == 1
        assert report.failures[0]["prompt_id"] == "p2"

    def test_quota_smaller_than_bank_spreads_round_robin(self):
        prompts = [EssayPrompt(id=f"p{i}", topic="T", tier=Tier.INTERMEDIATE,
                               text_ar="نص السؤال هنا") for i in range(4)]
        corpus, _ = generate_corpus(PromptBank(prompts), {CEFRLevel.B1: 6},
                                    MockGateway(seed=2), seed=2)
        per_prompt = {}
        for e in corpus:
            per_prompt[e.prompt_id] = per_prompt.get(e.prompt_id, 0) + 1
        assert sorted(per_prompt.values()) == [1, 1, 2, 2]

    def test_bad_plan_rejected(self):
        bank = PromptBank([_prompt()])
        with pytest.raises(ValueError):
            generate_corpus(bank, {}, MockGateway(), seed=0)
        with pytest.raises(ValueError):
            generate_corpus(bank, {CEFRLevel.B1: 0}, MockGateway(), seed=0)


def _distinct_profiles():
    """Four well-separated level profiles built from seed essays."""
    seeds = {
        CEFRLevel.A2: "بيت صغير هنا. ولد يلعب فيه.",
        CEFRLevel.B1: "المدرسة جميلة في الصباح. الطلاب يقرؤون الكتب دائما. المعلم يشرح الدرس للجميع.",
        CEFRLevel.B2: "يذهب الطلاب إلى الجامعة كل يوم، لأن الدراسة مهمة جدا لهم. "
                      "وفي المساء يعودون إلى بيوتهم، حيث يراجعون دروسهم بانتظام.",
        CEFRLevel.C1: "تشهد المجتمعات الحديثة تحولات عميقة في مفهوم المعرفة، إذ أصبحت التقنية "
                      "جزءا أساسيا من حياة الأفراد والمؤسسات، بينما تتطلب هذه التحولات مهارات "
                      "جديدة في التفكير النقدي والتحليل المنهجي للمعلومات المتدفقة باستمرار.",
    }
    corpus = Corpus([make_essay(f"seed-{lvl.value}", text, lvl)
                     for lvl, text in seeds.items()])
    return corpus, {lvl: build_level_profile(corpus, lvl) for lvl in seeds}


class TestQualityGate:
    def test_perfect_on_profile_sources(self):
        corpus, profiles = _distinct_profiles()
        report = quality_gate(corpus, profiles)
        assert report.overall_agreement == 1.0
        assert report.mismatched_ids == []

    def test_chance_level_for_random_corpus(self):
        _, profiles = _distinct_profiles()
        rng = random.Random(77)
        levels = list(profiles)
        essays = []
        for i in range(240):
            text = " ".join(rng.choices(ARABIC_LEXICON, k=rng.randint(15, 60))) + "."
            essays.append(make_essay(f"r{i}", text, rng.choice(levels)))
        report = quality_gate(Corpus(essays), profiles)
        # labels are independent of text, so agreement sits at chance (1/4)
        assert 0.15 <= report.overall_agreement <= 0.35

    def test_empty_corpus_rejected(self):
        _, profiles = _distinct_profiles()
        with pytest.raises(ValueError):
            quality_gate(Corpus([]), profiles)

    def test_agreement_consistent_with_profiling(self):
        corpus, profiles = _distinct_profiles()
        report = quality_gate(corpus, profiles)
        preds = [p for _, p, _ in report.per_essay]
        golds = [t for _, _, t in report.per_essay]
        assert report.overall_agreement == agreement(preds, golds)
