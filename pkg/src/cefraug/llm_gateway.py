"""Chat-completion gateway: a thin HTTP client plus a deterministic mock.

The HTTP client speaks the generic OpenAI-style JSON shape, so any
compatible endpoint works; endpoint and model id are configuration. The
mock emits seeded Arabic essays whose length statistics track the target
CEFR level, and it understands the toolkit's error-injection prompts, so
the whole pipeline runs offline.
"""

from __future__ import annotations

import hashlib
import math
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import AuthenticationError, GatewayError, RateLimitExhausted


@dataclass(frozen=True)
class ChatRequest:
    system_message: str
    user_message: str
    temperature: float = 0.7
    max_output_tokens: int = 1200
    model_id: str = "default"

    def __post_init__(self):
        if not self.system_message.strip():
            raise ValueError("system_message must be non-empty")
        if not self.user_message.strip():
            raise ValueError("user_message must be non-empty")
        if not math.isfinite(self.temperature) or self.temperature < 0:
            raise ValueError("temperature must be finite and >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    usage: dict
    latency: float


@dataclass(frozen=True)
class GatewayConfig:
    endpoint_url: str = "http://localhost:8000/v1/chat/completions"
    model_id: str = "default"
    max_concurrency: int = 4
    retry_cap: int = 3
    timeout: float = 60.0
    backoff_base: float = 0.5
    api_key_env: str = "LLM_API_KEY"

    @classmethod
    def from_dict(cls, d: dict) -> "GatewayConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})


def stable_seed(*parts) -> int:
    """Hash arbitrary parts into a reproducible 63-bit integer seed."""
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _requests_transport(url: str, headers: dict, payload: dict, timeout: float):
    import requests

    try:
        resp = requests.post(url, headers=headers, json=payload, timeout=timeout)
    except requests.RequestException as exc:
        raise ConnectionError(str(exc)) from exc
    try:
        body = resp.json()
    except ValueError:
        body = None
    return resp.status_code, body


class HttpGateway:
    """OpenAI-compatible chat client with bounded exponential-backoff retries."""

    def __init__(self, config: GatewayConfig,
                 transport: Optional[Callable] = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.config = config
        self._transport = transport or _requests_transport
        self._sleep = sleep
        # Bounds in-flight requests when callers issue them concurrently.
        self._slots = threading.Semaphore(max(1, config.max_concurrency))

    def complete(self, request: ChatRequest, *, seed: Optional[int] = None) -> ChatResponse:
        with self._slots:
            return self._complete(request, seed)

    def _complete(self, request: ChatRequest, seed: Optional[int]) -> ChatResponse:
        api_key = os.environ.get(self.config.api_key_env, "")
        if not api_key:
            raise AuthenticationError(
                f"no API key found in environment variable {self.config.api_key_env}")
        headers = {"Authorization": f"Bearer {api_key}",
                   "Content-Type": "application/json"}
        payload = {
            "model": request.model_id or self.config.model_id,
            "messages": [
                {"role": "system", "content": request.system_message},
                {"role": "user", "content": request.user_message},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        if seed is not None:
            payload["seed"] = seed

        start = time.monotonic()
        failures = 0
        while True:
            try:
                status, body = self._transport(self.config.endpoint_url, headers,
                                               payload, self.config.timeout)
            except ConnectionError as exc:
                status, body = None, None
                last_error = f"connection error: {exc}"
            else:
                last_error = f"HTTP {status}"
            if status == 200:
                return self._parse_body(body, time.monotonic() - start)
            if status in (401, 403):
                raise AuthenticationError(f"provider rejected credentials (HTTP {status})")
            transient = status is None or status == 429 or (status is not None and status >= 500)
            if not transient:
                raise GatewayError(f"provider request failed: {last_error}")
            failures += 1
            if failures > self.config.retry_cap:
                raise RateLimitExhausted(
                    f"gave up after {failures} failures (retry cap "
                    f"{self.config.retry_cap}): {last_error}")
            self._sleep(self.config.backoff_base * (2 ** (failures - 1)))

    @staticmethod
    def _parse_body(body, latency: float) -> ChatResponse:
        try:
            text = body["choices"][0]["message"]["content"]
        except (TypeError, KeyError, IndexError):
            raise GatewayError("malformed provider response: missing choices[0].message.content")
        if not isinstance(text, str) or not text:
            raise GatewayError("malformed provider response: empty message content")
        usage = body.get("usage") or {}
        return ChatResponse(text=text, usage=dict(usage), latency=latency)


# --- deterministic mock ---------------------------------------------------

# Per-level targets for the mock generator: (mean words per essay, mean
# sentence length in words, vocabulary slice size). Word counts and sentence
# lengths follow the per-level means of the generated-corpus statistics.
MOCK_LEVEL_STATS: dict[str, tuple[int, float, int]] = {
    "A1": (84, 6.1, 40),
    "A2": (117, 10.5, 64),
    "B1": (189, 14.6, 96),
    "B2": (240, 17.3, 128),
    "C1": (263, 19.1, 164),
    "C2": (281, 19.6, 200),
}

# Ordered roughly from everyday to abstract vocabulary; later (longer) words
# only enter at higher levels so level profiles actually separate.
MOCK_VOCABULARY: tuple[str, ...] = (
    "بيت", "ماء", "يوم", "أب", "أم", "أخ", "أخت", "مدرسة", "كتاب", "قلم",
    "باب", "شمس", "قمر", "بحر", "ولد", "بنت", "أكل", "شرب", "ذهب", "جاء",
    "كبير", "صغير", "جميل", "سعيد", "حزين", "جديد", "قديم", "طويل", "قصير", "مدينة",
    "قرية", "سيارة", "طعام", "خبز", "حليب", "عائلة", "صديق", "لعب", "قرأ", "كتب",
    "درس", "نام", "عمل", "حب", "وقت", "صباح", "مساء", "ليل", "أسبوع", "شهر",
    "سنة", "يد", "عين", "رأس", "قلب", "شجرة", "زهرة", "حديقة", "طريق", "سوق",
    "غرفة", "نافذة", "مطبخ", "هاتف", "حاسوب", "تلفاز", "كرة", "قدم", "سباحة", "جري",
    "مشي", "سفر", "رحلة", "بلد", "عالم", "لغة", "كلمة", "جملة", "سؤال", "جواب",
    "معلم", "طالب", "جامعة", "امتحان", "نجاح", "فرح", "ضحك", "صوت", "موسيقى", "أغنية",
    "فيلم", "صورة", "لون", "أحمر", "أزرق", "أخضر", "أبيض", "أسود", "طقس", "مطر",
    "ثلج", "برد", "ريح", "سماء", "أرض", "جبل", "نهر", "صحراء", "حيوان", "قط",
    "كلب", "حصان", "طائر", "سمك", "مزرعة", "فلاح", "طبيب", "مهندس", "شرطي", "ملك",
    "رئيس", "حكومة", "قانون", "حرية", "سلام", "تاريخ", "جغرافيا", "معرفة", "فكرة", "رأي",
    "نقاش", "اجتماع", "مؤتمر", "اقتصاد", "تجارة", "صناعة", "زراعة", "سياحة", "ثقافة", "حضارة",
    "تراث", "عادات", "تقاليد", "مجتمع", "تعاون", "تسامح", "احترام", "مسؤولية", "تطور", "تقدم",
    "تكنولوجيا", "إنترنت", "معلومات", "اتصالات", "وسائل", "إعلام", "صحافة", "أخبار", "بيئة", "تلوث",
    "نظافة", "صحة", "مرض", "علاج", "مستشفى", "دواء", "رياضة", "تمرين", "منافسة", "بطولة",
    "فوز", "هزيمة", "مستقبل", "ماضي", "حاضر", "هدف", "طموح", "إنجاز", "إبداع", "ابتكار",
    "خيال", "قصة", "رواية", "شعر", "أدب", "فن", "رسم", "مسرح", "سينما", "فلسفة",
    "منطق", "أخلاق", "قيم", "مبادئ", "عدالة", "مساواة", "ديمقراطية", "انتخابات", "مواطنة", "استدامة",
)

DEFAULT_TEMPLATE_BANK: tuple[str, ...] = (
    "في البداية",
    "بعد ذلك",
    "أعتقد أن",
    "من المهم أن",
    "في الحقيقة",
    "على سبيل المثال",
    "ومن ناحية أخرى",
    "لا شك أن",
    "يرى البعض أن",
    "في الختام",
)

_LEVEL_MARKER_RE = re.compile(r"\b(A1|A2|B1|B2|C1|C2)\b")
_TOPIC_MARKER_RE = re.compile(r"Topic:\s*(.+)")
_INJECT_MARKER_RE = re.compile(
    r"Inject exactly (\d+) erroneous tokens? of error type (\S+)")


def _parse_level_marker(request: ChatRequest) -> str:
    m = _LEVEL_MARKER_RE.search(request.user_message) or \
        _LEVEL_MARKER_RE.search(request.system_message)
    if not m:
        raise GatewayError("mock gateway: request carries no recognizable CEFR level marker")
    return m.group(1)


def _mock_essay(level: str, topic: str, rng: random.Random,
                template_bank: Sequence[str]) -> str:
    mean_words, mean_slen, vocab_hi = MOCK_LEVEL_STATS[level]
    vocab = MOCK_VOCABULARY[:vocab_hi]
    # The sentence loop overruns by ~half a sentence; pre-compensate.
    target = max(5, int(round(rng.gauss(mean_words, mean_words * 0.06) - mean_slen / 2)))
    # Output is Arabic-only; keep only Arabic-script topic words.
    topic_words = [w for w in topic.split()
                   if w and all("؀" <= ch <= "ۿ" for ch in w)]
    sentences = []
    written = 0
    while written < target:
        slen = max(3, int(round(rng.gauss(mean_slen, mean_slen * 0.25))))
        words: list[str] = []
        if rng.random() < 0.5:
            words.extend(rng.choice(template_bank).split())
        while len(words) < slen:
            if topic_words and rng.random() < 0.07:
                words.append(rng.choice(topic_words))
            else:
                words.append(rng.choice(vocab))
        # Higher levels embed clauses; a comma marks the boundary.
        if mean_slen > 12 and len(words) > 8 and rng.random() < 0.6:
            cut = rng.randrange(3, len(words) - 2)
            words[cut] = words[cut] + "،"
        sentences.append(" ".join(words) + ".")
        written += len(words)
    return " ".join(sentences)


def _mock_injection(request: ChatRequest, count: int, tag_name: str,
                    rng: random.Random) -> str:
    # Local import: error_model pulls in profiling, not this module.
    from .error_model import apply_default_rule
    from .profiling import detokenize, tokenize

    tokens = tokenize(request.user_message)
    eligible = []
    for i, tok in enumerate(tokens):
        if apply_default_rule(tag_name, tok) is not None:
            eligible.append(i)
    rng.shuffle(eligible)
    chosen = sorted(eligible[:count])
    out: list[str] = []
    for i, tok in enumerate(tokens):
        if i in chosen:
            corrupted = apply_default_rule(tag_name, tok)
            out.extend(t for t in corrupted.split(" ") if t)
        else:
            out.append(tok)
    return detokenize(out)


def mock_complete(request: ChatRequest, seed: int,
                  template_bank: Sequence[str] = DEFAULT_TEMPLATE_BANK) -> ChatResponse:
    """Deterministic stand-in for `complete`: same (request, seed) -> same text."""
    if not template_bank:
        raise ValueError("template bank must be non-empty")
    rng = random.Random(stable_seed(seed, request.system_message, request.user_message))
    inject = _INJECT_MARKER_RE.search(request.system_message)
    if inject:
        text = _mock_injection(request, int(inject.group(1)), inject.group(2), rng)
    else:
        level = _parse_level_marker(request)
        topic_m = _TOPIC_MARKER_RE.search(request.user_message)
        topic = topic_m.group(1).strip() if topic_m else ""
        text = _mock_essay(level, topic, rng, template_bank)
    usage = {"prompt_tokens": len(request.system_message.split()) +
             len(request.user_message.split()),
             "completion_tokens": len(text.split())}
    return ChatResponse(text=text, usage=usage, latency=0.0)


class MockGateway:
    """Drop-in gateway whose outputs are a pure function of (request, seed)."""

    def __init__(self, seed: int = 0,
                 template_bank: Sequence[str] = DEFAULT_TEMPLATE_BANK):
        if not template_bank:
            raise ValueError("template bank must be non-empty")
        self.seed = seed
        self.template_bank = tuple(template_bank)
        self.calls = 0

    def complete(self, request: ChatRequest, *, seed: Optional[int] = None) -> ChatResponse:
        self.calls += 1
        effective = self.seed if seed is None else stable_seed(self.seed, seed)
        return mock_complete(request, effective, self.template_bank)
