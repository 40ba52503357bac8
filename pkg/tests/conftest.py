import random

import pytest

from cefraug.corpus import CEFRLevel, Corpus, Essay

# Words chosen so every orthographic corruption rule has plenty of
# applicable targets: taa-marbuta finals, waw-alef finals, hamza carriers,
# plain-alef words, and generic 3+ letter words.
ARABIC_LEXICON = [
    # taa-marbuta finals
    "مدرسة", "غرفة", "سيارة", "حديقة", "مدينة", "جامعة", "مكتبة", "تفاحة",
    "ساعة", "نافذة", "طاولة", "حقيبة", "مزرعة", "جزيرة", "غابة", "بحيرة",
    "رسالة", "صورة", "فكرة", "قصة", "لغة", "كلمة", "جملة", "عائلة",
    "صديقة", "معلمة", "طالبة", "شجرة", "زهرة", "لعبة", "وظيفة", "شركة",
    "ثقافة", "حضارة", "رياضة",
    # waw-alef finals
    "كتبوا", "ذهبوا", "لعبوا", "درسوا", "عملوا", "خرجوا", "دخلوا", "جلسوا",
    "قالوا", "كانوا", "شربوا", "أكلوا", "وصلوا", "رجعوا", "سافروا",
    # hamza carriers
    "أحمد", "أسرة", "إنسان", "أستاذ", "إجازة", "مؤمن", "مسألة", "أصدقاء",
    "إمارة", "أطفال", "مساء", "سماء", "أسبوع", "سؤال", "رئيس", "فائدة",
    # plain alef
    "كتاب", "طالب", "باب", "سلام", "كلام", "جبال", "رمال", "حاسوب",
    "شارع", "مطار", "قطار", "بستان", "ميدان", "صباح", "طريق", "بلاد",
    # ya / alef-maqsura finals
    "كرسي", "نادي", "محامي", "صحفي", "رياضي", "وطني", "ذكي",
    "مقهى", "مبنى", "مستشفى", "معنى", "منتدى", "مصطفى",
    # generic
    "قلم", "درس", "بيت", "ولد", "بنت", "شمس", "قمر", "نهر", "جبل",
    "سوق", "مسجد", "ملعب", "فندق", "مطعم", "متحف", "مصنع", "دفتر",
    "منزل", "عمل", "خبز", "حليب", "سمك", "لحم", "عنب",
]


@pytest.fixture
def lexicon():
    return list(ARABIC_LEXICON)


@pytest.fixture
def rng():
    return random.Random(20240501)


def make_essay(essay_id: str, text: str, level: CEFRLevel | None = None, **kwargs) -> Essay:
    return Essay(id=essay_id, text=text, level_gold=level, **kwargs)


def make_corpus(*essays: Essay) -> Corpus:
    return Corpus(essays)
