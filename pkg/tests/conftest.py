import json
import random

import pytest

from langmix.forge import SubstitutionLexicon

# Pure-Hangul vocabulary with aligned en/zh translations for injection tests.
KOREAN_VOCAB = [
    "안녕하세요", "세계", "평화", "좋은", "아침", "친구", "사랑", "행복", "하늘", "바다",
    "나무", "학교", "공부", "음식", "여행", "시간", "음악", "영화", "책상", "의자",
    "창문", "거리", "도시", "마을", "강아지", "고양이", "어머니", "아버지", "동생", "선생님",
    "학생", "병원", "약속", "생각", "마음", "이야기", "노래", "춤", "웃음", "눈물",
]

EN_WORDS = [
    "hello", "world", "peace", "good", "morning", "friend", "love", "happiness", "sky", "sea",
    "tree", "school", "study", "food", "travel", "time", "music", "movie", "desk", "chair",
    "window", "street", "city", "village", "puppy", "cat", "mother", "father", "sibling", "teacher",
    "student", "hospital", "promise", "thought", "heart", "story", "song", "dance", "laughter", "tears",
]

ZH_WORDS = [
    "你好", "世界", "和平", "好", "早晨", "朋友", "爱", "幸福", "天空", "大海",
    "树", "学校", "学习", "食物", "旅行", "时间", "音乐", "电影", "书桌", "椅子",
    "窗户", "街道", "城市", "村庄", "小狗", "猫", "母亲", "父亲", "弟弟", "老师",
    "学生", "医院", "约定", "想法", "心", "故事", "歌", "舞蹈", "笑声", "眼泪",
]


def lexicon_entries():
    entries = []
    for word, en, zh in zip(KOREAN_VOCAB, EN_WORDS, ZH_WORDS):
        entries.append((word, "en", en))
        entries.append((word, "zh", zh))
    return entries


@pytest.fixture(scope="session")
def lexicon():
    return SubstitutionLexicon(lexicon_entries())


@pytest.fixture
def lexicon_tsv(tmp_path):
    path = tmp_path / "lexicon.tsv"
    lines = ["\t".join(entry) for entry in lexicon_entries()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def korean_sentence(rng: random.Random, n_words: int, terminator: str = "") -> str:
    return " ".join(rng.choice(KOREAN_VOCAB) for _ in range(n_words)) + terminator


def random_response(rng: random.Random, max_tokens: int = 50) -> str:
    """Mixed-script synthetic response; token count stays <= max_tokens."""
    n = rng.randint(1, max_tokens)
    pieces = []
    for _ in range(n):
        roll = rng.random()
        if roll < 0.40:
            word = "".join(chr(rng.randint(0xAC00, 0xD7A3)) for _ in range(rng.randint(1, 4)))
        elif roll < 0.65:
            word = "".join(chr(rng.randint(0x61, 0x7A)) for _ in range(rng.randint(1, 8)))
        elif roll < 0.75:
            word = "".join(chr(rng.randint(0x4E00, 0x9FFF)) for _ in range(rng.randint(1, 3)))
        elif roll < 0.85:
            word = str(rng.randint(0, 99999))
        else:
            word = chr(rng.randint(0xAC00, 0xD7A3)) + "".join(
                chr(rng.randint(0x61, 0x7A)) for _ in range(rng.randint(1, 3))
            )
        if rng.random() < 0.15:
            word = "(" + word
        if rng.random() < 0.25:
            word += rng.choice(".!?,;…。")
        pieces.append(word)
        pieces.append("\n" if rng.random() < 0.08 else " ")
    return "".join(pieces[:-1])


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def generation_rows(n_prompts, repeats, text_fn, model="demo-1b", method="base", temperature=0.7):
    rows = []
    for p in range(n_prompts):
        for r in range(1, repeats + 1):
            rows.append(
                {
                    "prompt_id": f"p{p:04d}",
                    "model": model,
                    "method": method,
                    "temperature": temperature,
                    "repeat": r,
                    "text": text_fn(p, r),
                }
            )
    return rows
