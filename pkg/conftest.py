"""
共享测试数据：玩具语言与六系统/四语言的排名数据
"""
import os
import random
from typing import Dict, List, Tuple

import pytest

from evalkit import ItemScores
from unimorph_core import Dataset, Entry, FeatureBundle

# 语言 → 系统 → 答对条数；同层系统的逐条对错向量完全相同
RANKING_CORRECT: Dict[str, Dict[str, int]] = {
    "cly": {"uiuc": 900, "trm-single": 900, "CULing": 700, "deepspin": 700, "NYU-CUB": 700, "IMS": 400},
    "ctp": {"CULing": 900, "uiuc": 900, "trm-single": 900, "IMS": 700, "deepspin": 700, "NYU-CUB": 700},
    "czn": {s: 800 for s in ("uiuc", "trm-single", "CULing", "deepspin", "NYU-CUB", "IMS")},
    "zpv": {s: 800 for s in ("uiuc", "trm-single", "CULing", "deepspin", "NYU-CUB", "IMS")},
}

EXPECTED_LANGUAGE_RANKS = {
    "cly": {"uiuc": 1, "trm-single": 1, "CULing": 3, "deepspin": 3, "NYU-CUB": 3, "IMS": 6},
    "ctp": {"CULing": 1, "uiuc": 1, "trm-single": 1, "IMS": 4, "deepspin": 4, "NYU-CUB": 4},
    "czn": {s: 1 for s in RANKING_CORRECT["czn"]},
    "zpv": {s: 1 for s in RANKING_CORRECT["zpv"]},
}

# 计数向量的非零位置：名次 → 语言数
EXPECTED_COUNTS = {
    "uiuc": {1: 4},
    "trm-single": {1: 4},
    "CULing": {1: 3, 3: 1},
    "deepspin": {1: 2, 3: 1, 4: 1},
    "NYU-CUB": {1: 2, 3: 1, 4: 1},
    "IMS": {1: 2, 4: 1, 6: 1},
}


def correct_vector(n: int, k: int) -> List[bool]:
    """前k条答对，其余答错"""
    return [True] * k + [False] * (n - k)


def scale_counts(n: int) -> Dict[str, Dict[str, int]]:
    """把排名数据缩放到每种语言n条"""
    return {
        lang: {s: k * n // 1000 for s, k in systems.items()}
        for lang, systems in RANKING_CORRECT.items()
    }


@pytest.fixture
def ranking_scores() -> Dict[str, Dict[str, ItemScores]]:
    """每种语言1000条的逐条得分"""
    return {
        lang: {s: ItemScores.from_correct(correct_vector(1000, k)) for s, k in systems.items()}
        for lang, systems in RANKING_CORRECT.items()
    }


def write_ranking_files(root: str, n: int = 200) -> Tuple[str, str]:
    """在root下写gold目录与各系统预测目录，返回 (gold目录, 系统目录)"""
    gold_dir = os.path.join(root, "gold")
    systems_dir = os.path.join(root, "systems")
    os.makedirs(gold_dir, exist_ok=True)
    for lang, systems in scale_counts(n).items():
        with open(os.path.join(gold_dir, f"{lang}.tst"), "w", encoding="utf-8", newline="") as f:
            for i in range(n):
                f.write(f"w{i}\tw{i}a\tN;SG\n")
        for system, k in systems.items():
            sys_dir = os.path.join(systems_dir, system)
            os.makedirs(sys_dir, exist_ok=True)
            with open(os.path.join(sys_dir, f"{lang}.out"), "w", encoding="utf-8", newline="") as f:
                for i in range(n):
                    form = f"w{i}a" if i < k else f"w{i}b"
                    f.write(f"w{i}\t{form}\tN;SG\n")
    return gold_dir, systems_dir


STEM_LETTERS = "abcdefgh"
SUFFIX_LETTERS = "ijklmnop"
PREFIX_LETTERS = "xyz"


def random_stem(rnd: random.Random, low: int = 3, high: int = 8) -> str:
    return "".join(rnd.choice(STEM_LETTERS) for _ in range(rnd.randint(low, high)))


def affix_language(
    seed: int,
    n_bundles: int = 20,
    n_train: int = 500,
    n_test: int = 200,
    with_prefixes: bool = False,
) -> Tuple[Dataset, Dataset]:
    """合成的词缀语言：每个bundle有固定的后缀（及可选前缀）"""
    rnd = random.Random(seed)
    bundles = [FeatureBundle.from_string(f"V;X{b}") for b in range(n_bundles)]
    suffixes = ["".join(rnd.choice(SUFFIX_LETTERS) for _ in range(rnd.randint(1, 3))) for _ in bundles]
    prefixes = [
        "".join(rnd.choice(PREFIX_LETTERS) for _ in range(rnd.randint(1, 2))) if with_prefixes else ""
        for _ in bundles
    ]

    def make(count: int) -> Dataset:
        entries = []
        for _ in range(count):
            b = rnd.randrange(n_bundles)
            lemma = random_stem(rnd)
            entries.append(Entry(lemma, prefixes[b] + lemma + suffixes[b], bundles[b]))
        return Dataset("syn", tuple(entries))

    return make(n_train), make(n_test)


@pytest.fixture
def suffixing_language() -> Tuple[Dataset, Dataset]:
    return affix_language(11)


@pytest.fixture
def circumfixing_language() -> Tuple[Dataset, Dataset]:
    return affix_language(12, with_prefixes=True)


ABLAUT_CONSONANTS = "ptkbdgmnrs"
ABLAUT_VOWELS = "aeiou"
# 两个屈折类，各自替换第一个元音
ABLAUT_CLASSES = (
    {"a": "u", "e": "o", "i": "a", "o": "i", "u": "e"},
    {"a": "i", "e": "a", "i": "u", "o": "e", "u": "o"},
)


def ablaut_language(seed: int, n_train: int = 500, n_test: int = 200, major_share: float = 0.7) -> Tuple[Dataset, Dataset]:
    """只有词干内元音交替、没有词缀变化的合成语言；每个lemma随机属于两个屈折类之一"""
    rnd = random.Random(seed)
    bundle = FeatureBundle.from_string("V;PST")

    def make(count: int) -> Dataset:
        entries = []
        for _ in range(count):
            lemma = "".join(rnd.choice(ABLAUT_CONSONANTS) + rnd.choice(ABLAUT_VOWELS) for _ in range(2))
            lemma += rnd.choice(ABLAUT_CONSONANTS)
            mapping = ABLAUT_CLASSES[0 if rnd.random() < major_share else 1]
            entries.append(Entry(lemma, lemma[0] + mapping[lemma[1]] + lemma[2:], bundle))
        return Dataset("abl", tuple(entries))

    return make(n_train), make(n_test)


@pytest.fixture
def ablaut_data() -> Tuple[Dataset, Dataset]:
    return ablaut_language(13)


TOY_TSV = (
    "walk\twalked\tV;PST\n"
    "walk\twalks\tV;PRS;3;SG\n"
    "talk\ttalked\tV;PST\n"
    "talk\ttalking\tV.PTCP;PRS\n"
    "sing\tsang\tV;PST\n"
    "sing\tsings\tV;PRS;3;SG\n"
    "bring\tbrought\tV;PST\n"
    "cat\tcats\tN;PL\n"
    "dog\tdogs\tN;PL\n"
    "house\thouses\tN;PL\n"
)


@pytest.fixture
def toy_tsv() -> str:
    return TOY_TSV


def toy_language(n_lemmas: int = 60, seed: int = 3) -> Dataset:
    """每个lemma若干form的玩具数据，用于划分与幻觉测试"""
    rnd = random.Random(seed)
    paradigm = [("V;PST", "ed"), ("V;PRS;3;SG", "s"), ("V.PTCP;PRS", "ing"), ("V;NFIN", "")]
    entries = []
    for i in range(n_lemmas):
        lemma = random_stem(rnd, 4, 9)
        for tags, suffix in paradigm[: rnd.randint(1, len(paradigm))]:
            entries.append(Entry(lemma, lemma + suffix, FeatureBundle.from_string(tags)))
    return Dataset("toy", tuple(entries))
