"""
数据幻觉增强 - 字符级对齐lemma与form，把长共享子串替换为随机字母，生成新的训练三元组
"""
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config import Config
from errors import EmptyAlphabet, MissingForm, NothingHallucinable
from random_source import make_rng
from unimorph_core import Dataset, Entry


@dataclass(frozen=True)
class Segment:
    """对齐片段；shared片段两侧文本相同"""

    lemma_span: Tuple[int, int]
    form_span: Tuple[int, int]
    lemma_text: str
    form_text: str
    shared: bool

    def __len__(self) -> int:
        return len(self.lemma_text) if self.shared else max(len(self.lemma_text), len(self.form_text))


@dataclass(frozen=True)
class Alignment:
    segments: Tuple[Segment, ...]

    @property
    def lemma(self) -> str:
        return "".join(s.lemma_text for s in self.segments)

    @property
    def form(self) -> str:
        return "".join(s.form_text for s in self.segments)

    def shared(self) -> List[Segment]:
        return [s for s in self.segments if s.shared]

    def non_shared(self) -> List[Tuple[str, str]]:
        return [(s.lemma_text, s.form_text) for s in self.segments if not s.shared]

    def layout(self) -> List[Tuple[bool, str, str]]:
        return [(s.shared, s.lemma_text, s.form_text) for s in self.segments]


def _lcs_table(a: str, b: str) -> List[List[int]]:
    """table[i][j] = a[i:] 与 b[j:] 的最长公共子序列长度"""
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) - 1, -1, -1):
        row, below = table[i], table[i + 1]
        for j in range(len(b) - 1, -1, -1):
            if a[i] == b[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = max(below[j], row[j + 1])
    return table


def align(lemma: str, form: str) -> Alignment:
    """基于最长公共子序列的字符对齐

    回溯时能匹配就匹配（最优前提下），否则优先跳过lemma中的字符；
    连续匹配的字符组成shared片段，其间未对齐的部分组成非shared片段。
    """
    table = _lcs_table(lemma, form)
    segments: List[Segment] = []
    i = j = 0
    # 当前片段在两侧的起点
    seg_i, seg_j = 0, 0
    in_shared: Optional[bool] = None

    def close(end_i: int, end_j: int, shared: bool):
        if end_i > seg_i or end_j > seg_j:
            segments.append(Segment(
                (seg_i, end_i), (seg_j, end_j), lemma[seg_i:end_i], form[seg_j:end_j], shared
            ))

    while i < len(lemma) or j < len(form):
        matched = (
            i < len(lemma) and j < len(form)
            and lemma[i] == form[j]
            and table[i][j] == table[i + 1][j + 1] + 1
        )
        if in_shared is not None and matched != in_shared:
            close(i, j, in_shared)
            seg_i, seg_j = i, j
        in_shared = matched
        if matched:
            i += 1
            j += 1
        elif j >= len(form) or (i < len(lemma) and table[i + 1][j] >= table[i][j + 1]):
            i += 1
        else:
            j += 1
    if in_shared is not None:
        close(i, j, in_shared)
    return Alignment(tuple(segments))


class HallucinationConfig(BaseModel):
    """幻觉参数；min_shared_len默认4，即替换长度>3的共享子串"""

    model_config = ConfigDict(frozen=True)

    min_shared_len: int = Field(default_factory=lambda: Config.HALLUCINATION_MIN_SHARED, ge=2)
    target_count: int = Field(default=0, ge=0)
    seed: int = Field(default_factory=lambda: Config.DEFAULT_SEED)
    # False时每个替换片段长度随机±1
    preserve_length: bool = True
    max_retries: int = Field(default_factory=lambda: Config.HALLUCINATION_MAX_RETRIES, ge=1)


@dataclass(frozen=True)
class HallucinationResult:
    entry: Entry
    # 没有可替换片段（或重试用尽）时为False，entry原样返回
    changed: bool


def _qualifies(alignment: Alignment, min_shared_len: int) -> bool:
    return any(len(s) >= min_shared_len for s in alignment.shared())


def _draw(alphabet: Sequence[str], length: int, rng: np.random.Generator) -> str:
    picks = rng.integers(0, len(alphabet), size=length)
    return "".join(alphabet[k] for k in picks)


def hallucinate_entry(
    entry: Entry,
    alphabet,
    cfg: HallucinationConfig,
    rng: np.random.Generator,
    alignment: Optional[Alignment] = None,
) -> HallucinationResult:
    """把每个长度≥min_shared_len的shared片段整体替换为同一串随机字符（lemma与form两侧相同）

    替换后重新对齐必须得到与原条目相同的片段结构（非shared片段逐字不变），
    否则重新抽取，最多max_retries次。
    """
    if entry.form is None:
        raise MissingForm(0)
    letters = sorted(alphabet)
    if not letters:
        raise EmptyAlphabet()
    alignment = alignment or align(entry.lemma, entry.form)
    if not _qualifies(alignment, cfg.min_shared_len):
        return HallucinationResult(entry, False)

    for _ in range(cfg.max_retries):
        lemma_parts: List[str] = []
        form_parts: List[str] = []
        expected: List[Tuple[bool, str, str]] = []
        for seg in alignment.segments:
            if seg.shared and len(seg) >= cfg.min_shared_len:
                length = len(seg)
                if not cfg.preserve_length:
                    length = max(1, length + int(rng.integers(-1, 2)))
                text = _draw(letters, length, rng)
                lemma_parts.append(text)
                form_parts.append(text)
                expected.append((True, text, text))
            else:
                lemma_parts.append(seg.lemma_text)
                form_parts.append(seg.form_text)
                expected.append((seg.shared, seg.lemma_text, seg.form_text))
        lemma, form = "".join(lemma_parts), "".join(form_parts)
        if align(lemma, form).layout() == expected:
            return HallucinationResult(Entry(lemma, form, entry.bundle), True)
    return HallucinationResult(entry, False)


def _triple(entry: Entry) -> Tuple[str, Optional[str], str]:
    return (entry.lemma, entry.form, str(entry.bundle))


def augment(dataset: Dataset, cfg: HallucinationConfig) -> Dataset:
    """生成cfg.target_count条幻觉数据（不含原始数据，由调用方拼接）

    按种子随机顺序循环遍历可幻觉的条目；与真实数据或已生成数据重复的结果丢弃重来。
    """
    if cfg.target_count == 0:
        return dataset.with_entries(())
    if not dataset.has_forms:
        raise MissingForm(next(i for i, e in enumerate(dataset.entries) if e.form is None))
    if not dataset.alphabet:
        raise EmptyAlphabet()

    alignments = [align(e.lemma, e.form) for e in dataset.entries]
    sources = [i for i, a in enumerate(alignments) if _qualifies(a, cfg.min_shared_len)]
    if not sources:
        raise NothingHallucinable(cfg.min_shared_len)

    rng = make_rng(cfg.seed)
    order = rng.permutation(len(sources))
    seen: Set[Tuple] = {_triple(e) for e in dataset.entries}
    generated: List[Entry] = []
    attempts = 0
    budget = cfg.target_count * cfg.max_retries
    cursor = 0
    while len(generated) < cfg.target_count and attempts < budget:
        index = sources[order[cursor % len(sources)]]
        cursor += 1
        attempts += 1
        result = hallucinate_entry(dataset.entries[index], dataset.alphabet, cfg, rng, alignments[index])
        if not result.changed:
            continue
        key = _triple(result.entry)
        if key in seen:
            continue
        seen.add(key)
        generated.append(result.entry)

    if len(generated) < cfg.target_count:
        print(
            f"⚠️  {dataset.language}: 重试用尽，只生成了 {len(generated)}/{cfg.target_count} 条幻觉数据",
            file=sys.stderr,
        )
    return dataset.with_entries(generated)
