"""
数据工具 - 去重、70/10/20划分、按lemma整体采样，以及数据质量统计
"""
import math
import sys
from collections import defaultdict
from typing import Dict, List, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import Config
from errors import CapTooSmall, DuplicateCategory, TooSmall
from random_source import derive_seed, make_rng
from unimorph_core import Dataset, Entry, Schema, canonicalize_bundle, forms_of


class SplitSpec(BaseModel):
    """划分参数"""

    model_config = ConfigDict(frozen=True)

    train_fraction: float = Field(default_factory=lambda: Config.SPLIT_TRAIN_FRACTION, gt=0, lt=1)
    dev_fraction: float = Field(default_factory=lambda: Config.SPLIT_DEV_FRACTION, gt=0, lt=1)
    test_fraction: float = Field(default_factory=lambda: Config.SPLIT_TEST_FRACTION, gt=0, lt=1)
    train_cap: int = Field(default_factory=lambda: Config.SPLIT_TRAIN_CAP, ge=1)
    seed: int = Field(default_factory=lambda: Config.DEFAULT_SEED)

    @model_validator(mode="after")
    def _fractions_sum_to_one(self):
        total = self.train_fraction + self.dev_fraction + self.test_fraction
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {total}")
        return self


class SplitStat(BaseModel):
    """单个划分的统计；contradiction与in_vocabulary只对dev/test有意义"""

    size: int
    inconsistency_pct: float = Field(ge=0, le=100)
    contradiction_pct: Optional[float] = Field(default=None, ge=0, le=100)
    in_vocabulary_pct: Optional[float] = Field(default=None, ge=0, le=100)


class SplitStats(BaseModel):
    train: SplitStat
    dev: SplitStat
    test: SplitStat

    @staticmethod
    def header() -> str:
        return "\t".join([
            "lang", "train", "dev", "test",
            "train_incons_pct", "dev_incons_pct", "test_incons_pct",
            "dev_contra_pct", "test_contra_pct",
            "dev_invocab_pct", "test_invocab_pct",
        ])

    def to_row(self, language: str) -> str:
        """按 header() 的列顺序输出一行TSV"""
        values = [
            self.train.size, self.dev.size, self.test.size,
            self.train.inconsistency_pct, self.dev.inconsistency_pct, self.test.inconsistency_pct,
            self.dev.contradiction_pct, self.test.contradiction_pct,
            self.dev.in_vocabulary_pct, self.test.in_vocabulary_pct,
        ]
        cells = [language] + [str(v) if isinstance(v, int) else f"{v:.2f}" for v in values]
        return "\t".join(cells)


def _dedup_key(entry: Entry, schema: Schema) -> Tuple[str, Optional[str], Tuple[str, ...]]:
    try:
        texts = canonicalize_bundle(entry.bundle, schema, warn=False).texts
    except DuplicateCategory:
        texts = entry.bundle.texts
    return (entry.lemma, entry.form, texts)


def deduplicate(dataset: Dataset, schema: Optional[Schema] = None) -> Tuple[Dataset, int]:
    """去掉完全相同的 (lemma, form, 规范bundle)，保留第一次出现

    Returns:
        (去重后的数据集, 被丢弃的条目数)
    """
    schema = schema or Schema.default()
    seen: Set[Tuple] = set()
    kept: List[Entry] = []
    for entry in dataset.entries:
        key = _dedup_key(entry, schema)
        if key in seen:
            continue
        seen.add(key)
        kept.append(entry)
    return dataset.with_entries(kept), len(dataset) - len(kept)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_sizes(n: int, spec: SplitSpec) -> Tuple[int, int, int]:
    """dev与test四舍五入，余数全部给train"""
    n_dev = _round_half_up(n * spec.dev_fraction)
    n_test = _round_half_up(n * spec.test_fraction)
    n_train = n - n_dev - n_test
    if min(n_train, n_dev, n_test) < 1:
        raise TooSmall(f"{n} entries cannot fill train/dev/test ({n_train}/{n_dev}/{n_test})")
    return n_train, n_dev, n_test


def group_by_lemma(dataset: Dataset) -> Dict[str, List[int]]:
    """lemma → 条目下标列表（按lemma首次出现顺序）"""
    groups: Dict[str, List[int]] = defaultdict(list)
    for i, e in enumerate(dataset.entries):
        groups[e.lemma].append(i)
    return groups


def subsample_by_lemma(dataset: Dataset, cap: int, seed: int) -> Dataset:
    """按lemma整体采样到不超过cap条：一个lemma的所有form要么全部保留，要么全部丢弃

    lemma按种子随机顺序依次尝试，能放下就放入，直到遍历完所有lemma。
    """
    if cap >= len(dataset):
        return dataset
    groups = group_by_lemma(dataset)
    smallest = min(len(idx) for idx in groups.values())
    if smallest > cap:
        raise CapTooSmall(cap, smallest)

    lemmas = list(groups)
    rng = make_rng(seed)
    admitted: Set[int] = set()
    total = 0
    for k in rng.permutation(len(lemmas)):
        indices = groups[lemmas[k]]
        if total + len(indices) <= cap:
            admitted.update(indices)
            total += len(indices)
            if total == cap:
                break
    return dataset.with_entries(e for i, e in enumerate(dataset.entries) if i in admitted)


def split(dataset: Dataset, spec: Optional[SplitSpec] = None) -> Tuple[Dataset, Dataset, Dataset]:
    """随机划分为train/dev/test（各划分内保持输入顺序）

    若train超过train_cap，则对train做按lemma整体采样。
    """
    spec = spec or SplitSpec()
    n_train, n_dev, n_test = split_sizes(len(dataset), spec)
    permutation = make_rng(spec.seed).permutation(len(dataset))
    train_idx = sorted(permutation[:n_train].tolist())
    dev_idx = sorted(permutation[n_train:n_train + n_dev].tolist())
    test_idx = sorted(permutation[n_train + n_dev:].tolist())

    entries = dataset.entries
    train = dataset.with_entries(entries[i] for i in train_idx)
    dev = dataset.with_entries(entries[i] for i in dev_idx)
    test = dataset.with_entries(entries[i] for i in test_idx)

    if len(train) > spec.train_cap:
        before = len(train)
        train = subsample_by_lemma(train, spec.train_cap, derive_seed(spec.seed, "train-cap"))
        print(f"⚠️  {dataset.language}: 训练集 {before} 条超过上限，按lemma采样到 {len(train)} 条", file=sys.stderr)
    return train, dev, test


def _percent(count: int, size: int) -> float:
    return 100.0 * count / size if size else 0.0


def _forms_by_key(dataset: Dataset) -> Dict[Tuple[str, str], Set[str]]:
    table: Dict[Tuple[str, str], Set[str]] = defaultdict(set)
    for entry, form in zip(dataset.entries, forms_of(dataset)):
        table[entry.key].add(form)
    return table


def inconsistency_pct(dataset: Dataset) -> float:
    """同一(lemma, bundle)对应多个form的条目所占百分比（组内每条都计入）"""
    table = _forms_by_key(dataset)
    count = sum(1 for e in dataset.entries if len(table[e.key]) > 1)
    return _percent(count, len(dataset))


def contradiction_pct(train_forms: Dict[Tuple[str, str], Set[str]], split_set: Dataset) -> float:
    """dev/test中键在train出现、但form不在train的form集合中的条目百分比"""
    count = 0
    for entry, form in zip(split_set.entries, forms_of(split_set)):
        known = train_forms.get(entry.key)
        if known is not None and form not in known:
            count += 1
    return _percent(count, len(split_set))


def in_vocabulary_pct(train_lemmas: Set[str], split_set: Dataset) -> float:
    """lemma在train中出现过的条目百分比"""
    count = sum(1 for e in split_set.entries if e.lemma in train_lemmas)
    return _percent(count, len(split_set))


def compute_stats(train: Dataset, dev: Dataset, test: Dataset) -> SplitStats:
    """计算各划分的规模、不一致、矛盾与词表内比例（bundle须已规范化）"""
    train_forms = _forms_by_key(train)
    train_lemmas = {e.lemma for e in train.entries}

    def held_out(d: Dataset) -> SplitStat:
        return SplitStat(
            size=len(d),
            inconsistency_pct=inconsistency_pct(d),
            contradiction_pct=contradiction_pct(train_forms, d),
            in_vocabulary_pct=in_vocabulary_pct(train_lemmas, d),
        )

    return SplitStats(
        train=SplitStat(size=len(train), inconsistency_pct=inconsistency_pct(train)),
        dev=held_out(dev),
        test=held_out(test),
    )
