"""
评测工具 - 准确率/编辑距离、配对bootstrap显著性、分层排名、计数向量聚合、oracle与难度分桶
"""
import sys
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config import Config
from errors import EmptySet, MissingLanguage, SizeMismatch
from random_source import make_rng
from unimorph_core import Dataset, Entry, Schema, forms_of

ACCURACY = "accuracy"
DISTANCE = "distance"
METRICS = (ACCURACY, DISTANCE)

BUCKETS = ("very_easy", "easy", "medium", "hard", "very_hard")
NO_POS = "_"


def levenshtein(a: str, b: str) -> int:
    """Unicode码位上的单位代价编辑距离（插入/删除/替换）"""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            )
        previous = current
    return previous[-1]


@dataclass(frozen=True)
class SystemRun:
    """某系统在某语言上的逐条预测，与gold测试集按下标对齐"""

    system: str
    language: str
    predictions: Tuple[str, ...]
    # 预测对应的输入（lemma与bundle），写出三列TSV时使用
    inputs: Optional[Dataset] = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.predictions)

    @classmethod
    def from_dataset(cls, system: str, dataset: Dataset) -> "SystemRun":
        """由三列预测文件构造"""
        return cls(system, dataset.language, tuple(forms_of(dataset)), dataset)

    def to_dataset(self) -> Dataset:
        if self.inputs is None:
            raise ValueError("run has no inputs to serialize")
        entries = (Entry(e.lemma, p, e.bundle) for e, p in zip(self.inputs.entries, self.predictions))
        return Dataset(self.language, tuple(entries))


@dataclass(frozen=True, eq=False)
class ItemScores:
    """逐条得分：是否完全匹配，以及编辑距离"""

    correct: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        correct = np.asarray(self.correct, dtype=bool)
        distances = np.asarray(self.distances, dtype=np.int64)
        if correct.shape != distances.shape or correct.ndim != 1:
            raise SizeMismatch(len(correct), len(distances), "distances")
        if not np.array_equal(correct, distances == 0):
            raise ValueError("correct[i] must hold exactly when distances[i] == 0")
        object.__setattr__(self, "correct", correct)
        object.__setattr__(self, "distances", distances)

    def __len__(self) -> int:
        return int(self.correct.shape[0])

    @classmethod
    def from_correct(cls, correct: Iterable[bool]) -> "ItemScores":
        """只有对错信息时构造（错误项距离记为1）"""
        correct = np.asarray(list(correct), dtype=bool)
        return cls(correct, np.where(correct, 0, 1))

    def values(self, metric: str) -> np.ndarray:
        """越大越好的逐条数值：准确率为0/1，距离取负"""
        if metric == ACCURACY:
            return self.correct.astype(np.int64)
        if metric == DISTANCE:
            return -self.distances
        raise ValueError(f"unknown metric {metric!r}")


def score_run(gold: Dataset, run: SystemRun) -> ItemScores:
    """按下标比较预测与gold form"""
    gold_forms = forms_of(gold)
    if len(run.predictions) != len(gold_forms):
        raise SizeMismatch(len(gold_forms), len(run.predictions))
    if run.inputs is not None:
        misaligned = sum(1 for g, p in zip(gold.entries, run.inputs.entries) if g.lemma != p.lemma)
        if misaligned:
            print(f"⚠️  {run.system}/{run.language}: {misaligned} 条预测的lemma与gold不一致", file=sys.stderr)
    distances = [levenshtein(p, g) for p, g in zip(run.predictions, gold_forms)]
    correct = [p == g for p, g in zip(run.predictions, gold_forms)]
    return ItemScores(np.array(correct, dtype=bool), np.array(distances, dtype=np.int64))


def accuracy(scores: ItemScores) -> float:
    if len(scores) == 0:
        raise EmptySet()
    return float(scores.correct.mean())


def mean_distance(scores: ItemScores) -> float:
    if len(scores) == 0:
        raise EmptySet()
    return float(scores.distances.mean())


def metric_value(scores: ItemScores, metric: str) -> float:
    return accuracy(scores) if metric == ACCURACY else mean_distance(scores)


class BootstrapConfig(BaseModel):
    """配对bootstrap参数（默认10000次采样、50%比例、p<0.005）"""

    model_config = ConfigDict(frozen=True)

    samples: int = Field(default_factory=lambda: Config.BOOTSTRAP_SAMPLES, ge=1)
    ratio: float = Field(default_factory=lambda: Config.BOOTSTRAP_RATIO, gt=0, le=1)
    alpha: float = Field(default_factory=lambda: Config.BOOTSTRAP_ALPHA, gt=0, lt=1)
    seed: int = Field(default_factory=lambda: Config.DEFAULT_SEED)

    @classmethod
    def parse_spec(cls, spec: str) -> "BootstrapConfig":
        """解析 "samples=10000,ratio=0.5,alpha=0.005,seed=S" 形式的参数串"""
        values: Dict[str, str] = {}
        for part in spec.split(","):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise ValueError(f"expected key=value, got {part!r}")
            key, value = part.split("=", 1)
            values[key.strip()] = value.strip()
        unknown = set(values) - set(cls.model_fields)
        if unknown:
            raise ValueError(f"unknown bootstrap keys: {sorted(unknown)}")
        return cls(**values)


@dataclass(frozen=True)
class SignificanceResult:
    p: float
    a_better: bool
    alpha: float

    @property
    def significant(self) -> bool:
        return self.p < self.alpha


# 每块重采样的下标总数上限，只依赖于采样大小，保证结果与分块无关
_CHUNK_ELEMENTS = 2_000_000


def paired_bootstrap(
    a: ItemScores,
    b: ItemScores,
    cfg: Optional[BootstrapConfig] = None,
    metric: str = ACCURACY,
    rng: Optional[np.random.Generator] = None,
) -> SignificanceResult:
    """配对bootstrap重采样显著性检验

    全集上更好的系统在每次重采样中必须严格胜出；
    p = 未严格胜出的重采样比例。全集打平时 p = 1.0。

    Args:
        a, b: 两个系统的逐条得分
        cfg: 采样参数
        metric: accuracy（越高越好）或 distance（平均编辑距离越低越好）
        rng: 随机数生成器，缺省时由cfg.seed创建
    """
    cfg = cfg or BootstrapConfig()
    if len(a) != len(b):
        raise SizeMismatch(len(a), len(b), "paired scores")
    n = len(a)
    if n == 0:
        raise EmptySet()

    a_vals = a.values(metric)
    b_vals = b.values(metric)
    a_total = int(a_vals.sum())
    b_total = int(b_vals.sum())
    if a_total == b_total:
        return SignificanceResult(p=1.0, a_better=False, alpha=cfg.alpha)

    a_better = a_total > b_total
    # 逐条差值：胜者减败者
    delta = (a_vals - b_vals) if a_better else (b_vals - a_vals)
    rng = rng if rng is not None else make_rng(cfg.seed)
    m = max(1, int(np.floor(n * cfg.ratio)))
    rows_per_chunk = max(1, _CHUNK_ELEMENTS // m)

    wins = 0
    remaining = cfg.samples
    while remaining > 0:
        rows = min(rows_per_chunk, remaining)
        indices = rng.integers(0, n, size=(rows, m))
        wins += int((delta[indices].sum(axis=1) > 0).sum())
        remaining -= rows
    p = (cfg.samples - wins) / cfg.samples
    return SignificanceResult(p=p, a_better=a_better, alpha=cfg.alpha)


def _sorted_systems(runs: Mapping[str, ItemScores], metric: str) -> List[str]:
    if metric == ACCURACY:
        return sorted(runs, key=lambda s: (-accuracy(runs[s]), s))
    return sorted(runs, key=lambda s: (mean_distance(runs[s]), s))


class SystemRanker:
    """按语言做显著性分层排名，并跨语言聚合"""

    def __init__(
        self,
        cfg: Optional[BootstrapConfig] = None,
        metric: str = ACCURACY,
        pairwise: bool = False,
    ):
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}")
        self.cfg = cfg or BootstrapConfig()
        self.metric = metric
        self.pairwise = pairwise

    def significantly_different(self, language: str, runs: Mapping[str, ItemScores], x: str, y: str) -> bool:
        """对一对系统做检验；种子由(主种子, 语言, 系统对)派生，与顺序无关"""
        first, second = sorted((x, y))
        rng = make_rng(self.cfg.seed, language, first, second)
        result = paired_bootstrap(runs[first], runs[second], self.cfg, self.metric, rng=rng)
        return result.significant

    def rank_language(self, runs: Mapping[str, ItemScores], language: str = "") -> Dict[str, int]:
        """单语言排名：与当前层首系统无显著差异者并入该层，否则另起一层

        同层系统名次相同；某层之前共有t个系统时该层名次为t+1。
        """
        if not runs:
            raise EmptySet("systems")
        sizes = {len(s) for s in runs.values()}
        if len(sizes) != 1:
            raise SizeMismatch(min(sizes), max(sizes), f"{language} test sizes")

        ordered = _sorted_systems(runs, self.metric)
        ranks: Dict[str, int] = {}
        tier: List[str] = []
        tier_rank = 1
        for position, system in enumerate(ordered):
            if tier:
                members = tier if self.pairwise else tier[:1]
                joins = not any(self.significantly_different(language, runs, m, system) for m in members)
                if not joins:
                    tier = []
                    tier_rank = position + 1
            tier.append(system)
            ranks[system] = tier_rank
        return ranks


def rank_language(
    runs: Mapping[str, ItemScores],
    cfg: Optional[BootstrapConfig] = None,
    metric: str = ACCURACY,
    language: str = "",
    pairwise: bool = False,
) -> Dict[str, int]:
    return SystemRanker(cfg, metric, pairwise).rank_language(runs, language)


@dataclass
class RankTable:
    """各语言名次与聚合后的计数向量排序"""

    languages: Tuple[str, ...]
    per_language: Dict[str, Dict[str, int]]
    # 第r位为系统获得第r+1名的语言数
    count_vectors: Dict[str, Tuple[int, ...]]
    average_rank: Dict[str, float]
    final_order: Tuple[str, ...]
    # 计数向量完全相同的系统共享名次
    final_rank: Dict[str, int]

    def tied_groups(self) -> List[Tuple[str, ...]]:
        groups: List[List[str]] = []
        last = None
        for system in self.final_order:
            if groups and self.final_rank[system] == last:
                groups[-1].append(system)
            else:
                groups.append([system])
                last = self.final_rank[system]
        return [tuple(g) for g in groups]

    def per_language_tsv(self) -> str:
        lines = ["lang\tsystem\trank\n"]
        for language in self.languages:
            ranks = self.per_language[language]
            for system in sorted(ranks, key=lambda s: (ranks[s], s)):
                lines.append(f"{language}\t{system}\t{ranks[system]}\n")
        return "".join(lines)

    def final_tsv(self, group: str = "all") -> str:
        width = max((len(v) for v in self.count_vectors.values()), default=0)
        header = ["group", "final_rank", "system", "avg_rank"] + [f"n{r + 1}" for r in range(width)]
        lines = ["\t".join(header) + "\n"]
        for system in self.final_order:
            counts = [str(c) for c in self.count_vectors[system]]
            lines.append("\t".join(
                [group, str(self.final_rank[system]), system, f"{self.average_rank[system]:.2f}"] + counts
            ) + "\n")
        return "".join(lines)


def aggregate_ranks(
    per_language: Mapping[str, Mapping[str, int]],
    languages: Optional[Sequence[str]] = None,
    mean_accuracy: Optional[Mapping[str, float]] = None,
) -> RankTable:
    """按获得第1名、第2名……的次数对系统重新排序

    Args:
        per_language: 语言 → 系统 → 名次
        languages: 参与聚合的语言子集（如同一语族），缺省为全部
        mean_accuracy: 计数向量打平时用于展示顺序的平均准确率
    """
    languages = tuple(sorted(per_language) if languages is None else languages)
    systems = sorted({s for lang in languages for s in per_language.get(lang, {})})
    for lang in languages:
        ranks = per_language.get(lang, {})
        for system in systems:
            if system not in ranks:
                raise MissingLanguage(system, lang)

    width = len(systems)
    count_vectors: Dict[str, Tuple[int, ...]] = {}
    average_rank: Dict[str, float] = {}
    for system in systems:
        counts = [0] * width
        for lang in languages:
            counts[per_language[lang][system] - 1] += 1
        count_vectors[system] = tuple(counts)
        average_rank[system] = (
            sum(per_language[lang][system] for lang in languages) / len(languages) if languages else 0.0
        )

    mean_accuracy = mean_accuracy or {}
    final_order = sorted(
        systems,
        key=lambda s: (tuple(-c for c in count_vectors[s]), -mean_accuracy.get(s, 0.0), s),
    )
    final_rank: Dict[str, int] = {}
    for position, system in enumerate(final_order):
        if position and count_vectors[system] == count_vectors[final_order[position - 1]]:
            final_rank[system] = final_rank[final_order[position - 1]]
        else:
            final_rank[system] = position + 1

    return RankTable(
        languages=languages,
        per_language={lang: dict(per_language[lang]) for lang in languages},
        count_vectors=count_vectors,
        average_rank=average_rank,
        final_order=tuple(final_order),
        final_rank=final_rank,
    )


def oracle(runs: Sequence[ItemScores]) -> float:
    """至少一个系统答对的条目比例"""
    runs = list(runs)
    if not runs or len(runs[0]) == 0:
        raise EmptySet()
    sizes = {len(r) for r in runs}
    if len(sizes) != 1:
        raise SizeMismatch(min(sizes), max(sizes), "oracle runs")
    union = np.logical_or.reduce([r.correct for r in runs])
    return float(union.mean())


def bucket_of(n_correct: int, n_systems: int) -> str:
    """按答对系统比例c分桶：c=1 very_easy；0.8≤c<1 easy；0.2<c<0.8 medium；0<c≤0.2 hard；c=0 very_hard"""
    if n_correct == n_systems:
        return "very_easy"
    if n_correct == 0:
        return "very_hard"
    if 5 * n_correct >= 4 * n_systems:
        return "easy"
    if 5 * n_correct <= n_systems:
        return "hard"
    return "medium"


@dataclass
class DifficultyReport:
    buckets: List[str]
    # 词性 → 分桶 → 百分比
    histogram: Dict[str, Dict[str, float]]
    counts: Dict[str, Dict[str, int]]

    def histogram_tsv(self, language: str) -> str:
        lines = []
        for pos in sorted(self.histogram):
            cells = [f"{self.histogram[pos][b]:.2f}" for b in BUCKETS]
            total = sum(self.counts[pos].values())
            lines.append("\t".join([language, pos, str(total)] + cells) + "\n")
        return "".join(lines)


def difficulty(runs: Sequence[ItemScores], pos_tags: Optional[Sequence[Optional[str]]] = None) -> DifficultyReport:
    """逐条难度分桶，并按词性统计各桶百分比

    Args:
        runs: 各系统在同一测试集上的得分
        pos_tags: 每条的词性标签（None归入"_"）
    """
    runs = list(runs)
    if not runs or len(runs[0]) == 0:
        raise EmptySet()
    n = len(runs[0])
    if any(len(r) != n for r in runs):
        raise SizeMismatch(n, min(len(r) for r in runs), "difficulty runs")
    if pos_tags is None:
        pos_tags = [None] * n
    if len(pos_tags) != n:
        raise SizeMismatch(n, len(pos_tags), "part-of-speech tags")

    n_correct = np.sum([r.correct for r in runs], axis=0)
    buckets = [bucket_of(int(k), len(runs)) for k in n_correct]
    counts: Dict[str, Dict[str, int]] = {}
    for pos, bucket in zip(pos_tags, buckets):
        row = counts.setdefault(pos or NO_POS, {b: 0 for b in BUCKETS})
        row[bucket] += 1
    histogram = {
        pos: {b: 100.0 * c / sum(row.values()) for b, c in row.items()}
        for pos, row in counts.items()
    }
    return DifficultyReport(buckets=buckets, histogram=histogram, counts=counts)


def pos_tags_of(dataset: Dataset, schema: Schema) -> List[Optional[str]]:
    return [schema.pos_of(e.bundle) for e in dataset.entries]


def evaluate_language(gold: Dataset, run: SystemRun, train: Optional[Dataset] = None) -> Dict[str, object]:
    """单语言评测行：准确率、平均编辑距离；给定train时再分见过/未见过的lemma"""
    scores = score_run(gold, run)
    row: Dict[str, object] = {
        "lang": gold.language,
        "system": run.system,
        "n": len(scores),
        "accuracy": accuracy(scores) if len(scores) else 0.0,
        "mean_levenshtein": mean_distance(scores) if len(scores) else 0.0,
    }
    if train is not None:
        seen_lemmas = {e.lemma for e in train.entries}
        seen = np.array([e.lemma in seen_lemmas for e in gold.entries], dtype=bool)
        for name, mask in (("seen", seen), ("unseen", ~seen)):
            row[f"n_{name}"] = int(mask.sum())
            row[f"accuracy_{name}"] = float(scores.correct[mask].mean()) if mask.any() else 0.0
    return row
