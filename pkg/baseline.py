"""
非神经基线 - 启发式抽取前缀/后缀变换规则，按特征bundle做多数分类
"""
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from difflib import SequenceMatcher
from typing import Dict, List, Optional, Tuple

from errors import DataError
from evalkit import SystemRun
from unimorph_core import Dataset, FeatureBundle, forms_of

PREFIX = "prefix"
SUFFIX = "suffix"

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class AffixRule:
    """前缀或后缀替换规则 input_affix → output_affix"""

    kind: str
    input_affix: str
    output_affix: str

    def matches(self, s: str) -> bool:
        if self.kind == SUFFIX:
            return s.endswith(self.input_affix)
        return s.startswith(self.input_affix)

    def apply(self, s: str) -> str:
        if not self.matches(s):
            raise ValueError(f"{self} does not match {s!r}")
        if self.kind == SUFFIX:
            return s[:len(s) - len(self.input_affix)] + self.output_affix
        return self.output_affix + s[len(self.input_affix):]

    def __str__(self) -> str:
        return f"{self.kind}:{self.input_affix}->{self.output_affix}"


def longest_common_substring(a: str, b: str) -> Tuple[int, int, int]:
    """返回 (a中起点, b中起点, 长度)；并列时取a中最靠左，再取b中最靠左"""
    matcher = SequenceMatcher(None, a, b, autojunk=False)
    match = matcher.find_longest_match(0, len(a), 0, len(b))
    return match.a, match.b, match.size


def extract_rules(lemma: str, form: str) -> Tuple[AffixRule, List[AffixRule]]:
    """从 (lemma, form) 抽取一条前缀规则和一组由泛到专的后缀规则

    lemma = P_l·stem·S_l，form = P_f·stem·S_f，stem为最长公共子串。
    后缀规则为 stem[k:]·S_l → stem[k:]·S_f，k从|stem|递减到0。
    stem为空时只输出整词规则 lemma → form（作为后缀规则）。
    """
    i, j, k = longest_common_substring(lemma, form)
    if k == 0:
        return AffixRule(PREFIX, "", ""), [AffixRule(SUFFIX, lemma, form)]

    stem = lemma[i:i + k]
    prefix_rule = AffixRule(PREFIX, lemma[:i], form[:j])
    lemma_suffix = lemma[i + k:]
    form_suffix = form[j + k:]
    suffix_rules = [
        AffixRule(SUFFIX, stem[cut:] + lemma_suffix, stem[cut:] + form_suffix)
        for cut in range(k, -1, -1)
    ]
    return prefix_rule, suffix_rules


@dataclass
class BundleRules:
    """某个bundle下的规则频次表：input_affix → {output_affix: 频次}"""

    prefix: Dict[str, Counter] = field(default_factory=lambda: defaultdict(Counter))
    suffix: Dict[str, Counter] = field(default_factory=lambda: defaultdict(Counter))

    def add(self, rule: AffixRule) -> None:
        table = self.suffix if rule.kind == SUFFIX else self.prefix
        table[rule.input_affix][rule.output_affix] += 1

    def count(self, rule: AffixRule) -> int:
        table = self.suffix if rule.kind == SUFFIX else self.prefix
        return table.get(rule.input_affix, {}).get(rule.output_affix, 0)


def _candidates(table: Dict[str, Counter], s: str, kind: str) -> List[Tuple[str, str, int]]:
    """枚举s的所有前缀/后缀，在表中查找可用规则"""
    found = []
    for length in range(len(s) + 1):
        affix = s[len(s) - length:] if kind == SUFFIX else s[:length]
        outputs = table.get(affix)
        if outputs:
            for output, count in outputs.items():
                found.append((affix, output, count))
    return found


class RuleModel:
    """按规范bundle索引的前缀/后缀规则频次表"""

    def __init__(self, language: str = "", freq_first: bool = False):
        self.language = language
        # True时后缀规则先比频次再比长度（用于消融）
        self.freq_first = freq_first
        self.by_bundle: Dict[str, BundleRules] = {}
        self.training_size = 0

    def observe(self, lemma: str, form: str, bundle: FeatureBundle) -> None:
        prefix_rule, suffix_rules = extract_rules(lemma, form)
        rules = self.by_bundle.setdefault(str(bundle), BundleRules())
        rules.add(prefix_rule)
        for rule in suffix_rules:
            rules.add(rule)
        self.training_size += 1

    def _select_suffix(self, rules: BundleRules, lemma: str) -> Optional[AffixRule]:
        candidates = _candidates(rules.suffix, lemma, SUFFIX)
        if not candidates:
            return None
        if self.freq_first:
            key = lambda c: (-c[2], -len(c[0]), c[1])
        else:
            key = lambda c: (-len(c[0]), -c[2], c[1])
        affix, output, _ = min(candidates, key=key)
        return AffixRule(SUFFIX, affix, output)

    def _select_prefix(self, rules: BundleRules, s: str) -> Optional[AffixRule]:
        candidates = _candidates(rules.prefix, s, PREFIX)
        if not candidates:
            return None
        affix, output, _ = min(candidates, key=lambda c: (-c[2], -len(c[0]), c[1]))
        return AffixRule(PREFIX, affix, output)

    def predict(self, lemma: str, bundle: FeatureBundle) -> str:
        """先应用最具体的后缀规则，再应用最常见的前缀规则；无规则时原样返回lemma"""
        rules = self.by_bundle.get(str(bundle))
        if rules is None:
            return lemma
        result = lemma
        suffix_rule = self._select_suffix(rules, result)
        if suffix_rule is not None:
            result = suffix_rule.apply(result)
        prefix_rule = self._select_prefix(rules, result)
        if prefix_rule is not None:
            result = prefix_rule.apply(result)
        # 空结果无法写入数据文件
        return result or lemma

    def to_json(self) -> str:
        """稳定的JSON序列化：bundle → 规则 → 频次"""
        bundles = {}
        for key in sorted(self.by_bundle):
            rules = self.by_bundle[key]
            bundles[key] = {
                kind: sorted(
                    [inp, out, count]
                    for inp, outputs in table.items()
                    for out, count in outputs.items()
                )
                for kind, table in ((PREFIX, rules.prefix), (SUFFIX, rules.suffix))
            }
        payload = {
            "format_version": MODEL_FORMAT_VERSION,
            "language": self.language,
            "training_size": self.training_size,
            "freq_first": self.freq_first,
            "bundles": bundles,
        }
        return json.dumps(payload, ensure_ascii=False, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RuleModel":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise DataError(f"model is not valid JSON: {e}")
        if payload.get("format_version") != MODEL_FORMAT_VERSION:
            raise DataError(f"unsupported model format version {payload.get('format_version')!r}")
        model = cls(payload.get("language", ""), bool(payload.get("freq_first", False)))
        model.training_size = int(payload["training_size"])
        for key, tables in payload["bundles"].items():
            rules = BundleRules()
            for kind in (PREFIX, SUFFIX):
                for inp, out, count in tables.get(kind, []):
                    if count < 1:
                        raise DataError(f"rule {inp!r}->{out!r} under {key} has count {count}")
                    (rules.suffix if kind == SUFFIX else rules.prefix)[inp][out] = int(count)
            model.by_bundle[key] = rules
        return model


def train(dataset: Dataset, freq_first: bool = False) -> RuleModel:
    """在（bundle已规范化的）训练集上统计规则频次"""
    model = RuleModel(dataset.language, freq_first=freq_first)
    for entry, form in zip(dataset.entries, forms_of(dataset)):
        model.observe(entry.lemma, form, entry.bundle)
    return model


def predict(model: RuleModel, lemma: str, bundle: FeatureBundle) -> str:
    return model.predict(lemma, bundle)


def predict_dataset(model: RuleModel, blind: Dataset, system: str = "baseline") -> SystemRun:
    """对盲测数据逐条预测（忽略已有form），保持输入顺序"""
    predictions = tuple(model.predict(e.lemma, e.bundle) for e in blind.entries)
    return SystemRun(system, blind.language, predictions, blind)
