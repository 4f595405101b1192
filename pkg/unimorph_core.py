"""
UniMorph数据模型 - 三元组（lemma, form, 特征标签）的解析、序列化与规范化
"""
import os
import sys
import unicodedata
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from errors import (
    DataError,
    DuplicateCategory,
    EmptyField,
    InvalidTag,
    InvalidUtf8,
    MalformedLine,
    MissingForm,
    SchemaError,
)

# 未知标签所属的哨兵类别，排在所有已知类别之后
UNKNOWN_CATEGORY = "_UNK"

_FORBIDDEN_TAG_CHARS = ("\t", "\n", "\r", ";")


@dataclass(frozen=True)
class FeatureTag:
    """单个形态特征标签，如 V、PST、SG"""

    text: str
    # 由Schema解析得到的类别，不参与相等比较
    category: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        text = self.text
        if not text or text != text.strip() or any(c in text for c in _FORBIDDEN_TAG_CHARS):
            raise InvalidTag(text)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class FeatureBundle:
    """有序的特征标签序列（MSD）"""

    tags: Tuple[FeatureTag, ...]

    def __post_init__(self):
        if not self.tags:
            raise EmptyField(None, "tags")

    @classmethod
    def from_string(cls, text: str, line_no: Optional[int] = None) -> "FeatureBundle":
        """由分号连接的标签串构造，如 "V;PST" """
        if not text:
            raise EmptyField(line_no, "tags")
        tags = []
        for piece in text.split(";"):
            try:
                tags.append(FeatureTag(piece))
            except InvalidTag as e:
                e.line_no = line_no
                raise
        return cls(tuple(tags))

    @property
    def texts(self) -> Tuple[str, ...]:
        return tuple(t.text for t in self.tags)

    def __str__(self) -> str:
        return ";".join(self.texts)

    def __len__(self) -> int:
        return len(self.tags)


@dataclass(frozen=True)
class Entry:
    """一条数据：lemma、目标form（盲测文件中缺省）、特征标签"""

    lemma: str
    form: Optional[str]
    bundle: FeatureBundle

    def __post_init__(self):
        if not self.lemma:
            raise EmptyField(None, "lemma")
        if self.form == "":
            raise EmptyField(None, "form")
        for name, value in (("lemma", self.lemma), ("form", self.form)):
            if value is not None and ("\t" in value or "\n" in value):
                raise DataError(f"{name} {value!r} contains a tab or newline")

    @property
    def key(self) -> Tuple[str, str]:
        """(lemma, bundle) 键，用于一致性统计"""
        return (self.lemma, str(self.bundle))

    def without_form(self) -> "Entry":
        return Entry(self.lemma, None, self.bundle)


@dataclass(frozen=True)
class Dataset:
    """某一语言的数据集，alphabet由entries自动推导"""

    language: str
    entries: Tuple[Entry, ...] = ()
    alphabet: FrozenSet[str] = field(init=False, compare=False)

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        chars = set()
        for e in entries:
            chars.update(e.lemma)
            if e.form is not None:
                chars.update(e.form)
        object.__setattr__(self, "alphabet", frozenset(chars))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Entry]:
        return iter(self.entries)

    def __getitem__(self, index):
        return self.entries[index]

    def with_entries(self, entries: Iterable[Entry]) -> "Dataset":
        """返回同语言的新数据集（alphabet重新计算）"""
        return Dataset(self.language, tuple(entries))

    @property
    def has_forms(self) -> bool:
        return all(e.form is not None for e in self.entries)

    def blind(self) -> "Dataset":
        """去掉所有form，得到盲测数据"""
        return self.with_entries(e.without_form() for e in self.entries)


# 内置的UniMorph类别与标签（顺序即规范顺序）
_DEFAULT_CATEGORIES: List[Tuple[str, Tuple[str, ...]]] = [
    ("POS", ("N", "PROPN", "ADJ", "PRO", "CLF", "ART", "DET", "V", "ADV", "AUX",
             "V.PTCP", "V.MSDR", "V.CVB", "ADP", "COMP", "CONJ", "NUM", "PART", "INTJ")),
    ("Finiteness", ("FIN", "NFIN")),
    ("Aspect", ("IPFV", "PFV", "PRF", "PROG", "PROSP", "ITER", "HAB")),
    ("Mood", ("ADM", "AUNPRP", "AUPRP", "COND", "DEB", "DED", "IMP", "IND", "INTEN", "IRR",
              "LKLY", "OBLIG", "OPT", "PERM", "POT", "PURP", "REAL", "SBJV", "SIM")),
    ("Tense", ("PRS", "PST", "FUT", "IMMED", "HOD", "1DAY", "RCT", "RMT")),
    ("Evidentiality", ("FH", "DRCT", "SEN", "VISU", "NVSEN", "AUD", "NFH", "QUOT", "RPRT",
                       "HRSY", "INFER", "ASSUM")),
    ("Person", ("0", "1", "2", "3", "4", "INCL", "EXCL", "PRX", "OBV")),
    ("Number", ("SG", "PL", "DU", "TRI", "PAUC", "GRPL", "GPAUC")),
    ("Gender", ("MASC", "FEM", "NEUT")),
    ("Animacy", ("ANIM", "INAN", "HUM", "NHUM")),
    ("Case", ("NOM", "ACC", "ERG", "ABS", "NOMS", "DAT", "BEN", "PRP", "GEN", "REL", "PRT",
              "INS", "COM", "VOC", "COMPV", "EQTV", "PRIV", "PROPR", "AVR", "FRML", "TRANS",
              "BYWAY", "INTER", "AT", "POST", "IN", "CIRC", "ANTE", "APUD", "ON", "ONHR",
              "ONVR", "SUB", "REM", "PROXM", "ESS", "ALL", "ABL", "APPRX", "TERM")),
    ("Definiteness", ("DEF", "INDF", "SPEC", "NSPEC")),
    ("Comparison", ("CMPR", "SPRL", "AB", "RL", "EQT")),
    ("Voice", ("ACT", "MID", "PASS", "ANTIP", "DIR", "INV", "AGFOC", "PFOC", "LFOC", "BFOC",
               "ACFOC", "IFOC", "CFOC", "CAUS", "APPL", "RECP", "REFL")),
    ("Polarity", ("POS", "NEG")),
    ("Politeness", ("INFM", "FORM", "ELEV", "HUMB", "POL", "AVOID", "LOW", "HIGH", "STELEV",
                    "STSUPR", "LIT", "FOREG", "COL")),
    ("Possession", ("ALN", "NALN", "PSSD", "PSS1S", "PSS2S", "PSS3S", "PSS1D", "PSS2D",
                    "PSS3D", "PSS1P", "PSS2P", "PSS3P", "PSS1PE", "PSS1PI", "PSS2SF",
                    "PSS2SM", "PSS3SF", "PSS3SM")),
    ("Interrogativity", ("DECL", "INT")),
    ("Valency", ("IMPRS", "INTR", "TR", "DITR")),
]


@dataclass(frozen=True)
class Schema:
    """标签→类别映射与类别的全序"""

    category_of: Mapping[str, str]
    category_order: Tuple[str, ...]
    pos_categories: FrozenSet[str] = frozenset({"POS"})

    def __post_init__(self):
        order = tuple(self.category_order)
        if len(set(order)) != len(order):
            raise SchemaError("category order lists a category twice")
        missing = set(self.category_of.values()) - set(order)
        if missing:
            raise SchemaError(f"categories missing from the order: {sorted(missing)}")
        object.__setattr__(self, "category_order", order)
        object.__setattr__(self, "_rank", {c: i for i, c in enumerate(order)})

    def category(self, tag_text: str) -> str:
        """返回标签的类别，未知标签返回哨兵类别"""
        return self.category_of.get(tag_text, UNKNOWN_CATEGORY)

    def rank(self, category: str) -> int:
        return self._rank.get(category, len(self.category_order))

    def is_pos(self, tag_text: str) -> bool:
        return self.category(tag_text) in self.pos_categories

    def pos_of(self, bundle: FeatureBundle) -> Optional[str]:
        """返回bundle中的词性标签（没有则返回None）"""
        for tag in bundle.tags:
            if self.is_pos(tag.text):
                return tag.text
        return None

    @classmethod
    def default(cls) -> "Schema":
        """内置的UniMorph类别表"""
        category_of: Dict[str, str] = {}
        for category, tags in _DEFAULT_CATEGORIES:
            for tag in tags:
                category_of[tag] = category
        return cls(category_of, tuple(c for c, _ in _DEFAULT_CATEGORIES), frozenset({"POS"}))

    @classmethod
    def from_text(cls, text: str) -> "Schema":
        """解析schema文件

        格式：
            @order<TAB>POS<TAB>Tense<TAB>...   类别顺序（必需）
            @pos<TAB>POS                       词性类别（可选，默认POS）
            TAG<TAB>CATEGORY                   每行一个标签
        以#开头的行为注释。
        """
        order: Optional[Tuple[str, ...]] = None
        pos: Optional[FrozenSet[str]] = None
        category_of: Dict[str, str] = {}
        for line_no, raw in enumerate(text.split("\n"), start=1):
            line = raw.rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if fields[0] == "@order":
                order = tuple(f for f in fields[1:] if f)
            elif fields[0] == "@pos":
                pos = frozenset(f for f in fields[1:] if f)
            elif len(fields) == 2 and fields[0] and fields[1]:
                category_of[fields[0]] = fields[1]
            else:
                raise SchemaError(f"expected TAG<TAB>CATEGORY, found {line!r}", line_no=line_no)
        if not order:
            raise SchemaError("schema has no @order header")
        if pos is None:
            pos = frozenset({"POS"}) & frozenset(order)
        return cls(category_of, order, pos)

    @classmethod
    def load(cls, path: Optional[str] = None) -> "Schema":
        """从文件加载schema；path为空时使用内置schema"""
        if not path:
            return cls.default()
        try:
            with open(path, "r", encoding="utf-8") as f:
                return cls.from_text(f.read())
        except DataError as e:
            raise e.with_path(path)


# 已提示过的重复标签bundle，每种只提示一次
_warned_duplicate_tags = set()


def canonicalize_bundle(bundle: FeatureBundle, schema: Schema, warn: bool = True) -> FeatureBundle:
    """规范化特征bundle：每个类别至多一个标签，按schema的类别顺序稳定排序

    Args:
        bundle: 原始bundle
        schema: 类别表
        warn: 是否提示被合并的重复标签（如 V;V）

    Returns:
        规范化后的bundle（标签带类别）

    Raises:
        DuplicateCategory: 两个不同标签属于同一类别（如 SG 与 PL）
    """
    seen_texts = set()
    tags: List[FeatureTag] = []
    for tag in bundle.tags:
        if tag.text in seen_texts:
            continue
        seen_texts.add(tag.text)
        tags.append(FeatureTag(tag.text, schema.category(tag.text)))

    if warn and len(tags) != len(bundle.tags):
        key = str(bundle)
        if key not in _warned_duplicate_tags:
            _warned_duplicate_tags.add(key)
            print(f"⚠️  合并重复标签: {key}", file=sys.stderr)

    owner: Dict[str, str] = {}
    for tag in tags:
        if tag.category == UNKNOWN_CATEGORY:
            continue
        if tag.category in owner:
            raise DuplicateCategory(tag.category, owner[tag.category], tag.text)
        owner[tag.category] = tag.text

    # sorted() 是稳定排序，未知标签保持原有相对顺序
    tags.sort(key=lambda t: schema.rank(t.category))
    return FeatureBundle(tuple(tags))


@dataclass(frozen=True)
class Finding:
    index: int
    kind: str
    detail: str


@dataclass
class ValidationReport:
    """validate_dataset的结果，只报告不修改"""

    language: str
    findings: List[Finding] = field(default_factory=list)

    @property
    def is_clean(self) -> bool:
        return not self.findings

    def count(self, kind: Optional[str] = None) -> int:
        if kind is None:
            return len(self.findings)
        return sum(1 for f in self.findings if f.kind == kind)

    def to_tsv(self) -> str:
        return "".join(f"{self.language}\t{f.index}\t{f.kind}\t{f.detail}\n" for f in self.findings)


def validate_dataset(dataset: Dataset, schema: Schema) -> ValidationReport:
    """逐条检查：空字段、重复类别、非规范顺序、重复标签"""
    report = ValidationReport(dataset.language)
    for i, entry in enumerate(dataset.entries):
        if not entry.lemma:
            report.findings.append(Finding(i, "empty_field", "lemma"))
        if entry.form is not None and not entry.form:
            report.findings.append(Finding(i, "empty_field", "form"))
        try:
            canonical = canonicalize_bundle(entry.bundle, schema, warn=False)
        except DuplicateCategory as e:
            report.findings.append(Finding(i, "duplicate_category", f"{e.category}:{e.tag1},{e.tag2}"))
            continue
        if len(canonical) != len(entry.bundle):
            report.findings.append(Finding(i, "duplicate_tag", str(entry.bundle)))
        elif canonical.texts != entry.bundle.texts:
            report.findings.append(Finding(i, "non_canonical_order", f"{entry.bundle} -> {canonical}"))
    return report


def canonicalize_dataset(dataset: Dataset, schema: Schema) -> Dataset:
    """规范化数据集中所有bundle（相同bundle只计算一次）"""
    cache: Dict[FeatureBundle, FeatureBundle] = {}
    entries = []
    for i, e in enumerate(dataset.entries):
        canonical = cache.get(e.bundle)
        if canonical is None:
            try:
                canonical = canonicalize_bundle(e.bundle, schema)
            except DuplicateCategory as err:
                err.message = f"entry {i}: {err.message}"
                raise
            cache[e.bundle] = canonical
        entries.append(Entry(e.lemma, e.form, canonical))
    return dataset.with_entries(entries)


def parse_dataset(
    text: Union[str, bytes],
    language: str,
    expect_forms: bool = True,
    nfc: bool = False,
) -> Dataset:
    """解析TSV文本为Dataset

    Args:
        text: UTF-8文本（bytes会先严格解码）
        language: 语言代码
        expect_forms: True为三列 lemma/form/tags，False为两列 lemma/tags（盲测文件）
        nfc: 是否对lemma和form做NFC规范化（默认不做）

    Returns:
        Dataset，每个非空行一条Entry
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            raise InvalidUtf8(e.start, e.reason)

    expected = 3 if expect_forms else 2
    entries: List[Entry] = []
    for line_no, line in enumerate(text.split("\n"), start=1):
        if line.endswith("\r"):
            line = line[:-1]
        # 含tab的行不算空行
        if "\t" not in line and not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != expected:
            raise MalformedLine(line_no, len(fields), expected)
        lemma = fields[0]
        form = fields[1] if expect_forms else None
        tags = fields[-1]
        if not lemma:
            raise EmptyField(line_no, "lemma")
        if expect_forms and not form:
            raise EmptyField(line_no, "form")
        if nfc:
            lemma = unicodedata.normalize("NFC", lemma)
            if form is not None:
                form = unicodedata.normalize("NFC", form)
        entries.append(Entry(lemma, form, FeatureBundle.from_string(tags, line_no)))
    return Dataset(language, tuple(entries))


def serialize_dataset(dataset: Dataset, emit_forms: bool = True) -> str:
    """序列化为TSV文本（LF结尾），parse_dataset的逆操作"""
    lines = []
    for i, e in enumerate(dataset.entries):
        if emit_forms:
            if e.form is None:
                raise MissingForm(i)
            lines.append(f"{e.lemma}\t{e.form}\t{e.bundle}\n")
        else:
            lines.append(f"{e.lemma}\t{e.bundle}\n")
    return "".join(lines)


def language_of(path: str) -> str:
    """由文件名 <lang>.<split> 推出语言代码"""
    return os.path.basename(path).split(".", 1)[0]


def count_fields(path: str) -> int:
    """返回文件第一个非空行的列数（用于自动识别盲测文件）"""
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        for line in f:
            if line.strip():
                return len(line.rstrip("\r\n").split("\t"))
    return 3


def load_dataset(
    path: str,
    language: Optional[str] = None,
    expect_forms: Optional[bool] = None,
    nfc: bool = False,
) -> Dataset:
    """读取数据文件；expect_forms为None时按列数自动判断"""
    if expect_forms is None:
        expect_forms = count_fields(path) != 2
    with open(path, "rb") as f:
        raw = f.read()
    try:
        return parse_dataset(raw, language or language_of(path), expect_forms, nfc=nfc)
    except DataError as e:
        raise e.with_path(path)


def write_dataset(dataset: Dataset, path: str, emit_forms: bool = True) -> None:
    """写出数据文件（UTF-8, LF）"""
    text = serialize_dataset(dataset, emit_forms)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def forms_of(dataset: Dataset) -> Sequence[str]:
    """返回所有form；缺form时报错"""
    forms = []
    for i, e in enumerate(dataset.entries):
        if e.form is None:
            raise MissingForm(i)
        forms.append(e.form)
    return forms
