#!/usr/bin/env python3
"""
命令行入口 - 把数据处理、基线、幻觉增强与评测排名流程暴露为子命令
"""
import argparse
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import ValidationError

import baseline
import datakit
import evalkit
import hallucinate
from config import Config, load_env_file
from errors import DataError, MissingFile, MissingLanguage, UniMorphError, UnknownCommand, UsageError
from manifest import RunManifest, digests, load_manifest, write_manifest
from unimorph_core import (
    Dataset,
    Schema,
    canonicalize_dataset,
    language_of,
    load_dataset,
    serialize_dataset,
    validate_dataset,
    write_dataset,
)

COMMANDS = (
    "validate", "canonicalize", "split", "stats", "train-baseline", "predict",
    "hallucinate", "evaluate", "rank", "oracle", "difficulty", "replay",
)

GOLD_SUFFIX = ".tst"
PREDICTION_SUFFIXES = (".out", ".pred", ".tst")


def log(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# 通用工具
# ---------------------------------------------------------------------------

def _require(path: str) -> str:
    if not os.path.exists(path):
        raise MissingFile(path)
    return path


def _schema(args: argparse.Namespace) -> Schema:
    path = getattr(args, "schema", None) or Config.SCHEMA_PATH
    if path:
        _require(path)
    return Schema.load(path)


def _emit(text: str, output: Optional[str]) -> None:
    """写到文件（UTF-8，LF）或标准输出"""
    if output:
        parent = os.path.dirname(output)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _record(
    output: Optional[str],
    args: argparse.Namespace,
    config: Dict[str, object],
    inputs: Iterable[str],
    outputs: Iterable[str] = (),
) -> None:
    """在输出旁写运行清单（输出到标准输出时不写）"""
    if not output:
        return
    outputs = list(outputs) or [output]
    manifest = RunManifest(
        command=args.command,
        argv=list(args.argv),
        config=config,
        inputs=digests(inputs),
        outputs=digests(outputs),
    )
    write_manifest(output, manifest)


def _language_files(path: str, suffix: str) -> Dict[str, str]:
    """目录中 <lang><suffix> 文件；path是文件时直接返回它"""
    _require(path)
    if os.path.isfile(path):
        return {language_of(path): path}
    found = {}
    for name in sorted(os.listdir(path)):
        full = os.path.join(path, name)
        if os.path.isfile(full) and name.endswith(suffix) and "." in name:
            lang = language_of(name)
            if name == lang + suffix:
                found[lang] = full
    return found


def _input_files(path: str, suffix: Optional[str] = None) -> List[str]:
    """单个文件，或目录下所有（以suffix结尾的）非清单文件"""
    _require(path)
    if os.path.isfile(path):
        return [path]
    return [
        os.path.join(path, name) for name in sorted(os.listdir(path))
        if os.path.isfile(os.path.join(path, name)) and not name.endswith(".json")
        and (suffix is None or name.endswith(suffix))
    ]


def _prediction_file(system_dir: str, lang: str) -> Optional[str]:
    for suffix in PREDICTION_SUFFIXES:
        candidate = os.path.join(system_dir, lang + suffix)
        if os.path.isfile(candidate):
            return candidate
    return None


def _system_dirs(args: argparse.Namespace) -> Dict[str, str]:
    """--pred 指定的系统目录，加上 --systems 目录下的所有子目录"""
    dirs: Dict[str, str] = {}
    for d in args.pred or []:
        _require(d)
        dirs[os.path.basename(os.path.normpath(d))] = d
    if args.systems:
        _require(args.systems)
        for name in sorted(os.listdir(args.systems)):
            full = os.path.join(args.systems, name)
            if os.path.isdir(full):
                dirs[name] = full
    if not dirs:
        raise UsageError("no system predictions given (use --pred DIR or --systems DIR)")
    return dirs


def _parallel(func: Callable, items: Sequence, jobs: int) -> List:
    """按输入顺序返回结果，与并行数无关"""
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def _load_scores(
    gold_files: Dict[str, str],
    systems: Dict[str, str],
    jobs: int,
) -> Tuple[Dict[str, Dataset], Dict[str, Dict[str, evalkit.ItemScores]]]:
    """读取gold与所有系统预测并打分：语言 → 系统 → ItemScores"""

    def score_language(lang: str):
        gold = load_dataset(gold_files[lang], lang, expect_forms=True)
        per_system = {}
        for system, directory in systems.items():
            path = _prediction_file(directory, lang)
            if path is None:
                raise MissingLanguage(system, lang)
            run = evalkit.SystemRun.from_dataset(system, load_dataset(path, lang, expect_forms=True))
            try:
                per_system[system] = evalkit.score_run(gold, run)
            except DataError as e:
                raise e.with_path(path)
        return gold, per_system

    langs = sorted(gold_files)
    results = _parallel(score_language, langs, jobs)
    golds = {lang: r[0] for lang, r in zip(langs, results)}
    scores = {lang: r[1] for lang, r in zip(langs, results)}
    return golds, scores


# ---------------------------------------------------------------------------
# 子命令
# ---------------------------------------------------------------------------

def cmd_validate(args: argparse.Namespace) -> int:
    schema = _schema(args)
    files = [f for p in args.inputs for f in _input_files(p)]
    rows = ["lang\tindex\tkind\tdetail\n"]
    total = 0
    for path in files:
        report = validate_dataset(load_dataset(path, nfc=args.nfc), schema)
        rows.append(report.to_tsv())
        total += report.count()
        status = "✓" if report.is_clean else "⚠️ "
        log(f"{status} {path}: {report.count()} 个问题")
    _emit("".join(rows), args.output)
    _record(args.output, args, {"schema": args.schema or Config.SCHEMA_PATH, "nfc": args.nfc}, files)
    log(f"📊 共检查 {len(files)} 个文件，发现 {total} 个问题")
    return 0


def cmd_canonicalize(args: argparse.Namespace) -> int:
    schema = _schema(args)
    path = _require(args.input)
    dataset = load_dataset(path, args.lang, nfc=args.nfc)
    try:
        canonical = canonicalize_dataset(dataset, schema)
    except DataError as e:
        raise e.with_path(path)
    _emit(serialize_dataset(canonical, emit_forms=canonical.has_forms), args.output)
    _record(args.output, args, {"schema": args.schema or Config.SCHEMA_PATH, "nfc": args.nfc}, [path])
    log(f"✓ {path}: 已规范化 {len(canonical)} 条")
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    schema = _schema(args)
    spec = datakit.SplitSpec(
        train_fraction=args.train_fraction,
        dev_fraction=args.dev_fraction,
        test_fraction=args.test_fraction,
        train_cap=args.train_cap,
        seed=args.seed,
    )
    files = _input_files(args.input)
    os.makedirs(args.out_dir, exist_ok=True)

    def split_one(path: str) -> str:
        lang = args.lang if args.lang and len(files) == 1 else language_of(path)
        dataset = load_dataset(path, lang, expect_forms=True, nfc=args.nfc)
        dataset, dropped = datakit.deduplicate(dataset, schema)
        try:
            train, dev, test = datakit.split(dataset, spec)
        except DataError as e:
            raise e.with_path(path)
        outputs = {
            ".trn": (train, True),
            ".dev": (dev, True),
            ".tst": (test, True),
            ".tst.blind": (test, False),
        }
        written = []
        for suffix, (part, with_forms) in outputs.items():
            target = os.path.join(args.out_dir, lang + suffix)
            write_dataset(part, target, emit_forms=with_forms)
            written.append(target)
        config = {"split": spec.model_dump(), "dedup_dropped": dropped, "nfc": args.nfc}
        for target in written:
            _record(target, args, config, [path], [target])
        return f"✓ {lang}: 去重 {dropped} 条，train/dev/test = {len(train)}/{len(dev)}/{len(test)}"

    for message in _parallel(split_one, files, args.jobs):
        log(message)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    schema = _schema(args)
    directory = _require(args.data_dir)
    train_files = _language_files(directory, ".trn")
    rows = [datakit.SplitStats.header() + "\n"]
    inputs = []

    def stats_one(lang: str) -> str:
        paths = [os.path.join(directory, lang + s) for s in (".trn", ".dev", ".tst")]
        for p in paths:
            _require(p)
        parts = []
        for p in paths:
            try:
                parts.append(canonicalize_dataset(load_dataset(p, lang, expect_forms=True), schema))
            except DataError as e:
                raise e.with_path(p)
        return datakit.compute_stats(*parts).to_row(lang) + "\n"

    langs = sorted(train_files)
    rows.extend(_parallel(stats_one, langs, args.jobs))
    for lang in langs:
        inputs.extend(os.path.join(directory, lang + s) for s in (".trn", ".dev", ".tst"))
    _emit("".join(rows), args.output)
    _record(args.output, args, {"schema": args.schema or Config.SCHEMA_PATH}, inputs)
    log(f"📊 已统计 {len(langs)} 种语言")
    return 0


def cmd_train_baseline(args: argparse.Namespace) -> int:
    schema = _schema(args)
    files = _input_files(args.input, ".trn")
    batch = os.path.isdir(args.input)
    if batch:
        os.makedirs(args.output, exist_ok=True)

    def train_one(path: str) -> str:
        lang = args.lang if args.lang and not batch else language_of(path)
        dataset = load_dataset(path, lang, expect_forms=True, nfc=args.nfc)
        try:
            dataset = canonicalize_dataset(dataset, schema)
        except DataError as e:
            raise e.with_path(path)
        model = baseline.train(dataset, freq_first=args.freq_first)
        target = os.path.join(args.output, f"{lang}.model.json") if batch else args.output
        _emit(model.to_json(), target)
        _record(target, args, {"freq_first": args.freq_first, "nfc": args.nfc}, [path])
        return f"✓ {lang}: {model.training_size} 条训练数据，{len(model.by_bundle)} 个bundle"

    for message in _parallel(train_one, files, args.jobs):
        log(message)
    return 0


def _load_model(path: str) -> baseline.RuleModel:
    with open(_require(path), "r", encoding="utf-8") as f:
        try:
            return baseline.RuleModel.from_json(f.read())
        except DataError as e:
            raise e.with_path(path)


def cmd_predict(args: argparse.Namespace) -> int:
    schema = _schema(args)
    files = _input_files(args.input, ".tst.blind")
    batch = os.path.isdir(args.input)
    if batch:
        _require(args.model)
        os.makedirs(args.output, exist_ok=True)

    def predict_one(path: str) -> str:
        lang = language_of(path)
        model_path = os.path.join(args.model, f"{lang}.model.json") if batch else args.model
        model = _load_model(model_path)
        blind = load_dataset(path, lang, nfc=args.nfc)
        try:
            lookup = canonicalize_dataset(blind, schema)
        except DataError as e:
            raise e.with_path(path)
        run = baseline.predict_dataset(model, lookup, system=args.system)
        # 输出保留输入文件中的标签写法
        run = evalkit.SystemRun(run.system, run.language, run.predictions, blind)
        target = os.path.join(args.output, f"{lang}.out") if batch else args.output
        _emit(serialize_dataset(run.to_dataset()), target)
        _record(target, args, {"system": args.system, "nfc": args.nfc}, [path, model_path])
        return f"✓ {lang}: 预测 {len(run)} 条"

    for message in _parallel(predict_one, files, args.jobs):
        log(message)
    return 0


def cmd_hallucinate(args: argparse.Namespace) -> int:
    files = _input_files(args.input, ".trn")
    batch = os.path.isdir(args.input)
    if batch:
        os.makedirs(args.output, exist_ok=True)
    threshold = args.threshold if args.threshold is not None else Config.HALLUCINATION_LOW_RESOURCE_THRESHOLD
    cfg = hallucinate.HallucinationConfig(
        min_shared_len=args.min_shared,
        target_count=args.n,
        seed=args.seed,
        preserve_length=not args.no_preserve_length,
    )

    def hallucinate_one(path: str) -> str:
        lang = language_of(path)
        dataset = load_dataset(path, lang, expect_forms=True, nfc=args.nfc)
        if args.low_resource_only and len(dataset) >= threshold:
            return f"⏭️  {lang}: {len(dataset)} 条 ≥ {threshold}，跳过"
        try:
            generated = hallucinate.augment(dataset, cfg)
        except DataError as e:
            raise e.with_path(path)
        target = os.path.join(args.output, f"{lang}.hall") if batch else args.output
        _emit(serialize_dataset(generated), target)
        _record(
            target, args,
            {"hallucination": cfg.model_dump(), "low_resource_only": args.low_resource_only,
             "threshold": threshold, "nfc": args.nfc},
            [path],
        )
        return f"✓ {lang}: 生成 {len(generated)} 条幻觉数据"

    for message in _parallel(hallucinate_one, files, args.jobs):
        log(message)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    gold_files = _language_files(args.gold, GOLD_SUFFIX)
    _require(args.pred)
    pred_is_file = os.path.isfile(args.pred)
    system_dir = os.path.dirname(os.path.abspath(args.pred)) if pred_is_file else args.pred
    system = args.system or os.path.basename(os.path.normpath(system_dir))
    train_files = _language_files(args.train, ".trn") if args.train else {}

    def evaluate_one(lang: str) -> Optional[Dict[str, object]]:
        pred_path = args.pred if pred_is_file else _prediction_file(args.pred, lang)
        if pred_path is None:
            log(f"⚠️  {lang}: 没有找到预测文件，跳过")
            return None
        gold = load_dataset(gold_files[lang], lang, expect_forms=True)
        run = evalkit.SystemRun.from_dataset(system, load_dataset(pred_path, lang, expect_forms=True))
        train = load_dataset(train_files[lang], lang, expect_forms=True) if lang in train_files else None
        try:
            return evalkit.evaluate_language(gold, run, train)
        except DataError as e:
            raise e.with_path(pred_path)

    langs = sorted(gold_files)
    rows = [r for r in _parallel(evaluate_one, langs, args.jobs) if r is not None]
    columns = ["lang", "system", "n", "accuracy", "mean_levenshtein"]
    if args.train:
        columns += ["n_seen", "accuracy_seen", "n_unseen", "accuracy_unseen"]
    lines = ["\t".join(columns) + "\n"]
    for row in rows:
        cells = []
        for c in columns:
            value = row.get(c, "")
            cells.append(f"{value:.4f}" if isinstance(value, float) else str(value))
        lines.append("\t".join(cells) + "\n")
    if rows:
        mean_acc = sum(r["accuracy"] for r in rows) / len(rows)
        mean_lev = sum(r["mean_levenshtein"] for r in rows) / len(rows)
        lines.append(f"_avg\t{system}\t{sum(r['n'] for r in rows)}\t{mean_acc:.4f}\t{mean_lev:.4f}\n")
    _emit("".join(lines), args.output)
    _record(args.output, args, {"system": system}, [args.gold, args.pred] + ([args.train] if args.train else []))
    log(f"📊 已评测 {len(rows)} 种语言")
    return 0


def _parse_groups(specs: Optional[List[str]]) -> Dict[str, List[str]]:
    groups: Dict[str, List[str]] = {}
    for spec in specs or []:
        if "=" not in spec:
            raise UsageError(f"--group expects NAME=lang1,lang2, got {spec!r}")
        name, langs = spec.split("=", 1)
        groups[name] = [l for l in langs.split(",") if l]
    return groups


def cmd_rank(args: argparse.Namespace) -> int:
    try:
        cfg = evalkit.BootstrapConfig.parse_spec(args.config or "")
    except ValueError as e:
        raise UsageError(f"invalid --config: {e}")
    gold_files = _language_files(args.gold, GOLD_SUFFIX)
    systems = _system_dirs(args)
    groups = _parse_groups(args.group)
    _, scores = _load_scores(gold_files, systems, args.jobs)
    ranker = evalkit.SystemRanker(cfg, metric=args.metric, pairwise=args.pairwise)

    langs = sorted(scores)
    per_language = dict(zip(langs, _parallel(lambda l: ranker.rank_language(scores[l], l), langs, args.jobs)))
    mean_accuracy = {
        s: sum(evalkit.accuracy(scores[l][s]) for l in langs) / len(langs) for s in systems
    } if langs else {}

    table = evalkit.aggregate_ranks(per_language, mean_accuracy=mean_accuracy)
    final = [table.final_tsv("all")]
    for name, members in groups.items():
        unknown = [l for l in members if l not in per_language]
        if unknown:
            raise UsageError(f"group {name} names languages without gold data: {unknown}")
        final.append(evalkit.aggregate_ranks(per_language, members, mean_accuracy).final_tsv(name).split("\n", 1)[1])

    config = {"bootstrap": cfg.model_dump(), "metric": args.metric, "pairwise": args.pairwise, "groups": groups}
    inputs = [args.gold] + list(systems.values())
    if args.output:
        ranks_path, final_path = args.output + ".ranks.tsv", args.output + ".final.tsv"
        _emit(table.per_language_tsv(), ranks_path)
        _emit("".join(final), final_path)
        _record(ranks_path, args, config, inputs, [ranks_path])
        _record(final_path, args, config, inputs, [final_path])
    else:
        _emit(table.per_language_tsv() + "\n" + "".join(final), None)
        # 输出到标准输出时没有清单，把有效参数写到标准错误
        log(f"🎲 bootstrap: samples={cfg.samples} ratio={cfg.ratio} alpha={cfg.alpha} seed={cfg.seed}")
    order = " > ".join("=".join(g) for g in table.tied_groups())
    log(f"🏆 最终排名: {order}")
    return 0


def _read_group_file(path: str) -> List[str]:
    with open(_require(path), "r", encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip() and not line.startswith("#")]


def cmd_oracle(args: argparse.Namespace) -> int:
    gold_files = _language_files(args.gold, GOLD_SUFFIX)
    systems = _system_dirs(args)
    groups: Dict[str, List[str]] = {}
    group_files = [g for g in (args.groups or "").split(",") if g]
    for path in group_files:
        name = os.path.splitext(os.path.basename(path))[0]
        groups[name] = _read_group_file(path)
    union = sorted({s for members in groups.values() for s in members}) if groups else sorted(systems)
    groups["all"] = union
    missing = sorted({s for members in groups.values() for s in members} - set(systems))
    if missing:
        raise UsageError(f"systems listed in groups have no predictions: {missing}")

    _, scores = _load_scores(gold_files, {s: systems[s] for s in union}, args.jobs)
    lines = ["lang\tgroup\tn_systems\toracle\n"]
    for lang in sorted(scores):
        for name, members in groups.items():
            value = evalkit.oracle([scores[lang][s] for s in members])
            lines.append(f"{lang}\t{name}\t{len(members)}\t{100.0 * value:.2f}\n")
    _emit("".join(lines), args.output)
    _record(args.output, args, {"groups": groups}, [args.gold] + group_files + [systems[s] for s in union])
    return 0


def cmd_difficulty(args: argparse.Namespace) -> int:
    schema = _schema(args)
    gold_files = _language_files(args.gold, GOLD_SUFFIX)
    systems = _system_dirs(args)
    golds, scores = _load_scores(gold_files, systems, args.jobs)
    lines = ["lang\tpos\tn\t" + "\t".join(evalkit.BUCKETS) + "\n"]
    items = ["lang\tindex\tpos\tbucket\n"]
    for lang in sorted(scores):
        runs = [scores[lang][s] for s in sorted(systems)]
        pos_tags = evalkit.pos_tags_of(golds[lang], schema)
        report = evalkit.difficulty(runs, pos_tags)
        lines.append(report.histogram_tsv(lang))
        for i, (pos, bucket) in enumerate(zip(pos_tags, report.buckets)):
            items.append(f"{lang}\t{i}\t{pos or evalkit.NO_POS}\t{bucket}\n")
    _emit("".join(lines), args.output)
    if args.items:
        _emit("".join(items), args.items)
    config = {"schema": args.schema or Config.SCHEMA_PATH, "systems": sorted(systems)}
    inputs = [args.gold] + list(systems.values())
    _record(args.output, args, config, inputs)
    _record(args.items, args, config, inputs)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    if not manifest.argv or manifest.argv[0] == "replay":
        raise DataError("manifest has no replayable command", path=args.manifest)
    log(f"🔁 重放: {' '.join(manifest.argv)}")
    return dispatch(manifest.argv)


# ---------------------------------------------------------------------------
# 参数解析
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, schema: bool = False, jobs: bool = False, nfc: bool = False):
    if schema:
        p.add_argument("--schema", help="schema文件（默认读取 UNIMORPH_SCHEMA_PATH，否则使用内置schema）")
    if jobs:
        p.add_argument("--jobs", type=int, default=None, help="按语言并行的线程数（默认读取 JOBS）")
    if nfc:
        p.add_argument("--nfc", action="store_true", help="读取时对lemma与form做NFC规范化")


def _add_systems(p: argparse.ArgumentParser):
    p.add_argument("--gold", required=True, help="gold目录，包含 <lang>.tst")
    p.add_argument("--pred", action="append", help="单个系统的预测目录（可重复）")
    p.add_argument("--systems", help="目录，每个子目录是一个系统")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unimorph-reinflect",
        description="UniMorph屈折生成共享任务工具：数据划分、统计、非神经基线、幻觉增强、显著性排名",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  # 划分数据（70/10/20，训练集上限10万）
  python cli.py split --seed 7 data/ang.tsv --out-dir splits/

  # 训练基线并预测
  python cli.py train-baseline --lang ang splits/ang.trn -o ang.model.json
  python cli.py predict --model ang.model.json splits/ang.tst.blind -o preds/baseline/ang.out

  # 显著性分层排名
  python cli.py rank --gold splits/ --systems preds/ --config samples=10000,ratio=0.5,alpha=0.005,seed=1 -o results/rank
        """,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("validate", help="检查数据文件的标签问题")
    p.add_argument("inputs", nargs="+", help="数据文件或目录")
    p.add_argument("-o", "--output")
    _add_common(p, schema=True, nfc=True)

    p = sub.add_parser("canonicalize", help="规范化特征标签顺序")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--lang")
    _add_common(p, schema=True, nfc=True)

    p = sub.add_parser("split", help="去重并划分 train/dev/test")
    p.add_argument("input", help="数据文件或目录（文件名 <lang>.*）")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--lang")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--train-fraction", type=float, default=None)
    p.add_argument("--dev-fraction", type=float, default=None)
    p.add_argument("--test-fraction", type=float, default=None)
    p.add_argument("--train-cap", type=int, default=None)
    _add_common(p, schema=True, jobs=True, nfc=True)

    p = sub.add_parser("stats", help="各语言的规模、不一致、矛盾与词表内比例")
    p.add_argument("data_dir", help="包含 <lang>.trn/.dev/.tst 的目录")
    p.add_argument("-o", "--output")
    _add_common(p, schema=True, jobs=True)

    p = sub.add_parser("train-baseline", help="训练非神经基线")
    p.add_argument("input", help="训练文件，或训练文件目录（此时 -o 为输出目录）")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--lang")
    p.add_argument("--freq-first", action="store_true", help="后缀规则先比频次再比长度")
    _add_common(p, schema=True, jobs=True, nfc=True)

    p = sub.add_parser("predict", help="用基线模型预测")
    p.add_argument("input", help="盲测文件或目录")
    p.add_argument("--model", required=True, help="模型文件，或 <lang>.model.json 所在目录")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--system", default="baseline")
    _add_common(p, schema=True, jobs=True, nfc=True)

    p = sub.add_parser("hallucinate", help="生成幻觉训练数据")
    p.add_argument("input", help="训练文件或目录（此时 -o 为输出目录）")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--n", type=int, required=True, help="生成条数")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--min-shared", type=int, default=None, help="替换的最短共享子串长度（默认4）")
    p.add_argument("--no-preserve-length", action="store_true", help="替换串长度随机±1")
    p.add_argument("--low-resource-only", action="store_true", help="只处理训练数据少于阈值的语言")
    p.add_argument("--threshold", type=int, default=None, help="低资源阈值（默认1000）")
    _add_common(p, jobs=True, nfc=True)

    p = sub.add_parser("evaluate", help="准确率与平均编辑距离")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True, help="系统预测目录（或单个预测文件）")
    p.add_argument("--train", help="训练目录，给定时分别报告见过/未见过lemma的准确率")
    p.add_argument("--system")
    p.add_argument("-o", "--output")
    _add_common(p, jobs=True)

    p = sub.add_parser("rank", help="配对bootstrap分层排名与计数向量聚合")
    _add_systems(p)
    p.add_argument("--config", default="", help="samples=10000,ratio=0.5,alpha=0.005,seed=S")
    p.add_argument("--metric", choices=evalkit.METRICS, default=evalkit.ACCURACY)
    p.add_argument("--pairwise", action="store_true", help="新系统须与层内所有系统都无显著差异")
    p.add_argument("--group", action="append", help="NAME=lang1,lang2 额外输出该语言组的聚合排名（可重复）")
    p.add_argument("-o", "--output", help="输出前缀，写 <prefix>.ranks.tsv 与 <prefix>.final.tsv")
    _add_common(p, jobs=True)

    p = sub.add_parser("oracle", help="系统组的oracle分数")
    _add_systems(p)
    p.add_argument("--groups", help="逗号分隔的系统名单文件，如 baselines.txt,submissions.txt")
    p.add_argument("-o", "--output")
    _add_common(p, jobs=True)

    p = sub.add_parser("difficulty", help="按答对系统比例给测试条目分桶")
    _add_systems(p)
    p.add_argument("-o", "--output")
    p.add_argument("--items", help="逐条分桶结果输出文件")
    _add_common(p, schema=True, jobs=True)

    p = sub.add_parser("replay", help="按运行清单重放命令")
    p.add_argument("manifest")
    return parser


HANDLERS = {
    "validate": cmd_validate,
    "canonicalize": cmd_canonicalize,
    "split": cmd_split,
    "stats": cmd_stats,
    "train-baseline": cmd_train_baseline,
    "predict": cmd_predict,
    "hallucinate": cmd_hallucinate,
    "evaluate": cmd_evaluate,
    "rank": cmd_rank,
    "oracle": cmd_oracle,
    "difficulty": cmd_difficulty,
    "replay": cmd_replay,
}


def _fill_defaults(args: argparse.Namespace) -> None:
    """未在命令行给出的参数取Config中的值，使清单记录有效参数"""
    defaults = {
        "seed": Config.DEFAULT_SEED,
        "jobs": Config.JOBS,
        "train_fraction": Config.SPLIT_TRAIN_FRACTION,
        "dev_fraction": Config.SPLIT_DEV_FRACTION,
        "test_fraction": Config.SPLIT_TEST_FRACTION,
        "train_cap": Config.SPLIT_TRAIN_CAP,
        "min_shared": Config.HALLUCINATION_MIN_SHARED,
    }
    for key, value in defaults.items():
        if getattr(args, key, value) is None:
            setattr(args, key, value)
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        raise UsageError("--jobs must be >= 1")


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """执行一个子命令并返回退出码：0成功，1数据错误，2用法错误"""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if argv and not argv[0].startswith("-") and argv[0] not in COMMANDS:
        error = UnknownCommand(argv[0])
        log(f"❌ {error}")
        parser.print_usage(sys.stderr)
        return error.exit_code
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    args.argv = argv

    try:
        if not Config.validate_config():
            return 2
        _fill_defaults(args)
        return HANDLERS[args.command](args)
    except UniMorphError as e:
        log(f"❌ {e}")
        if Config.DEBUG:
            log(traceback.format_exc())
        return e.exit_code
    except ValidationError as e:
        log(f"❌ 参数错误: {e}")
        return 2


def main() -> None:
    load_env_file(".env")
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
