"""
命令行测试：在进程内调用 dispatch，检查退出码、输出文件与运行清单
"""
import json
import os

import pytest

from cli import dispatch
from conftest import affix_language, toy_language, write_ranking_files
from manifest import MANIFEST_SUFFIX, load_manifest
from unimorph_core import write_dataset


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.tsv"
    write_dataset(toy_language(n_lemmas=80), str(path))
    return str(path)


def _read(path) -> bytes:
    with open(path, "rb") as f:
        return f.read()


class TestDispatch:
    def test_unknown_command(self, capsys):
        assert dispatch(["frobnicate"]) == 2
        assert "unknown command" in capsys.readouterr().err

    def test_missing_required_flag(self):
        assert dispatch(["predict", "x.tst.blind", "-o", "out"]) == 2

    def test_missing_input_file(self, tmp_path):
        assert dispatch(["validate", str(tmp_path / "nope.tsv")]) == 2

    def test_malformed_data_exits_1(self, tmp_path, capsys):
        path = tmp_path / "bad.trn"
        path.write_text("a\tb\tN\nc\td\n", encoding="utf-8")
        assert dispatch(["canonicalize", str(path)]) == 1
        err = capsys.readouterr().err
        assert f"{path}:2:" in err
        assert "MalformedLine" in err


class TestDataCommands:
    def test_split_is_deterministic(self, tmp_path, toy_file):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert dispatch(["split", "--seed", "7", toy_file, "--out-dir", str(out1)]) == 0
        assert dispatch(["split", "--seed", "7", toy_file, "--out-dir", str(out2)]) == 0
        for suffix in (".trn", ".dev", ".tst", ".tst.blind"):
            assert _read(out1 / f"toy{suffix}") == _read(out2 / f"toy{suffix}")
        blind = (out1 / "toy.tst.blind").read_text(encoding="utf-8")
        assert all(len(line.split("\t")) == 2 for line in blind.splitlines())

    def test_split_manifest_and_replay(self, tmp_path, toy_file):
        out = tmp_path / "splits"
        assert dispatch(["split", "--seed", "7", toy_file, "--out-dir", str(out)]) == 0
        for suffix in (".trn", ".dev", ".tst", ".tst.blind"):
            target = str(out / f"toy{suffix}")
            assert list(load_manifest(target + MANIFEST_SUFFIX).outputs) == [target]
        manifest_file = str(out / "toy.trn") + MANIFEST_SUFFIX
        manifest = load_manifest(manifest_file)
        assert manifest.command == "split"
        assert manifest.config["split"]["seed"] == 7
        assert manifest.config["split"]["train_cap"] == 100000
        assert toy_file in manifest.inputs

        before = _read(out / "toy.trn")
        os.remove(out / "toy.trn")
        assert dispatch(["replay", manifest_file]) == 0
        assert _read(out / "toy.trn") == before

    def test_stats(self, tmp_path, toy_file, capsys):
        out = tmp_path / "splits"
        assert dispatch(["split", "--seed", "1", toy_file, "--out-dir", str(out)]) == 0
        report = tmp_path / "stats.tsv"
        assert dispatch(["stats", str(out), "-o", str(report)]) == 0
        lines = report.read_text(encoding="utf-8").splitlines()
        assert lines[0].split("\t")[0] == "lang"
        assert lines[1].split("\t")[0] == "toy"
        assert os.path.exists(str(report) + MANIFEST_SUFFIX)

    def test_stats_canonicalizes_tag_order(self, tmp_path, capsys):
        (tmp_path / "xx.trn").write_text("a\tx\tV;PST\na\ty\tPST;V\n", encoding="utf-8")
        (tmp_path / "xx.dev").write_text("a\tq\tPST;V\n", encoding="utf-8")
        (tmp_path / "xx.tst").write_text("b\tz\tV;PST\n", encoding="utf-8")
        assert dispatch(["stats", str(tmp_path)]) == 0
        row = capsys.readouterr().out.splitlines()[1].split("\t")
        assert row == ["xx", "2", "1", "1", "100.00", "0.00", "0.00", "100.00", "0.00", "100.00", "0.00"]

    def test_validate_and_canonicalize(self, tmp_path, capsys):
        path = tmp_path / "eng.trn"
        path.write_text("walk\twalked\tPST;V\nwalk\twalks\tV;V;PRS\n", encoding="utf-8")
        assert dispatch(["validate", str(path)]) == 0
        report = capsys.readouterr().out.splitlines()
        assert report[0] == "lang\tindex\tkind\tdetail"
        assert [line.split("\t")[2] for line in report[1:]] == ["non_canonical_order", "duplicate_tag"]

        out = tmp_path / "eng.canon"
        assert dispatch(["canonicalize", str(path), "-o", str(out)]) == 0
        assert out.read_text(encoding="utf-8") == "walk\twalked\tV;PST\nwalk\twalks\tV;PRS\n"

    def test_canonicalize_duplicate_category(self, tmp_path):
        path = tmp_path / "eng.trn"
        path.write_text("cat\tcats\tN;SG;PL\n", encoding="utf-8")
        assert dispatch(["canonicalize", str(path)]) == 1


class TestBaselineCommands:
    def test_train_predict_evaluate(self, tmp_path, capsys):
        train_set, test_set = affix_language(21, n_train=300, n_test=50)
        data = tmp_path / "data"
        data.mkdir()
        write_dataset(train_set, str(data / "syn.trn"))
        write_dataset(test_set, str(data / "syn.tst"))
        write_dataset(test_set, str(data / "syn.tst.blind"), emit_forms=False)

        model = tmp_path / "syn.model.json"
        assert dispatch(["train-baseline", "--lang", "syn", str(data / "syn.trn"), "-o", str(model)]) == 0
        assert json.loads(model.read_text(encoding="utf-8"))["format_version"] == 1

        pred_dir = tmp_path / "preds" / "baseline"
        pred = pred_dir / "syn.out"
        assert dispatch(["predict", "--model", str(model), str(data / "syn.tst.blind"), "-o", str(pred)]) == 0

        capsys.readouterr()
        assert dispatch(["evaluate", "--gold", str(data), "--pred", str(pred_dir), "--train", str(data)]) == 0
        lines = capsys.readouterr().out.splitlines()
        header = lines[0].split("\t")
        row = dict(zip(header, lines[1].split("\t")))
        assert row["lang"] == "syn"
        assert row["system"] == "baseline"
        assert row["accuracy"] == "1.0000"
        assert row["mean_levenshtein"] == "0.0000"
        assert lines[-1].startswith("_avg\tbaseline\t50\t1.0000")

    def test_batch_mode(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        for seed, lang in ((1, "aaa"), (2, "bbb")):
            train_set, test_set = affix_language(seed, n_train=100, n_test=20)
            write_dataset(train_set, str(data / f"{lang}.trn"))
            write_dataset(test_set, str(data / f"{lang}.tst.blind"), emit_forms=False)
        models = tmp_path / "models"
        assert dispatch(["train-baseline", str(data), "-o", str(models), "--jobs", "2"]) == 0
        assert sorted(p for p in os.listdir(models) if p.endswith(".json") and MANIFEST_SUFFIX not in p) == [
            "aaa.model.json", "bbb.model.json",
        ]
        preds = tmp_path / "preds"
        assert dispatch(["predict", "--model", str(models), str(data), "-o", str(preds)]) == 0
        assert (preds / "aaa.out").exists() and (preds / "bbb.out").exists()

    def test_evaluate_size_mismatch(self, tmp_path, capsys):
        gold = tmp_path / "gold"
        pred = tmp_path / "sys"
        gold.mkdir()
        pred.mkdir()
        (gold / "xx.tst").write_text("a\tb\tN\nc\td\tN\n", encoding="utf-8")
        (pred / "xx.out").write_text("a\tb\tN\n", encoding="utf-8")
        assert dispatch(["evaluate", "--gold", str(gold), "--pred", str(pred)]) == 1
        assert "SizeMismatch" in capsys.readouterr().err


class TestHallucinateCommand:
    def test_generates_and_is_reproducible(self, tmp_path):
        path = tmp_path / "toy.trn"
        write_dataset(toy_language(), str(path))
        out1, out2 = tmp_path / "h1.trn", tmp_path / "h2.trn"
        for out in (out1, out2):
            assert dispatch(["hallucinate", "--n", "200", "--seed", "5", str(path), "-o", str(out)]) == 0
        assert _read(out1) == _read(out2)
        assert len(out1.read_text(encoding="utf-8").splitlines()) == 200
        manifest = load_manifest(str(out1) + MANIFEST_SUFFIX)
        assert manifest.config["hallucination"]["min_shared_len"] == 4

    def test_low_resource_only(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        write_dataset(toy_language(n_lemmas=20), str(data / "low.trn"))
        write_dataset(toy_language(n_lemmas=500, seed=8), str(data / "high.trn"))
        out = tmp_path / "hall"
        args = ["hallucinate", "--n", "50", "--seed", "1", "--low-resource-only", "--threshold", "200", str(data), "-o", str(out)]
        assert dispatch(args) == 0
        assert (out / "low.hall").exists()
        assert not (out / "high.hall").exists()


class TestRankingCommands:
    def test_rank_reproduces_tiers(self, tmp_path):
        gold, systems = write_ranking_files(str(tmp_path), n=200)
        prefix = str(tmp_path / "results" / "rank")
        config = "samples=10000,ratio=0.5,alpha=0.005,seed=1"
        args = ["rank", "--gold", gold, "--systems", systems, "--config", config, "-o", prefix,
                "--group", "pair=cly,ctp", "--jobs", "2"]
        assert dispatch(args) == 0

        ranks = {}
        with open(prefix + ".ranks.tsv", encoding="utf-8") as f:
            next(f)
            for line in f:
                lang, system, rank = line.rstrip("\n").split("\t")
                ranks[(lang, system)] = int(rank)
        assert ranks[("cly", "IMS")] == 6
        assert ranks[("ctp", "deepspin")] == 4
        assert ranks[("czn", "IMS")] == 1

        final = {}
        with open(prefix + ".final.tsv", encoding="utf-8") as f:
            next(f)
            for line in f:
                cells = line.rstrip("\n").split("\t")
                final[(cells[0], cells[2])] = int(cells[1])
        assert final[("all", "uiuc")] == final[("all", "trm-single")] == 1
        assert final[("all", "CULing")] == 3
        assert final[("all", "deepspin")] == final[("all", "NYU-CUB")] == 4
        assert final[("all", "IMS")] == 6
        assert final[("pair", "IMS")] == 6
        assert os.path.exists(prefix + ".final.tsv" + MANIFEST_SUFFIX)

    def test_rank_output_independent_of_jobs(self, tmp_path):
        gold, systems = write_ranking_files(str(tmp_path), n=100)
        config = "samples=2000,ratio=0.5,alpha=0.005,seed=3"
        for jobs in ("1", "4"):
            args = ["rank", "--gold", gold, "--systems", systems, "--config", config,
                    "-o", str(tmp_path / f"r{jobs}"), "--jobs", jobs]
            assert dispatch(args) == 0
        for suffix in (".ranks.tsv", ".final.tsv"):
            assert _read(str(tmp_path / "r1") + suffix) == _read(str(tmp_path / "r4") + suffix)

    def test_rank_to_stdout_reports_seed(self, tmp_path, capsys):
        gold, systems = write_ranking_files(str(tmp_path), n=20)
        config = "samples=200,ratio=0.5,alpha=0.005,seed=9"
        assert dispatch(["rank", "--gold", gold, "--systems", systems, "--config", config]) == 0
        captured = capsys.readouterr()
        assert captured.out.startswith("lang\tsystem\trank")
        assert "seed=9" in captured.err

    def test_bad_bootstrap_config(self, tmp_path):
        gold, systems = write_ranking_files(str(tmp_path), n=20)
        assert dispatch(["rank", "--gold", gold, "--systems", systems, "--config", "ratio=2"]) == 2

    def test_oracle_groups(self, tmp_path, capsys):
        gold, systems = write_ranking_files(str(tmp_path), n=100)
        weak = tmp_path / "weak.txt"
        weak.write_text("IMS\n", encoding="utf-8")
        strong = tmp_path / "strong.txt"
        strong.write_text("uiuc\nCULing\n", encoding="utf-8")
        assert dispatch(["oracle", "--gold", gold, "--systems", systems, "--groups", f"{weak},{strong}"]) == 0
        rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()[1:]]
        table = {(r[0], r[1]): float(r[3]) for r in rows}
        assert table[("cly", "weak")] == 40.0
        assert table[("cly", "strong")] == 90.0
        assert table[("cly", "all")] == 90.0

    def test_difficulty(self, tmp_path):
        gold, systems = write_ranking_files(str(tmp_path), n=100)
        out = tmp_path / "buckets.tsv"
        items = tmp_path / "items.tsv"
        assert dispatch(["difficulty", "--gold", gold, "--systems", systems, "-o", str(out), "--items", str(items)]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "lang\tpos\tn\tvery_easy\teasy\tmedium\thard\tvery_hard"
        row = dict(zip(lines[0].split("\t"), lines[1].split("\t")))
        # cly：前40条全对，40-69条5/6对，70-89条2/6对，其余全错
        assert (row["lang"], row["pos"]) == ("cly", "N")
        assert row["very_easy"] == "40.00"
        assert row["easy"] == "30.00"
        assert row["medium"] == "20.00"
        assert row["very_hard"] == "10.00"
        assert len(items.read_text(encoding="utf-8").splitlines()) == 1 + 4 * 100
