import json
import random

import pytest

from apekit.cli import main
from apekit.corpus import Corpus, Triplet, read_corpus, write_corpus


def make_corpus_file(tmp_path, rows, name="corpus.jsonl"):
    path = tmp_path / name
    corpus = Corpus(
        tuple(Triplet(id=f"{i:06d}", src=s, mt=m, pe=p) for i, (s, m, p) in enumerate(rows, 1))
    )
    write_corpus(corpus, path)
    return path, corpus


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def load_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def synthetic_rows(n, seed=0):
    rng = random.Random(seed)
    words = "night falls over the quiet harbour and ships wait".split()
    rows = []
    for i in range(n):
        k = rng.randint(3, 8)
        src = " ".join(rng.choices(words, k=k)) + f" {i:04d}"
        rows.append((src, src.upper(), src + " !"))
    return rows


class TestFilterCommand:
    def test_filter_end_to_end(self, tmp_path):
        path, _ = make_corpus_file(tmp_path, synthetic_rows(200))
        config = tmp_path / "config.json"
        config.write_text(
            json.dumps({"dev_size": 20, "test_size": 20, "seed": 5, "expected_tgt_lang": "en"}),
            encoding="utf-8",
        )
        out_dir = tmp_path / "out"
        assert main(["filter", "--in", str(path), "--out-dir", str(out_dir), "--config", str(config)]) == 0
        report = load_json(out_dir / "filter_report.json")
        counts = report["report"]
        removals = (
            counts["removed_by_ratio"] + counts["removed_by_dedup"] + counts["removed_by_langid"]
        )
        assert counts["input_count"] == counts["kept_count"] + removals
        splits = counts["split_sizes"]
        assert counts["kept_count"] == splits["train"] + splits["dev"] + splits["test"]
        assert (splits["dev"], splits["test"]) == (20, 20)
        for name in ("train", "dev", "test"):
            assert len(read_corpus(out_dir / f"{name}.jsonl")) == splits[name]
        assert report["config"]["t"] == 0.2  # default when omitted

    def test_missing_input_is_data_error(self, tmp_path, capsys):
        code = main(["filter", "--in", str(tmp_path / "nope.jsonl"), "--out-dir", str(tmp_path)])
        assert code == 2
        assert "nope.jsonl" in capsys.readouterr().err

    def test_bad_config_is_config_error(self, tmp_path):
        path, _ = make_corpus_file(tmp_path, synthetic_rows(30))
        config = tmp_path / "config.json"
        config.write_text('{"t": 3.0}', encoding="utf-8")
        code = main(["filter", "--in", str(path), "--out-dir", str(tmp_path / "o"), "--config", str(config)])
        assert code == 1


class TestPrePostProcess:
    def rows_with_markup(self):
        return [
            ("♪ <i>La la</i><br>- Hey ♪", "♪ <i>Lo lo</i><br>- Ho ♪", "♪ <i>Le le</i><br>- He ♪"),
            ("- Plain line", "- Schlichte Zeile", "- Schlichte Zeile!"),
            ("No markup here", "Kein Markup hier", "Kein Markup hier."),
        ]

    def test_round_trip_across_processes(self, tmp_path):
        path, corpus = make_corpus_file(tmp_path, self.rows_with_markup())
        out_dir = tmp_path / "pre"
        assert main(["preprocess", "--in", str(path), "--out-dir", str(out_dir)]) == 0

        cleaned_lines = (out_dir / "cleaned.jsonl").read_text(encoding="utf-8").splitlines()
        assert len(cleaned_lines) > len(corpus)  # the <br> split added parts

        decoded = tmp_path / "decoded.txt"
        write_lines(decoded, [json.loads(line)["mt"] for line in cleaned_lines])
        restored = tmp_path / "restored.txt"
        assert (
            main(
                [
                    "postprocess",
                    "--outputs", str(decoded),
                    "--changelog", str(out_dir / "changelog.jsonl"),
                    "--out", str(restored),
                    "--orig", str(path),
                ]
            )
            == 0
        )
        expected = "".join(t.mt + "\n" for t in corpus)
        assert restored.read_text(encoding="utf-8") == expected

    def test_changelog_from_other_corpus_is_rejected(self, tmp_path):
        path_a, _ = make_corpus_file(tmp_path, self.rows_with_markup(), name="a.jsonl")
        path_b, corpus_b = make_corpus_file(tmp_path, synthetic_rows(5), name="b.jsonl")
        dir_a, dir_b = tmp_path / "pa", tmp_path / "pb"
        assert main(["preprocess", "--in", str(path_a), "--out-dir", str(dir_a)]) == 0
        assert main(["preprocess", "--in", str(path_b), "--out-dir", str(dir_b)]) == 0
        decoded_b = tmp_path / "decoded_b.txt"
        write_lines(decoded_b, [t.mt for t in corpus_b])
        code = main(
            [
                "postprocess",
                "--outputs", str(decoded_b),
                "--changelog", str(dir_a / "changelog.jsonl"),
                "--out", str(tmp_path / "r.txt"),
            ]
        )
        assert code == 2

    def test_digest_guard_on_orig(self, tmp_path):
        path, corpus = make_corpus_file(tmp_path, self.rows_with_markup())
        other, _ = make_corpus_file(tmp_path, synthetic_rows(3), name="other.jsonl")
        out_dir = tmp_path / "pre"
        main(["preprocess", "--in", str(path), "--out-dir", str(out_dir)])
        cleaned_lines = (out_dir / "cleaned.jsonl").read_text(encoding="utf-8").splitlines()
        decoded = write_lines(tmp_path / "d.txt", [json.loads(l)["mt"] for l in cleaned_lines])
        code = main(
            [
                "postprocess",
                "--outputs", str(decoded),
                "--changelog", str(out_dir / "changelog.jsonl"),
                "--out", str(tmp_path / "r.txt"),
                "--orig", str(other),
            ]
        )
        assert code == 2


class TestEvaluateCommand:
    def test_identity_scores(self, tmp_path):
        lines = ["the cat sat on the mat", "a stitch in time saves nine"]
        hyp = write_lines(tmp_path / "hyp.txt", lines)
        ref = write_lines(tmp_path / "ref.txt", lines)
        out = tmp_path / "report.json"
        assert main(["evaluate", "--hyp", str(hyp), "--ref", str(ref), "--out", str(out)]) == 0
        report = load_json(out)
        assert report["bleu"]["score"] == pytest.approx(100.0)
        assert report["chrf"] == pytest.approx(100.0)
        assert report["ter"]["score"] == 0.0

    def test_line_count_mismatch_exit_2(self, tmp_path):
        hyp = write_lines(tmp_path / "hyp.txt", ["a"])
        ref = write_lines(tmp_path / "ref.txt", ["a", "b"])
        assert main(["evaluate", "--hyp", str(hyp), "--ref", str(ref), "--out", str(tmp_path / "r.json")]) == 2

    def test_report_stable_except_timestamp(self, tmp_path):
        lines = ["one two three four", "five six seven eight nine"]
        hyp = write_lines(tmp_path / "hyp.txt", [l + " x" for l in lines])
        ref = write_lines(tmp_path / "ref.txt", lines)
        out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
        main(["evaluate", "--hyp", str(hyp), "--ref", str(ref), "--out", str(out_a), "--seed", "3"])
        main(["evaluate", "--hyp", str(hyp), "--ref", str(ref), "--out", str(out_b), "--seed", "3"])
        report_a, report_b = load_json(out_a), load_json(out_b)
        report_a["manifest"].pop("timestamp")
        report_b["manifest"].pop("timestamp")
        assert json.dumps(report_a, sort_keys=True) == json.dumps(report_b, sort_keys=True)

    def test_golden_report_keys(self, tmp_path):
        lines = ["golden keys stay put here"]
        hyp = write_lines(tmp_path / "hyp.txt", lines)
        ref = write_lines(tmp_path / "ref.txt", lines)
        out = tmp_path / "r.json"
        main(["evaluate", "--hyp", str(hyp), "--ref", str(ref), "--out", str(out)])
        report = load_json(out)
        assert list(report) == ["manifest", "bleu", "chrf", "ter"]
        assert list(report["bleu"]) == ["score", "precisions", "brevity_penalty", "hyp_len", "ref_len"]
        assert list(report["ter"]) == [
            "score", "insertions", "deletions", "substitutions", "shifts", "ref_len",
        ]

    def test_two_system_mode_adds_bootstrap_block(self, tmp_path):
        lines = [f"sentence number {i} with words" for i in range(12)]
        hyp = write_lines(tmp_path / "hyp.txt", lines)
        hyp_b = write_lines(tmp_path / "hyp_b.txt", [l.replace("words", "stuff") for l in lines])
        ref = write_lines(tmp_path / "ref.txt", lines)
        out = tmp_path / "r.json"
        code = main(
            ["evaluate", "--hyp", str(hyp), "--ref", str(ref), "--hyp-b", str(hyp_b), "--out", str(out)]
        )
        assert code == 0
        report = load_json(out)
        assert report["bootstrap"]["n_samples"] == 1000
        assert report["bootstrap"]["wins_a"] + report["bootstrap"]["wins_b"] + report["bootstrap"]["ties"] == 1000


class TestSignificanceCommand:
    def test_identical_systems(self, tmp_path):
        lines = [f"line {i} of text" for i in range(8)]
        hyp = write_lines(tmp_path / "h.txt", lines)
        ref = write_lines(tmp_path / "r.txt", lines)
        out = tmp_path / "sig.json"
        code = main(
            [
                "significance",
                "--hyp-a", str(hyp), "--hyp-b", str(hyp), "--ref", str(ref),
                "--out", str(out), "--n-samples", "50",
            ]
        )
        assert code == 0
        assert load_json(out)["bootstrap"]["p_value"] == 1.0


ADEQUACY_CSV = "annotator_id,item_id,system,score\n"


def adequacy_rows(annotators, items, score_fn):
    rows = []
    for a in annotators:
        for i in items:
            for s in ("nmt", "ape", "human"):
                rows.append(f"{a},{i},{s},{score_fn(a, i, s)}")
    return rows


class TestAgreementCommand:
    def test_identical_annotators_full_agreement(self, tmp_path):
        csv_path = tmp_path / "ad.csv"
        rows = adequacy_rows("AB", [f"i{k}" for k in range(6)], lambda a, i, s: (int(i[1]) + len(s)) % 5 + 1)
        csv_path.write_text(ADEQUACY_CSV + "\n".join(rows) + "\n", encoding="utf-8")
        out = tmp_path / "agr.json"
        assert main(["agreement", "--csv", str(csv_path), "--out", str(out)]) == 0
        report = load_json(out)
        assert report["cohen_kappa"]["mean_kappa"] == pytest.approx(1.0)
        assert report["weighted_kappa"]["mean_kappa"] == pytest.approx(1.0)

    def test_five_annotators_ten_pairs(self, tmp_path):
        rng = random.Random(1)
        csv_path = tmp_path / "ad.csv"
        rows = adequacy_rows(
            "ABCDE", [f"i{k}" for k in range(46)], lambda a, i, s: rng.randint(1, 5)
        )
        csv_path.write_text(ADEQUACY_CSV + "\n".join(rows) + "\n", encoding="utf-8")
        out = tmp_path / "agr.json"
        assert main(["agreement", "--csv", str(csv_path), "--out", str(out)]) == 0
        report = load_json(out)
        assert len(report["cohen_kappa"]["pairs"]) + report["cohen_kappa"]["skipped_pairs"] == 10
        assert report["n_shared_items"] == 46

    def test_malformed_csv_exit_2(self, tmp_path, capsys):
        csv_path = tmp_path / "bad.csv"
        csv_path.write_text("A,i1,nmt\n", encoding="utf-8")
        assert main(["agreement", "--csv", str(csv_path), "--out", str(tmp_path / "o.json")]) == 2
        assert "line 1" in capsys.readouterr().err


class TestAdequacyCommand:
    def test_used_over_assigned_in_output(self, tmp_path, capsys):
        csv_path = tmp_path / "ad.csv"
        rows = adequacy_rows("A", [f"i{k}" for k in range(10)], lambda a, i, s: 4)
        rows[1] = "A,i0,ape,X"  # one undecidable item
        csv_path.write_text(ADEQUACY_CSV + "\n".join(rows) + "\n", encoding="utf-8")
        assert main(["adequacy", "--csv", str(csv_path), "--out", str(tmp_path / "o.json")]) == 0
        printed = capsys.readouterr().out
        assert "(9 / 10)" in printed


class TestAblateCommand:
    def test_mock_scorer_protocol_shape(self, tmp_path):
        path, _ = make_corpus_file(tmp_path, synthetic_rows(1500))
        out = tmp_path / "curve.json"
        out_csv = tmp_path / "curve.csv"
        code = main(
            [
                "ablate",
                "--in", str(path),
                "--sizes", "62,125,250,500,1000,1250",
                "--replicates", "3",
                "--seed", "13",
                "--out", str(out),
                "--out-csv", str(out_csv),
            ]
        )
        assert code == 0
        report = load_json(out)
        assert report["n_samples"] == 18
        assert len(report["points"]) == 6
        for point in report["points"]:
            assert point["min"] <= point["mean"] <= point["max"]
        assert report["wmt_size_marker"] == 13441
        assert out_csv.read_text(encoding="utf-8").startswith("size,mean,min,max")

    def test_external_scores_aggregation(self, tmp_path):
        scores = tmp_path / "scores.csv"
        scores.write_text("size,replicate,value\n10,0,50\n10,1,54\n20,0,60\n", encoding="utf-8")
        out = tmp_path / "curve.json"
        code = main(["ablate", "--scores", str(scores), "--sizes", "10,20", "--out", str(out)])
        assert code == 0
        report = load_json(out)
        assert [p["size"] for p in report["points"]] == [10, 20]
        assert report["points"][0]["mean"] == pytest.approx(52.0)

    def test_requires_corpus_or_scores(self, tmp_path):
        assert main(["ablate", "--sizes", "10"]) == 1


class TestBucketsCommand:
    def test_identical_outputs_zero_delta(self, tmp_path):
        refs = [f"word{i} and some more text here" for i in range(20)]
        base = [r.replace("more", "extra") if i % 4 == 0 else r for i, r in enumerate(refs)]
        ref_p = write_lines(tmp_path / "ref.txt", refs)
        base_p = write_lines(tmp_path / "base.txt", base)
        ape_p = write_lines(tmp_path / "ape.txt", base)
        out = tmp_path / "buckets.json"
        code = main(
            ["buckets", "--baseline", str(base_p), "--ape", str(ape_p), "--ref", str(ref_p), "--out", str(out)]
        )
        assert code == 0
        report = load_json(out)["analysis"]
        assert len(report["buckets"]) == 10
        assert sum(b["count"] for b in report["buckets"]) == 20
        for bucket in report["buckets"]:
            if bucket["count"]:
                assert bucket["delta_ter"] == 0.0

    def test_canonical_bucket_order(self, tmp_path):
        refs = ["one two three"]
        ref_p = write_lines(tmp_path / "ref.txt", refs)
        hyp_p = write_lines(tmp_path / "hyp.txt", refs)
        out = tmp_path / "buckets.json"
        main(["buckets", "--baseline", str(hyp_p), "--ape", str(hyp_p), "--ref", str(ref_p), "--out", str(out)])
        labels = [b["label"] for b in load_json(out)["analysis"]["buckets"]]
        assert labels == [
            ">90", "80-90", "70-80", "60-70", "50-60", "40-50", "30-40", "20-30", "10-20", "<=10",
        ]


class TestStatsCommand:
    def test_stats_report(self, tmp_path):
        path, _ = make_corpus_file(tmp_path, [("a b", "c", "d e f")])
        out = tmp_path / "stats.json"
        assert main(["stats", "--in", str(path), "--out", str(out)]) == 0
        stats = load_json(out)["stats"]
        assert stats["n_triplets"] == 1
        assert (stats["tokens_src"], stats["tokens_mt"], stats["tokens_pe"]) == (2, 1, 3)


def test_unknown_command_is_usage_error(capsys):
    assert main(["frobnicate"]) == 1
