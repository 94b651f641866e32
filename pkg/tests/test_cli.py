"""End-to-end pipeline through the command-line interface."""

import json

import pytest

from vlf.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")

    def run(*argv):
        assert main([str(a) for a in argv]) == 0

    run("make-corpus", "--out", root / "corpus", "--videos", "6", "--seed", "0")
    manifest = root / "corpus" / "manifest.json"
    run(
        "ingest", "--manifest", manifest, "--out", root / "segments.jsonl",
        "--answers", root / "corpus" / "qa.jsonl", "--tags-out", root / "tags.jsonl",
    )
    run(
        "train-tagger", "--mode", "crf", "--segments", root / "segments.jsonl",
        "--tags", root / "tags.jsonl", "--out", root / "tagger",
        "--epochs", "30", "--seed", "0",
    )
    run(
        "train-qg", "--pairs", root / "corpus" / "qa.jsonl", "--manifest", manifest,
        "--out", root / "qg", "--epochs", "30", "--seed", "0",
    )
    run(
        "build-dataset", "--manifest", manifest, "--tagger", root / "tagger",
        "--qg", root / "qg", "--mode", "crf", "--out", root / "dataset.jsonl",
        "--stats", root / "stats.json", "--failures", root / "failures.jsonl",
        "--seed", "0",
    )
    return root, manifest, run


def test_pipeline_artifacts(workspace):
    root, _, _ = workspace
    assert (root / "segments.jsonl").exists()
    assert (root / "tagger" / "config.json").exists()
    assert (root / "tagger" / "params.vlfk").exists()
    dataset = [json.loads(l) for l in (root / "dataset.jsonl").open()]
    assert dataset
    for row in dataset:
        assert 5 <= len(row["question"].split()) <= 19
        assert row["answer_end_s"] - row["answer_start_s"] >= 5.0
        assert row["provenance"]["tagger"] == "crf"
    stats = json.loads((root / "stats.json").read_text())
    assert stats["values"]["question_answer_count"] == len(dataset)


def test_tag_and_eval_wf1(workspace):
    root, _, run = workspace
    run("tag", "--model", root / "tagger", "--segments", root / "segments.jsonl",
        "--out", root / "pred_tags.jsonl")
    run("eval", "--metric", "wf1", "--pred", root / "pred_tags.jsonl",
        "--gold", root / "tags.jsonl", "--out", root / "wf1.json")
    report = json.loads((root / "wf1.json").read_text())
    assert report["values"]["f1_w1"] >= 0.9
    assert report["values"]["f1_w1"] <= report["values"]["f1_w3"]


def test_localizer_round_trip(workspace):
    root, manifest, run = workspace
    run(
        "train-localizer", "--dataset", root / "dataset.jsonl", "--manifest", manifest,
        "--out", root / "loc", "--ccal", "--epochs", "25", "--seed", "0",
    )
    rows = [json.loads(l) for l in (root / "dataset.jsonl").open()]
    questions = root / "questions.jsonl"
    gold = root / "gold_spans.jsonl"
    with questions.open("w") as fq, gold.open("w") as fg:
        for i, row in enumerate(rows):
            fq.write(json.dumps({
                "video_id": row["video_id"], "question_id": f"q{i}",
                "question": row["question"],
            }) + "\n")
            fg.write(json.dumps({
                "video_id": row["video_id"], "question_id": f"q{i}",
                "start_s": row["answer_start_s"], "end_s": row["answer_end_s"],
            }) + "\n")
    run("localize", "--model", root / "loc", "--questions", questions,
        "--manifest", manifest, "--out", root / "preds.jsonl")
    run("eval", "--metric", "iou", "--pred", root / "preds.jsonl",
        "--gold", gold, "--out", root / "iou.json")
    report = json.loads((root / "iou.json").read_text())
    assert report["values"]["miou"] > 0.5


def test_qgen_and_text_metrics(workspace):
    root, _, run = workspace
    run("qgen", "--model", root / "qg", "--segments", root / "segments.jsonl",
        "--out", root / "questions_gen.jsonl", "--beam", "3")
    rows = [json.loads(l) for l in (root / "questions_gen.jsonl").open()]
    assert rows and all(
        set(r) == {"video_id", "start_s", "end_s", "question"} for r in rows
    )
    # Self-comparison: BLEU/ROUGE of a file against itself is 1.
    run("eval", "--metric", "bleu", "--pred", root / "questions_gen.jsonl",
        "--gold", root / "questions_gen.jsonl", "--out", root / "bleu.json")
    bleu = json.loads((root / "bleu.json").read_text())["values"]
    assert bleu["bleu_4"] == pytest.approx(1.0)
    run("eval", "--metric", "rouge", "--pred", root / "questions_gen.jsonl",
        "--gold", root / "questions_gen.jsonl", "--out", root / "rouge.json")
    rouge = json.loads((root / "rouge.json").read_text())["values"]
    assert rouge["rouge_L"] == pytest.approx(1.0)


def test_stats_recomputation_matches(workspace):
    root, manifest, run = workspace
    run("stats", "--dataset", root / "dataset.jsonl", "--manifest", manifest,
        "--out", root / "stats2.json")
    a = json.loads((root / "stats.json").read_text())
    b = json.loads((root / "stats2.json").read_text())
    assert a["values"] == b["values"]


def test_eval_requires_gold_except_agreement(workspace):
    root, _, _ = workspace
    with pytest.raises(SystemExit, match="--gold is required"):
        main(["eval", "--metric", "iou", "--pred", str(root / "dataset.jsonl")])


def test_sample_review_and_agreement_eval(workspace, tmp_path):
    root, manifest, run = workspace
    state = root / "state"
    run("sample-review", "--dataset", root / "dataset.jsonl", "--manifest", manifest,
        "--n", "5", "--seed", "3", "--state-dir", state)
    cards = json.loads((state / "review_set.json").read_text())
    assert len(cards) == 5
    # Judge through the store directly, then evaluate the log.
    from vlf.metrics import Judgment
    from vlf.pipeline import JudgmentStore

    store = JudgmentStore(state / "judgments.jsonl")
    for card in cards:
        store.append(Judgment(card["sample_id"], "a1", "instructional", "Yes"))
    run("eval", "--metric", "agreement", "--pred", state / "judgments.jsonl",
        "--out", root / "agreement.json")
    report = json.loads((root / "agreement.json").read_text())
    assert report["values"]["instructional|unanimous|Yes"] == 100.0
