"""Command-line pipeline: ingest, train, tag, generate, build, evaluate, serve.

The state directory for review artifacts defaults to ``VLF_DATA_DIR``
(falling back to the current directory). All commands that involve
randomness take ``--seed``.
"""

from __future__ import annotations

import argparse
import os
import sys
from collections import defaultdict
from pathlib import Path

from .jsonl import read_jsonl, write_jsonl
from .localize import LocalizerExample, SpanLocalizer, load_track
from .metrics import (
    EvalReport,
    agreement_table,
    agreement_text,
    bleu,
    boundary_match_counts,
    format_table,
    miou,
    prf_from_counts,
    r_at_1,
    rouge,
)
from .persist import load_estimator, save_estimator
from .pipeline import (
    JudgmentStore,
    build_review_set,
    dataset_stats,
    derive_gold_tags,
    generate_dataset,
    ingest_video,
    load_gold_qa,
    load_manifest,
    make_mini_corpus,
    make_splits,
    read_dataset,
    save_review_set,
    stats_text,
    write_dataset,
)
from .qgen import QuestionGenerator, answer_window
from .segmentation import segment_records
from .subtitles import TimeSpan
from .tagging import CrfSegmentTagger, PromptSegmentTagger, load_templates

# Optimizer defaults: the toy profile trains a from-scratch model at
# desk scale; the paper profile keeps the published fine-tuning values
# for each trainer.
PROFILES = {
    "tagger": {
        "toy": {"lr": 4e-3, "weight_decay": 1e-4, "batch_size": 4},
        "paper": {"lr": 4e-5, "weight_decay": 1e-4, "batch_size": 4},
    },
    "qg": {
        "toy": {"lr": 4e-3, "weight_decay": 1e-4, "batch_size": 4},
        "paper": {"lr": 4e-5, "weight_decay": 1e-4, "batch_size": 2},
    },
    "localizer": {
        "toy": {"lr": 4e-3, "weight_decay": 1e-4, "batch_size": 4},
        "paper": {"lr": 5e-5, "weight_decay": 1e-4, "batch_size": 2},
    },
}
QG_STYLES = {
    "bart-style": {"qg_dim": 32, "qg_ff": 64},
    "t5-style": {"qg_dim": 48, "qg_ff": 96},
}


def state_dir_default() -> str:
    return os.environ.get("VLF_DATA_DIR", ".")


def _group_segments(rows) -> dict[str, list[dict]]:
    grouped: dict[str, list[dict]] = defaultdict(list)
    for row in rows:
        grouped[row["video_id"]].append(row)
    for vid in grouped:
        grouped[vid].sort(key=lambda r: r["index"])
    return dict(grouped)


def cmd_make_corpus(args) -> int:
    manifest = make_mini_corpus(
        args.out, n_videos=args.videos, seed=args.seed, with_tracks=not args.no_tracks
    )
    print(f"wrote corpus manifest {manifest}")
    return 0


def cmd_ingest(args) -> int:
    videos = load_manifest(args.manifest)
    rows: list[dict] = []
    tag_rows: list[dict] = []
    answers = defaultdict(list)
    if args.answers:
        for qa in load_gold_qa(args.answers):
            answers[qa["video_id"]].append(
                TimeSpan(qa["answer_start_s"], qa["answer_end_s"])
            )
    for record in sorted(videos, key=lambda r: r.video_id):
        _, segments = ingest_video(record, args.budget)
        rows.extend(segment_records(record.video_id, segments))
        if args.answers:
            tags = derive_gold_tags(segments, answers.get(record.video_id, []))
            tag_rows.append({"video_id": record.video_id, "tags": tags})
    write_jsonl(args.out, rows)
    print(f"wrote {len(rows)} segments to {args.out}")
    if args.answers and args.tags_out:
        write_jsonl(args.tags_out, tag_rows)
        print(f"wrote gold tags to {args.tags_out}")
    return 0


def _load_tagging_corpus(segments_path, tags_path):
    grouped = _group_segments(read_jsonl(segments_path))
    tags = {row["video_id"]: row["tags"] for row in read_jsonl(tags_path)}
    X, y = [], []
    for vid in sorted(grouped):
        if vid not in tags:
            continue
        X.append([r["text"] for r in grouped[vid]])
        y.append(tags[vid])
    return X, y


def cmd_train_tagger(args) -> int:
    X, y = _load_tagging_corpus(args.segments, args.tags)
    profile = PROFILES["tagger"][args.profile]
    common = dict(
        dim=args.dim, epochs=args.epochs, seed=args.seed,
        lr=profile["lr"], weight_decay=profile["weight_decay"],
        batch_size=profile["batch_size"],
    )
    if args.mode == "crf":
        tagger = CrfSegmentTagger(**common)
    else:
        template = load_templates()[args.template_id]
        tagger = PromptSegmentTagger(template=template, **common)
    tagger.fit(X, y)
    save_estimator(tagger, args.out)
    print(
        f"trained {args.mode} tagger on {len(X)} sequences; "
        f"final loss {tagger.loss_trace_[-1]:.4f}; saved to {args.out}"
    )
    return 0


def cmd_tag(args) -> int:
    tagger = load_estimator(args.model)
    grouped = _group_segments(read_jsonl(args.segments))
    rows = []
    for vid in sorted(grouped):
        tags = tagger.predict_one([r["text"] for r in grouped[vid]])
        rows.append({"video_id": vid, "tags": tags})
    write_jsonl(args.out, rows)
    print(f"tagged {len(rows)} videos to {args.out}")
    return 0


def _timelines_by_video(manifest_path, budget: int = 40):
    timelines = {}
    for record in load_manifest(manifest_path):
        timeline, _ = ingest_video(record, budget)
        timelines[record.video_id] = timeline
    return timelines


def cmd_train_qg(args) -> int:
    timelines = _timelines_by_video(args.manifest)
    X, y = [], []
    for qa in load_gold_qa(args.pairs):
        timeline = timelines.get(qa["video_id"])
        if timeline is None:
            continue
        span = TimeSpan(qa["answer_start_s"], qa["answer_end_s"])
        X.append(answer_window(timeline, span))
        y.append(qa["question"].split())
    profile = PROFILES["qg"][args.profile]
    generator = QuestionGenerator(
        dim=args.dim, epochs=args.epochs, seed=args.seed,
        lr=profile["lr"], weight_decay=profile["weight_decay"],
        batch_size=profile["batch_size"],
    )
    generator.fit(X, y)
    save_estimator(generator, args.out)
    print(
        f"trained question generator on {len(X)} pairs; "
        f"final loss {generator.loss_trace_[-1]:.4f}; saved to {args.out}"
    )
    return 0


def cmd_qgen(args) -> int:
    generator = load_estimator(args.model)
    rows = []
    for row in read_jsonl(args.segments):
        tokens = generator.generate(row["text"].split(), beam=args.beam)
        rows.append(
            {
                "video_id": row["video_id"],
                "start_s": row["start_s"],
                "end_s": row["end_s"],
                "question": " ".join(tokens),
            }
        )
    write_jsonl(args.out, rows)
    print(f"generated {len(rows)} questions to {args.out}")
    return 0


def cmd_build_dataset(args) -> int:
    videos = load_manifest(args.manifest)
    tagger = load_estimator(args.tagger)
    generator = load_estimator(args.qg)
    template_id = None
    if args.mode == "prompt" and isinstance(tagger, PromptSegmentTagger):
        templates = load_templates()
        by_text = {v: k for k, v in templates.items()}
        template_id = by_text.get(tagger.template)
    triplets, failures = generate_dataset(
        videos, args.mode, tagger, generator,
        word_budget=args.budget, template_id=template_id, seed=args.seed,
    )
    write_dataset(triplets, args.out)
    print(f"wrote {len(triplets)} triplets to {args.out} ({len(failures)} failures)")
    if args.failures:
        write_jsonl(args.failures, failures)
    if args.splits_dir and triplets:
        splits = make_splits(triplets, args.splits_dir, seed=args.seed)
        sizes = {k: len(v) for k, v in splits.items()}
        print(f"wrote split manifests to {args.splits_dir}: {sizes}")
    if args.stats:
        report = dataset_stats(triplets, videos) if triplets else None
        if report:
            Path(args.stats).write_text(report.to_json(), "utf-8")
            print(stats_text(report))
    return 0


def cmd_stats(args) -> int:
    triplets = read_dataset(args.dataset)
    videos = load_manifest(args.manifest)
    report = dataset_stats(triplets, videos)
    if args.out:
        Path(args.out).write_text(report.to_json(), "utf-8")
    print(stats_text(report))
    return 0


def _localizer_examples(dataset_path, manifest_path, with_tracks: bool):
    videos = {r.video_id: r for r in load_manifest(manifest_path)}
    timelines = {}
    tracks = {}
    X, y = [], []
    for t in read_dataset(dataset_path):
        record = videos.get(t.video_id)
        if record is None:
            continue
        if t.video_id not in timelines:
            timelines[t.video_id], _ = ingest_video(record)
        track = None
        if with_tracks and record.feature_path:
            if t.video_id not in tracks:
                tracks[t.video_id] = load_track(record.feature_path, record.duration_s)
            track = tracks[t.video_id]
        X.append(
            LocalizerExample(t.question.split(), timelines[t.video_id], track=track)
        )
        y.append(t.answer)
    return X, y


def cmd_train_localizer(args) -> int:
    X, y = _localizer_examples(args.dataset, args.manifest, args.fusion)
    profile = PROFILES["localizer"][args.profile]
    style = QG_STYLES[args.qg]
    localizer = SpanLocalizer(
        dim=args.dim,
        qg_weight=1.0 if args.ccal else 0.0,
        fusion=args.fusion,
        epochs=args.epochs,
        seed=args.seed,
        lr=profile["lr"],
        weight_decay=profile["weight_decay"],
        batch_size=profile["batch_size"],
        **style,
    )
    localizer.fit(X, y)
    save_estimator(localizer, args.out)
    mode = "cycle-consistent" if args.ccal else "span-only"
    print(
        f"trained {mode} localizer on {len(X)} items; "
        f"final loss {localizer.loss_trace_[-1]:.4f}; saved to {args.out}"
    )
    return 0


def cmd_localize(args) -> int:
    localizer = load_estimator(args.model)
    videos = {r.video_id: r for r in load_manifest(args.manifest)}
    timelines = {}
    rows = []
    for row in read_jsonl(args.questions):
        record = videos.get(row["video_id"])
        if record is None:
            continue
        if row["video_id"] not in timelines:
            timelines[row["video_id"]], _ = ingest_video(record)
        track = None
        if localizer.fusion and record.feature_path:
            track = load_track(record.feature_path, record.duration_s)
        example = LocalizerExample(
            row["question"].split(), timelines[row["video_id"]], track=track
        )
        span = localizer.predict_one(example)
        rows.append(
            {
                "video_id": row["video_id"],
                "question_id": row.get("question_id", str(len(rows))),
                "start_s": span.start_s,
                "end_s": span.end_s,
            }
        )
    write_jsonl(args.out, rows)
    print(f"localized {len(rows)} questions to {args.out}")
    return 0


def _keyed_spans(path):
    return {
        (row["video_id"], str(row.get("question_id", i))): (row["start_s"], row["end_s"])
        for i, row in enumerate(read_jsonl(path))
    }


def cmd_eval(args) -> int:
    if args.metric != "agreement" and not args.gold:
        raise SystemExit(f"--gold is required for --metric {args.metric}")
    if args.metric == "iou":
        preds = _keyed_spans(args.pred)
        golds = _keyed_spans(args.gold)
        pairs = [(preds[k], golds[k]) for k in sorted(preds) if k in golds]
        values = {f"r_at_1_iou_{mu}": r_at_1(pairs, mu) for mu in (0.3, 0.5, 0.7)}
        values["miou"] = miou(pairs)
        report = EvalReport("iou", values, config={"pairs": len(pairs)})
        headers = ["IoU = 0.3", "IoU = 0.5", "IoU = 0.7", "mIoU"]
        row = [
            f"{values['r_at_1_iou_0.3']:.2f}",
            f"{values['r_at_1_iou_0.5']:.2f}",
            f"{values['r_at_1_iou_0.7']:.2f}",
            f"{100 * values['miou']:.2f}",
        ]
        text = format_table(headers, [row])
    elif args.metric == "wf1":
        preds = {r["video_id"]: r["tags"] for r in read_jsonl(args.pred)}
        golds = {r["video_id"]: r["tags"] for r in read_jsonl(args.gold)}
        values = {}
        for w in (1, 2, 3):
            matched = n_pred = n_gold = 0
            for vid in sorted(preds):
                if vid not in golds:
                    continue
                m, p, g = boundary_match_counts(
                    preds[vid], golds[vid], w, args.window_semantics
                )
                matched += m
                n_pred += p
                n_gold += g
            precision, recall, f1 = prf_from_counts(matched, n_pred, n_gold)
            values[f"f1_w{w}"] = f1
            values[f"precision_w{w}"] = precision
            values[f"recall_w{w}"] = recall
        report = EvalReport(
            "windowed_f1", values, config={"semantics": args.window_semantics}
        )
        headers = ["F1 (w=1)", "F1 (w=2)", "F1 (w=3)"]
        text = format_table(
            headers, [[f"{values[f'f1_w{w}']:.4f}" for w in (1, 2, 3)]]
        )
    elif args.metric in ("bleu", "rouge"):
        preds = {
            (r["video_id"], str(r.get("question_id", i))): r["question"].split()
            for i, r in enumerate(read_jsonl(args.pred))
        }
        golds = {
            (r["video_id"], str(r.get("question_id", i))): r["question"].split()
            for i, r in enumerate(read_jsonl(args.gold))
        }
        keys = [k for k in sorted(preds) if k in golds]
        values = {}
        if args.metric == "bleu":
            for n in (1, 2, 3, 4):
                values[f"bleu_{n}"] = sum(
                    bleu(preds[k], [golds[k]], n) for k in keys
                ) / len(keys)
            headers = ["BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4"]
            row = [f"{100 * values[f'bleu_{n}']:.2f}" for n in (1, 2, 3, 4)]
        else:
            for variant in ("1", "2", "L"):
                values[f"rouge_{variant}"] = sum(
                    rouge(preds[k], golds[k], variant).f1 for k in keys
                ) / len(keys)
            headers = ["ROUGE-1", "ROUGE-2", "ROUGE-L"]
            row = [f"{100 * values[f'rouge_{v}']:.4f}" for v in ("1", "2", "L")]
        report = EvalReport(args.metric, values, config={"pairs": len(keys)})
        text = format_table(headers, [row])
    elif args.metric == "agreement":
        store = JudgmentStore(args.pred)
        report = agreement_table(store.all())
        text = agreement_text(report)
    else:
        raise SystemExit(f"unknown metric {args.metric}")
    if args.out:
        Path(args.out).write_text(report.to_json(), "utf-8")
    print(text)
    return 0


def cmd_sample_review(args) -> int:
    triplets = read_dataset(args.dataset)
    videos = load_manifest(args.manifest)
    cards = build_review_set(triplets, videos, n=args.n, seed=args.seed)
    state = Path(args.state_dir)
    state.mkdir(parents=True, exist_ok=True)
    save_review_set(cards, state / "review_set.json")
    print(f"wrote {len(cards)} review cards to {state / 'review_set.json'}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .pipeline import create_app

    app = create_app(args.state_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlf",
        description="Instructional-video answer localization pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-corpus", help="write the bundled synthetic mini corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--videos", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-tracks", action="store_true")
    p.set_defaults(func=cmd_make_corpus)

    p = sub.add_parser("ingest", help="subtitles to segment JSON lines")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=int, default=40)
    p.add_argument("--answers", help="gold QA file; also derive gold tags")
    p.add_argument("--tags-out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train-tagger", help="train a segment tagger")
    p.add_argument("--mode", choices=("crf", "prompt"), default="crf")
    p.add_argument("--segments", required=True)
    p.add_argument("--tags", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", choices=("toy", "paper"), default="toy")
    p.add_argument("--template-id", default="1", help="prompt template id (1-9)")
    p.set_defaults(func=cmd_train_tagger)

    p = sub.add_parser("tag", help="tag segments with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--segments", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("train-qg", help="train the question generator")
    p.add_argument("--pairs", required=True, help="gold QA JSON lines")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", choices=("toy", "paper"), default="toy")
    p.set_defaults(func=cmd_train_qg)

    p = sub.add_parser("qgen", help="generate questions for segment rows")
    p.add_argument("--model", required=True)
    p.add_argument("--segments", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--beam", type=int, default=5)
    p.set_defaults(func=cmd_qgen)

    p = sub.add_parser("build-dataset", help="run the full generation pipeline")
    p.add_argument("--manifest", required=True)
    p.add_argument("--tagger", required=True)
    p.add_argument("--qg", required=True)
    p.add_argument("--mode", choices=("crf", "prompt"), default="crf")
    p.add_argument("--out", required=True)
    p.add_argument("--stats")
    p.add_argument("--failures")
    p.add_argument("--splits-dir", help="write train/val/test video-id manifests")
    p.add_argument("--budget", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("stats", help="recompute dataset statistics")
    p.add_argument("--dataset", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train-localizer", help="train the span localizer")
    p.add_argument("--dataset", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ccal", action="store_true", help="add the question-cycle loss")
    p.add_argument("--fusion", action="store_true", help="fuse vision features")
    p.add_argument("--qg", choices=sorted(QG_STYLES), default="bart-style")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", choices=("toy", "paper"), default="toy")
    p.set_defaults(func=cmd_train_localizer)

    p = sub.add_parser("localize", help="predict answer spans for questions")
    p.add_argument("--model", required=True)
    p.add_argument("--questions", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("eval", help="evaluate predictions")
    p.add_argument(
        "--metric", choices=("iou", "wf1", "bleu", "rouge", "agreement"), required=True
    )
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", help="required for every metric except agreement")
    p.add_argument("--out")
    p.add_argument(
        "--window-semantics",
        choices=("radius_w_minus_1", "radius_w"),
        default="radius_w_minus_1",
    )
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sample-review", help="sample triplets for human review")
    p.add_argument("--dataset", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--n", type=int, default=308)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--state-dir", default=state_dir_default())
    p.set_defaults(func=cmd_sample_review)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--state-dir", default=state_dir_default())
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
