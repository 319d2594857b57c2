"""Command-line pipeline: synth, ingest, train, eval, predict, serve.

Exit codes: 0 success, 1 validation error (bad data or flags), 2 I/O
error. Every run prints its resolved configuration to stderr before doing
any work; data outputs go to files or stdout.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import baseline as baseline_mod
from . import metrics, nnet, service, synth, training
from .encoding import build_examples, dataset_to_document, split_dataset
from .planner import PlanError, query_from_document, score_plans
from .transcripts import (
    TranscriptError,
    UnknownCourseError,
    build_catalog,
    load_transcript,
    save_transcript,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

DEFAULT_VALIDATION_FRACTION = 0.25


class _Parser(argparse.ArgumentParser):
    """Argument errors (including unknown flags) exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"error: {message}\n")


def _echo_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print(f"config: {json.dumps(resolved, default=str)}", file=sys.stderr)


def _add_synth(subparsers) -> None:
    p = subparsers.add_parser("synth", help="generate a synthetic transcript corpus")
    p.add_argument("--out", required=True, help="output transcript CSV path")
    p.add_argument("--truth-out", default=None, help="optional ground-truth JSON path")
    p.add_argument("--students", type=int, default=800)
    p.add_argument("--courses", type=int, default=40)
    p.add_argument("--min-terms", type=int, default=4)
    p.add_argument("--max-terms", type=int, default=10)
    p.add_argument("--min-load", type=int, default=3)
    p.add_argument("--max-load", type=int, default=6)
    p.add_argument("--load-penalty", type=float, default=0.15)
    p.add_argument("--withdraw-prob", type=float, default=0.05)
    p.add_argument("--ability-mean", type=float, default=0.0)
    p.add_argument("--ability-std", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_run_synth)


def _run_synth(args) -> int:
    config = synth.SynthConfig(
        num_students=args.students,
        catalog_size=args.courses,
        min_terms=args.min_terms,
        max_terms=args.max_terms,
        min_courses_per_term=args.min_load,
        max_courses_per_term=args.max_load,
        load_penalty=args.load_penalty,
        withdraw_prob=args.withdraw_prob,
        ability_mean=args.ability_mean,
        ability_std=args.ability_std,
        seed=args.resolved_seed,
    )
    records, truth = synth.generate(config)
    save_transcript(records, args.out)
    if args.truth_out:
        synth.save_ground_truth(truth, args.truth_out)
    print(f"wrote {len(records)} records for {config.num_students} students to {args.out}")
    return EXIT_OK


def _add_ingest(subparsers) -> None:
    p = subparsers.add_parser("ingest", help="parse, validate and encode a transcript CSV")
    p.add_argument("--data", required=True, help="transcript CSV path")
    p.add_argument("--out", default=None, help="encoded dataset JSON path")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_run_ingest)


def _run_ingest(args) -> int:
    records = load_transcript(args.data)
    catalog = build_catalog(records)
    examples, skipped = build_examples(records, catalog)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(dataset_to_document(catalog, examples), f)
            f.write("\n")
    print(
        f"rows={len(records)} students={len(examples) + len(skipped)} "
        f"examples={len(examples)} skipped={len(skipped)} courses={len(catalog)}"
    )
    if skipped:
        print(f"skipped single-period students: {', '.join(skipped)}", file=sys.stderr)
    return EXIT_OK


def _train_flags(p) -> None:
    p.add_argument("--val-fraction", type=float, default=DEFAULT_VALIDATION_FRACTION)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--adam-eps", type=float, default=1e-8)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=20)
    p.add_argument("--grad-clip", type=float, default=5.0)
    p.add_argument("--hidden", type=int, default=nnet.DEFAULT_HIDDEN_SIZE)
    p.add_argument("--combo-dim", type=int, default=nnet.DEFAULT_COMBO_SIZE)
    p.add_argument("--merge-dim", type=int, default=nnet.DEFAULT_MERGE_SIZE)
    p.add_argument("--input-dropout", type=float, default=0.3)
    p.add_argument("--history-blackout", type=float, default=0.25)
    p.add_argument(
        "--no-transition-views",
        dest="transition_views",
        action="store_false",
        help="train only on final-term examples, not per-term views",
    )
    p.add_argument("--seed", type=int, default=None)


def _add_train(subparsers) -> None:
    p = subparsers.add_parser("train", help="train a model from a transcript CSV")
    p.add_argument("--data", required=True, help="transcript CSV path")
    p.add_argument("--out", required=True, help="checkpoint JSON path")
    p.add_argument("--report", default=None, help="per-epoch JSONL report path")
    _train_flags(p)
    p.set_defaults(func=_run_train)


def _split_from_csv(path, val_fraction: float, seed: int):
    records = load_transcript(path)
    catalog = build_catalog(records)
    examples, _ = build_examples(records, catalog)
    return records, catalog, split_dataset(examples, val_fraction, seed)


def _run_train(args) -> int:
    records, catalog, split = _split_from_csv(args.data, args.val_fraction, args.resolved_seed)
    config = training.TrainConfig(
        learning_rate=args.learning_rate,
        beta1=args.beta1,
        beta2=args.beta2,
        adam_eps=args.adam_eps,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        grad_clip_norm=args.grad_clip,
        seed=args.resolved_seed,
        hidden_size=args.hidden,
        combo_size=args.combo_dim,
        merge_size=args.merge_dim,
        transition_views=args.transition_views,
        input_dropout=args.input_dropout,
        history_blackout=args.history_blackout,
    )
    params, report = training.train(split, config)
    checkpoint = nnet.save_checkpoint(params, catalog, args.out)

    train_students = {ex.student_id for ex in split.train}
    rates = metrics.course_failure_rates(r for r in records if r.student_id in train_students)
    with open(service.rates_sidecar_path(args.out), "w", encoding="utf-8") as f:
        json.dump(rates, f)
        f.write("\n")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            f.write(report.to_jsonl())

    print(f"checkpoint={checkpoint} best_epoch={report.best_epoch}")
    print(f"validation_auc={report.best_val_auc:.4f}")
    return EXIT_OK


def _add_eval(subparsers) -> None:
    p = subparsers.add_parser("eval", help="evaluate a checkpoint on a transcript CSV")
    p.add_argument("--model", required=True, help="checkpoint JSON path")
    p.add_argument("--data", required=True, help="transcript CSV path")
    p.add_argument("--val-fraction", type=float, default=DEFAULT_VALIDATION_FRACTION)
    p.add_argument("--grid-out", default=None, help="optional grid JSON path")
    p.add_argument("--grid-csv", default=None, help="optional grid CSV path")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_run_eval)


def _run_eval(args) -> int:
    params, catalog, _ = nnet.load_checkpoint(args.model)
    records, _, split = _split_from_csv(args.data, args.val_fraction, args.resolved_seed)

    val_auc = training.evaluate_auc(params, split.validation)
    train_auc = training.evaluate_auc(params, split.train)
    print(f"train_auc={train_auc:.4f}")
    print(f"validation_auc={val_auc:.4f}")

    train_students = {ex.student_id for ex in split.train}
    rates = metrics.course_failure_rates(r for r in records if r.student_id in train_students)
    try:
        combos = metrics.propose_tier_combos(rates)
        gpas = baseline_mod.history_gpas(records)
        grid = metrics.success_grid(params, catalog, split.validation, gpas, combos, rates)
    except ValueError as err:
        print(f"grid unavailable: {err}", file=sys.stderr)
        return EXIT_OK
    doc = metrics.grid_to_document(grid, combos)
    print(json.dumps(doc))
    if args.grid_out:
        with open(args.grid_out, "w", encoding="utf-8") as f:
            json.dump(doc, f)
            f.write("\n")
    if args.grid_csv:
        with open(args.grid_csv, "w", encoding="utf-8") as f:
            f.write(metrics.grid_to_csv(grid))
    return EXIT_OK


def _add_predict(subparsers) -> None:
    p = subparsers.add_parser("predict", help="score candidate course combinations")
    p.add_argument("--model", required=True, help="checkpoint JSON path")
    p.add_argument("--history", required=True, help="history JSON path")
    p.add_argument("--candidates", required=True, help="candidates JSON path")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_run_predict)


def _run_predict(args) -> int:
    params, catalog, checkpoint = nnet.load_checkpoint(args.model)
    with open(args.history, encoding="utf-8") as f:
        history_doc = json.load(f)
    with open(args.candidates, encoding="utf-8") as f:
        candidates_doc = json.load(f)
    if isinstance(history_doc, dict) and "history" in history_doc:
        history_doc = history_doc["history"]
    query = query_from_document({"history": history_doc, "candidates": candidates_doc})
    response = score_plans(params, catalog, query, checkpoint=checkpoint)
    print(json.dumps(response.to_document()))
    return EXIT_OK


def _add_serve(subparsers) -> None:
    p = subparsers.add_parser("serve", help="serve a checkpoint over HTTP")
    p.add_argument("--model", required=True, help="checkpoint JSON path")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--failure-rates", default=None, help="failure-rate JSON sidecar path")
    p.add_argument("--cors-origin", default="*")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_run_serve)


def _run_serve(args) -> int:
    app = service.app_from_checkpoint(args.model, args.failure_rates)
    server = service.build_server(app, args.host, args.port, args.cors_origin)
    host, port = server.server_address[:2]
    print(f"serving checkpoint {app.checkpoint} on http://{host}:{port}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="coursecast", description=__doc__)
    parser.add_argument(
        "--seed",
        dest="global_seed",
        type=int,
        default=0,
        help="global seed; a subcommand --seed takes precedence",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    _add_synth(subparsers)
    _add_ingest(subparsers)
    _add_train(subparsers)
    _add_eval(subparsers)
    _add_predict(subparsers)
    _add_serve(subparsers)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    args.resolved_seed = args.seed if args.seed is not None else args.global_seed
    _echo_config(args)
    try:
        return args.func(args)
    except training.TrainingDiverged as err:
        print(f"training aborted: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except (TranscriptError, PlanError, UnknownCourseError, ValueError) as err:
        print(f"invalid input: {err}", file=sys.stderr)
        return EXIT_VALIDATION


def main(argv=None) -> None:
    raise SystemExit(run(argv))


if __name__ == "__main__":
    main()
