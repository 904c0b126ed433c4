"""Command-line entry point.

Every subcommand prints one JSON document to stdout and returns zero on
success; failures print a JSON error object to stderr and return
nonzero, and bad usage exits 2 with the argparse usage text.  Set
JAMCOMP_LOG (debug/info/warning/error) to raise log verbosity on
stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from typing import List, Optional, Sequence

from jamcomp.corpus import FilterPolicy, ingest_paths, load_corpus, write_manifest
from jamcomp.errors import JamcompError
from jamcomp.evaluation import (
    SETTINGS,
    cross_validate,
    half_half,
    latency_benchmark,
)
from jamcomp.music import Chord, ChordVocabulary, bar_histogram
from jamcomp.musicxml import parse_musicxml, write_musicxml
from jamcomp.predictor import ChordPredictor
from jamcomp.server import bound_port, make_server
from jamcomp.session import run_stdio_session
from jamcomp.stats import paired_t_test_one_sided
from jamcomp.synth import SynthSpec, generate_song, make_corpus, random_progression
from jamcomp.training import (
    TrainingSequence,
    load_model,
    save_model,
    train_model,
    training_stats,
)
from jamcomp.corpus import transpose_to_c
from jamcomp.viterbi import available_kernels, viterbi

logger = logging.getLogger(__name__)

_LOG_ENV = "JAMCOMP_LOG"


def _emit(payload: dict, stream=None) -> None:
    json.dump(payload, stream or sys.stdout)
    (stream or sys.stdout).write("\n")


def _chord_json(chord: Chord) -> dict:
    return {"name": chord.name, "root": int(chord.root), "quality": chord.quality.label}


def _policy(args: argparse.Namespace) -> FilterPolicy:
    return FilterPolicy(
        vocabulary=ChordVocabulary.from_mode(args.vocab),
        max_chord_changes_per_bar=args.max_changes,
        allow_key_modulation=not args.no_modulation,
    )


def _histograms_from_file(path: str):
    score = transpose_to_c(parse_musicxml(path))
    return [bar_histogram(bar) for bar in score.bars]


# ----------------------------------------------------------------------
# subcommand bodies


def _cmd_ingest(args) -> int:
    entries = ingest_paths(args.paths, _policy(args))
    write_manifest(entries, args.out)
    accepted = sum(1 for e in entries if e.status == "accepted")
    _emit(
        {
            "manifest": args.out,
            "total": len(entries),
            "accepted": accepted,
            "rejected": len(entries) - accepted,
        }
    )
    return 0


def _cmd_synth(args) -> int:
    import numpy as np

    os.makedirs(args.out_dir, exist_ok=True)
    vocabulary = ChordVocabulary.from_mode(args.vocab)
    rng = np.random.default_rng(args.seed)
    paths: List[str] = []
    for i in range(args.songs):
        period = int(rng.integers(args.period_min, args.period_max + 1))
        spec = SynthSpec(
            progression=random_progression(rng, period, vocabulary),
            repetitions=args.repetitions,
            notes_per_bar=args.notes_per_bar,
            profile_sharpness=args.sharpness,
            seed=int(rng.integers(0, 2**31)),
            root_only=args.root_only,
        )
        score, _ = generate_song(spec)
        path = os.path.join(args.out_dir, f"song-{i:03d}.musicxml")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(write_musicxml(score))
        paths.append(path)
    manifest = os.path.join(args.out_dir, "manifest.ndjson")
    entries = ingest_paths(paths, _policy(args))
    write_manifest(entries, manifest)
    rejected = [e.path for e in entries if e.status != "accepted"]
    _emit({"out_dir": args.out_dir, "songs": len(paths), "manifest": manifest,
           "rejected": rejected})
    return 0 if not rejected else 1


def _cmd_train(args) -> int:
    corpus = load_corpus(args.corpus, _policy(args))
    sequences = [sequence for _, sequence in corpus]
    model = train_model(sequences, ChordVocabulary.from_mode(args.vocab), epsilon=args.epsilon)
    save_model(model, args.out)
    stats = training_stats(sequences, model)
    del stats["transition_matrix"], stats["transition_labels"]  # already in the model file
    _emit({"model": args.out, **stats})
    return 0


def _cmd_infer(args) -> int:
    model = load_model(args.model)
    histograms = _histograms_from_file(args.score)
    result = viterbi(histograms, model, alpha=args.alpha)
    _emit(
        {
            "score": args.score,
            "alpha": args.alpha,
            "log_score": result.log_score,
            "chords": [
                {"bar": i, **_chord_json(chord)} for i, chord in enumerate(result.path)
            ],
        }
    )
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    predictor = ChordPredictor(model, alpha=args.alpha)
    for histogram in _histograms_from_file(args.score):
        predictor.observe_bar(histogram)
    _emit(
        {
            "score": args.score,
            "alpha": args.alpha,
            "steps": [
                {
                    "bar_index": step.bar_index,
                    "inferred": _chord_json(step.inferred),
                    "predicted": _chord_json(step.predicted),
                    "source": step.source,
                    "latency_ms": step.latency_ms,
                }
                for step in predictor.trace
            ],
        }
    )
    return 0


def _eval_sequences(args) -> list:
    if args.corpus is not None:
        return [sequence for _, sequence in load_corpus(args.corpus, _policy(args))]
    songs = make_corpus(
        args.songs,
        ChordVocabulary.diatonic_c7(),
        period_range=(args.period_min, args.period_max),
        repetitions=args.repetitions,
        notes_per_bar=args.notes_per_bar,
        profile_sharpness=args.sharpness,
        seed=args.seed,
    )
    return [song.sequence for song in songs]


def _cmd_eval(args) -> int:
    sequences = _eval_sequences(args)
    if args.setting == "half_half":
        report = half_half(sequences, k=args.folds, seed=args.seed, alpha=args.alpha)
        second, first = report.paired_samples()
        test = paired_t_test_one_sided(second, first)
        payload = dataclasses.asdict(report)
        payload["setting"] = "half_half"
        payload["t_test"] = dataclasses.asdict(test)
        _emit(payload)
    else:
        report = cross_validate(
            sequences, args.setting, k=args.folds, seed=args.seed, alpha=args.alpha
        )
        _emit(dataclasses.asdict(report))
    return 0


def _cmd_bench(args) -> int:
    import numpy as np

    vocabulary = ChordVocabulary.from_mode(args.vocab)
    rng = np.random.default_rng(args.seed)
    period = 4
    progression = random_progression(rng, period, vocabulary)
    repetitions = max(2, -(-args.bars // period))
    spec = SynthSpec(
        progression=progression,
        repetitions=repetitions,
        profile_sharpness=args.sharpness,
        seed=args.seed,
    )
    _, sequence = generate_song(spec)
    sequence = TrainingSequence(sequence.chords[: args.bars], sequence.histograms[: args.bars])
    # Include the jammed progression in training so the decode stays
    # stable; mistrained transitions make every bar a tree rebuild.
    train_songs = [
        generate_song(
            SynthSpec(
                progression=progression,
                repetitions=args.repetitions,
                profile_sharpness=args.sharpness,
                seed=int(rng.integers(0, 2**31)),
            )
        )[1]
    ] + [
        generate_song(
            SynthSpec(
                progression=random_progression(rng, p, vocabulary),
                repetitions=args.repetitions,
                profile_sharpness=args.sharpness,
                seed=int(rng.integers(0, 2**31)),
            )
        )[1]
        for p in (5, 6, 7)
    ]
    model = train_model(train_songs, vocabulary)
    kernels = list(available_kernels()) if args.kernel == "all" else [args.kernel]
    payload = {"bars": args.bars, "alpha": args.alpha, "kernels": {}}
    for kernel in kernels:
        report = latency_benchmark(model, sequence, alpha=args.alpha, kernel=kernel)
        entry = {
            "p50_ms": report.p50_ms,
            "p95_ms": report.p95_ms,
            "max_ms": report.max_ms,
        }
        if args.curve:
            entry["per_bar_ms"] = list(report.per_bar_ms)
        payload["kernels"][report.kernel] = entry
    _emit(payload)
    return 0


def _cmd_serve(args) -> int:
    model = load_model(args.model)
    if args.stdio:
        run_stdio_session(model, alpha=args.alpha)
        return 0
    server = make_server(model, host=args.host, port=args.port, alpha=args.alpha)
    _emit({"listening": {"host": args.host, "port": bound_port(server)}})
    sys.stdout.flush()
    with server:
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            logger.info("interrupted, shutting down")
    return 0


# ----------------------------------------------------------------------
# parser


def _add_policy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--vocab", choices=["diatonic7", "full60"], default="diatonic7")
    parser.add_argument("--max-changes", type=int, default=1,
                        help="chord changes allowed per bar (1 or 2)")
    parser.add_argument("--no-modulation", action="store_true",
                        help="reject songs whose key changes")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jamcomp",
        description="Chord accompaniment: corpus tooling, training, "
        "evaluation, and live jam sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("ingest", help="filter MusicXML files into a corpus manifest")
    p.add_argument("paths", nargs="+", metavar="musicxml")
    p.add_argument("--out", required=True, help="manifest path to write")
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic corpus with known chords")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--songs", type=int, default=100)
    p.add_argument("--period-min", type=int, default=4)
    p.add_argument("--period-max", type=int, default=8)
    p.add_argument("--repetitions", type=int, default=8)
    p.add_argument("--notes-per-bar", type=int, default=8)
    p.add_argument("--sharpness", type=float, default=0.9)
    p.add_argument("--root-only", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train a model from a corpus manifest")
    p.add_argument("--corpus", required=True, help="manifest path")
    p.add_argument("--out", required=True, help="model path to write")
    p.add_argument("--epsilon", type=float, default=1e-6)
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("infer", help="decode the best chord path for a song")
    p.add_argument("--model", required=True)
    p.add_argument("--score", required=True, help="MusicXML file")
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("predict", help="replay a song through the live engine")
    p.add_argument("--model", required=True)
    p.add_argument("--score", required=True, help="MusicXML file")
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="cross-validated accuracy of one setting")
    p.add_argument("--setting", required=True, choices=list(SETTINGS) + ["half_half"])
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0,
                   help="seeds both the synthetic corpus and the fold split")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--corpus", help="manifest; omit to evaluate on a synthetic corpus")
    p.add_argument("--songs", type=int, default=100)
    p.add_argument("--period-min", type=int, default=4)
    p.add_argument("--period-max", type=int, default=8)
    p.add_argument("--repetitions", type=int, default=8)
    p.add_argument("--notes-per-bar", type=int, default=8)
    p.add_argument("--sharpness", type=float, default=0.9)
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="per-bar prediction latency by kernel")
    p.add_argument("--bars", type=int, default=240)
    p.add_argument("--kernel", default="all",
                   help="'all' or one kernel name (e.g. compiled, numpy)")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--sharpness", type=float, default=0.9)
    p.add_argument("--repetitions", type=int, default=8)
    p.add_argument("--vocab", choices=["diatonic7", "full60"], default="diatonic7")
    p.add_argument("--curve", action="store_true",
                   help="include the per-bar latency curve in the output")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("serve", help="serve live sessions")
    p.add_argument("--model", required=True)
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--stdio", action="store_true",
                   help="run one session over stdin/stdout instead of a socket")
    p.set_defaults(func=_cmd_serve)

    return parser


def _configure_logging() -> None:
    level_name = os.environ.get(_LOG_ENV, "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:  # argparse handles usage/help printing
        return int(exit_.code or 0)
    try:
        return args.func(args)
    except (JamcompError, ValueError, OSError) as error:
        _emit({"error": str(error)}, stream=sys.stderr)
        logger.debug("command failed", exc_info=True)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
