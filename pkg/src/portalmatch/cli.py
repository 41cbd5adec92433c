"""Command-line pipeline: ingest, match, detect, rank, synth, evaluate.

Stages communicate through flat files in the output directory, so any stage
can be rerun in isolation; ``pipeline`` chains ingest, match, detect, and
rank. Every run writes ``run_manifest.json`` with the full effective
configuration and digests of the inputs it consumed. Outputs are
byte-deterministic for identical inputs, regardless of worker count.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from . import artifacts
from .corpus import Corpus, FilterConfig, load_corpus
from .errors import (
    ConfigError,
    IntegrityError,
    MetadataError,
    MissingInputError,
    ParseError,
    PortalMatchError,
)
from .graph import build_graph
from .hypotheses import DetectConfig, detect_all, summarize
from .matching import MatchConfig, generate_matches
from .ranking import RankingConfig, Strategy, UsageStats, distribution_report, rank
from .synth import SynthConfig, evaluate_detection, generate_corpus

__all__ = ["PipelineConfig", "main", "run"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


@dataclass
class PipelineConfig:
    corpus_dir: str = ""
    output_dir: str = ""
    usage_stats_path: str | None = None
    worker_count: int = 1
    dump_graph: bool = False
    ground_truth_path: str | None = None
    filter: FilterConfig = field(default_factory=FilterConfig)
    match: MatchConfig = field(default_factory=MatchConfig)
    detect: DetectConfig = field(default_factory=DetectConfig)
    ranking: RankingConfig = field(default_factory=RankingConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)

    def effective(self) -> dict:
        """Every tunable with its effective value, for the run manifest."""
        payload = asdict(self)
        payload["ranking"]["strategy"] = self.ranking.strategy.value
        return payload


_SECTION_TYPES = {
    "filter": FilterConfig,
    "match": MatchConfig,
    "detect": DetectConfig,
    "ranking": RankingConfig,
    "synth": SynthConfig,
}
_TOP_KEYS = {
    "corpus_dir",
    "output_dir",
    "usage_stats_path",
    "worker_count",
    "dump_graph",
    "ground_truth_path",
}


def _build_section(section: str, payload: dict):
    cls = _SECTION_TYPES[section]
    known = {f.name for f in fields(cls)}
    unknown = set(payload) - known
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {sorted(unknown)}")
    if section == "ranking" and "strategy" in payload:
        payload = dict(payload)
        try:
            payload["strategy"] = Strategy(payload["strategy"])
        except ValueError:
            raise ConfigError(
                f"unknown strategy {payload['strategy']!r}; use "
                f"'most-likely' or 'most-uncertain'"
            ) from None
    try:
        return cls(**payload)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid '{section}' config: {exc}") from None


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read a JSON config file; absent sections keep their defaults."""
    cfg = PipelineConfig()
    if path is None:
        return cfg
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS - set(_SECTION_TYPES)
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    for key in _TOP_KEYS:
        if key in raw:
            setattr(cfg, key, raw[key])
    for section in _SECTION_TYPES:
        if section in raw:
            setattr(cfg, section, _build_section(section, raw[section]))
    return cfg


def _load_corpus(cfg: PipelineConfig) -> tuple[Corpus, list]:
    if not cfg.corpus_dir:
        raise ConfigError("no corpus directory given (use --corpus or the config file)")
    if not Path(cfg.corpus_dir).is_dir():
        raise MissingInputError(f"corpus directory not found: {cfg.corpus_dir}")
    return load_corpus(cfg.corpus_dir, cfg.filter)


def _out(cfg: PipelineConfig) -> Path:
    if not cfg.output_dir:
        raise ConfigError("no output directory given (use --output or the config file)")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


class _Stage:
    """Tracks files written by one stage so failures leave no partial output."""

    def __init__(self) -> None:
        self.written: list[Path] = []

    def add(self, path: Path) -> Path:
        self.written.append(path)
        return path

    def discard_outputs(self) -> None:
        for path in self.written:
            try:
                path.unlink()
            except OSError:
                pass


def _stage_ingest(cfg: PipelineConfig, stage: _Stage, inputs: dict) -> None:
    corpus, excluded = _load_corpus(cfg)
    out = _out(cfg)
    stage.add(artifacts.write_filtered(out / "filtered.jsonl", excluded))
    inputs["corpus_dir"] = artifacts.directory_digest(cfg.corpus_dir)
    print(f"ingest: {len(corpus)} datasets loaded, {len(excluded)} excluded")


def _stage_match(cfg: PipelineConfig, stage: _Stage, inputs: dict) -> None:
    corpus, _ = _load_corpus(cfg)
    out = _out(cfg)
    run = generate_matches(corpus, cfg.match, workers=cfg.worker_count)
    stage.add(artifacts.write_matches(out / "matches.jsonl", run.matches))
    stage.add(artifacts.write_stats(out / "stats.json", run))
    inputs["corpus_dir"] = artifacts.directory_digest(cfg.corpus_dir)
    print(
        f"match: {run.pairs_examined} pairs examined, "
        f"{len(run.matches)} edges ({run.edges_by_kind})"
    )


def _stage_detect(cfg: PipelineConfig, stage: _Stage, inputs: dict) -> None:
    corpus, _ = _load_corpus(cfg)
    out = _out(cfg)
    matches_path = out / "matches.jsonl"
    matches = artifacts.read_matches(matches_path)
    graph = build_graph(corpus, matches)
    hyps = detect_all(graph, cfg.detect)
    stage.add(artifacts.write_hypotheses(out / "hypotheses.jsonl", hyps))
    stage.add(artifacts.write_counts(out / "counts.csv", summarize(hyps)))
    if cfg.dump_graph:
        stage.add(artifacts.write_graph_dump(out / "graph.json", graph))
    inputs["corpus_dir"] = artifacts.directory_digest(cfg.corpus_dir)
    inputs["matches.jsonl"] = artifacts.file_digest(matches_path)
    print(f"detect: {len(hyps)} hypotheses over {len(graph.pair_index)} connected pairs")


def _stage_rank(cfg: PipelineConfig, stage: _Stage, inputs: dict) -> None:
    corpus, _ = _load_corpus(cfg)
    out = _out(cfg)
    matches_path = out / "matches.jsonl"
    hyps_path = out / "hypotheses.jsonl"
    matches = artifacts.read_matches(matches_path)
    hyps = artifacts.read_hypotheses(hyps_path, matches)
    usage = UsageStats()
    if cfg.usage_stats_path:
        usage = artifacts.read_usage(cfg.usage_stats_path)
        inputs["usage"] = artifacts.file_digest(cfg.usage_stats_path)
    ranked = rank(hyps, corpus, usage, cfg.ranking)
    stage.add(artifacts.write_ranking(out / "ranking.csv", ranked))
    stage.add(
        artifacts.write_distributions(
            out / "distributions.csv", distribution_report(ranked)
        )
    )
    inputs["corpus_dir"] = artifacts.directory_digest(cfg.corpus_dir)
    inputs["matches.jsonl"] = artifacts.file_digest(matches_path)
    inputs["hypotheses.jsonl"] = artifacts.file_digest(hyps_path)
    print(f"rank: {len(ranked)} hypotheses ranked ({cfg.ranking.strategy.value})")


def _stage_synth(cfg: PipelineConfig, stage: _Stage, inputs: dict) -> None:
    out = _out(cfg)
    corpus, gt = generate_corpus(cfg.synth)
    artifacts.write_corpus_dir(corpus, out)
    stage.add(artifacts.write_ground_truth(out / "ground_truth.jsonl", gt))
    inputs["seed"] = cfg.synth.seed
    print(f"synth: wrote {len(corpus)} datasets and {len(gt.records)} truth records")


def _stage_evaluate(cfg: PipelineConfig, stage: _Stage, inputs: dict) -> None:
    out = _out(cfg)
    gt_path = Path(cfg.ground_truth_path or Path(cfg.corpus_dir) / "ground_truth.jsonl")
    matches_path = out / "matches.jsonl"
    hyps_path = out / "hypotheses.jsonl"
    matches = artifacts.read_matches(matches_path)
    hyps = artifacts.read_hypotheses(hyps_path, matches)
    gt = artifacts.read_ground_truth(gt_path)
    report = evaluate_detection(hyps, gt)
    stage.add(artifacts.write_evaluation(out / "evaluation.csv", report))
    inputs["hypotheses.jsonl"] = artifacts.file_digest(hyps_path)
    inputs["ground_truth.jsonl"] = artifacts.file_digest(gt_path)
    for row in report.rows:
        print(
            f"evaluate: {row.category} precision={row.precision:.3f} "
            f"recall={row.recall:.3f} f1={row.f1:.3f}"
        )


_STAGES = {
    "ingest": [_stage_ingest],
    "match": [_stage_match],
    "detect": [_stage_detect],
    "rank": [_stage_rank],
    "synth": [_stage_synth],
    "evaluate": [_stage_evaluate],
    "pipeline": [_stage_ingest, _stage_match, _stage_detect, _stage_rank],
}


def run(command: str, cfg: PipelineConfig) -> int:
    """Run one subcommand; returns an exit code, artifacts land on disk."""
    inputs: dict = {}
    for stage_fn in _STAGES[command]:
        stage = _Stage()
        try:
            stage_fn(cfg, stage, inputs)
        except BaseException:
            stage.discard_outputs()
            raise
    manifest = {
        "command": command,
        "config": cfg.effective(),
        "inputs": inputs,
    }
    artifacts.write_manifest(_out(cfg) / "run_manifest.json", manifest)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="portalmatch",
        description=(
            "Find and rank integration candidates across a corpus of "
            "independently published tables."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("ingest", "load and filter the corpus; write the filter log"),
        ("match", "brute-force matching; write matches.jsonl and stats.json"),
        ("detect", "pattern detection; write hypotheses.jsonl and counts.csv"),
        ("rank", "score hypotheses; write ranking.csv and distributions.csv"),
        ("synth", "generate a labeled synthetic corpus into the output dir"),
        ("evaluate", "score hypotheses against ground truth"),
        ("pipeline", "ingest + match + detect + rank"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--corpus", help="corpus directory")
        p.add_argument("--output", help="output directory")
        p.add_argument("--workers", type=int, help="match-stage worker processes")
        p.add_argument(
            "--strategy",
            choices=[s.value for s in Strategy],
            help="ranking strategy",
        )
        p.add_argument("--usage", help="usage stats JSON (views/downloads)")
        if name == "synth":
            p.add_argument("--seed", type=int, help="generator seed")
        if name in ("detect", "pipeline"):
            p.add_argument("--dump-graph", action="store_true", default=None)
        if name == "evaluate":
            p.add_argument("--ground-truth", help="ground truth JSONL path")
    return parser


def _apply_overrides(cfg: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    if args.corpus:
        cfg.corpus_dir = args.corpus
    if args.output:
        cfg.output_dir = args.output
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg.worker_count = args.workers
    if args.usage:
        cfg.usage_stats_path = args.usage
    if args.strategy:
        cfg.ranking = replace(cfg.ranking, strategy=Strategy(args.strategy))
    if getattr(args, "seed", None) is not None:
        cfg.synth = replace(cfg.synth, seed=args.seed)
    if getattr(args, "dump_graph", None):
        cfg.dump_graph = True
    if getattr(args, "ground_truth", None):
        cfg.ground_truth_path = args.ground_truth
    return cfg


def _error_record(kind: str, message: str) -> None:
    print(json.dumps({"error": {"type": kind, "message": message}}), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; 0 must pass through (--help)
        if exc.code == 0:
            return EXIT_OK
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        return run(args.command, cfg)
    except ConfigError as exc:
        _error_record("usage", str(exc))
        return EXIT_USAGE
    except (MissingInputError, ParseError, MetadataError, IntegrityError) as exc:
        _error_record("data", str(exc))
        return EXIT_DATA
    except OSError as exc:
        _error_record("data", str(exc))
        return EXIT_DATA
    except PortalMatchError as exc:
        _error_record("data", str(exc))
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - safety net
        _error_record("internal", f"{type(exc).__name__}: {exc}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
