"""Readers and writers for the flat JSONL/CSV artifacts the pipeline emits.

Every writer produces canonical bytes: sorted JSON keys, newline-terminated
records, and floats fixed to six decimal places. Two runs over identical
inputs emit identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

from .corpus import Corpus, Exclusion
from .errors import MissingInputError
from .graph import ContentGraph
from .hypotheses import CountsReport, Hypothesis, HypothesisClass
from .matching import Match, MatchKind, MatchRun
from .ranking import DistReport, RankedHypothesis, UsageStats
from .synth import EvaluationReport, GroundTruth, GroundTruthRecord

__all__ = [
    "write_filtered",
    "write_matches",
    "read_matches",
    "write_stats",
    "write_hypotheses",
    "read_hypotheses",
    "write_counts",
    "write_ranking",
    "write_distributions",
    "write_ground_truth",
    "read_ground_truth",
    "write_evaluation",
    "read_usage",
    "write_corpus_dir",
    "write_graph_dump",
    "write_manifest",
    "corpus_fingerprint",
    "directory_digest",
    "file_digest",
]


def _f6(x: float) -> float:
    """Fix a float to six decimals (round-trips exactly through JSON)."""
    return float(f"{x:.6f}")


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write_lines(path: Path, lines: list[str]) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    tmp.replace(path)


def _require(path: Path) -> Path:
    if not path.is_file():
        raise MissingInputError(f"missing input file: {path.name} (looked in {path.parent})")
    return path


# --- filter log -------------------------------------------------------------


def write_filtered(path: str | Path, exclusions: list[Exclusion]) -> Path:
    path = Path(path)
    lines = [
        _dump_json({"dataset_id": e.dataset_id, "rule": e.rule})
        for e in sorted(exclusions, key=lambda e: (e.dataset_id, e.rule))
    ]
    _write_lines(path, lines)
    return path


# --- matches ----------------------------------------------------------------


def write_matches(path: str | Path, matches: list[Match]) -> Path:
    path = Path(path)
    lines = [
        _dump_json(
            {
                "kind": m.kind.value,
                "left": m.left,
                "right": m.right,
                "left_dataset": m.left_dataset,
                "right_dataset": m.right_dataset,
                "confidence": _f6(m.confidence),
            }
        )
        for m in sorted(matches, key=Match.sort_key)
    ]
    _write_lines(path, lines)
    return path


def read_matches(path: str | Path) -> list[Match]:
    path = _require(Path(path))
    matches = []
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            rec = json.loads(line)
            matches.append(
                Match(
                    left_dataset=rec["left_dataset"],
                    right_dataset=rec["right_dataset"],
                    kind=MatchKind(rec["kind"]),
                    left=rec["left"],
                    right=rec["right"],
                    confidence=float(rec["confidence"]),
                )
            )
    return matches


def write_stats(path: str | Path, run: MatchRun) -> Path:
    path = Path(path)
    payload = {
        "pairs_examined": run.pairs_examined,
        "edges_by_kind": run.edges_by_kind,
        "edges_total": len(run.matches),
    }
    _write_lines(path, [json.dumps(payload, sort_keys=True, indent=2)])
    return path


# --- hypotheses -------------------------------------------------------------


def write_hypotheses(path: str | Path, hyps: list[Hypothesis]) -> Path:
    path = Path(path)
    lines = []
    for h in sorted(hyps, key=lambda h: h.hyp_id):
        lines.append(
            _dump_json(
                {
                    "hyp_id": h.hyp_id,
                    "class": h.category.value,
                    "datasets": list(h.datasets),
                    "edges": [e.ref() for e in h.edges],
                    "evidence": {k: _f6(v) for k, v in sorted(h.evidence.items())},
                    "flags": dict(sorted(h.flags.items())),
                }
            )
        )
    _write_lines(path, lines)
    return path


def read_hypotheses(path: str | Path, matches: list[Match]) -> list[Hypothesis]:
    """Rejoin stored hypothesis records with their edges from the match list."""
    path = _require(Path(path))
    by_ref = {m.ref(): m for m in matches}
    hyps = []
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            rec = json.loads(line)
            try:
                edges = tuple(by_ref[ref] for ref in rec["edges"])
            except KeyError as exc:
                raise MissingInputError(
                    f"{path.name}: edge {exc.args[0]!r} not present in matches.jsonl"
                ) from None
            hyps.append(
                Hypothesis(
                    hyp_id=rec["hyp_id"],
                    category=HypothesisClass(rec["class"]),
                    datasets=tuple(rec["datasets"]),
                    edges=edges,
                    evidence={k: float(v) for k, v in rec["evidence"].items()},
                    flags=dict(rec["flags"]),
                )
            )
    return hyps


def write_counts(path: str | Path, report: CountsReport) -> Path:
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["class", "hypothesis_count", "distinct_datasets", "ratio"])
    for row in report.rows:
        writer.writerow(
            [
                row.category.value,
                row.hypothesis_count,
                row.distinct_datasets,
                f"{row.ratio:.6f}",
            ]
        )
    _write_lines(path, [buf.getvalue().rstrip("\n")])
    return path


# --- ranking ----------------------------------------------------------------


def write_ranking(path: str | Path, ranked: list[RankedHypothesis]) -> Path:
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "rank",
            "hyp_id",
            "class",
            "datasets",
            "p",
            "p_strategy",
            "v",
            "b",
            "p_hat",
            "v_hat",
            "b_hat",
            "score",
        ]
    )
    for r in ranked:
        writer.writerow(
            [
                r.rank,
                r.hyp_id,
                r.category,
                "+".join(r.datasets),
                f"{r.probability:.6f}",
                f"{r.probability_strategy:.6f}",
                f"{r.cost:.6f}",
                f"{r.benefit:.6f}",
                f"{r.probability_norm:.6f}",
                f"{r.cost_norm:.6f}",
                f"{r.benefit_norm:.6f}",
                f"{r.score:.6f}",
            ]
        )
    _write_lines(path, [buf.getvalue().rstrip("\n")])
    return path


def write_distributions(path: str | Path, dist: DistReport) -> Path:
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank_index", "p_hat", "v_hat", "b_hat", "score"])
    for idx, p, v, b, s in dist.rows:
        writer.writerow([idx, f"{p:.6f}", f"{v:.6f}", f"{b:.6f}", f"{s:.6f}"])
    _write_lines(path, [buf.getvalue().rstrip("\n")])
    return path


# --- synthetic ground truth / evaluation -------------------------------------


def write_ground_truth(path: str | Path, gt: GroundTruth) -> Path:
    path = Path(path)
    lines = [
        _dump_json({"class": r.category.value, "datasets": sorted(r.datasets)})
        for r in sorted(
            gt.records, key=lambda r: (r.category.value, sorted(r.datasets))
        )
    ]
    _write_lines(path, lines)
    return path


def read_ground_truth(path: str | Path) -> GroundTruth:
    path = _require(Path(path))
    records = []
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            rec = json.loads(line)
            records.append(
                GroundTruthRecord(
                    HypothesisClass(rec["class"]), frozenset(rec["datasets"])
                )
            )
    return GroundTruth(records)


def write_evaluation(path: str | Path, report: EvaluationReport) -> Path:
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["class", "tp", "fp", "fn", "precision", "recall", "f1"])
    for row in report.rows:
        writer.writerow(
            [
                row.category,
                row.tp,
                row.fp,
                row.fn,
                f"{row.precision:.6f}",
                f"{row.recall:.6f}",
                f"{row.f1:.6f}",
            ]
        )
    _write_lines(path, [buf.getvalue().rstrip("\n")])
    return path


# --- usage stats --------------------------------------------------------------


def read_usage(path: str | Path) -> UsageStats:
    path = _require(Path(path))
    raw = json.loads(path.read_text(encoding="utf-8"))
    counts = {}
    for dataset_id, rec in raw.items():
        counts[dataset_id] = (int(rec.get("views", 0)), int(rec.get("downloads", 0)))
    return UsageStats(counts)


# --- corpus directory ----------------------------------------------------------


def write_corpus_dir(corpus: Corpus, directory: str | Path) -> Path:
    """Materialize a corpus as <id>.csv / <id>.meta.json pairs.

    Rows are synthesized by cycling each column's sorted distinct values up
    to the dataset's row count, which round-trips exactly through the loader.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for dataset in corpus.datasets:
        columns = []
        for vs in dataset.value_sets:
            columns.append(sorted(vs.values))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([a.name for a in dataset.attributes])
        for r in range(dataset.row_count):
            writer.writerow(
                [col[r % len(col)] if col else "" for col in columns]
            )
        csv_path = directory / f"{dataset.dataset_id}.csv"
        tmp = csv_path.with_suffix(".csv.tmp")
        tmp.write_text(buf.getvalue(), encoding="utf-8")
        tmp.replace(csv_path)

        meta_path = directory / f"{dataset.dataset_id}.meta.json"
        tmp = meta_path.with_suffix(".json.tmp")
        tmp.write_text(
            json.dumps(dataset.properties.entries, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        tmp.replace(meta_path)
    return directory


def corpus_fingerprint(corpus: Corpus) -> str:
    """Content digest of a corpus, independent of where it was loaded from."""
    payload = {
        "datasets": [
            {
                "dataset_id": d.dataset_id,
                "row_count": d.row_count,
                "attributes": [
                    [a.attr_id, a.name, a.canonical_name, a.ordinal]
                    for a in d.attributes
                ],
                "value_sets": [
                    [vs.attr_id, sorted(vs.values), vs.raw_count, vs.sampled]
                    for vs in d.value_sets
                ],
                "properties": d.properties.entries,
            }
            for d in corpus.datasets
        ]
    }
    return hashlib.sha256(_dump_json(payload).encode("utf-8")).hexdigest()


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def directory_digest(directory: str | Path) -> str:
    """Digest over sorted (name, file digest) pairs of a directory."""
    directory = Path(directory)
    h = hashlib.sha256()
    for path in sorted(p for p in directory.iterdir() if p.is_file()):
        h.update(path.name.encode("utf-8"))
        h.update(file_digest(path).encode("ascii"))
    return h.hexdigest()


# --- graph dump / manifest ----------------------------------------------------


def write_graph_dump(path: str | Path, graph: ContentGraph) -> Path:
    path = Path(path)
    payload = {
        "datasets": [
            {"dataset_id": d.dataset_id, "attributes": d.attribute_count}
            for d in graph.corpus.datasets
        ],
        "bundles": [
            {
                "d1": b.d1,
                "d2": b.d2,
                "attr_edges": len(b.attr_edges),
                "value_edges": len(b.value_edges),
                "prop_edges": len(b.prop_edges),
                "attr_coverage_1": _f6(b.attr_coverage_1),
                "attr_coverage_2": _f6(b.attr_coverage_2),
                "mean_value_conf": _f6(b.mean_value_conf),
                "max_value_conf": _f6(b.max_value_conf),
                "mean_prop_conf": _f6(b.mean_prop_conf),
                "mean_value_jaccard": _f6(b.mean_value_jaccard),
            }
            for _, b in sorted(graph.pair_index.items())
        ],
        "edge_count": len(graph.edges),
    }
    _write_lines(path, [json.dumps(payload, sort_keys=True, indent=2)])
    return path


def write_manifest(path: str | Path, manifest: dict) -> Path:
    path = Path(path)
    _write_lines(path, [json.dumps(manifest, sort_keys=True, indent=2)])
    return path
