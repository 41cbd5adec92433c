"""Materialize the corpus plus its candidate matches as a content graph.

The graph indexes edges by canonical dataset pair and precomputes the
per-pair statistics the pattern detectors read, so detection stays
declarative and linear in the number of connected pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus
from .errors import IntegrityError
from .matching import Match, MatchKind, jaccard

__all__ = ["PairBundle", "ContentGraph", "build_graph", "neighbors"]


@dataclass
class PairBundle:
    """All edges between one dataset pair, with derived statistics.

    Coverages are the fraction of each dataset's attributes touched by at
    least one attribute edge; mean_value_jaccard averages the exact
    canonical-set Jaccard over the attribute pairs connected by attribute
    edges (0.0 when there are none).
    """

    d1: str
    d2: str
    attr_edges: tuple[Match, ...]
    value_edges: tuple[Match, ...]
    prop_edges: tuple[Match, ...]
    attr_coverage_1: float
    attr_coverage_2: float
    mean_value_conf: float
    max_value_conf: float
    mean_prop_conf: float
    mean_value_jaccard: float

    @property
    def edges(self) -> tuple[Match, ...]:
        return self.attr_edges + self.value_edges + self.prop_edges

    def size(self) -> int:
        return len(self.attr_edges) + len(self.value_edges) + len(self.prop_edges)

    def value_conf_by_attr_pair(self) -> dict[tuple[str, str], float]:
        return {(e.left, e.right): e.confidence for e in self.value_edges}


class ContentGraph:
    """Immutable view over a corpus and its matches, indexed per pair."""

    def __init__(self, corpus: Corpus, edges: list[Match], pair_index, adjacency):
        self.corpus = corpus
        self.edges = edges
        self.pair_index: dict[tuple[str, str], PairBundle] = pair_index
        self._adjacency: dict[str, frozenset[str]] = adjacency

    def bundle(self, d1: str, d2: str) -> PairBundle | None:
        if d1 > d2:
            d1, d2 = d2, d1
        return self.pair_index.get((d1, d2))

    def pairs(self) -> list[tuple[str, str]]:
        return sorted(self.pair_index)


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def _build_bundle(corpus: Corpus, d1: str, d2: str, edges: list[Match]) -> PairBundle:
    attr_edges = tuple(e for e in edges if e.kind is MatchKind.ATTRIBUTE)
    value_edges = tuple(e for e in edges if e.kind is MatchKind.VALUE_SET)
    prop_edges = tuple(e for e in edges if e.kind is MatchKind.PROPERTY)

    n1 = corpus.dataset(d1).attribute_count
    n2 = corpus.dataset(d2).attribute_count
    covered_1 = len({e.left for e in attr_edges})
    covered_2 = len({e.right for e in attr_edges})

    jaccards = [
        jaccard(corpus.value_set(e.left).values, corpus.value_set(e.right).values)
        for e in attr_edges
    ]
    return PairBundle(
        d1=d1,
        d2=d2,
        attr_edges=attr_edges,
        value_edges=value_edges,
        prop_edges=prop_edges,
        attr_coverage_1=covered_1 / n1 if n1 else 0.0,
        attr_coverage_2=covered_2 / n2 if n2 else 0.0,
        mean_value_conf=_mean([e.confidence for e in value_edges]),
        max_value_conf=max((e.confidence for e in value_edges), default=0.0),
        mean_prop_conf=_mean([e.confidence for e in prop_edges]),
        mean_value_jaccard=_mean(jaccards),
    )


def build_graph(corpus: Corpus, matches: list[Match]) -> ContentGraph:
    """Group matches into per-pair bundles and compute their statistics.

    Raises IntegrityError when a match references a dataset or attribute
    that is not in the corpus.
    """
    grouped: dict[tuple[str, str], list[Match]] = {}
    for m in matches:
        if m.left_dataset not in corpus or m.right_dataset not in corpus:
            missing = m.left_dataset if m.left_dataset not in corpus else m.right_dataset
            raise IntegrityError(f"match references unknown dataset {missing!r}")
        if m.kind in (MatchKind.ATTRIBUTE, MatchKind.VALUE_SET):
            for attr_id in (m.left, m.right):
                try:
                    corpus.attribute(attr_id)
                except KeyError:
                    raise IntegrityError(
                        f"match references unknown attribute {attr_id!r}"
                    ) from None
        grouped.setdefault((m.left_dataset, m.right_dataset), []).append(m)

    pair_index = {
        pair: _build_bundle(corpus, pair[0], pair[1], pair_edges)
        for pair, pair_edges in sorted(grouped.items())
    }
    adjacency: dict[str, set[str]] = {d.dataset_id: set() for d in corpus.datasets}
    for d1, d2 in pair_index:
        adjacency[d1].add(d2)
        adjacency[d2].add(d1)
    frozen = {d: frozenset(parts) for d, parts in adjacency.items()}
    return ContentGraph(corpus, list(matches), pair_index, frozen)


def neighbors(g: ContentGraph, dataset_id: str) -> set[str]:
    """All datasets sharing at least one edge with the given one."""
    if dataset_id not in g._adjacency:
        raise KeyError(f"unknown dataset {dataset_id!r}")
    return set(g._adjacency[dataset_id])
