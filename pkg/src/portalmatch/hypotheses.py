"""Detect integration problem candidates by pattern matching over the graph.

Six classes are recognized. Three flag platform-level redundancy: duplicate
pairs (full schema and instance agreement), versioned pairs (schema or
instance drift between near-copies), and partitioned groups (same schema,
disjoint instances, related metadata). Three propose semantic glue between
genuinely different datasets: join partners (a shared key column), similar
domains (a shared attribute subset), and simple relations (a strong match
in a single metadata property only).

A dataset pair contributes to at most one pairwise class, by precedence:
duplicate > versioned > partitioned (group-wise) > join partner > similar
domain > simple relation. Set ``allow_multiclass`` to lift exclusivity.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum

from .graph import ContentGraph, PairBundle
from .matching import Match, MatchKind, build_all_idfs, containment
from .text import tokenize

__all__ = [
    "HypothesisClass",
    "Hypothesis",
    "DetectConfig",
    "CountsRow",
    "CountsReport",
    "detect_duplicates",
    "detect_versioned",
    "detect_partitioned",
    "detect_join_partners",
    "detect_similar_domains",
    "detect_simple_relations",
    "detect_all",
    "summarize",
]


class HypothesisClass(Enum):
    DUPLICATE = "duplicate"
    VERSIONED = "versioned"
    PARTITIONED = "partitioned"
    JOIN_PARTNER = "join_partner"
    SIMILAR_DOMAIN = "similar_domain"
    SIMPLE_RELATION = "simple_relation"


@dataclass(frozen=True)
class Hypothesis:
    """A classed subset of the matches over two or more datasets."""

    hyp_id: str
    category: HypothesisClass
    datasets: tuple[str, ...]
    edges: tuple[Match, ...]
    evidence: dict[str, float] = field(default_factory=dict)
    flags: dict[str, bool | str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.edges:
            raise ValueError(f"{self.hyp_id}: a hypothesis needs at least one edge")
        members = set(self.datasets)
        for e in self.edges:
            if e.left_dataset not in members or e.right_dataset not in members:
                raise ValueError(
                    f"{self.hyp_id}: edge {e.ref()} leaves the dataset set"
                )

    @property
    def attr_edges(self) -> tuple[Match, ...]:
        return tuple(e for e in self.edges if e.kind is MatchKind.ATTRIBUTE)

    @property
    def value_edges(self) -> tuple[Match, ...]:
        return tuple(e for e in self.edges if e.kind is MatchKind.VALUE_SET)

    @property
    def prop_edges(self) -> tuple[Match, ...]:
        return tuple(e for e in self.edges if e.kind is MatchKind.PROPERTY)


def _make_hypothesis(
    category: HypothesisClass,
    datasets: tuple[str, ...],
    edges: list[Match],
    evidence: dict[str, float],
    flags: dict[str, bool | str],
) -> Hypothesis:
    ordered = tuple(sorted(edges, key=Match.sort_key))
    payload = "\n".join(
        [category.value, "+".join(datasets)] + [e.ref() for e in ordered]
    )
    digest = hashlib.sha1(payload.encode("utf-8")).hexdigest()[:12]
    hyp_id = f"{category.value}:{'+'.join(datasets)}:{digest}"
    return Hypothesis(hyp_id, category, datasets, ordered, evidence, flags)


@dataclass(frozen=True)
class DetectConfig:
    """Pattern thresholds. The patterns are structural; these are tuning."""

    dup_cov: float = 0.95
    dup_value_conf: float = 0.9
    ver_cov_lo: float = 0.5
    ver_value_conf: float = 0.3  # mirrors the value-edge threshold default
    ver_containment: float = 0.8
    ver_jaccard_max: float = 0.9
    part_min_group: int = 3
    part_cov: float = 0.9
    part_overlap_max: float = 0.1
    part_prop_min: float = 0.4
    join_value_conf: float = 0.7
    join_cov_max: float = 0.5
    simdom_min_shared: int = 2
    simdom_attr_conf: float = 0.7
    simdom_cov_lo: float = 0.3
    simdom_cov_hi: float = 0.9
    simple_prop_min: float = 0.4
    allow_multiclass: bool = False

    def __post_init__(self) -> None:
        if self.part_min_group < 1 or self.simdom_min_shared < 1:
            raise ValueError("group and shared-attribute minimums must be positive")


def _matched_attr_pairs(bundle: PairBundle) -> list[tuple[str, str]]:
    return [(e.left, e.right) for e in bundle.attr_edges]


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def _duplicate_for(bundle: PairBundle, cfg: DetectConfig) -> Hypothesis | None:
    if bundle.attr_coverage_1 < cfg.dup_cov or bundle.attr_coverage_2 < cfg.dup_cov:
        return None
    pairs = _matched_attr_pairs(bundle)
    if not pairs:
        return None
    value_conf = bundle.value_conf_by_attr_pair()
    confs = [value_conf.get(p, 0.0) for p in pairs]
    if min(confs) < cfg.dup_value_conf:
        return None
    return _make_hypothesis(
        HypothesisClass.DUPLICATE,
        (bundle.d1, bundle.d2),
        list(bundle.edges),
        {
            "attr_coverage_1": bundle.attr_coverage_1,
            "attr_coverage_2": bundle.attr_coverage_2,
            "min_value_conf": min(confs),
            "mean_prop_conf": bundle.mean_prop_conf,
        },
        {"divergent_metadata": bundle.mean_prop_conf < 0.5},
    )


def detect_duplicates(g: ContentGraph, cfg: DetectConfig) -> list[Hypothesis]:
    """Pairs matching completely on attributes and instances (re-uploads)."""
    out = []
    for pair in g.pairs():
        hyp = _duplicate_for(g.pair_index[pair], cfg)
        if hyp:
            out.append(hyp)
    return sorted(out, key=lambda h: h.hyp_id)


def _versioned_for(
    g: ContentGraph, bundle: PairBundle, cfg: DetectConfig
) -> Hypothesis | None:
    cov_lo = min(bundle.attr_coverage_1, bundle.attr_coverage_2)
    cov_hi = max(bundle.attr_coverage_1, bundle.attr_coverage_2)
    pairs = _matched_attr_pairs(bundle)
    if not pairs:
        return None

    value_conf = bundle.value_conf_by_attr_pair()
    mean_value = _mean([value_conf.get(p, 0.0) for p in pairs])
    cont_12 = _mean(
        [containment(g.corpus.value_set(a), g.corpus.value_set(b)) for a, b in pairs]
    )
    cont_21 = _mean(
        [containment(g.corpus.value_set(b), g.corpus.value_set(a)) for a, b in pairs]
    )
    evidence = {
        "min_coverage": cov_lo,
        "max_coverage": cov_hi,
        "mean_value_conf": mean_value,
        "containment_into_2": cont_12,
        "containment_into_1": cont_21,
        "mean_value_jaccard": bundle.mean_value_jaccard,
    }

    # Case (a): one side carries attributes the other lacks, same data on
    # the shared columns. Case (b): full schema agreement, but one instance
    # set contains the other without being (nearly) equal to it.
    if cfg.ver_cov_lo <= cov_lo < cfg.dup_cov:
        if mean_value < cfg.ver_value_conf:
            return None
        flags: dict[str, bool | str] = {
            "case": "attribute_delta",
            "direction": "undirected",
        }
    elif cov_lo >= cfg.dup_cov:
        if max(cont_12, cont_21) < cfg.ver_containment:
            return None
        if bundle.mean_value_jaccard >= cfg.ver_jaccard_max:
            return None
        superset = bundle.d2 if cont_12 >= cont_21 else bundle.d1
        flags = {"case": "instance_delta", "direction": superset}
    else:
        return None
    return _make_hypothesis(
        HypothesisClass.VERSIONED,
        (bundle.d1, bundle.d2),
        list(bundle.edges),
        evidence,
        flags,
    )


def detect_versioned(
    g: ContentGraph, cfg: DetectConfig, skip: set[tuple[str, str]] | None = None
) -> list[Hypothesis]:
    """Pairs that look like sub-/supersets or schema revisions of one table."""
    skip = skip or set()
    out = []
    for pair in g.pairs():
        if pair in skip:
            continue
        hyp = _versioned_for(g, g.pair_index[pair], cfg)
        if hyp:
            out.append(hyp)
    return sorted(out, key=lambda h: h.hyp_id)


def _partition_pair_ok(bundle: PairBundle, cfg: DetectConfig) -> bool:
    return (
        bundle.attr_coverage_1 >= cfg.part_cov
        and bundle.attr_coverage_2 >= cfg.part_cov
        and bundle.mean_value_jaccard <= cfg.part_overlap_max
        and bundle.mean_prop_conf >= cfg.part_prop_min
    )


def detect_partitioned(g: ContentGraph, cfg: DetectConfig) -> list[Hypothesis]:
    """Groups publishing one logical table as several key-disjoint parts.

    Qualifying pairs (same schema, disjoint instances, related metadata) are
    linked; each connected component of at least ``part_min_group`` datasets
    becomes one group hypothesis over all qualifying pairwise edges.
    """
    qualifying = [p for p in g.pairs() if _partition_pair_ok(g.pair_index[p], cfg)]
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for d1, d2 in qualifying:
        parent.setdefault(d1, d1)
        parent.setdefault(d2, d2)
        r1, r2 = find(d1), find(d2)
        if r1 != r2:
            parent[max(r1, r2)] = min(r1, r2)

    components: dict[str, set[str]] = {}
    for node in parent:
        components.setdefault(find(node), set()).add(node)

    out = []
    for members in components.values():
        if len(members) < cfg.part_min_group:
            continue
        member_pairs = [p for p in qualifying if p[0] in members and p[1] in members]
        edges: list[Match] = []
        bundles = []
        for p in member_pairs:
            bundle = g.pair_index[p]
            bundles.append(bundle)
            edges.extend(bundle.edges)
        evidence = {
            "group_size": float(len(members)),
            "min_coverage": min(
                min(b.attr_coverage_1, b.attr_coverage_2) for b in bundles
            ),
            "max_value_jaccard": max(b.mean_value_jaccard for b in bundles),
            "min_prop_conf": min(b.mean_prop_conf for b in bundles),
        }
        out.append(
            _make_hypothesis(
                HypothesisClass.PARTITIONED,
                tuple(sorted(members)),
                edges,
                evidence,
                {},
            )
        )
    return sorted(out, key=lambda h: h.hyp_id)


def _join_for(bundle: PairBundle, cfg: DetectConfig) -> Hypothesis | None:
    if max(bundle.attr_coverage_1, bundle.attr_coverage_2) > cfg.join_cov_max:
        return None
    strong = [e for e in bundle.value_edges if e.confidence >= cfg.join_value_conf]
    if not strong:
        return None
    strong.sort(key=lambda e: (-e.confidence, e.left, e.right))
    key_pairs = {(e.left, e.right) for e in strong}
    edges = list(strong) + [
        e for e in bundle.attr_edges if (e.left, e.right) in key_pairs
    ]
    best = strong[0]
    return _make_hypothesis(
        HypothesisClass.JOIN_PARTNER,
        (bundle.d1, bundle.d2),
        edges,
        {
            "best_value_conf": best.confidence,
            "attr_coverage_1": bundle.attr_coverage_1,
            "attr_coverage_2": bundle.attr_coverage_2,
        },
        {"best_left_attr": best.left, "best_right_attr": best.right},
    )


def detect_join_partners(
    g: ContentGraph, cfg: DetectConfig, skip: set[tuple[str, str]] | None = None
) -> list[Hypothesis]:
    """Mostly-different pairs sharing a column usable as a join key."""
    skip = skip or set()
    out = []
    for pair in g.pairs():
        if pair in skip:
            continue
        hyp = _join_for(g.pair_index[pair], cfg)
        if hyp:
            out.append(hyp)
    return sorted(out, key=lambda h: h.hyp_id)


def _similar_domain_for(bundle: PairBundle, cfg: DetectConfig) -> Hypothesis | None:
    shared = [e for e in bundle.attr_edges if e.confidence >= cfg.simdom_attr_conf]
    if len(shared) < cfg.simdom_min_shared:
        return None
    cov_lo = min(bundle.attr_coverage_1, bundle.attr_coverage_2)
    if not cfg.simdom_cov_lo <= cov_lo < cfg.simdom_cov_hi:
        return None
    edges = list(shared) + list(bundle.prop_edges)
    return _make_hypothesis(
        HypothesisClass.SIMILAR_DOMAIN,
        (bundle.d1, bundle.d2),
        edges,
        {
            "shared_attributes": float(len(shared)),
            "min_coverage": cov_lo,
            "mean_prop_conf": bundle.mean_prop_conf,
        },
        {},
    )


def detect_similar_domains(
    g: ContentGraph, cfg: DetectConfig, skip: set[tuple[str, str]] | None = None
) -> list[Hypothesis]:
    """Pairs sharing a subset of their attributes (same domain, new data)."""
    skip = skip or set()
    out = []
    for pair in g.pairs():
        if pair in skip:
            continue
        hyp = _similar_domain_for(g.pair_index[pair], cfg)
        if hyp:
            out.append(hyp)
    return sorted(out, key=lambda h: h.hyp_id)


def _graph_idfs(g: ContentGraph):
    cached = getattr(g, "_idf_tables", None)
    if cached is None:
        cached = build_all_idfs(g.corpus)
        g._idf_tables = cached
    return cached


def _shared_token_evidence(
    g: ContentGraph, bundle: PairBundle
) -> tuple[str, str, float]:
    """Highest-idf token shared by a matched property (the origin marker)."""
    idfs = _graph_idfs(g)
    best = ("", "", -1.0)
    for e in bundle.prop_edges:
        key = e.left.rsplit(":", 1)[1]
        if key not in idfs:
            continue
        t1 = set(tokenize(g.corpus.dataset(bundle.d1).properties.get(key)))
        t2 = set(tokenize(g.corpus.dataset(bundle.d2).properties.get(key)))
        for token in sorted(t1 & t2):
            w = idfs[key].weight(token)
            if w > best[2]:
                best = (token, key, w)
    return best


def _simple_relation_for(
    g: ContentGraph, bundle: PairBundle, cfg: DetectConfig
) -> Hypothesis | None:
    if bundle.attr_edges or bundle.value_edges or not bundle.prop_edges:
        return None
    best_conf = max(e.confidence for e in bundle.prop_edges)
    if best_conf < cfg.simple_prop_min:
        return None
    token, key, weight = _shared_token_evidence(g, bundle)
    return _make_hypothesis(
        HypothesisClass.SIMPLE_RELATION,
        (bundle.d1, bundle.d2),
        list(bundle.prop_edges),
        {"best_prop_conf": best_conf, "shared_token_idf": max(weight, 0.0)},
        {"shared_token": token, "property_key": key},
    )


def detect_simple_relations(
    g: ContentGraph, cfg: DetectConfig, skip: set[tuple[str, str]] | None = None
) -> list[Hypothesis]:
    """Pairs connected through metadata only, e.g. a shared origin marker."""
    skip = skip or set()
    out = []
    for pair in g.pairs():
        if pair in skip:
            continue
        hyp = _simple_relation_for(g, g.pair_index[pair], cfg)
        if hyp:
            out.append(hyp)
    return sorted(out, key=lambda h: h.hyp_id)


def detect_all(g: ContentGraph, cfg: DetectConfig | None = None) -> list[Hypothesis]:
    """Run all six detectors with class precedence and return by id.

    Group membership in a partition suppresses the pairwise correspondence
    classes among the group's members; every other pair carries at most one
    class. With ``allow_multiclass`` all detectors see all pairs.
    """
    cfg = cfg or DetectConfig()
    exclusive = not cfg.allow_multiclass
    claimed: set[tuple[str, str]] = set()
    out: list[Hypothesis] = []

    for hyp in detect_duplicates(g, cfg):
        out.append(hyp)
        if exclusive:
            claimed.add((hyp.datasets[0], hyp.datasets[1]))

    for hyp in detect_versioned(g, cfg, skip=claimed if exclusive else None):
        out.append(hyp)
        if exclusive:
            claimed.add((hyp.datasets[0], hyp.datasets[1]))

    for hyp in detect_partitioned(g, cfg):
        out.append(hyp)
        if exclusive:
            members = sorted(hyp.datasets)
            for i, d1 in enumerate(members):
                for d2 in members[i + 1 :]:
                    claimed.add((d1, d2))

    for detector in (detect_join_partners, detect_similar_domains, detect_simple_relations):
        for hyp in detector(g, cfg, skip=claimed if exclusive else None):
            out.append(hyp)
            if exclusive:
                claimed.add((hyp.datasets[0], hyp.datasets[1]))

    out.sort(key=lambda h: h.hyp_id)
    ids = [h.hyp_id for h in out]
    if len(set(ids)) != len(ids):
        raise AssertionError("hypothesis ids collide")
    return out


@dataclass(frozen=True)
class CountsRow:
    category: HypothesisClass
    hypothesis_count: int
    distinct_datasets: int
    ratio: float


@dataclass(frozen=True)
class CountsReport:
    """Per-class hypothesis and involved-dataset counts, plus their ratio."""

    rows: tuple[CountsRow, ...]

    def row(self, category: HypothesisClass) -> CountsRow:
        return next(r for r in self.rows if r.category is category)


def summarize(hyps: list[Hypothesis]) -> CountsReport:
    """Count hypotheses and distinct involved datasets per class.

    The ratio (hypotheses per involved dataset) generalizes statements like
    "each dataset has between 2 and 3 potential duplicates".
    """
    rows = []
    for category in HypothesisClass:
        mine = [h for h in hyps if h.category is category]
        datasets = {d for h in mine for d in h.datasets}
        ratio = len(mine) / len(datasets) if datasets else 0.0
        rows.append(CountsRow(category, len(mine), len(datasets), ratio))
    return CountsReport(tuple(rows))
