"""Similarity kernels and brute-force candidate match generation.

Every dataset is compared against every other dataset (no blocking), on
three levels: attribute names (token Jaccard / edit similarity), value sets
(greedy one-to-one value mapping scored by coverage times monogamy), and
metadata properties (tf-idf cosine). Edges at or above the configured
thresholds become candidate matches with the kernel value as confidence.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable

from .corpus import Attribute, Corpus, Dataset, ValueSet
from .text import lev_sim, levenshtein, tokenize

__all__ = [
    "MatchKind",
    "Match",
    "MatchConfig",
    "IdfTable",
    "MatchRun",
    "jaccard",
    "lev_sim",
    "name_similarity",
    "build_idf",
    "property_similarity",
    "value_set_similarity",
    "containment",
    "match_dataset_pair",
    "generate_matches",
]


class MatchKind(Enum):
    """Level a candidate match lives on; matches never cross levels."""

    ATTRIBUTE = "attribute"
    VALUE_SET = "value_set"
    PROPERTY = "property"


@dataclass(frozen=True)
class Match:
    """A scored candidate correspondence between two same-kind elements."""

    left_dataset: str
    right_dataset: str
    kind: MatchKind
    left: str
    right: str
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if self.left_dataset == self.right_dataset:
            raise ValueError("a match must connect two different datasets")
        if self.left_dataset > self.right_dataset:
            raise ValueError("datasets must be in canonical (sorted) order")

    def sort_key(self) -> tuple:
        return (
            self.left_dataset,
            self.right_dataset,
            self.kind.value,
            self.left,
            self.right,
        )

    def ref(self) -> str:
        """Stable string key for this edge (used in report files)."""
        return f"{self.kind.value}|{self.left}|{self.right}"


@dataclass(frozen=True)
class MatchConfig:
    """Kernel thresholds; deliberately low, recall comes first."""

    tau_attr: float = 0.5
    tau_value: float = 0.3
    tau_prop: float = 0.3
    tau_value_pair: float = 0.8

    def __post_init__(self) -> None:
        for name in ("tau_attr", "tau_value", "tau_prop", "tau_value_pair"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class IdfTable:
    """Inverse document frequencies of tokens in one property key."""

    key: str
    idf: dict[str, float]
    doc_count: int

    def weight(self, token: str) -> float:
        return self.idf.get(token, 0.0)


@dataclass
class MatchRun:
    """Output of a full matching pass."""

    matches: list[Match]
    pairs_examined: int
    edges_by_kind: dict[str, int]


# ---------------------------------------------------------------------------
# scalar kernels


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """|a n b| / |a u b|; 0.0 when both sets are empty."""
    sa, sb = set(a), set(b)
    union = len(sa | sb)
    if union == 0:
        return 0.0
    return len(sa & sb) / union


def name_similarity(a1: Attribute, a2: Attribute) -> float:
    """Best of token-set Jaccard and edit similarity over canonical names."""
    return _name_similarity(a1.canonical_name, a2.canonical_name)


def _name_similarity(n1: str, n2: str) -> float:
    return max(jaccard(n1.split(), n2.split()), lev_sim(n1, n2))


def build_idf(corpus: Corpus, key: str) -> IdfTable:
    """Token idf over one property key: ln(N / df).

    N counts datasets with at least one token under the key; df counts
    datasets containing the token. A key with no non-empty values yields an
    empty table.
    """
    doc_tokens = []
    for dataset in corpus.datasets:
        tokens = set(tokenize(dataset.properties.get(key)))
        if tokens:
            doc_tokens.append(tokens)
    n_docs = len(doc_tokens)
    df: Counter[str] = Counter()
    for tokens in doc_tokens:
        df.update(tokens)
    idf = {t: math.log(n_docs / df_t) for t, df_t in df.items()}
    return IdfTable(key=key, idf=idf, doc_count=n_docs)


def _tfidf_vector(text: str, idf: IdfTable) -> tuple[dict[str, float], float]:
    counts = Counter(tokenize(text))
    weights = {}
    for token, tf in counts.items():
        w = tf * idf.weight(token)
        if w > 0.0:
            weights[token] = w
    norm = math.sqrt(sum(w * w for w in weights.values()))
    return weights, norm


def property_similarity(p1: str, p2: str, idf: IdfTable) -> float:
    """Cosine similarity of tf-idf token vectors; 0.0 on a zero-norm side."""
    w1, n1 = _tfidf_vector(p1, idf)
    w2, n2 = _tfidf_vector(p2, idf)
    return _cosine(w1, n1, w2, n2)


def _cosine(
    w1: dict[str, float], n1: float, w2: dict[str, float], n2: float
) -> float:
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    if len(w2) < len(w1):
        w1, w2 = w2, w1
    dot = sum(w * w2[t] for t, w in w1.items() if t in w2)
    return min(1.0, dot / (n1 * n2))


def containment(v1: ValueSet, v2: ValueSet) -> float:
    """Fraction of v1's values present in v2; 0.0 when v1 is empty."""
    if not v1.values:
        return 0.0
    return len(v1.values & v2.values) / len(v1.values)


# ---------------------------------------------------------------------------
# value-set kernel: fuzzy pair enumeration + greedy one-to-one mapping


def _max_edits(longest: int, tau: float) -> int:
    """Largest edit distance d with 1 - d/longest still at or above tau."""
    if longest == 0:
        return 0
    k = int((1.0 - tau) * longest + 1e-9)
    while k + 1 <= longest and 1.0 - (k + 1) / longest >= tau:
        k += 1
    while k > 0 and 1.0 - k / longest < tau:
        k -= 1
    return k


def _bigrams(value: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for i in range(len(value) - 1):
        g = value[i : i + 2]
        counts[g] = counts.get(g, 0) + 1
    return counts


class _ColumnIndex:
    """Per-column lookup structures for the fuzzy value scan.

    The bigram count filter is conservative: an edit changes at most two
    bigrams, so values within edit distance k share at least
    max(len) - 1 - 2k bigrams (counted with multiplicity). Survivors are
    verified with a banded edit-distance computation, so the filter never
    changes results, it only skips hopeless pairs.
    """

    __slots__ = ("values", "by_length", "postings", "bigram_union")

    def __init__(self, values: frozenset[str]):
        self.values = values
        grouped: dict[int, list[str]] = {}
        for v in sorted(values):
            grouped.setdefault(len(v), []).append(v)
        self.by_length: dict[int, tuple[str, ...]] = {
            n: tuple(vs) for n, vs in grouped.items()
        }
        self.postings: dict[str, dict[str, int]] = {}
        union = set()
        for v in values:
            for g, c in _bigrams(v).items():
                self.postings.setdefault(g, {})[v] = c
                union.add(g)
        self.bigram_union = frozenset(union)


@lru_cache(maxsize=8192)
def _column_index(values: frozenset[str]) -> _ColumnIndex:
    return _ColumnIndex(values)


def _fuzzy_pairs(
    left: frozenset[str], index: _ColumnIndex, tau: float
) -> list[tuple[float, str, str]]:
    """All cross pairs (x, y), x != y, with edit similarity >= tau."""
    pairs: list[tuple[float, str, str]] = []
    lengths = sorted(index.by_length)
    for x in sorted(left):
        lx = len(x)
        x_grams = _bigrams(x)
        tallied: dict[str, int] | None = None
        for ly in lengths:
            longest = max(lx, ly)
            k = _max_edits(longest, tau)
            if k == 0 or abs(lx - ly) > k:
                continue
            needed = longest - 1 - 2 * k
            bucket = index.by_length[ly]
            if needed > 0:
                if tallied is None:
                    tallied = {}
                    for g, cx in x_grams.items():
                        posting = index.postings.get(g)
                        if posting:
                            for y, cy in posting.items():
                                tallied[y] = tallied.get(y, 0) + min(cx, cy)
                candidates = [y for y in bucket if tallied.get(y, 0) >= needed]
            else:
                candidates = list(bucket)
            for y in candidates:
                if y == x:
                    continue
                d = levenshtein(x, y, max_dist=k)
                if d <= k:
                    pairs.append((1.0 - d / max(lx, len(y)), x, y))
    return pairs


def _value_similarity_from_index(
    s1: frozenset[str], s2: frozenset[str], index2: _ColumnIndex, tau: float
) -> float:
    if not s1 or not s2:
        return 0.0
    exact = s1 & s2
    n_exact = len(exact)
    fuzzy = _fuzzy_pairs(s1, index2, tau)
    n_pairs = n_exact + len(fuzzy)
    if n_pairs == 0:
        return 0.0
    # Exact pairs carry similarity 1.0 and are mutually disjoint, so the
    # greedy pass accepts them all before any fuzzy pair is considered.
    used_left = set(exact)
    used_right = set(exact)
    accepted = n_exact
    fuzzy.sort(key=lambda p: (-p[0], p[1], p[2]))
    for _, x, y in fuzzy:
        if x in used_left or y in used_right:
            continue
        used_left.add(x)
        used_right.add(y)
        accepted += 1
    coverage = 2.0 * accepted / (len(s1) + len(s2))
    monogamy = accepted / n_pairs
    return coverage * monogamy


def value_set_similarity(v1: ValueSet, v2: ValueSet, cfg: MatchConfig) -> float:
    """Coverage times monogamy of the greedy one-to-one value mapping.

    Candidate pairs are all (x, y) with x == y or edit similarity at least
    ``cfg.tau_value_pair``. The greedy mapping takes candidates in order of
    descending similarity (ties broken lexicographically) while both
    endpoints are unused. Coverage is the matched share of both sets,
    monogamy the matched share of candidate pairs: a score that degrades
    when values match promiscuously. 0.0 when either set is empty.
    """
    return _value_similarity_from_index(
        v1.values, v2.values, _column_index(v2.values), cfg.tau_value_pair
    )


# ---------------------------------------------------------------------------
# brute-force pair matching

_NAME_SIM_CACHE: dict[tuple[str, str], float] = {}


def _cached_name_similarity(n1: str, n2: str) -> float:
    key = (n1, n2) if n1 <= n2 else (n2, n1)
    sim = _NAME_SIM_CACHE.get(key)
    if sim is None:
        sim = _name_similarity(n1, n2)
        _NAME_SIM_CACHE[key] = sim
    return sim


class _DatasetProfile:
    """Precomputed per-dataset structures, reused across all pairings."""

    __slots__ = (
        "dataset",
        "names",
        "attr_ids",
        "value_sets",
        "indexes",
        "prop_vectors",
    )

    def __init__(self, dataset: Dataset, idfs: dict[str, IdfTable]):
        self.dataset = dataset
        self.names = tuple(a.canonical_name for a in dataset.attributes)
        self.attr_ids = tuple(a.attr_id for a in dataset.attributes)
        self.value_sets = tuple(vs.values for vs in dataset.value_sets)
        self.indexes = tuple(_ColumnIndex(values) for values in self.value_sets)
        self.prop_vectors: dict[str, tuple[dict[str, float], float]] = {}
        for key in dataset.properties.keys():
            if key not in idfs:
                continue
            weights, norm = _tfidf_vector(dataset.properties.get(key), idfs[key])
            if norm > 0.0:
                self.prop_vectors[key] = (weights, norm)


def _match_pair(
    p1: _DatasetProfile, p2: _DatasetProfile, cfg: MatchConfig
) -> list[Match]:
    d1, d2 = p1.dataset.dataset_id, p2.dataset.dataset_id
    matches: list[Match] = []
    for i, name1 in enumerate(p1.names):
        s1 = p1.value_sets[i]
        for j, name2 in enumerate(p2.names):
            ns = _cached_name_similarity(name1, name2)
            if ns >= cfg.tau_attr:
                matches.append(
                    Match(d1, d2, MatchKind.ATTRIBUTE, p1.attr_ids[i], p2.attr_ids[j], ns)
                )
            s2 = p2.value_sets[j]
            if not s1 or not s2:
                continue
            # cheap gate: no shared values and no shared bigrams means no pairs
            if s1.isdisjoint(s2) and p1.indexes[i].bigram_union.isdisjoint(
                p2.indexes[j].bigram_union
            ):
                continue
            vs = _value_similarity_from_index(s1, s2, p2.indexes[j], cfg.tau_value_pair)
            if vs >= cfg.tau_value:
                matches.append(
                    Match(d1, d2, MatchKind.VALUE_SET, p1.attr_ids[i], p2.attr_ids[j], vs)
                )
    for key in p1.prop_vectors:
        if key not in p2.prop_vectors:
            continue
        w1, n1 = p1.prop_vectors[key]
        w2, n2 = p2.prop_vectors[key]
        ps = _cosine(w1, n1, w2, n2)
        if ps >= cfg.tau_prop:
            matches.append(
                Match(d1, d2, MatchKind.PROPERTY, f"{d1}:{key}", f"{d2}:{key}", ps)
            )
    return matches


def corpus_property_keys(corpus: Corpus) -> list[str]:
    """Property keys with at least one non-empty value anywhere in the corpus."""
    keys = set()
    for dataset in corpus.datasets:
        for key in dataset.properties.keys():
            if dataset.properties.get(key).strip():
                keys.add(key)
    return sorted(keys)


def build_all_idfs(corpus: Corpus) -> dict[str, IdfTable]:
    return {key: build_idf(corpus, key) for key in corpus_property_keys(corpus)}


def match_dataset_pair(
    d1: Dataset,
    d2: Dataset,
    cfg: MatchConfig,
    idfs: dict[str, IdfTable],
) -> list[Match]:
    """All candidate matches between one canonical dataset pair.

    Requires d1.dataset_id < d2.dataset_id. Emits an attribute edge for
    every name pair at or above tau_attr, a value edge for every column pair
    at or above tau_value, and a property edge for every shared key at or
    above tau_prop; confidences are the raw kernel values.
    """
    if d1.dataset_id >= d2.dataset_id:
        raise ValueError(
            f"datasets must be given in canonical order, got "
            f"{d1.dataset_id!r} vs {d2.dataset_id!r}"
        )
    matches = _match_pair(_DatasetProfile(d1, idfs), _DatasetProfile(d2, idfs), cfg)
    matches.sort(key=Match.sort_key)
    return matches


# worker state inherited via fork by the match-stage process pool
_POOL_STATE: dict = {}


def _match_rows(rows: list[int]) -> tuple[int, list[Match]]:
    profiles = _POOL_STATE["profiles"]
    cfg = _POOL_STATE["cfg"]
    n = len(profiles)
    examined = 0
    out: list[Match] = []
    for i in rows:
        p1 = profiles[i]
        for j in range(i + 1, n):
            examined += 1
            out.extend(_match_pair(p1, profiles[j], cfg))
    return examined, out


def generate_matches(
    corpus: Corpus, cfg: MatchConfig | None = None, workers: int = 1
) -> MatchRun:
    """Match every dataset against every other dataset.

    Examines exactly n*(n-1)/2 canonical pairs. The pair space may be
    partitioned across worker processes; the output is sorted canonically,
    so results do not depend on the worker count.
    """
    cfg = cfg or MatchConfig()
    idfs = build_all_idfs(corpus)
    profiles = [_DatasetProfile(d, idfs) for d in corpus.datasets]
    n = len(profiles)

    _POOL_STATE["profiles"] = profiles
    _POOL_STATE["cfg"] = cfg
    try:
        if workers <= 1 or n < 4:
            examined, matches = _match_rows(list(range(n)))
        else:
            import multiprocessing

            stripes = [list(range(w, n, workers)) for w in range(workers)]
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(processes=workers) as pool:
                parts = pool.map(_match_rows, stripes)
            examined = sum(c for c, _ in parts)
            matches = [m for _, part in parts for m in part]
    finally:
        _POOL_STATE.clear()

    matches.sort(key=Match.sort_key)
    by_kind = {kind.value: 0 for kind in MatchKind}
    for m in matches:
        by_kind[m.kind.value] += 1
    return MatchRun(matches=matches, pairs_examined=examined, edges_by_kind=by_kind)
