"""Seeded synthetic corpora with ground-truth labels, plus detection scoring.

The generator plants one instance family per hypothesis class:

* duplicate: copy of a base dataset with rewritten metadata
* versioned: copy with extra rows (instance delta) or with attributes
  added/removed (attribute delta)
* partitioned: one logical table split into key-disjoint parts whose titles
  differ only in the partition key (a year)
* join partner: two otherwise unrelated datasets sharing one key column
* similar domain: two datasets sharing a small attribute-name subset
* simple relation: two schema-disjoint datasets sharing rare title markers

Filler ("base") datasets are built from globally unique pseudo-words and
length-9 coded values with pairwise edit distance >= 2, which keeps
unrelated pairs edge-free and self-comparisons exactly 1.0. Partition
titles contain real year tokens, so same-year datasets of different groups
legitimately form metadata-only relations; these emerge from the corpus and
count against precision, not recall.

Everything is a deterministic function of the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random

from .corpus import Attribute, Corpus, Dataset, PropertyMap, ValueSet
from .errors import ConfigError
from .hypotheses import Hypothesis, HypothesisClass
from .text import canonicalize_name

__all__ = [
    "SynthConfig",
    "GroundTruthRecord",
    "GroundTruth",
    "EvalRow",
    "EvaluationReport",
    "generate_corpus",
    "evaluate_detection",
]


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 7
    n_base: int = 20
    duplicates: int = 0
    version_chains: int = 0
    partition_groups: int = 0
    partition_group_size: int = 4
    join_pairs: int = 0
    similar_domain_groups: int = 0
    simple_relation_groups: int = 0
    title_noise: float = 0.0
    value_noise: float = 0.0

    def __post_init__(self) -> None:
        counts = (
            self.n_base,
            self.duplicates,
            self.version_chains,
            self.partition_groups,
            self.partition_group_size,
            self.join_pairs,
            self.similar_domain_groups,
            self.simple_relation_groups,
        )
        if any(c < 0 for c in counts):
            raise ConfigError("injection counts must be non-negative")
        if self.partition_groups and self.partition_group_size < 2:
            raise ConfigError("partition groups need at least 2 members")
        for rate_name in ("title_noise", "value_noise"):
            rate = getattr(self, rate_name)
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"{rate_name} must lie in [0, 1]")
        if self.duplicates + self.version_chains > self.n_base:
            raise ConfigError(
                "duplicates + version_chains exceed the number of base datasets"
            )

    def total_datasets(self) -> int:
        return (
            self.n_base
            + self.duplicates
            + self.version_chains
            + self.partition_groups * self.partition_group_size
            + 2 * self.join_pairs
            + 2 * self.similar_domain_groups
            + 2 * self.simple_relation_groups
        )


@dataclass(frozen=True)
class GroundTruthRecord:
    category: HypothesisClass
    datasets: frozenset[str]


@dataclass
class GroundTruth:
    records: list[GroundTruthRecord]

    def by_class(self, category: HypothesisClass) -> list[GroundTruthRecord]:
        return [r for r in self.records if r.category is category]


# identifier machinery -------------------------------------------------------

_LETTERS = "abcdefghijklmnopqrstuvwxyz"

# 23-letter alphabet for coded values; two digits plus a checksum give every
# pair of codes Hamming distance >= 2, hence edit distance >= 2 at equal
# length: identical columns never pick up fuzzy self-pairs.
_CODE_ALPHABET = "abcdefghijkmnpqrstuvwxy"
_CODE_BASE = len(_CODE_ALPHABET)
_CODE_CAPACITY = _CODE_BASE * _CODE_BASE


def _code(i: int) -> str:
    if i >= _CODE_CAPACITY:
        raise ConfigError(f"per-dataset value capacity {_CODE_CAPACITY} exceeded")
    d1 = i % _CODE_BASE
    d2 = (i // _CODE_BASE) % _CODE_BASE
    check = (d1 + 2 * d2) % _CODE_BASE
    return _CODE_ALPHABET[d1] + _CODE_ALPHABET[d2] + _CODE_ALPHABET[check]


class _Gen:
    """Generator state: one rng, one global identifier pool.

    Identifiers are uniform random letter strings, never reused; two random
    words collide near an edit-similarity threshold with negligible
    probability, which keeps unrelated datasets edge-free.
    """

    def __init__(self, seed: int):
        self.rng = Random(seed)
        self.used: set[str] = set()

    def word(self, length: int) -> str:
        while True:
            w = "".join(self.rng.choice(_LETTERS) for _ in range(length))
            if w not in self.used:
                self.used.add(w)
                return w

    def attr_name(self) -> str:
        return f"{self.word(self.rng.randint(4, 6))}_{self.word(self.rng.randint(3, 5))}"


class _ValueSpace:
    """Per-dataset value source: unique 6-char prefix + spaced serial codes."""

    def __init__(self, gen: _Gen):
        self.prefix = gen.word(6)
        self.counter = 0

    def draw(self, n: int) -> list[str]:
        out = [f"{self.prefix}{_code(self.counter + i)}" for i in range(n)]
        self.counter += n
        return out


def _build_dataset(
    dataset_id: str,
    columns: list[tuple[str, list[str]]],
    properties: dict[str, str],
) -> Dataset:
    attributes = []
    value_sets = []
    n_rows = max(56, 2 * max((len(vals) for _, vals in columns), default=0))
    for ordinal, (name, vals) in enumerate(columns):
        attr_id = f"{dataset_id}:{ordinal}"
        attributes.append(
            Attribute(attr_id, name, canonicalize_name(name), ordinal)
        )
        value_sets.append(
            ValueSet(attr_id, frozenset(vals), raw_count=n_rows, sampled=False)
        )
    return Dataset(
        dataset_id=dataset_id,
        attributes=tuple(attributes),
        value_sets=tuple(value_sets),
        properties=PropertyMap(dict(properties)),
        row_count=n_rows,
    )


def _perturb_title(gen: _Gen, title: str, rate: float) -> str:
    if rate <= 0.0:
        return title
    tokens = [
        gen.word(6) if gen.rng.random() < rate else t for t in title.split()
    ]
    return " ".join(tokens)


def _perturb_values(gen: _Gen, values: list[str], rate: float) -> list[str]:
    if rate <= 0.0:
        return values
    out = []
    for v in values:
        if v and gen.rng.random() < rate:
            pos = gen.rng.randrange(len(v))
            v = v[:pos] + gen.rng.choice(_CODE_ALPHABET) + v[pos + 1 :]
        out.append(v)
    return out


def _copy_dataset(
    gen: _Gen,
    source: Dataset,
    new_id: str,
    properties: dict[str, str],
    cfg: SynthConfig,
) -> Dataset:
    columns = []
    for attr, vs in zip(source.attributes, source.value_sets):
        values = _perturb_values(gen, sorted(vs.values), cfg.value_noise)
        columns.append((attr.name, values))
    props = dict(properties)
    props["title"] = _perturb_title(gen, props.get("title", ""), cfg.title_noise)
    return _build_dataset(new_id, columns, props)


def generate_corpus(cfg: SynthConfig) -> tuple[Corpus, GroundTruth]:
    """Build a labeled corpus; identical configs give identical output."""
    gen = _Gen(cfg.seed)
    datasets: list[Dataset] = []
    records: list[GroundTruthRecord] = []

    def fresh_props() -> dict[str, str]:
        return {
            "title": f"{gen.word(6)} {gen.word(7)}",
            "description": f"{gen.word(6)} {gen.word(7)} {gen.word(5)}",
        }

    # filler datasets, also donors for duplicate and version copies
    base_spaces: list[_ValueSpace] = []
    for b in range(cfg.n_base):
        space = _ValueSpace(gen)
        base_spaces.append(space)
        n_attrs = gen.rng.randint(4, 6)
        n_vals = gen.rng.randint(28, 44)
        columns = [(gen.attr_name(), space.draw(n_vals)) for _ in range(n_attrs)]
        datasets.append(_build_dataset(f"base{b:04d}", columns, fresh_props()))

    for i in range(cfg.duplicates):
        source = datasets[i]
        copy_id = f"dupe{i:04d}"
        datasets.append(_copy_dataset(gen, source, copy_id, fresh_props(), cfg))
        records.append(
            GroundTruthRecord(
                HypothesisClass.DUPLICATE,
                frozenset({source.dataset_id, copy_id}),
            )
        )

    for i in range(cfg.version_chains):
        source = datasets[cfg.duplicates + i]
        space = base_spaces[cfg.duplicates + i]
        version_id = f"vers{i:04d}"
        title = source.properties.get("title") + f" {gen.word(4)}"
        props = {"title": title, "description": source.properties.get("description")}
        if i % 2 == 0:
            # instance delta: same schema, ~35% extra rows with new values
            columns = []
            for attr, vs in zip(source.attributes, source.value_sets):
                extra = space.draw(math.ceil(0.35 * len(vs.values)))
                columns.append((attr.name, sorted(vs.values) + extra))
            version = _build_dataset(version_id, columns, props)
        elif i % 4 == 1:
            # attribute delta: two extra columns, same rows elsewhere
            columns = [
                (a.name, sorted(vs.values))
                for a, vs in zip(source.attributes, source.value_sets)
            ]
            for _ in range(2):
                columns.append((gen.attr_name(), space.draw(30)))
            version = _build_dataset(version_id, columns, props)
        else:
            # attribute delta: last column dropped
            columns = [
                (a.name, sorted(vs.values))
                for a, vs in zip(source.attributes[:-1], source.value_sets[:-1])
            ]
            version = _build_dataset(version_id, columns, props)
        datasets.append(version)
        records.append(
            GroundTruthRecord(
                HypothesisClass.VERSIONED,
                frozenset({source.dataset_id, version_id}),
            )
        )

    for g in range(cfg.partition_groups):
        topic = gen.word(6)
        description = f"{gen.word(6)} {gen.word(7)} {gen.word(5)}"
        names = [gen.attr_name() for _ in range(gen.rng.randint(4, 5))]
        member_ids = []
        for m in range(cfg.partition_group_size):
            member_id = f"part{g:02d}m{m:02d}"
            member_ids.append(member_id)
            space = _ValueSpace(gen)
            n_vals = gen.rng.randint(28, 40)
            columns = [(name, space.draw(n_vals)) for name in names]
            props = {"title": f"{topic} {2010 + m}", "description": description}
            datasets.append(_build_dataset(member_id, columns, props))
        records.append(
            GroundTruthRecord(HypothesisClass.PARTITIONED, frozenset(member_ids))
        )

    for j in range(cfg.join_pairs):
        key_space = _ValueSpace(gen)
        key_values = key_space.draw(25)
        pair_ids = []
        for side in ("a", "b"):
            ds_id = f"join{side}{j:04d}"
            pair_ids.append(ds_id)
            space = _ValueSpace(gen)
            columns = [("county", list(key_values))]
            for _ in range(gen.rng.randint(3, 5)):
                columns.append((gen.attr_name(), space.draw(30)))
            datasets.append(_build_dataset(ds_id, columns, fresh_props()))
        records.append(
            GroundTruthRecord(HypothesisClass.JOIN_PARTNER, frozenset(pair_ids))
        )

    shared_triples = [("amount", "beneficiary", "receiver")]
    for s in range(cfg.similar_domain_groups):
        if s < len(shared_triples):
            shared = shared_triples[s]
        else:
            shared = tuple(gen.attr_name() for _ in range(3))
        pair_ids = []
        for side in ("a", "b"):
            ds_id = f"dom{side}{s:04d}"
            pair_ids.append(ds_id)
            space = _ValueSpace(gen)
            columns = [(name, space.draw(30)) for name in shared]
            for _ in range(3):
                columns.append((gen.attr_name(), space.draw(30)))
            datasets.append(_build_dataset(ds_id, columns, fresh_props()))
        records.append(
            GroundTruthRecord(HypothesisClass.SIMILAR_DOMAIN, frozenset(pair_ids))
        )

    for r in range(cfg.simple_relation_groups):
        marker1, marker2 = gen.word(6), gen.word(6)
        pair_ids = []
        for side in ("a", "b"):
            ds_id = f"rel{side}{r:04d}"
            pair_ids.append(ds_id)
            space = _ValueSpace(gen)
            columns = [
                (gen.attr_name(), space.draw(30))
                for _ in range(gen.rng.randint(3, 5))
            ]
            props = {
                "title": f"{marker1} {marker2} {gen.word(5)}",
                "description": f"{gen.word(6)} {gen.word(7)} {gen.word(5)}",
            }
            datasets.append(_build_dataset(ds_id, columns, props))
        records.append(
            GroundTruthRecord(HypothesisClass.SIMPLE_RELATION, frozenset(pair_ids))
        )

    corpus = Corpus(
        datasets,
        provenance={"source": "synthetic", "seed": cfg.seed},
    )
    return corpus, GroundTruth(records)


# detection scoring ----------------------------------------------------------


@dataclass(frozen=True)
class EvalRow:
    category: str
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[EvalRow, ...]

    def row(self, category: str) -> EvalRow:
        return next(r for r in self.rows if r.category == category)


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _set_jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def evaluate_detection(
    hyps: list[Hypothesis],
    gt: GroundTruth,
    group_match_jaccard: float = 0.5,
    exact_groups: bool = False,
) -> EvaluationReport:
    """Precision/recall/F1 of detected hypotheses against planted truth.

    A pairwise hypothesis is a true positive when its dataset pair equals a
    planted pair of the same class. A partitioned hypothesis matches a
    planted group when their dataset-set Jaccard reaches the threshold
    (1.0 with ``exact_groups``). Empty prediction sets score precision 1.0;
    empty truth sets score recall 1.0.
    """
    rows = []
    total_tp = total_fp = total_fn = 0
    total_matched = total_truths = 0
    for category in HypothesisClass:
        preds = [h for h in hyps if h.category is category]
        truths = gt.by_class(category)
        truth_sets = [r.datasets for r in truths]
        threshold = 1.0 if exact_groups else group_match_jaccard

        def hits(h: Hypothesis) -> bool:
            members = frozenset(h.datasets)
            if category is HypothesisClass.PARTITIONED:
                return any(_set_jaccard(members, t) >= threshold for t in truth_sets)
            return members in truth_sets

        tp = sum(1 for h in preds if hits(h))
        fp = len(preds) - tp
        matched_truths = 0
        for t in truth_sets:
            if category is HypothesisClass.PARTITIONED:
                found = any(
                    _set_jaccard(frozenset(h.datasets), t) >= threshold for h in preds
                )
            else:
                found = any(frozenset(h.datasets) == t for h in preds)
            matched_truths += 1 if found else 0
        fn = len(truths) - matched_truths

        precision = tp / len(preds) if preds else 1.0
        recall = matched_truths / len(truths) if truths else 1.0
        rows.append(
            EvalRow(category.value, tp, fp, fn, precision, recall, _f1(precision, recall))
        )
        total_tp += tp
        total_fp += fp
        total_fn += fn
        total_matched += matched_truths
        total_truths += len(truths)

    n_preds = total_tp + total_fp
    overall_p = total_tp / n_preds if n_preds else 1.0
    overall_r = total_matched / total_truths if total_truths else 1.0
    rows.append(
        EvalRow(
            "overall",
            total_tp,
            total_fp,
            total_fn,
            overall_p,
            overall_r,
            _f1(overall_p, overall_r),
        )
    )
    return EvaluationReport(tuple(rows))
