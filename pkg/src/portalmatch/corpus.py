"""Load, canonicalize, and filter a directory of published tables.

A corpus directory holds pairs ``<id>.csv`` (UTF-8, header row) and
``<id>.meta.json`` (title required; description, tags, category, publisher
optional). Parsing canonicalizes attribute names and cell values so that
set-based comparisons downstream are robust to trivial formatting noise.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptySchemaError, MetadataError, ParseError
from .text import canonicalize_name, canonicalize_value

__all__ = [
    "Attribute",
    "ValueSet",
    "PropertyMap",
    "Dataset",
    "Corpus",
    "FilterConfig",
    "Exclusion",
    "parse_dataset",
    "load_corpus",
]


@dataclass(frozen=True)
class Attribute:
    """One column of a dataset."""

    attr_id: str
    name: str
    canonical_name: str
    ordinal: int


@dataclass(frozen=True)
class ValueSet:
    """Distinct canonical values of one column.

    ``sampled`` is true when the distinct values exceeded the configured cap
    and the set was truncated (ascending canonical order, for determinism).
    """

    attr_id: str
    values: frozenset[str]
    raw_count: int
    sampled: bool = False


@dataclass(frozen=True)
class PropertyMap:
    """Metadata properties of a dataset; ``title`` is always present."""

    entries: dict[str, str]

    def __post_init__(self) -> None:
        if "title" not in self.entries:
            self.entries["title"] = ""

    def get(self, key: str, default: str = "") -> str:
        return self.entries.get(key, default)

    def keys(self) -> list[str]:
        return sorted(self.entries)


@dataclass(frozen=True)
class Dataset:
    """One published table: attributes, per-attribute value sets, metadata."""

    dataset_id: str
    attributes: tuple[Attribute, ...]
    value_sets: tuple[ValueSet, ...]
    properties: PropertyMap
    row_count: int

    def __post_init__(self) -> None:
        if len(self.attributes) != len(self.value_sets):
            raise ValueError(
                f"{self.dataset_id}: {len(self.attributes)} attributes but "
                f"{len(self.value_sets)} value sets"
            )

    @property
    def attribute_count(self) -> int:
        return len(self.attributes)


class Corpus:
    """An immutable set of datasets, indexed by dataset and attribute id."""

    def __init__(self, datasets: list[Dataset], provenance: dict | None = None):
        ordered = sorted(datasets, key=lambda d: d.dataset_id)
        ids = [d.dataset_id for d in ordered]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate dataset ids: {dupes}")
        self.datasets: tuple[Dataset, ...] = tuple(ordered)
        self.provenance: dict = provenance or {}
        self._by_id = {d.dataset_id: d for d in self.datasets}
        self._value_sets = {
            vs.attr_id: vs for d in self.datasets for vs in d.value_sets
        }
        self._attributes = {
            a.attr_id: a for d in self.datasets for a in d.attributes
        }

    def __len__(self) -> int:
        return len(self.datasets)

    def __contains__(self, dataset_id: str) -> bool:
        return dataset_id in self._by_id

    def dataset(self, dataset_id: str) -> Dataset:
        return self._by_id[dataset_id]

    def attribute(self, attr_id: str) -> Attribute:
        return self._attributes[attr_id]

    def value_set(self, attr_id: str) -> ValueSet:
        return self._value_sets[attr_id]


@dataclass(frozen=True)
class FilterConfig:
    """Bounds applied while loading a corpus."""

    min_rows: int = 50
    max_rows: int = 100_000
    max_attributes: int = 200
    max_distinct_values_per_set: int = 10_000

    def __post_init__(self) -> None:
        if self.min_rows < 0:
            raise ValueError("min_rows must be >= 0")
        if self.max_rows <= self.min_rows:
            raise ValueError("max_rows must exceed min_rows")


@dataclass(frozen=True)
class Exclusion:
    """Why a dataset was left out of the corpus."""

    dataset_id: str
    rule: str
    detail: str = ""


_TEXT_PROPERTY_KEYS = ("title", "description", "category", "publisher")


def _coerce_property(value: object) -> str | None:
    """Flatten a JSON metadata value to text; None means 'skip this key'."""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return str(value)
    if isinstance(value, list) and all(isinstance(v, str) for v in value):
        return " ".join(value)
    return None


def _read_metadata(meta_path: Path) -> PropertyMap:
    try:
        raw = json.loads(meta_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MetadataError(f"{meta_path}: metadata file not found") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise MetadataError(f"{meta_path}: {exc}") from None
    if not isinstance(raw, dict):
        raise MetadataError(f"{meta_path}: metadata must be a JSON object")
    title = raw.get("title")
    if not isinstance(title, str):
        raise MetadataError(f"{meta_path}: 'title' must be a string")
    entries: dict[str, str] = {}
    for key in sorted(raw):
        text = _coerce_property(raw[key])
        if text is not None:
            entries[key] = text
    entries["title"] = title
    return PropertyMap(entries)


def parse_dataset(
    csv_path: str | Path,
    meta_path: str | Path,
    max_distinct_values_per_set: int = FilterConfig.max_distinct_values_per_set,
) -> Dataset:
    """Parse one CSV + metadata pair into a Dataset.

    Every column becomes an Attribute plus a ValueSet of distinct canonical
    cell values (empty cells are dropped). Columns whose distinct values
    exceed the cap are truncated to the first ``max_distinct_values_per_set``
    values in ascending canonical order and flagged ``sampled``.

    Raises ParseError / EmptySchemaError / MetadataError on malformed input.
    """
    csv_path = Path(csv_path)
    meta_path = Path(meta_path)
    properties = _read_metadata(meta_path)
    dataset_id = csv_path.stem

    try:
        handle = csv_path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"{csv_path}: {exc}") from None

    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader, None)
        except csv.Error as exc:
            raise ParseError(f"{csv_path}:1: {exc}") from None
        if header is None or len(header) == 0:
            raise EmptySchemaError(f"{csv_path}: no columns in header")

        attributes = tuple(
            Attribute(
                attr_id=f"{dataset_id}:{i}",
                name=name,
                canonical_name=canonicalize_name(name),
                ordinal=i,
            )
            for i, name in enumerate(header)
        )
        columns: list[set[str]] = [set() for _ in header]
        row_count = 0
        try:
            for row in reader:
                if not row:
                    continue  # blank line
                if len(row) != len(header):
                    raise ParseError(
                        f"{csv_path}:{reader.line_num}: expected "
                        f"{len(header)} fields, got {len(row)}"
                    )
                row_count += 1
                for col, cell in zip(columns, row):
                    value = canonicalize_value(cell)
                    if value:
                        col.add(value)
        except csv.Error as exc:
            raise ParseError(f"{csv_path}:{reader.line_num}: {exc}") from None

    value_sets = []
    for attr, col in zip(attributes, columns):
        sampled = len(col) > max_distinct_values_per_set
        values = col
        if sampled:
            values = set(sorted(col)[:max_distinct_values_per_set])
        value_sets.append(
            ValueSet(
                attr_id=attr.attr_id,
                values=frozenset(values),
                raw_count=row_count,
                sampled=sampled,
            )
        )
    return Dataset(
        dataset_id=dataset_id,
        attributes=attributes,
        value_sets=tuple(value_sets),
        properties=properties,
        row_count=row_count,
    )


def _filter_rule(dataset: Dataset, cfg: FilterConfig) -> str | None:
    """Name of the first filter rule a dataset violates, or None if it passes."""
    if dataset.row_count < cfg.min_rows:
        return "min_rows"
    if dataset.row_count > cfg.max_rows:
        return "max_rows"
    if dataset.attribute_count > cfg.max_attributes:
        return "max_attributes"
    if not any(vs.values for vs in dataset.value_sets):
        return "no_processable_attributes"
    return None


def load_corpus(
    directory: str | Path, cfg: FilterConfig | None = None
) -> tuple[Corpus, list[Exclusion]]:
    """Load every ``<id>.csv`` / ``<id>.meta.json`` pair under a directory.

    Datasets failing a filter rule are excluded; per-dataset parse failures
    are recorded, not fatal. Returns the corpus plus the exclusion log
    (one entry per dropped dataset, naming the failing rule).
    """
    cfg = cfg or FilterConfig()
    directory = Path(directory)
    if not directory.is_dir():
        raise OSError(f"{directory}: not a readable directory")

    datasets: list[Dataset] = []
    excluded: list[Exclusion] = []
    for csv_path in sorted(directory.glob("*.csv")):
        dataset_id = csv_path.stem
        meta_path = directory / f"{dataset_id}.meta.json"
        try:
            dataset = parse_dataset(
                csv_path, meta_path, cfg.max_distinct_values_per_set
            )
        except (ParseError, MetadataError) as exc:
            excluded.append(Exclusion(dataset_id, "parse_error", str(exc)))
            continue
        rule = _filter_rule(dataset, cfg)
        if rule is None:
            datasets.append(dataset)
        else:
            excluded.append(Exclusion(dataset_id, rule))

    provenance = {
        "source_dir": str(directory),
        "filter": {
            "min_rows": cfg.min_rows,
            "max_rows": cfg.max_rows,
            "max_attributes": cfg.max_attributes,
            "max_distinct_values_per_set": cfg.max_distinct_values_per_set,
        },
    }
    return Corpus(datasets, provenance), excluded
