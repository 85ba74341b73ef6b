"""Unified ingestion of heterogeneous discourse corpora.

Source files (CSV/TSV/JSONL) are mapped into one record shape
(id, text, gold_label, dataset_id) via declarative per-dataset
manifests. Text is kept verbatim apart from unicode NFC
normalization and whitespace trimming, since downstream masking and
entailment need the original surface form. Malformed rows are
collected and reported, never silently dropped; ingestion fails when
their share exceeds a configurable threshold.
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
import unicodedata
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from statistics import fmean
from typing import Iterable, Mapping, Sequence

import yaml

SOURCE_FORMATS = ("csv", "tsv", "jsonl")
FIELD_ROLES = ("id", "text", "label")

# Share of malformed rows above which ingestion fails outright.
DEFAULT_MALFORMED_THRESHOLD = 0.01


class CorpusError(ValueError):
    """Schema violation or malformed corpus input."""


def _clean_text(raw: str) -> str:
    return unicodedata.normalize("NFC", raw).strip()


@dataclass(frozen=True)
class TextRecord:
    """One corpus item: the premise text plus its gold annotation."""

    id: str
    text: str
    gold_label: str
    dataset_id: str

    def __post_init__(self):
        if not self.text.strip():
            raise CorpusError(f"record {self.id!r}: text is empty after trimming")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "gold_label": self.gold_label,
            "dataset_id": self.dataset_id,
        }


@dataclass(frozen=True)
class DatasetSchema:
    """Label set and source-file layout for one dataset.

    ``label_set`` order is significant: it drives tie-breaking in
    classification and the row order of reports. ``field_map`` maps source
    column names to the roles id/text/label; the id role may be omitted,
    in which case row ordinals become record ids.
    """

    dataset_id: str
    label_set: tuple[str, ...]
    source_format: str = "csv"
    field_map: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.dataset_id:
            raise CorpusError("dataset_id must be non-empty")
        object.__setattr__(self, "label_set", tuple(self.label_set))
        if not self.label_set:
            raise CorpusError(f"{self.dataset_id}: label_set must be non-empty")
        if len(set(self.label_set)) != len(self.label_set):
            raise CorpusError(f"{self.dataset_id}: label_set has duplicates")
        if self.source_format not in SOURCE_FORMATS:
            raise CorpusError(
                f"{self.dataset_id}: source_format {self.source_format!r} "
                f"not one of {SOURCE_FORMATS}"
            )
        for column, role in self.field_map.items():
            if role not in FIELD_ROLES:
                raise CorpusError(
                    f"{self.dataset_id}: field_map maps {column!r} to unknown "
                    f"role {role!r}"
                )
        roles = list(self.field_map.values())
        for role in ("text", "label"):
            if self.field_map and roles.count(role) != 1:
                raise CorpusError(
                    f"{self.dataset_id}: field_map must map exactly one column "
                    f"to {role!r}"
                )

    def column_for(self, role: str) -> str | None:
        for column, mapped in self.field_map.items():
            if mapped == role:
                return column
        return None


@dataclass(frozen=True)
class DatasetManifest:
    """Declarative ingestion config for one dataset, checked into the repo.

    Beyond the schema it carries ingestion hints: ``label_map``
    translates raw source label values to canonical labels,
    ``drop_labels`` names source values excluded up front (e.g. classes the
    evaluation does not use), and provenance fields document where the data
    comes from since corpora are not redistributed.
    """

    schema: DatasetSchema
    label_map: Mapping[str, str] = field(default_factory=dict)
    drop_labels: tuple[str, ...] = ()
    source: str = ""
    citation: str = ""
    expected_rows: int | None = None
    notes: str = ""

    @property
    def dataset_id(self) -> str:
        return self.schema.dataset_id


@dataclass(frozen=True)
class Corpus:
    schema: DatasetSchema
    records: tuple[TextRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        allowed = set(self.schema.label_set)
        for record in self.records:
            if record.id in seen:
                raise CorpusError(f"duplicate record id {record.id!r}")
            seen.add(record.id)
            if record.gold_label not in allowed:
                raise CorpusError(
                    f"record {record.id!r}: label {record.gold_label!r} not in "
                    f"label set {self.schema.label_set}"
                )

    def __len__(self) -> int:
        return len(self.records)

    def texts(self) -> list[str]:
        return [r.text for r in self.records]

    def gold_labels(self) -> list[str]:
        return [r.gold_label for r in self.records]

    def label_histogram(self) -> dict[str, int]:
        hist = {label: 0 for label in self.schema.label_set}
        for record in self.records:
            hist[record.gold_label] += 1
        return hist


@dataclass(frozen=True)
class RowIssue:
    row: int
    reason: str


@dataclass(frozen=True)
class IngestReport:
    rows_read: int
    rows_kept: int
    dropped: int
    issues: tuple[RowIssue, ...]

    @property
    def malformed_fraction(self) -> float:
        considered = self.rows_read - self.dropped
        return len(self.issues) / considered if considered else 0.0


def _iter_source_rows(path: Path, source_format: str) -> Iterable[dict]:
    if source_format in ("csv", "tsv"):
        delimiter = "," if source_format == "csv" else "\t"
        with path.open(encoding="utf-8", newline="") as handle:
            yield from csv.DictReader(handle, delimiter=delimiter)
    else:
        with path.open(encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    yield json.loads(line)


def load_dataset_with_report(
    path: str | Path,
    manifest: DatasetManifest | DatasetSchema,
    malformed_threshold: float = DEFAULT_MALFORMED_THRESHOLD,
) -> tuple[Corpus, IngestReport]:
    """Ingest a source file into the unified record schema.

    Rows with a missing mapped column, empty text, or a label outside the
    schema are collected as issues. When their share of the (non-dropped)
    rows exceeds ``malformed_threshold`` the whole ingestion raises,
    naming the offending rows.
    """
    if isinstance(manifest, DatasetSchema):
        manifest = DatasetManifest(schema=manifest)
    schema = manifest.schema
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"source file not found: {path}")

    id_column = schema.column_for("id")
    text_column = schema.column_for("text")
    label_column = schema.column_for("label")
    if text_column is None or label_column is None:
        raise CorpusError(f"{schema.dataset_id}: field_map must cover text and label")

    records: list[TextRecord] = []
    issues: list[RowIssue] = []
    allowed = set(schema.label_set)
    seen_ids: set[str] = set()
    rows_read = 0
    dropped = 0

    for index, row in enumerate(_iter_source_rows(path, schema.source_format)):
        rows_read += 1
        missing = [c for c in (text_column, label_column) if c not in row]
        if missing:
            raise CorpusError(
                f"{path}: row {index} lacks mapped column(s) {missing}; "
                f"present: {sorted(row)}"
            )
        raw_label = str(row[label_column]).strip()
        if raw_label in manifest.drop_labels:
            dropped += 1
            continue
        label = manifest.label_map.get(raw_label, raw_label)
        text = _clean_text(str(row[text_column] or ""))
        if label not in allowed:
            issues.append(
                RowIssue(index, f"label {raw_label!r} not in label set {schema.label_set}")
            )
            continue
        if not text:
            issues.append(RowIssue(index, "empty text after trimming"))
            continue
        if id_column is not None and str(row.get(id_column, "")).strip():
            record_id = str(row[id_column]).strip()
        else:
            record_id = f"{schema.dataset_id}-{index}"
        if record_id in seen_ids:
            issues.append(RowIssue(index, f"duplicate id {record_id!r}"))
            continue
        seen_ids.add(record_id)
        records.append(TextRecord(record_id, text, label, schema.dataset_id))

    report = IngestReport(rows_read, len(records), dropped, tuple(issues))
    if issues and report.malformed_fraction > malformed_threshold:
        head = "; ".join(f"row {i.row}: {i.reason}" for i in issues[:5])
        raise CorpusError(
            f"{path}: {len(issues)} malformed rows "
            f"({report.malformed_fraction:.1%} > {malformed_threshold:.1%}): {head}"
        )
    return Corpus(schema=schema, records=tuple(records)), report


def load_dataset(
    path: str | Path,
    manifest: DatasetManifest | DatasetSchema,
    malformed_threshold: float = DEFAULT_MALFORMED_THRESHOLD,
) -> Corpus:
    corpus, _ = load_dataset_with_report(path, manifest, malformed_threshold)
    return corpus


def normalize_labels(corpus: Corpus, mapping: Mapping[str, str]) -> Corpus:
    """Relabel records and schema under a label→label map.

    Unmapped labels pass through; a mapped label keeps its position in the
    schema order. Pure relabeling: ids and texts are untouched.
    """
    unknown = set(mapping) - set(corpus.schema.label_set)
    if unknown:
        raise CorpusError(f"mapping keys {sorted(unknown)} not in corpus label set")
    new_label_set = tuple(mapping.get(label, label) for label in corpus.schema.label_set)
    if len(set(new_label_set)) != len(new_label_set):
        raise CorpusError(f"mapping produces duplicate labels: {new_label_set}")
    schema = replace(corpus.schema, label_set=new_label_set)
    records = tuple(
        replace(record, gold_label=mapping.get(record.gold_label, record.gold_label))
        for record in corpus.records
    )
    return Corpus(schema=schema, records=records)


def split(
    corpus: Corpus,
    test_fraction: float,
    seed: int,
    stratify: bool = True,
) -> tuple[Corpus, Corpus]:
    """Deterministic disjoint train/test partition, stratified per label."""
    if not 0.0 < test_fraction < 1.0:
        raise CorpusError(f"test_fraction must be in (0,1), got {test_fraction}")
    groups: dict[str, list[int]]
    if stratify:
        groups = {label: [] for label in corpus.schema.label_set}
        for i, record in enumerate(corpus.records):
            groups[record.gold_label].append(i)
        for label, indices in groups.items():
            if 0 < len(indices) < 2:
                raise CorpusError(
                    f"class {label!r} has a single record; cannot stratify"
                )
    else:
        groups = {"": list(range(len(corpus.records)))}

    rng = random.Random(seed)
    test_indices: set[int] = set()
    for label in sorted(groups):
        indices = groups[label]
        if not indices:
            continue
        n_test = max(1, min(len(indices) - 1, int(len(indices) * test_fraction + 0.5)))
        shuffled = indices[:]
        rng.shuffle(shuffled)
        test_indices.update(shuffled[:n_test])

    train_records = tuple(
        r for i, r in enumerate(corpus.records) if i not in test_indices
    )
    test_records = tuple(r for i, r in enumerate(corpus.records) if i in test_indices)
    return (
        Corpus(schema=corpus.schema, records=train_records),
        Corpus(schema=corpus.schema, records=test_records),
    )


def subsample(corpus: Corpus, n: int, seed: int) -> Corpus:
    """Pick n records deterministically, preserving corpus order.

    The draw depends only on (seed, dataset_id, corpus order), so repeated
    runs and different backends see identical record ids.
    """
    if n < 1:
        raise CorpusError(f"subsample size must be >= 1, got {n}")
    if n >= len(corpus.records):
        return corpus
    digest = hashlib.sha256(
        f"{seed}:{corpus.schema.dataset_id}".encode("utf-8")
    ).digest()
    rng = random.Random(int.from_bytes(digest[:8], "big"))
    keep = sorted(rng.sample(range(len(corpus.records)), n))
    return Corpus(
        schema=corpus.schema, records=tuple(corpus.records[i] for i in keep)
    )


@dataclass(frozen=True)
class CorpusStats:
    record_count: int
    per_label: Mapping[str, int]
    mean_text_length: float

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "per_label": dict(self.per_label),
            "mean_text_length": self.mean_text_length,
        }


def stats(corpus: Corpus) -> CorpusStats:
    lengths = [len(r.text) for r in corpus.records]
    return CorpusStats(
        record_count=len(corpus.records),
        per_label=corpus.label_histogram(),
        mean_text_length=fmean(lengths) if lengths else 0.0,
    )


def save_jsonl(corpus: Corpus, path: str | Path) -> None:
    """Write the canonical one-record-per-line export (UTF-8)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in corpus.records:
            handle.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")


def load_jsonl(path: str | Path, schema: DatasetSchema | None = None) -> Corpus:
    """Read a canonical JSONL export.

    Without an explicit schema, the label set is inferred in first-seen
    order and the dataset id is taken from the first record.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    records = []
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            payload = json.loads(line)
            records.append(
                TextRecord(
                    id=str(payload["id"]),
                    text=payload["text"],
                    gold_label=payload["gold_label"],
                    dataset_id=payload["dataset_id"],
                )
            )
    if schema is None:
        if not records:
            raise CorpusError(f"{path}: no records and no schema provided")
        labels: list[str] = []
        for record in records:
            if record.gold_label not in labels:
                labels.append(record.gold_label)
        schema = DatasetSchema(
            dataset_id=records[0].dataset_id,
            label_set=tuple(labels),
            source_format="jsonl",
        )
    return Corpus(schema=schema, records=tuple(records))


def _manifest_from_payload(payload: Mapping, origin: str) -> DatasetManifest:
    try:
        schema = DatasetSchema(
            dataset_id=payload["dataset_id"],
            label_set=tuple(payload["label_set"]),
            source_format=payload.get("source_format", "csv"),
            field_map=dict(payload.get("field_map", {})),
        )
    except KeyError as exc:
        raise CorpusError(f"{origin}: manifest missing key {exc}") from None
    return DatasetManifest(
        schema=schema,
        label_map={str(k): str(v) for k, v in (payload.get("label_map") or {}).items()},
        drop_labels=tuple(payload.get("drop_labels") or ()),
        source=payload.get("source", ""),
        citation=payload.get("citation", ""),
        expected_rows=payload.get("expected_rows"),
        notes=payload.get("notes", ""),
    )


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    payload = yaml.safe_load(path.read_text(encoding="utf-8"))
    return _manifest_from_payload(payload, str(path))


def bundled_manifests() -> dict[str, DatasetManifest]:
    """All dataset manifests shipped with the package, keyed by dataset id."""
    manifests = {}
    root = resources.files("sudkit").joinpath("manifests")
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".yaml"):
            payload = yaml.safe_load(entry.read_text(encoding="utf-8"))
            manifest = _manifest_from_payload(payload, entry.name)
            manifests[manifest.dataset_id] = manifest
    return manifests


def get_manifest(name_or_path: str | Path) -> DatasetManifest:
    """Resolve a manifest by file path or bundled dataset id."""
    path = Path(name_or_path)
    if path.exists():
        return load_manifest(path)
    bundled = bundled_manifests()
    key = str(name_or_path)
    if key in bundled:
        return bundled[key]
    raise CorpusError(
        f"no manifest file at {name_or_path!r} and no bundled dataset of that id "
        f"(bundled: {sorted(bundled)})"
    )
