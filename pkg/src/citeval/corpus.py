"""Ingestion of publication and citation files into an immutable citation corpus.

The corpus is the shared read-only input for everything downstream: it holds
the publication records, the deduplicated citing->cited edge list, per-node
citation counts, and the partition of publications into (year, subject
category) groups. A publication listed under k subject categories is a full
member of each of its k groups.

Expected file layouts:

* ``publications.csv`` with header ``id,year,subject_categories,doc_type``
  (optional extra column ``date``, ISO-8601). ``subject_categories`` is
  ``;``-separated.
* ``citations.csv`` with header ``citing_id,cited_id``.

A corpus can be frozen to a single JSON snapshot (``schema_version``,
``publications``, ``edges``) and rebuilt from it without loss.
"""

from __future__ import annotations

import csv
import datetime
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, TextIO

from .errors import ValidationError

SNAPSHOT_SCHEMA_VERSION = 1
SC_DELIMITER = ";"


class GroupKey(NamedTuple):
    """A normalization group: all publications sharing a year and subject category."""

    year: int
    subject_category: str


class CitationEdge(NamedTuple):
    """One directed citation, from the citing publication to the cited one."""

    citing_id: str
    cited_id: str


@dataclass(frozen=True)
class PublicationRecord:
    """One indexed publication.

    ``subject_categories`` is an ordered, duplicate-free tuple with at least
    one label. ``doc_type`` is carried through untouched and never used in
    any computation. ``date`` is only consulted for citation-window
    filtering of edges whose citing side this record is. ``synthetic`` marks
    stub records created for dangling edge endpoints.
    """

    id: str
    year: int
    subject_categories: tuple[str, ...]
    doc_type: str | None = None
    date: datetime.date | None = None
    synthetic: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("publication id must be a non-empty string")
        if not self.subject_categories:
            raise ValidationError(f"publication {self.id} has no subject category")
        if len(set(self.subject_categories)) != len(self.subject_categories):
            raise ValidationError(f"publication {self.id} has duplicate subject categories")

    def group_keys(self) -> tuple[GroupKey, ...]:
        return tuple(GroupKey(self.year, sc) for sc in self.subject_categories)


@dataclass(frozen=True)
class CitationCorpus:
    """Validated publication set plus citation edges, with derived indexes.

    Instances are built once by :func:`build_corpus` and treated as
    read-only afterwards; all downstream modules share them freely.

    ``citers[p]`` lists the ids citing p (the in-adjacency), ``references[p]``
    the ids p cites. ``n_window_filtered`` counts edges dropped by the
    citation-window filter at build time.
    """

    publications: dict[str, PublicationRecord]
    edges: tuple[CitationEdge, ...]
    in_degree: dict[str, int]
    groups: dict[GroupKey, tuple[str, ...]]
    citers: dict[str, tuple[str, ...]]
    references: dict[str, tuple[str, ...]]
    n_window_filtered: int = 0

    def cited_ids(self) -> list[str]:
        """Ids of publications with at least one citation, in insertion order."""
        return [pid for pid in self.publications if self.in_degree[pid] > 0]

    def uncited_ids(self) -> list[str]:
        """Ids retained in the network but excluded from indicator results."""
        return [pid for pid in self.publications if self.in_degree[pid] == 0]


def _parse_date(raw: str, row_num: int) -> datetime.date:
    try:
        return datetime.date.fromisoformat(raw)
    except ValueError as exc:
        raise ValidationError(f"row {row_num}: bad date {raw!r} ({exc})") from None


def parse_publications(source: TextIO, fmt: str = "csv") -> list[PublicationRecord]:
    """Read publication records from a character stream.

    Only the ``csv`` format is supported. Subject categories are split on
    ``;`` and whitespace-trimmed; an empty ``doc_type`` or ``date`` cell
    means the field is absent. Raises :class:`ValidationError` with the
    offending row number for malformed rows, and names the id for
    duplicates.
    """
    if fmt != "csv":
        raise ValidationError(f"unsupported publication format {fmt!r}")
    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise ValidationError("publication file is empty (missing header)")
    header = [h.strip() for h in reader.fieldnames]
    required = {"id", "year", "subject_categories"}
    missing = required - set(header)
    if missing:
        raise ValidationError(f"publication header missing columns: {sorted(missing)}")

    records: list[PublicationRecord] = []
    seen: set[str] = set()
    for row in reader:
        row_num = reader.line_num
        pid = (row.get("id") or "").strip()
        if not pid:
            raise ValidationError(f"row {row_num}: empty publication id")
        if pid in seen:
            raise ValidationError(f"duplicate publication id {pid}")
        seen.add(pid)
        raw_year = (row.get("year") or "").strip()
        try:
            year = int(raw_year)
        except ValueError:
            raise ValidationError(f"row {row_num}: bad year {raw_year!r} for publication {pid}") from None
        scs = tuple(s.strip() for s in (row.get("subject_categories") or "").split(SC_DELIMITER) if s.strip())
        if not scs:
            raise ValidationError(f"publication {pid} has no subject category")
        if len(set(scs)) != len(scs):
            raise ValidationError(f"row {row_num}: publication {pid} has duplicate subject categories")
        doc_type = (row.get("doc_type") or "").strip() or None
        raw_date = (row.get("date") or "").strip()
        pub_date = _parse_date(raw_date, row_num) if raw_date else None
        records.append(PublicationRecord(pid, year, scs, doc_type, pub_date))
    return records


def parse_citations(source: TextIO) -> tuple[list[CitationEdge], int]:
    """Read a two-column citation edge list.

    Returns the deduplicated edges (first occurrence kept) and the number of
    collapsed duplicate rows. Self-loops and malformed rows raise
    :class:`ValidationError` with the row number.
    """
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("citation file is empty (missing header)") from None
    header = [h.strip() for h in header]
    if header[:2] != ["citing_id", "cited_id"]:
        raise ValidationError(f"citation header must start with citing_id,cited_id, got {header}")

    edges: list[CitationEdge] = []
    seen: set[CitationEdge] = set()
    duplicates = 0
    for row in reader:
        row_num = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < 2:
            raise ValidationError(f"row {row_num}: expected 2 columns, got {len(row)}")
        citing, cited = row[0].strip(), row[1].strip()
        if not citing or not cited:
            raise ValidationError(f"row {row_num}: empty edge endpoint")
        if citing == cited:
            raise ValidationError(f"self-citation edge rejected at row {row_num} ({citing})")
        edge = CitationEdge(citing, cited)
        if edge in seen:
            duplicates += 1
            continue
        seen.add(edge)
        edges.append(edge)
    return edges, duplicates


def build_corpus(
    pubs: Iterable[PublicationRecord],
    edges: Iterable[CitationEdge],
    policy: str = "reject",
    observed_until: datetime.date | None = None,
) -> CitationCorpus:
    """Assemble and validate the immutable corpus.

    ``policy`` controls dangling edge endpoints: ``reject`` raises naming
    the missing id, ``stub`` creates a synthetic record carrying the year
    and subject categories of the edge's known side. With ``observed_until``
    set, edges whose citing publication carries a later date are dropped
    (publications without a date always count).

    Edges are deduplicated, sorted, and counted into ``in_degree``; group
    member lists are sorted by id, so corpora built from the same content
    compare equal regardless of input order.
    """
    publications: dict[str, PublicationRecord] = {}
    for rec in pubs:
        if rec.id in publications:
            raise ValidationError(f"duplicate publication id {rec.id}")
        publications[rec.id] = rec
    if not publications:
        raise ValidationError("corpus requires at least one publication")
    if policy not in ("reject", "stub"):
        raise ValidationError(f"unknown dangling-endpoint policy {policy!r}")

    unique_edges: set[CitationEdge] = set()
    for edge in edges:
        if edge.citing_id == edge.cited_id:
            raise ValidationError(f"self-citation edge rejected ({edge.citing_id})")
        unique_edges.add(CitationEdge(edge.citing_id, edge.cited_id))

    # Stubbing runs to a fixed point so chains of unknown ids resolve as long
    # as each edge eventually touches a known publication.
    pending = sorted(unique_edges)
    while pending:
        unresolved: list[CitationEdge] = []
        progressed = False
        for edge in pending:
            unknown = [pid for pid in edge if pid not in publications]
            if not unknown:
                continue
            if policy == "reject":
                raise ValidationError(f"edge references unknown publication {unknown[0]}")
            if len(unknown) == 2:
                unresolved.append(edge)
                continue
            anchor = publications[edge.cited_id if unknown[0] == edge.citing_id else edge.citing_id]
            publications[unknown[0]] = PublicationRecord(
                unknown[0], anchor.year, anchor.subject_categories, synthetic=True
            )
            progressed = True
        if unresolved and not progressed:
            edge = unresolved[0]
            raise ValidationError(
                f"cannot stub edge ({edge.citing_id} -> {edge.cited_id}): both endpoints unknown"
            )
        pending = unresolved

    n_filtered = 0
    if observed_until is not None:
        kept: set[CitationEdge] = set()
        for edge in unique_edges:
            citing_date = publications[edge.citing_id].date
            if citing_date is not None and citing_date > observed_until:
                n_filtered += 1
            else:
                kept.add(edge)
        unique_edges = kept

    sorted_edges = tuple(sorted(unique_edges))
    in_degree = {pid: 0 for pid in publications}
    citers_acc: dict[str, list[str]] = {pid: [] for pid in publications}
    refs_acc: dict[str, list[str]] = {pid: [] for pid in publications}
    for citing, cited in sorted_edges:
        in_degree[cited] += 1
        citers_acc[cited].append(citing)
        refs_acc[citing].append(cited)

    groups_acc: dict[GroupKey, list[str]] = {}
    for rec in publications.values():
        for key in rec.group_keys():
            groups_acc.setdefault(key, []).append(rec.id)
    groups = {key: tuple(sorted(members)) for key, members in sorted(groups_acc.items())}

    return CitationCorpus(
        publications=publications,
        edges=sorted_edges,
        in_degree=in_degree,
        groups=groups,
        citers={pid: tuple(ids) for pid, ids in citers_acc.items()},
        references={pid: tuple(ids) for pid, ids in refs_acc.items()},
        n_window_filtered=n_filtered,
    )


def corpus_to_snapshot(corpus: CitationCorpus) -> dict:
    """Serialize the corpus to the snapshot document structure."""
    pubs = []
    for pid in sorted(corpus.publications):
        rec = corpus.publications[pid]
        entry: dict = {
            "id": rec.id,
            "year": rec.year,
            "subject_categories": list(rec.subject_categories),
        }
        if rec.doc_type is not None:
            entry["doc_type"] = rec.doc_type
        if rec.date is not None:
            entry["date"] = rec.date.isoformat()
        if rec.synthetic:
            entry["synthetic"] = True
        pubs.append(entry)
    return {
        "schema_version": SNAPSHOT_SCHEMA_VERSION,
        "publications": pubs,
        "edges": [[e.citing_id, e.cited_id] for e in corpus.edges],
    }


def snapshot_to_corpus(doc: dict) -> CitationCorpus:
    """Rebuild a corpus from a snapshot document (round-trip identity holds)."""
    version = doc.get("schema_version")
    if version != SNAPSHOT_SCHEMA_VERSION:
        raise ValidationError(f"unsupported snapshot schema_version {version!r}")
    records = []
    for entry in doc["publications"]:
        raw_date = entry.get("date")
        records.append(
            PublicationRecord(
                id=entry["id"],
                year=int(entry["year"]),
                subject_categories=tuple(entry["subject_categories"]),
                doc_type=entry.get("doc_type"),
                date=datetime.date.fromisoformat(raw_date) if raw_date else None,
                synthetic=bool(entry.get("synthetic", False)),
            )
        )
    edges = [CitationEdge(citing, cited) for citing, cited in doc["edges"]]
    return build_corpus(records, edges, policy="reject")


def write_snapshot(corpus: CitationCorpus, path: Path | str) -> None:
    doc = corpus_to_snapshot(corpus)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_snapshot(path: Path | str) -> CitationCorpus:
    with open(path, encoding="utf-8") as fh:
        return snapshot_to_corpus(json.load(fh))
