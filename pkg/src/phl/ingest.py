"""Health-data ingestion and the context snapshot.

Registry records and ODL (observations of daily living) readings land in
the patient's pod as small typed RDF resources; SDoH (social determinants
of health) rows go to a shared reference pod keyed by zip code.  Resource
names come from a content hash, so re-ingesting the same file adds
nothing.

``snapshot_context`` reads everything back through an authorized
``get_graph`` capability — the recommender sees exactly what its agent
context is allowed to see, nothing more.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

from . import vocab
from .errors import FetchError, NotFoundError
from .rdf import Graph, Iri, Literal, Triple, serialize_turtle
from .store import PodStore, ResourceId

RECORD_TYPES = ("visit", "lab", "diagnosis", "medication")
DIAGNOSIS_CODES = (
    "diabetes",
    "asthma",
    "hypertension",
    "hyperlipidemia",
    "obesity",
    "depression",
)
ODL_METRICS = ("step_count", "heart_rate")
SDOH_AUTHORITY = "sdoh.uthsc.edu"

REGISTRY_PATH = ("data", "registry")
ODL_PATH = ("data", "odl")
SDOH_PATH = ("data", "sdoh")
PREFERENCES_PATH = ("settings", "preferences")


@dataclass(frozen=True)
class RegistryRecord:
    patient: str
    record_type: str
    code: str
    date: str
    value: Optional[str] = None


@dataclass(frozen=True)
class OdlReading:
    patient: str
    metric: str
    value: float
    timestamp: str


@dataclass(frozen=True)
class SdohRecord:
    zip: str
    walkability_score: float
    transit_access: bool
    language_services: frozenset = frozenset()


@dataclass
class IngestReport:
    added: int = 0
    skipped: int = 0
    errors: list = field(default_factory=list)  # (line number, message)

    def ok(self) -> bool:
        return not self.errors


def _content_name(prefix: str, payload: dict) -> str:
    digest = hashlib.sha256(
        json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return f"{prefix}-{digest[:12]}"


def _ensure_path(store: PodStore, authority: str, segments: tuple) -> ResourceId:
    rid = store.pod(authority).root_id
    for seg in segments:
        child = rid.child(seg, container=True)
        if not store.exists(child):
            store.create_container(rid, seg)
        rid = child
    return rid


# ---------------------------------------------------------------------------
# Parsers (one line -> record)
# ---------------------------------------------------------------------------


def parse_registry_line(line: str) -> RegistryRecord:
    raw = json.loads(line)
    record_type = raw.get("record_type", "")
    if record_type not in RECORD_TYPES:
        raise ValueError(f"unknown record_type {record_type!r}")
    code = str(raw.get("code", ""))
    if not code:
        raise ValueError("missing code")
    if record_type == "diagnosis" and code not in DIAGNOSIS_CODES:
        raise ValueError(f"diagnosis code {code!r} not in controlled list")
    patient = raw.get("patient", "")
    if not patient.startswith("http"):
        raise ValueError("patient must be a WebID")
    date = str(raw.get("date", ""))
    if len(date) < 10:
        raise ValueError("missing ISO date")
    value = raw.get("value")
    return RegistryRecord(patient, record_type, code, date, None if value is None else str(value))


def parse_odl_line(line: str) -> OdlReading:
    raw = json.loads(line)
    metric = raw.get("metric", "")
    if metric not in ODL_METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    value = float(raw.get("value"))
    if value < 0:
        raise ValueError("value must be non-negative")
    if metric == "heart_rate" and not (20 <= value <= 250):
        raise ValueError(f"heart rate {value} outside 20-250 bpm")
    patient = raw.get("patient", "")
    if not patient.startswith("http"):
        raise ValueError("patient must be a WebID")
    timestamp = str(raw.get("timestamp", ""))
    if "T" not in timestamp:
        raise ValueError("timestamp must be ISO-8601")
    return OdlReading(patient, metric, value, timestamp)


def parse_sdoh_row(row: dict) -> SdohRecord:
    zip_code = (row.get("zip") or "").strip()
    if not zip_code:
        raise ValueError("missing zip")
    walk = float(row.get("walkability_score"))
    if not (0.0 <= walk <= 1.0):
        raise ValueError(f"walkability {walk} outside [0,1]")
    transit = (row.get("transit_access") or "").strip().lower() in ("1", "true", "yes")
    langs = frozenset(
        tag.strip() for tag in (row.get("language_services") or "").split(";") if tag.strip()
    )
    return SdohRecord(zip_code, walk, transit, langs)


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


def ingest_registry(store: PodStore, authority: str, lines: Iterable[str]) -> IngestReport:
    container = _ensure_path(store, authority, REGISTRY_PATH)
    report = IngestReport()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = parse_registry_line(line)
        except (ValueError, json.JSONDecodeError) as exc:
            report.errors.append((lineno, str(exc)))
            continue
        name = _content_name(rec.record_type, rec.__dict__)
        rid = container.child(name)
        if store.exists(rid):
            report.skipped += 1
            continue
        triples = [
            Triple(Iri(""), Iri(vocab.TYPE), Iri(vocab.PHL_REGISTRY_RECORD)),
            Triple(Iri(""), Iri(vocab.PHL_PATIENT), Iri(rec.patient)),
            Triple(Iri(""), Iri(vocab.PHL_RECORD_TYPE), Literal(rec.record_type)),
            Triple(Iri(""), Iri(vocab.PHL_CODE), Literal(rec.code)),
            Triple(Iri(""), Iri(vocab.PHL_DATE), Literal(rec.date)),
        ]
        if rec.value is not None:
            triples.append(Triple(Iri(""), Iri(vocab.PHL_VALUE), Literal(rec.value)))
        store.create_resource(container, name, "rdf", serialize_turtle(Graph(triples)).encode())
        report.added += 1
    return report


def ingest_odl(store: PodStore, authority: str, lines: Iterable[str]) -> IngestReport:
    container = _ensure_path(store, authority, ODL_PATH)
    report = IngestReport()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            reading = parse_odl_line(line)
        except (ValueError, TypeError, json.JSONDecodeError) as exc:
            report.errors.append((lineno, str(exc)))
            continue
        name = _content_name(reading.metric, reading.__dict__)
        rid = container.child(name)
        if store.exists(rid):
            report.skipped += 1
            continue
        graph = Graph(
            [
                Triple(Iri(""), Iri(vocab.TYPE), Iri(vocab.PHL_ODL_READING)),
                Triple(Iri(""), Iri(vocab.PHL_PATIENT), Iri(reading.patient)),
                Triple(Iri(""), Iri(vocab.PHL_METRIC), Literal(reading.metric)),
                Triple(Iri(""), Iri(vocab.PHL_VALUE), Literal(_num(reading.value), vocab.XSD_DECIMAL)),
                Triple(Iri(""), Iri(vocab.PHL_TIMESTAMP), Literal(reading.timestamp, vocab.XSD_DATETIME)),
            ]
        )
        store.create_resource(container, name, "rdf", serialize_turtle(graph).encode())
        report.added += 1
    return report


def ingest_sdoh(store: PodStore, rows: Iterable[dict], authority: str = SDOH_AUTHORITY) -> IngestReport:
    container = _ensure_path(store, authority, SDOH_PATH)
    report = IngestReport()
    for lineno, row in enumerate(rows, start=2):  # header is line 1
        try:
            rec = parse_sdoh_row(row)
        except (ValueError, TypeError) as exc:
            report.errors.append((lineno, str(exc)))
            continue
        rid = container.child(rec.zip)
        graph = Graph(
            [
                Triple(Iri(""), Iri(vocab.TYPE), Iri(vocab.PHL_SDOH_RECORD)),
                Triple(Iri(""), Iri(vocab.PHL_ZIP), Literal(rec.zip)),
                Triple(Iri(""), Iri(vocab.PHL_WALKABILITY), Literal(_num(rec.walkability_score), vocab.XSD_DECIMAL)),
                Triple(Iri(""), Iri(vocab.PHL_TRANSIT), Literal("true" if rec.transit_access else "false", vocab.XSD_BOOLEAN)),
            ]
            + [Triple(Iri(""), Iri(vocab.PHL_LANGUAGE), Literal(tag)) for tag in sorted(rec.language_services)]
        )
        body = serialize_turtle(graph).encode()
        if store.exists(rid):
            if store.get_resource(rid).body == body:
                report.skipped += 1
                continue
            store.update_resource(rid, body)
            report.added += 1
            continue
        store.create_resource(container, rec.zip, "rdf", body)
        report.added += 1
    return report


def read_sdoh_csv(path) -> list:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def _num(value: float) -> str:
    text = f"{value:.6f}".rstrip("0").rstrip(".")
    return text if text else "0"


# ---------------------------------------------------------------------------
# Context snapshot
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Preferences:
    focus: frozenset = frozenset({"diet", "exercise", "medication-adherence"})
    frame: str = "motivational"
    frequency: str = "weekly"
    languages: frozenset = frozenset()


DEFAULT_PREFERENCES = Preferences()


@dataclass(frozen=True)
class ContextSnapshot:
    patient: str
    comorbidities: frozenset = frozenset()
    latest_heart_rate: Optional[float] = None
    recent_step_counts: tuple = ()
    walkability: Optional[float] = None
    transit: Optional[bool] = None
    zip: str = ""
    preferences: Preferences = DEFAULT_PREFERENCES


def snapshot_context(
    get_graph: Callable[[str], Graph],
    patient: str,
    sdoh_authority: str = SDOH_AUTHORITY,
) -> ContextSnapshot:
    """Assemble the recommender's view of one patient.

    ``get_graph`` must perform an authorized dereference; authorization
    failures propagate so a denied agent cannot snapshot anything.  Absent
    data stays absent — no field is ever defaulted to a safe-looking value.
    """
    authority = ResourceId.from_iri(patient).authority
    profile = get_graph(patient.split("#", 1)[0])
    zip_term = profile.value(Iri(patient), vocab.PHL_ZIP)
    zip_code = zip_term.lexical if isinstance(zip_term, Literal) else ""

    comorbidities = set()
    for doc in _container_docs(get_graph, f"https://{authority}/data/registry/"):
        kind = doc.value(Iri(doc.base_iri), vocab.PHL_RECORD_TYPE)
        if isinstance(kind, Literal) and kind.lexical == "diagnosis":
            code = doc.value(Iri(doc.base_iri), vocab.PHL_CODE)
            if isinstance(code, Literal):
                comorbidities.add(code.lexical)

    latest_hr: Optional[tuple] = None  # (timestamp, value)
    steps = []
    for doc in _container_docs(get_graph, f"https://{authority}/data/odl/"):
        metric = doc.value(Iri(doc.base_iri), vocab.PHL_METRIC)
        value = doc.value(Iri(doc.base_iri), vocab.PHL_VALUE)
        stamp = doc.value(Iri(doc.base_iri), vocab.PHL_TIMESTAMP)
        if not isinstance(metric, Literal) or not isinstance(value, Literal):
            continue
        stamp_text = stamp.lexical if isinstance(stamp, Literal) else ""
        number = float(value.lexical)
        if metric.lexical == "heart_rate":
            key = (stamp_text, number)
            if latest_hr is None or key > latest_hr:
                latest_hr = key
        elif metric.lexical == "step_count":
            steps.append((stamp_text, number))

    walkability = transit = None
    if zip_code:
        try:
            sdoh = get_graph(f"https://{sdoh_authority}/data/sdoh/{zip_code}")
        except (FetchError, NotFoundError):
            sdoh = None
        if sdoh is not None:
            walk_term = sdoh.value(Iri(sdoh.base_iri), vocab.PHL_WALKABILITY)
            if isinstance(walk_term, Literal):
                walkability = float(walk_term.lexical)
            transit_term = sdoh.value(Iri(sdoh.base_iri), vocab.PHL_TRANSIT)
            if isinstance(transit_term, Literal):
                transit = transit_term.lexical == "true"

    return ContextSnapshot(
        patient=patient,
        comorbidities=frozenset(comorbidities),
        latest_heart_rate=latest_hr[1] if latest_hr else None,
        recent_step_counts=tuple(v for _, v in sorted(steps)),
        walkability=walkability,
        transit=transit,
        zip=zip_code,
        preferences=load_preferences(get_graph, authority),
    )


def load_preferences(get_graph: Callable[[str], Graph], authority: str) -> Preferences:
    iri = f"https://{authority}/settings/preferences"
    try:
        graph = get_graph(iri)
    except (FetchError, NotFoundError):
        return DEFAULT_PREFERENCES
    subject = Iri(graph.base_iri or iri)
    focus = frozenset(
        o.lexical for o in graph.objects(subject, vocab.PHL_FOCUS) if isinstance(o, Literal)
    )
    frame_term = graph.value(subject, vocab.PHL_FRAME)
    freq_term = graph.value(subject, vocab.PHL_FREQUENCY)
    languages = frozenset(
        o.lexical for o in graph.objects(subject, vocab.PHL_LANGUAGE) if isinstance(o, Literal)
    )
    return Preferences(
        focus=focus or DEFAULT_PREFERENCES.focus,
        frame=frame_term.lexical if isinstance(frame_term, Literal) else DEFAULT_PREFERENCES.frame,
        frequency=freq_term.lexical if isinstance(freq_term, Literal) else DEFAULT_PREFERENCES.frequency,
        languages=languages,
    )


def preferences_graph(authority: str, prefs: Preferences) -> Graph:
    subject = Iri(f"https://{authority}/settings/preferences")
    triples = [Triple(subject, Iri(vocab.PHL_FRAME), Literal(prefs.frame)),
               Triple(subject, Iri(vocab.PHL_FREQUENCY), Literal(prefs.frequency))]
    for f in sorted(prefs.focus):
        triples.append(Triple(subject, Iri(vocab.PHL_FOCUS), Literal(f)))
    for lang in sorted(prefs.languages):
        triples.append(Triple(subject, Iri(vocab.PHL_LANGUAGE), Literal(lang)))
    return Graph(triples, subject.value)


def _container_docs(get_graph: Callable[[str], Graph], container_iri: str) -> list:
    """Dereference each child of a container, skipping unreachable ones."""
    try:
        listing = get_graph(container_iri)
    except (FetchError, NotFoundError):
        return []
    docs = []
    subject_variants = {container_iri, container_iri.rstrip("/")}
    for triple in listing:
        if triple.predicate.value != vocab.LDP_CONTAINS:
            continue
        if getattr(triple.subject, "value", None) not in subject_variants:
            continue
        if not isinstance(triple.object, Iri):
            continue
        try:
            docs.append(get_graph(triple.object.value))
        except (FetchError, NotFoundError):
            continue
    return sorted(docs, key=lambda g: g.base_iri or "")
