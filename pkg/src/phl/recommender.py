"""Context-aware recommendation engine.

A candidate pool (shipped as a fixture catalog) is safety-filtered against
the patient's context snapshot, narrowed by stated preferences, and one
composed recommendation per tick is pushed into the patient's diabetes
channel — provided the frequency gate for that focus is still open.

Safety rules are deny-safe: a missing walkability score counts as low, so
nothing that encourages walking escapes on absent data.  A missing heart
rate, by contrast, simply leaves the heart-rate rule unapplied; it is a
preference-side input, not a hard gate, and that asymmetry is deliberate:
walkability guards an *environmental* claim we cannot verify, while heart
rate guards exertion that other rules (comorbidity) still cover.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Iterable, Optional

from . import vocab
from .errors import FrequencyGateClosedError
from .ingest import ContextSnapshot, Preferences
from .rdf import Graph, Iri, Literal, Triple, serialize_turtle

FOCUS_VALUES = ("diet", "exercise", "medication-adherence")
FRAME_VALUES = ("educational", "motivational", "goal-based")
FREQUENCY_VALUES = ("daily", "weekly")
ACTIVITY_TAGS = ("walking", "running", "strenuous", "indoor", "none")
TEMPLATE_FIELDS = ("name", "zip", "walkability", "heart_rate", "focus", "steps")


@dataclass(frozen=True)
class Thresholds:
    walkability: float = 0.4
    heart_rate: float = 100.0


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class RecommendationCandidate:
    id: str
    focus: str
    frame: str
    activity_tags: frozenset
    body_template: str
    zip_scoped: bool = False
    languages: frozenset = frozenset()

    def validate(self) -> None:
        if self.focus not in FOCUS_VALUES:
            raise ValueError(f"{self.id}: unknown focus {self.focus!r}")
        if self.frame not in FRAME_VALUES:
            raise ValueError(f"{self.id}: unknown frame {self.frame!r}")
        unknown = self.activity_tags - set(ACTIVITY_TAGS)
        if unknown:
            raise ValueError(f"{self.id}: unknown activity tags {sorted(unknown)}")
        if "running" in self.activity_tags and "strenuous" not in self.activity_tags:
            raise ValueError(f"{self.id}: running implies strenuous")
        for _, fname, _, _ in string.Formatter().parse(self.body_template):
            if fname and fname not in TEMPLATE_FIELDS:
                raise ValueError(f"{self.id}: undeclared placeholder {{{fname}}}")


@dataclass(frozen=True)
class RecommendationDraft:
    candidate_id: str
    focus: str
    frame: str
    text: str
    justification: tuple  # rules the candidate was checked against and passed


@dataclass(frozen=True)
class ResourceSuggestion:
    name: str
    zip: str
    category: str  # clinic | program | transport
    languages: frozenset = frozenset()


def load_candidates(lines: Iterable[str]) -> list:
    pool = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        raw = json.loads(line)
        candidate = RecommendationCandidate(
            id=raw["id"],
            focus=raw["focus"],
            frame=raw["frame"],
            activity_tags=frozenset(raw.get("activity_tags", [])),
            body_template=raw.get("body_template", ""),
            zip_scoped=bool(raw.get("zip_scoped", False)),
            languages=frozenset(raw.get("languages", [])),
        )
        candidate.validate()
        pool.append(candidate)
    ids = [c.id for c in pool]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate candidate ids in catalog")
    return pool


def load_directory(lines: Iterable[str]) -> list:
    out = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        raw = json.loads(line)
        out.append(
            ResourceSuggestion(
                name=raw["name"],
                zip=str(raw["zip"]),
                category=raw["category"],
                languages=frozenset(raw.get("languages", [])),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------


def filter_candidates(
    pool: list,
    snapshot: ContextSnapshot,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
):
    """Apply safety rules then preference rules.

    Returns (survivors, applied, rejections): ``applied`` maps candidate id
    to the rules it was checked against and passed, ``rejections`` maps id
    to the rule that removed it.
    """
    prefs = snapshot.preferences
    hr = snapshot.latest_heart_rate
    walk_low = snapshot.walkability is None or snapshot.walkability < thresholds.walkability
    survivors = []
    applied: dict = {}
    rejections: dict = {}
    for candidate in pool:
        tags = candidate.activity_tags
        # (rule, inputs present, candidate fails it)
        rules = (
            ("R-walk", True, "walking" in tags and walk_low),
            (
                "R-asthma",
                True,
                "asthma" in snapshot.comorbidities
                and ("running" in tags or "strenuous" in tags),
            ),
            ("R-hr", hr is not None, hr is not None and hr > thresholds.heart_rate and "strenuous" in tags),
            ("R-focus", True, candidate.focus not in prefs.focus),
            ("R-frame", True, candidate.frame != prefs.frame),
        )
        verdict = next((name for name, present, fails in rules if present and fails), None)
        if verdict is None:
            survivors.append(candidate)
            applied[candidate.id] = tuple(name for name, present, _ in rules if present)
        else:
            rejections[candidate.id] = verdict
    return survivors, applied, rejections


# ---------------------------------------------------------------------------
# Selection and composition
# ---------------------------------------------------------------------------


def select_and_compose(
    survivors: list,
    snapshot: ContextSnapshot,
    seed: int,
    recent_counts: Optional[dict] = None,
    applied: Optional[dict] = None,
    patient_name: str = "",
) -> Optional[RecommendationDraft]:
    """Deterministic pick: rotate through the preferred focus values from a
    seed-chosen start, take the least-recently-sent candidate, ties by id."""
    if not survivors:
        return None
    recent_counts = recent_counts or {}
    applied = applied or {}
    focus_order = sorted(snapshot.preferences.focus)
    if not focus_order:
        focus_order = list(FOCUS_VALUES)
    start = seed % len(focus_order)
    rotation = focus_order[start:] + focus_order[:start]
    for focus in rotation:
        group = [c for c in survivors if c.focus == focus]
        if not group:
            continue
        chosen = min(group, key=lambda c: (recent_counts.get(c.id, 0), c.id))
        text = chosen.body_template.format(
            name=patient_name or snapshot.patient,
            zip=snapshot.zip,
            walkability="unknown" if snapshot.walkability is None else f"{snapshot.walkability:g}",
            heart_rate="unknown" if snapshot.latest_heart_rate is None else f"{snapshot.latest_heart_rate:g}",
            focus=chosen.focus,
            steps=f"{sum(snapshot.recent_step_counts):g}" if snapshot.recent_step_counts else "no",
        )
        return RecommendationDraft(
            candidate_id=chosen.id,
            focus=chosen.focus,
            frame=chosen.frame,
            text=text,
            justification=applied.get(chosen.id, ()),
        )
    return None


# ---------------------------------------------------------------------------
# Frequency gate and push
# ---------------------------------------------------------------------------


def window_key(frequency: str, moment: datetime) -> str:
    moment = moment.astimezone(timezone.utc)
    if frequency == "daily":
        return moment.strftime("%Y-%m-%d")
    iso = moment.isocalendar()
    return f"{iso[0]}-W{iso[1]:02d}"


def recommendation_graph(draft: RecommendationDraft, authority: str, issued_at: str) -> Graph:
    """RDF body for a pushed recommendation (relative subject)."""
    me = Iri("")
    triples = [
        Triple(me, Iri(vocab.TYPE), Iri(vocab.pod_type(authority, "Message"))),
        Triple(me, Iri(vocab.PHL_CANDIDATE), Literal(draft.candidate_id)),
        Triple(me, Iri(vocab.PHL_FOCUS), Literal(draft.focus)),
        Triple(me, Iri(vocab.PHL_FRAME), Literal(draft.frame)),
        Triple(me, Iri(vocab.OA_BODY_VALUE), Literal(draft.text)),
        Triple(me, Iri(vocab.PHL_ISSUED_AT), Literal(issued_at, vocab.XSD_DATETIME)),
    ]
    for rule in draft.justification:
        triples.append(Triple(me, Iri(vocab.PHL_JUSTIFICATION), Literal(rule)))
    return Graph(triples)


def existing_pushes(
    get_graph: Callable[[str], Graph], container_iri: str
) -> list:
    """(focus, issued-at, candidate-id) of every recommendation already in
    the container — the frequency ledger is the container itself."""
    from .ingest import _container_docs

    out = []
    for doc in _container_docs(get_graph, container_iri):
        subject = Iri(doc.base_iri)
        focus = doc.value(subject, vocab.PHL_FOCUS)
        issued = doc.value(subject, vocab.PHL_ISSUED_AT)
        candidate = doc.value(subject, vocab.PHL_CANDIDATE)
        if isinstance(focus, Literal) and isinstance(issued, Literal):
            out.append(
                (
                    focus.lexical,
                    issued.lexical,
                    candidate.lexical if isinstance(candidate, Literal) else "",
                )
            )
    return out


def check_frequency_gate(
    pushes: list, focus: str, frequency: str, now: datetime
) -> None:
    window = window_key(frequency, now)
    for push_focus, issued_at, _ in pushes:
        if push_focus != focus:
            continue
        try:
            moment = datetime.fromisoformat(issued_at.replace("Z", "+00:00"))
        except ValueError:
            continue
        if window_key(frequency, moment) == window:
            raise FrequencyGateClosedError(focus, window)


def recent_counts_from(pushes: list) -> dict:
    counts: dict = {}
    for _, _, candidate_id in pushes:
        if candidate_id:
            counts[candidate_id] = counts.get(candidate_id, 0) + 1
    return counts


@dataclass
class TickReport:
    outcome: str  # created | no-candidate | gate-closed
    detail: str = ""
    created_iri: str = ""
    candidate_id: str = ""
    rejections: dict = field(default_factory=dict)


def run_tick(
    client,
    patient: str,
    pool: list,
    seed: int,
    now: datetime,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
    patient_name: str = "",
) -> TickReport:
    """One recommender pass for one patient.

    ``client`` provides ``get_graph(iri)`` and ``create(container_iri,
    body, slug=None) -> iri``, both through the authorization path of
    whatever transport it wraps (in-process or HTTP).
    """
    from .ingest import snapshot_context
    from .store import ResourceId

    snapshot = snapshot_context(client.get_graph, patient)
    authority = ResourceId.from_iri(patient).authority
    container_iri = f"https://{authority}/data/diabetes/"

    survivors, applied, rejections = filter_candidates(pool, snapshot, thresholds)
    pushes = existing_pushes(client.get_graph, container_iri)
    draft = select_and_compose(
        survivors,
        snapshot,
        seed,
        recent_counts=recent_counts_from(pushes),
        applied=applied,
        patient_name=patient_name,
    )
    if draft is None:
        return TickReport("no-candidate", detail="pool empty after filtering", rejections=rejections)
    try:
        check_frequency_gate(pushes, draft.focus, snapshot.preferences.frequency, now)
    except FrequencyGateClosedError as exc:
        return TickReport("gate-closed", detail=str(exc), candidate_id=draft.candidate_id,
                          rejections=rejections)
    issued_at = now.astimezone(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")
    body = serialize_turtle(recommendation_graph(draft, authority, issued_at)).encode()
    created = client.create(container_iri, body)
    return TickReport(
        "created",
        detail=draft.text,
        created_iri=created,
        candidate_id=draft.candidate_id,
        rejections=rejections,
    )


# ---------------------------------------------------------------------------
# External resource suggestions
# ---------------------------------------------------------------------------


def suggest_resources(snapshot: ContextSnapshot, directory: list) -> list:
    """Entries in the patient's zip whose language services fit (or whose
    patient states no language preference), ordered by category then name."""
    wanted = snapshot.preferences.languages
    picked = [
        entry
        for entry in directory
        if entry.zip == snapshot.zip and (not wanted or entry.languages & wanted)
    ]
    return sorted(picked, key=lambda e: (e.category, e.name))
