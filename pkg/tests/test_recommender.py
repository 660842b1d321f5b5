"""Recommender: catalog loading, safety/preference filtering, selection,
frequency windows, and full ticks against an in-memory pod double."""

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phl import vocab
from phl.errors import FrequencyGateClosedError, NotFoundError
from phl.ingest import ContextSnapshot, Preferences, preferences_graph
from phl.rdf import Graph, Iri, Literal, Triple, parse_turtle
from phl.recommender import (
    FOCUS_VALUES,
    FRAME_VALUES,
    RecommendationCandidate,
    Thresholds,
    check_frequency_gate,
    existing_pushes,
    filter_candidates,
    load_candidates,
    load_directory,
    recent_counts_from,
    recommendation_graph,
    recent_counts_from as _recent_counts_from,  # noqa: F401  (re-export sanity)
    run_tick,
    select_and_compose,
    suggest_resources,
    window_key,
)

PATIENT = "https://pat.example/profile/card#me"
AUTHORITY = "pat.example"
DIABETES = f"https://{AUTHORITY}/data/diabetes/"
NOW = datetime(2026, 8, 25, 12, 0, 0, tzinfo=timezone.utc)


@pytest.fixture(scope="module")
def pool(request):
    path = request.config.rootpath / "fixtures" / "recommender" / "candidates.jsonl"
    return load_candidates(path.read_text().splitlines())


@pytest.fixture(scope="module")
def directory(request):
    path = request.config.rootpath / "fixtures" / "recommender" / "directory.jsonl"
    return load_directory(path.read_text().splitlines())


def snap(**kw) -> ContextSnapshot:
    kw.setdefault("patient", PATIENT)
    kw.setdefault("zip", "38103")
    return ContextSnapshot(**kw)


def candidate(id="c-test", focus="diet", frame="motivational", tags=(), template="x") -> RecommendationCandidate:
    c = RecommendationCandidate(
        id=id, focus=focus, frame=frame,
        activity_tags=frozenset(tags), body_template=template,
    )
    c.validate()
    return c


# ---------------------------------------------------------------------------
# Catalog loading
# ---------------------------------------------------------------------------


def test_fixture_catalog_loads(pool):
    assert len(pool) == 14
    assert len({c.id for c in pool}) == 14
    assert {c.focus for c in pool} == set(FOCUS_VALUES)
    assert {c.frame for c in pool} <= set(FRAME_VALUES)


def test_blank_lines_skipped():
    lines = ['{"id": "a", "focus": "diet", "frame": "educational"}', "", "   "]
    assert [c.id for c in load_candidates(lines)] == ["a"]


def test_duplicate_ids_rejected():
    line = '{"id": "a", "focus": "diet", "frame": "educational"}'
    with pytest.raises(ValueError, match="duplicate"):
        load_candidates([line, line])


@pytest.mark.parametrize(
    "raw, complaint",
    [
        ('{"id": "x", "focus": "sleep", "frame": "educational"}', "focus"),
        ('{"id": "x", "focus": "diet", "frame": "scary"}', "frame"),
        ('{"id": "x", "focus": "diet", "frame": "educational", "activity_tags": ["surfing"]}', "tags"),
        ('{"id": "x", "focus": "diet", "frame": "educational", "activity_tags": ["running"]}', "strenuous"),
        ('{"id": "x", "focus": "diet", "frame": "educational", "body_template": "hello {weight}"}', "placeholder"),
    ],
)
def test_invalid_candidates_rejected(raw, complaint):
    with pytest.raises(ValueError, match=complaint):
        load_candidates([raw])


def test_directory_fixture(directory):
    assert len(directory) == 5
    assert all(isinstance(e.zip, str) for e in directory)
    assert {e.category for e in directory} == {"clinic", "program", "transport"}


# ---------------------------------------------------------------------------
# Safety and preference filtering
# ---------------------------------------------------------------------------


def test_low_walkability_rejects_walking(pool):
    s = snap(walkability=0.3)
    _, _, rejections = filter_candidates(pool, s)
    assert rejections["c-walk-park"] == "R-walk"
    assert rejections["c-steps-edu"] == "R-walk"


def test_missing_walkability_counts_as_low(pool):
    """Deny-safe: no score at all must behave like a bad score."""
    _, _, rejections = filter_candidates(pool, snap(walkability=None))
    assert rejections["c-walk-park"] == "R-walk"


def test_good_walkability_keeps_walking(pool):
    survivors, applied, _ = filter_candidates(pool, snap(walkability=0.8))
    ids = {c.id for c in survivors}
    assert "c-walk-park" in ids
    assert "R-walk" in applied["c-walk-park"]


def test_walkability_threshold_is_strict(pool):
    # exactly at the threshold is acceptable; only below is low
    survivors, _, _ = filter_candidates(pool, snap(walkability=0.4))
    assert "c-walk-park" in {c.id for c in survivors}
    _, _, rejections = filter_candidates(pool, snap(walkability=0.3999))
    assert rejections["c-walk-park"] == "R-walk"


def test_asthma_rejects_running_and_strenuous(pool):
    s = snap(walkability=0.8, comorbidities=frozenset({"asthma", "diabetes"}))
    survivors, _, rejections = filter_candidates(pool, s)
    assert rejections["c-run-5k"] == "R-asthma"
    assert rejections["c-pool-laps"] == "R-asthma"
    assert rejections["c-hiit-edu"] == "R-asthma"
    assert "c-walk-park" in {c.id for c in survivors}  # walking itself is fine


def test_high_heart_rate_rejects_strenuous(pool):
    s = snap(walkability=0.8, latest_heart_rate=120.0)
    survivors, _, rejections = filter_candidates(pool, s)
    assert rejections["c-run-5k"] == "R-hr"
    assert rejections["c-pool-laps"] == "R-hr"
    assert "c-walk-park" in {c.id for c in survivors}
    assert "c-indoor-yoga" in {c.id for c in survivors}


def test_missing_heart_rate_leaves_rule_unapplied(pool):
    """No reading means the rule neither fires nor appears in the audit
    trail; the exertion risk is covered by the comorbidity rule instead."""
    s = snap(walkability=0.8, latest_heart_rate=None)
    survivors, applied, _ = filter_candidates(pool, s)
    assert "c-run-5k" in {c.id for c in survivors}
    assert "R-hr" not in applied["c-run-5k"]
    assert "R-asthma" in applied["c-run-5k"]


def test_heart_rate_at_threshold_passes(pool):
    survivors, applied, _ = filter_candidates(pool, snap(walkability=0.8, latest_heart_rate=100.0))
    assert "c-pool-laps" in {c.id for c in survivors}
    assert "R-hr" in applied["c-pool-laps"]


def test_focus_preference_prunes(pool):
    s = snap(walkability=0.8, preferences=Preferences(focus=frozenset({"diet"})))
    survivors, _, rejections = filter_candidates(pool, s)
    assert {c.focus for c in survivors} == {"diet"}
    assert rejections["c-med-evening"] == "R-focus"
    assert rejections["c-indoor-yoga"] == "R-focus"


def test_frame_preference_prunes(pool):
    s = snap(walkability=0.8, preferences=Preferences(frame="educational"))
    survivors, _, rejections = filter_candidates(pool, s)
    assert {c.frame for c in survivors} == {"educational"}
    assert rejections["c-plate"] == "R-frame"


def test_safety_outranks_preferences(pool):
    # a candidate failing both a safety rule and a preference is charged
    # to the safety rule
    s = snap(walkability=0.1, preferences=Preferences(frame="educational"))
    _, _, rejections = filter_candidates(pool, s)
    assert rejections["c-walk-park"] == "R-walk"  # not R-frame


def test_filter_partitions_pool(pool):
    s = snap(walkability=0.5, latest_heart_rate=110.0,
             comorbidities=frozenset({"asthma"}))
    survivors, applied, rejections = filter_candidates(pool, s)
    ids = {c.id for c in survivors}
    assert ids == set(applied)
    assert not ids & set(rejections)
    assert ids | set(rejections) == {c.id for c in pool}


def test_custom_thresholds():
    walker = candidate(id="w", focus="exercise", tags=("walking",))
    t = Thresholds(walkability=0.9, heart_rate=60.0)
    s = snap(walkability=0.8, latest_heart_rate=70.0,
             preferences=Preferences(focus=frozenset({"exercise"})))
    _, _, rejections = filter_candidates([walker], s, t)
    assert rejections == {"w": "R-walk"}
    sprinter = candidate(id="r", focus="exercise", tags=("running", "strenuous"))
    _, _, rejections = filter_candidates([sprinter], s, t)
    assert rejections == {"r": "R-hr"}


# ---------------------------------------------------------------------------
# Selection and composition
# ---------------------------------------------------------------------------


def test_empty_pool_selects_nothing():
    assert select_and_compose([], snap(), seed=3) is None


def test_selection_is_deterministic(pool):
    s = snap(walkability=0.8)
    survivors, applied, _ = filter_candidates(pool, s)
    a = select_and_compose(survivors, s, seed=7, applied=applied)
    b = select_and_compose(survivors, s, seed=7, applied=applied)
    assert a == b


def test_seed_rotates_focus_start():
    s = snap(preferences=Preferences(focus=frozenset({"diet", "exercise"})))
    survivors = [
        candidate(id="d1", focus="diet"),
        candidate(id="e1", focus="exercise"),
    ]
    assert select_and_compose(survivors, s, seed=0).focus == "diet"
    assert select_and_compose(survivors, s, seed=1).focus == "exercise"
    assert select_and_compose(survivors, s, seed=2).focus == "diet"


def test_rotation_skips_focus_without_survivors():
    s = snap(preferences=Preferences(focus=frozenset({"diet", "exercise"})))
    survivors = [candidate(id="e1", focus="exercise")]
    assert select_and_compose(survivors, s, seed=0).candidate_id == "e1"


def test_least_recently_sent_wins_then_id():
    s = snap(preferences=Preferences(focus=frozenset({"diet"})))
    survivors = [candidate(id="c-b", focus="diet"), candidate(id="c-a", focus="diet")]
    fresh = select_and_compose(survivors, s, seed=0)
    assert fresh.candidate_id == "c-a"  # tie on counts, id breaks it
    worn = select_and_compose(survivors, s, seed=0, recent_counts={"c-a": 2})
    assert worn.candidate_id == "c-b"


def test_template_interpolation_with_data():
    c = candidate(
        id="c-full", focus="diet",
        template="Hi {name}: zip {zip}, walk {walkability}, hr {heart_rate}, {focus}, {steps} steps",
    )
    s = snap(
        walkability=0.5,
        latest_heart_rate=88.0,
        recent_step_counts=(4200.0, 5100.0),
        preferences=Preferences(focus=frozenset({"diet"})),
    )
    draft = select_and_compose([c], s, seed=0, patient_name="Bob")
    assert draft.text == "Hi Bob: zip 38103, walk 0.5, hr 88, diet, 9300 steps"


def test_template_absent_context_reads_honestly():
    c = candidate(id="c-gaps", focus="diet", template="{walkability}/{heart_rate}/{steps}")
    s = snap(preferences=Preferences(focus=frozenset({"diet"})))
    draft = select_and_compose([c], s, seed=0)
    assert draft.text == "unknown/unknown/no"


def test_patient_name_falls_back_to_webid():
    c = candidate(id="c-n", focus="diet", template="{name}")
    draft = select_and_compose([c], snap(), seed=0)
    assert draft.text == PATIENT


def test_empty_focus_preference_rotates_all_values():
    s = snap(preferences=Preferences(focus=frozenset()))
    survivors = [candidate(id="m1", focus="medication-adherence")]
    draft = select_and_compose(survivors, s, seed=0)
    assert draft.candidate_id == "m1"


def test_justification_comes_from_applied_map():
    c = candidate(id="c-j", focus="diet")
    draft = select_and_compose([c], snap(), seed=0, applied={"c-j": ("R-walk", "R-frame")})
    assert draft.justification == ("R-walk", "R-frame")
    bare = select_and_compose([c], snap(), seed=0)
    assert bare.justification == ()


# ---------------------------------------------------------------------------
# Frequency windows
# ---------------------------------------------------------------------------


def test_daily_window_key():
    assert window_key("daily", NOW) == "2026-08-25"


def test_weekly_window_key():
    assert window_key("weekly", NOW) == "2026-W35"


def test_weekly_window_rolls_on_monday():
    sunday = datetime(2026, 8, 30, 23, 0, tzinfo=timezone.utc)
    monday = datetime(2026, 8, 31, 1, 0, tzinfo=timezone.utc)
    assert window_key("weekly", sunday) == "2026-W35"
    assert window_key("weekly", monday) == "2026-W36"


def test_window_key_normalizes_to_utc():
    late = datetime(2026, 8, 25, 23, 30, tzinfo=timezone(timedelta(hours=-2)))
    assert window_key("daily", late) == "2026-08-26"


def test_weekly_key_near_new_year():
    assert window_key("weekly", datetime(2026, 1, 1, 6, 0, tzinfo=timezone.utc)) == "2026-W01"


# ---------------------------------------------------------------------------
# Push ledger and gate
# ---------------------------------------------------------------------------


def _push_doc(iri: str, focus: str, issued: str, cand: str = "c-x") -> Graph:
    subject = Iri(iri)
    return Graph(
        [
            Triple(subject, Iri(vocab.PHL_FOCUS), Literal(focus)),
            Triple(subject, Iri(vocab.PHL_ISSUED_AT), Literal(issued, vocab.XSD_DATETIME)),
            Triple(subject, Iri(vocab.PHL_CANDIDATE), Literal(cand)),
        ],
        iri,
    )


def test_existing_pushes_reads_container_children():
    one = DIABETES + "1"
    two = DIABETES + "2"
    graphs = {
        DIABETES: Graph(
            [
                Triple(Iri(DIABETES), Iri(vocab.LDP_CONTAINS), Iri(one)),
                Triple(Iri(DIABETES), Iri(vocab.LDP_CONTAINS), Iri(two)),
            ],
            DIABETES,
        ),
        one: _push_doc(one, "diet", "2026-08-20T09:00:00Z", "c-plate"),
        two: _push_doc(two, "exercise", "2026-08-24T09:00:00Z", "c-walk-park"),
    }

    def get_graph(iri):
        if iri not in graphs:
            raise NotFoundError(iri)
        return graphs[iri]

    pushes = existing_pushes(get_graph, DIABETES)
    assert sorted(pushes) == [
        ("diet", "2026-08-20T09:00:00Z", "c-plate"),
        ("exercise", "2026-08-24T09:00:00Z", "c-walk-park"),
    ]
    assert existing_pushes(get_graph, "https://pat.example/empty/") == []


def test_existing_pushes_skips_incomplete_documents():
    one = DIABETES + "1"
    graphs = {
        DIABETES: Graph([Triple(Iri(DIABETES), Iri(vocab.LDP_CONTAINS), Iri(one))], DIABETES),
        one: Graph([Triple(Iri(one), Iri(vocab.PHL_FOCUS), Literal("diet"))], one),
    }
    assert existing_pushes(lambda i: graphs[i], DIABETES) == []


def test_recent_counts():
    pushes = [
        ("diet", "t1", "c-plate"),
        ("diet", "t2", "c-plate"),
        ("exercise", "t3", "c-walk-park"),
        ("diet", "t4", ""),  # candidate unknown: counted nowhere
    ]
    assert recent_counts_from(pushes) == {"c-plate": 2, "c-walk-park": 1}


def test_gate_closed_for_same_focus_same_window():
    pushes = [("exercise", "2026-08-24T09:00:00Z", "c-x")]  # Monday of W35
    with pytest.raises(FrequencyGateClosedError) as err:
        check_frequency_gate(pushes, "exercise", "weekly", NOW)
    assert err.value.focus == "exercise"
    assert err.value.window == "2026-W35"


def test_gate_open_for_other_focus_or_window():
    pushes = [("exercise", "2026-08-24T09:00:00Z", "c-x")]
    check_frequency_gate(pushes, "diet", "weekly", NOW)
    check_frequency_gate(pushes, "exercise", "weekly", NOW + timedelta(days=7))
    check_frequency_gate([("exercise", "2026-08-24T09:00:00Z", "c-x")], "exercise", "daily", NOW)


def test_gate_ignores_malformed_timestamps():
    check_frequency_gate([("exercise", "whenever", "c-x")], "exercise", "weekly", NOW)


def test_recommendation_graph_shape():
    from phl.recommender import RecommendationDraft

    draft = RecommendationDraft(
        candidate_id="c-plate", focus="diet", frame="motivational",
        text="eat greens", justification=("R-walk", "R-focus"),
    )
    graph = recommendation_graph(draft, AUTHORITY, "2026-08-25T12:00:00Z")
    me = Iri("")
    assert graph.value(me, vocab.TYPE) == Iri(f"https://{AUTHORITY}/ns/type#Message")
    assert graph.value(me, vocab.PHL_CANDIDATE) == Literal("c-plate")
    assert graph.value(me, vocab.PHL_FOCUS) == Literal("diet")
    assert graph.value(me, vocab.PHL_FRAME) == Literal("motivational")
    assert graph.value(me, vocab.OA_BODY_VALUE) == Literal("eat greens")
    assert graph.value(me, vocab.PHL_ISSUED_AT) == Literal(
        "2026-08-25T12:00:00Z", vocab.XSD_DATETIME
    )
    rules = {o.lexical for o in graph.objects(me, vocab.PHL_JUSTIFICATION)}
    assert rules == {"R-walk", "R-focus"}


# ---------------------------------------------------------------------------
# Full ticks against an in-memory pod double
# ---------------------------------------------------------------------------


class FakePod:
    """Just enough of the client surface for a tick: graphs by IRI plus a
    container that grows when the recommender creates into it."""

    def __init__(self):
        self.graphs: dict = {}
        self.children: dict = {}
        self.created: list = []
        self._n = 0

    def add(self, graph: Graph) -> None:
        self.graphs[graph.base_iri] = graph

    def add_child(self, container: str, graph: Graph) -> None:
        self.add(graph)
        self.children.setdefault(container, []).append(graph.base_iri)
        self._relist(container)

    def _relist(self, container: str) -> None:
        triples = [
            Triple(Iri(container), Iri(vocab.LDP_CONTAINS), Iri(child))
            for child in self.children.get(container, [])
        ]
        self.graphs[container] = Graph(triples, container)

    def get_graph(self, iri: str) -> Graph:
        if iri not in self.graphs:
            raise NotFoundError(iri)
        return self.graphs[iri]

    def create(self, container_iri: str, body: bytes, slug=None) -> str:
        self._n += 1
        iri = container_iri + (slug or f"rec-{self._n}")
        self.add_child(container_iri, parse_turtle(body.decode(), base=iri))
        self.created.append((container_iri, iri))
        return iri


def make_pod(
    zip_code="38103",
    walkability=None,
    heart_rate=None,
    diagnoses=(),
    prefs=None,
) -> FakePod:
    pod = FakePod()
    card = f"https://{AUTHORITY}/profile/card"
    pod.add(Graph([Triple(Iri(PATIENT), Iri(vocab.PHL_ZIP), Literal(zip_code))], card))
    pod.graphs[DIABETES] = Graph([], DIABETES)
    if walkability is not None:
        sdoh = f"https://sdoh.uthsc.edu/data/sdoh/{zip_code}"
        pod.add(
            Graph(
                [Triple(Iri(sdoh), Iri(vocab.PHL_WALKABILITY), Literal(str(walkability), vocab.XSD_DECIMAL))],
                sdoh,
            )
        )
    registry = f"https://{AUTHORITY}/data/registry/"
    for i, code in enumerate(diagnoses):
        iri = registry + f"dx-{i}"
        pod.add_child(
            registry,
            Graph(
                [
                    Triple(Iri(iri), Iri(vocab.PHL_RECORD_TYPE), Literal("diagnosis")),
                    Triple(Iri(iri), Iri(vocab.PHL_CODE), Literal(code)),
                ],
                iri,
            ),
        )
    if heart_rate is not None:
        odl = f"https://{AUTHORITY}/data/odl/"
        iri = odl + "hr-1"
        pod.add_child(
            odl,
            Graph(
                [
                    Triple(Iri(iri), Iri(vocab.PHL_METRIC), Literal("heart_rate")),
                    Triple(Iri(iri), Iri(vocab.PHL_VALUE), Literal(str(heart_rate), vocab.XSD_DECIMAL)),
                    Triple(Iri(iri), Iri(vocab.PHL_TIMESTAMP), Literal("2026-08-20T10:00:00Z", vocab.XSD_DATETIME)),
                ],
                iri,
            ),
        )
    if prefs is not None:
        pod.add(preferences_graph(AUTHORITY, prefs))
    return pod


EXERCISE_PREFS = Preferences(focus=frozenset({"exercise"}), frame="motivational")


def test_tick_creates_and_reports(pool):
    pod = make_pod(walkability=0.75, prefs=EXERCISE_PREFS)
    report = run_tick(pod, PATIENT, pool, seed=0, now=NOW, patient_name="Pat")
    assert report.outcome == "created"
    assert report.candidate_id == "c-indoor-yoga"  # alphabetically first unsent
    assert report.created_iri.startswith(DIABETES)
    assert pod.created == [(DIABETES, report.created_iri)]
    stored = pod.get_graph(report.created_iri)
    me = Iri(report.created_iri)
    assert stored.value(me, vocab.PHL_CANDIDATE) == Literal("c-indoor-yoga")
    assert stored.value(me, vocab.PHL_ISSUED_AT) == Literal(
        "2026-08-25T12:00:00Z", vocab.XSD_DATETIME
    )
    assert "Pat" in report.detail


def test_second_tick_same_week_hits_gate(pool):
    pod = make_pod(walkability=0.75, prefs=EXERCISE_PREFS)
    first = run_tick(pod, PATIENT, pool, seed=0, now=NOW)
    again = run_tick(pod, PATIENT, pool, seed=0, now=NOW + timedelta(days=2))
    assert first.outcome == "created"
    assert again.outcome == "gate-closed"
    assert "2026-W35" in again.detail
    assert len(pod.created) == 1


def test_daily_frequency_rotates_candidates(pool):
    prefs = Preferences(focus=frozenset({"exercise"}), frame="motivational", frequency="daily")
    pod = make_pod(walkability=0.75, prefs=prefs)
    seen = []
    for day in range(4):
        report = run_tick(pod, PATIENT, pool, seed=0, now=NOW + timedelta(days=day))
        assert report.outcome == "created"
        seen.append(report.candidate_id)
    # least-recently-sent rotation covers the whole surviving group
    assert sorted(seen) == ["c-indoor-yoga", "c-pool-laps", "c-run-5k", "c-walk-park"]
    same_day = run_tick(pod, PATIENT, pool, seed=0, now=NOW + timedelta(days=3))
    assert same_day.outcome == "gate-closed"


def test_tick_respects_safety_from_ingested_context(pool):
    pod = make_pod(walkability=0.75, heart_rate=130, diagnoses=("asthma",), prefs=EXERCISE_PREFS)
    report = run_tick(pod, PATIENT, pool, seed=0, now=NOW)
    assert report.outcome == "created"
    assert report.candidate_id == "c-indoor-yoga"
    assert report.rejections["c-run-5k"] == "R-asthma"
    assert report.rejections["c-pool-laps"] == "R-asthma"


def test_tick_with_nothing_left_reports_rejections(pool):
    prefs = Preferences(focus=frozenset({"exercise"}), frame="educational")
    pod = make_pod(walkability=0.1, diagnoses=("asthma",), prefs=prefs)
    report = run_tick(pod, PATIENT, pool, seed=0, now=NOW)
    assert report.outcome == "no-candidate"
    assert report.created_iri == ""
    assert pod.created == []
    assert set(report.rejections) == {c.id for c in pool}
    assert report.rejections["c-steps-edu"] == "R-walk"
    assert report.rejections["c-hiit-edu"] == "R-asthma"
    assert report.rejections["c-indoor-yoga"] == "R-frame"
    assert report.rejections["c-plate"] == "R-focus"


def test_tick_denies_walking_when_no_sdoh_coverage(pool):
    pod = make_pod(walkability=None, prefs=EXERCISE_PREFS)
    report = run_tick(pod, PATIENT, pool, seed=0, now=NOW)
    assert report.rejections["c-walk-park"] == "R-walk"


def test_tick_default_preferences_cover_all_focus_values(pool):
    pod = make_pod(walkability=0.75)  # no preferences doc at all
    report = run_tick(pod, PATIENT, pool, seed=0, now=NOW)
    assert report.outcome == "created"
    assert report.candidate_id is not None


# ---------------------------------------------------------------------------
# External resource suggestions
# ---------------------------------------------------------------------------


def test_suggestions_filter_by_zip_and_sort(directory):
    s = snap(zip="38103")
    names = [e.name for e in suggest_resources(s, directory)]
    assert names == [
        "Downtown Diabetes Clinic",   # clinic
        "Riverside Walking Group",    # program
        "MATA Route Planner Desk",    # transport
    ]


def test_suggestions_respect_language_preference(directory):
    s = snap(zip="38103", preferences=Preferences(languages=frozenset({"es"})))
    names = {e.name for e in suggest_resources(s, directory)}
    assert names == {"Downtown Diabetes Clinic", "MATA Route Planner Desk"}
    none = suggest_resources(
        snap(zip="38103", preferences=Preferences(languages=frozenset({"zh"}))), directory
    )
    assert none == []


def test_suggestions_other_zip(directory):
    s = snap(zip="38104")
    assert [e.name for e in suggest_resources(s, directory)] == ["Midtown Peer Support Circle"]
    assert suggest_resources(snap(zip="99999"), directory) == []


# ---------------------------------------------------------------------------
# Safety never leaks, whatever the context looks like
# ---------------------------------------------------------------------------

snapshots = st.builds(
    ContextSnapshot,
    patient=st.just(PATIENT),
    comorbidities=st.frozensets(
        st.sampled_from(["asthma", "diabetes", "hypertension"]), max_size=2
    ),
    latest_heart_rate=st.one_of(
        st.none(), st.floats(min_value=40, max_value=200, allow_nan=False)
    ),
    recent_step_counts=st.just(()),
    walkability=st.one_of(st.none(), st.floats(min_value=0, max_value=1, allow_nan=False)),
    transit=st.none(),
    zip=st.just("38103"),
    preferences=st.builds(
        Preferences,
        focus=st.frozensets(st.sampled_from(FOCUS_VALUES), min_size=1),
        frame=st.sampled_from(FRAME_VALUES),
        frequency=st.sampled_from(("daily", "weekly")),
        languages=st.just(frozenset()),
    ),
)


@settings(max_examples=150, deadline=None)
@given(snapshot=snapshots, seed=st.integers(min_value=0, max_value=1000), data=st.data())
def test_no_unsafe_candidate_survives(pool, snapshot, seed, data):
    subset = data.draw(st.lists(st.sampled_from(pool), max_size=14, unique=True))
    survivors, applied, rejections = filter_candidates(subset, snapshot)
    assert {c.id for c in survivors} | set(rejections) == {c.id for c in subset}
    walk_low = snapshot.walkability is None or snapshot.walkability < 0.4
    for c in survivors:
        if walk_low:
            assert "walking" not in c.activity_tags
        if "asthma" in snapshot.comorbidities:
            assert not c.activity_tags & {"running", "strenuous"}
        if snapshot.latest_heart_rate is not None and snapshot.latest_heart_rate > 100:
            assert "strenuous" not in c.activity_tags
        assert c.focus in snapshot.preferences.focus
        assert c.frame == snapshot.preferences.frame
    draft = select_and_compose(survivors, snapshot, seed, applied=applied)
    if survivors:
        assert draft is not None
        assert draft.candidate_id in {c.id for c in survivors}
    else:
        assert draft is None
