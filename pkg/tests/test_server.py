"""HTTP surface: authentication, per-method authorization, LDP headers,
content negotiation, inbox/chat behavior, and the static UI mount."""

import pytest

from phl import vocab
from phl.cli import _seed_trusted_apps
from phl.errors import AuthorizationError
from phl.rdf import Iri, Literal, TriplePattern, parse_turtle
from phl.server import PhlServer, _negotiate
from phl.store import ResourceId
from phl.wac import AgentContext, compose_acl_turtle

from conftest import Web

BOB = "https://bob.uthsc.edu"
BOB_ID = f"{BOB}/profile/card#me"
ALICE_ID = "https://alice.uthsc.edu/profile/card#me"
TURTLE = "text/turtle"


def request(web, method, iri, token=None, origin=None, body=b"", **headers):
    client = web.client(token, origin)
    content_type = headers.pop("content_type", None)
    return client.request(method, iri, body, content_type, headers)


# ---------------------------------------------------------------------------
# Authentication
# ---------------------------------------------------------------------------


def test_anonymous_requests_are_served(web):
    # no Authorization header at all: the request proceeds as nobody
    response = web.anon.request(
        "POST", f"{BOB}/inbox/", b"<> a <https://x.example/ns#Ping> .", TURTLE
    )
    assert response.status == 201


def test_malformed_authorization_header_is_401(web):
    for header in ("Basic dXNlcjpwdw==", "Bearer ", "bearer-token-without-scheme x"):
        response = request(web, "GET", f"{BOB}/profile/card", Authorization=header)
        assert response.status == 401, header


def test_unknown_bearer_token_is_401(web):
    response = request(web, "GET", f"{BOB}/profile/card", token="who-dis")
    assert response.status == 401
    assert "unknown bearer token" in response.text


def test_unknown_host_is_404(web):
    response = web.bob.get("https://nobody.example/profile/card")
    assert response.status == 404
    assert "no pod served" in response.text


# ---------------------------------------------------------------------------
# Reads, links, negotiation
# ---------------------------------------------------------------------------


def test_owner_reads_profile_card_with_links(web):
    response = web.bob.get(f"{BOB}/profile/card")
    assert response.status == 200
    assert response.header("content-type").startswith(TURTLE)
    link = response.header("link")
    assert f'<{BOB}/profile/card.acl>; rel="acl"' in link
    assert f'<{BOB}/inbox/>; rel="{vocab.LDP_INBOX}"' in link
    graph = parse_turtle(response.text, f"{BOB}/profile/card")
    assert graph.value(Iri(BOB_ID), vocab.FOAF_NAME) == Literal("Bob")


def test_stranger_denied_with_mode_hint(web):
    response = web.alice.get(f"{BOB}/profile/card")
    assert response.status == 403
    assert response.header("x-needed-mode") == "Read"
    assert "access denied" in response.text


def test_container_advertises_pattern_endpoint(web):
    response = web.bob.get(f"{BOB}/")
    assert response.status == 200
    link = response.header("link")
    assert f'<{BOB}/query>; rel="{vocab.PATTERN_ENDPOINT_REL}"' in link
    assert 'rel="acl"' in link


def test_container_html_negotiation(web):
    html = web.bob.get(f"{BOB}/data/diabetes/", accept="text/html")
    assert html.status == 200
    assert html.header("content-type").startswith("text/html")
    assert f'<a href="{BOB}/data/diabetes/diets">diets</a>' in html.text

    turtle = web.bob.get(f"{BOB}/data/diabetes/", accept=TURTLE)
    assert turtle.header("content-type").startswith(TURTLE)
    listing = parse_turtle(turtle.text, f"{BOB}/data/diabetes/")
    children = {
        o.value for o in listing.objects(Iri(f"{BOB}/data/diabetes/"), vocab.LDP_CONTAINS)
    }
    assert f"{BOB}/data/diabetes/diets" in children


def test_quality_factors_steer_negotiation(web):
    response = web.bob.get(f"{BOB}/", accept="text/turtle;q=0.1, text/html;q=0.9")
    assert response.header("content-type").startswith("text/html")


def test_unacceptable_media_type_is_406(web):
    assert web.bob.get(f"{BOB}/", accept="application/json").status == 406
    assert web.bob.get(f"{BOB}/data/diabetes/diets", accept="text/html").status == 406


@pytest.mark.parametrize(
    "accept, available, expected",
    [
        ("", ["text/turtle"], "text/turtle"),
        ("*/*", ["text/turtle", "text/html"], "text/turtle"),
        ("text/*", ["text/turtle"], "text/turtle"),
        ("application/json", ["text/turtle"], None),
        ("application/json, */*;q=0.1", ["text/turtle"], "text/turtle"),
    ],
)
def test_negotiation_table(accept, available, expected):
    assert _negotiate(accept, available) == expected


def test_head_carries_headers_but_no_body(web):
    get = web.bob.get(f"{BOB}/profile/card")
    head = web.bob.request("HEAD", f"{BOB}/profile/card")
    assert head.status == 200
    assert head.body == b""
    assert head.header("content-length") == get.header("content-length")


def test_missing_resource_is_404(web):
    assert web.bob.get(f"{BOB}/no/such/thing").status == 404


# ---------------------------------------------------------------------------
# Aggregation endpoints
# ---------------------------------------------------------------------------


def test_glob_merges_readable_children(web):
    response = web.bob.get(f"{BOB}/data/diabetes/*")
    assert response.status == 200
    merged = parse_turtle(response.text, f"{BOB}/data/diabetes/")
    texts = {
        t.object.lexical
        for t in merged
        if t.predicate.value == vocab.OA_BODY_VALUE
    }
    assert any("dinner ideas" in text for text in texts)
    assert len(texts) == 3  # diets, exercises, medications


def test_glob_denied_without_container_read(web):
    assert web.alice.get(f"{BOB}/data/diabetes/*").status == 403
    assert web.anon.get(f"{BOB}/data/diabetes/*").status == 403


def test_glob_omits_children_with_tighter_acls(web):
    container = f"{BOB}/data/diabetes/"
    web.bob.put(
        container + ".acl",
        compose_acl_turtle(container, [
            {"agent": BOB_ID, "modes": ["Read", "Write", "Control"]},
            {"agent": ALICE_ID, "modes": ["Read"]},
        ]),
    )
    web.bob.put(
        container + "diets.acl",
        compose_acl_turtle(container + "diets", [{"agent": BOB_ID, "modes": ["Read", "Control"]}]),
    )
    merged = web.alice.glob(container)
    texts = {t.object.lexical for t in merged if t.predicate.value == vocab.OA_BODY_VALUE}
    assert len(texts) == 2
    assert not any("dinner ideas" in text for text in texts)


def test_glob_applies_to_containers_only(web):
    assert web.bob.get(f"{BOB}/data/diabetes/diets/*").status == 404


def test_pattern_endpoint_gated_on_pod_read(web):
    pattern = TriplePattern(None, Iri(vocab.OA_BODY_VALUE), None)
    found = web.bob.query_pattern("bob.uthsc.edu", pattern)
    assert any("dinner ideas" in t.object.lexical for t in found)

    with pytest.raises(AuthorizationError):
        web.alice.query_pattern("bob.uthsc.edu", pattern)


def test_pattern_endpoint_rejects_bad_terms(web):
    # a literal is only meaningful in the object position
    response = web.bob.request("GET", f"{BOB}/query?s=%22lex%22&p=_&o=_")
    assert response.status == 400


# ---------------------------------------------------------------------------
# POST
# ---------------------------------------------------------------------------


def test_post_creates_resource_and_deconflicts_slugs(web):
    body = "<> a <https://x.example/ns#Note> ."
    first = web.bob.create(f"{BOB}/data/diabetes/", body, slug="note")
    assert first == f"{BOB}/data/diabetes/note"
    second = web.bob.create(f"{BOB}/data/diabetes/", body, slug="note")
    assert second == f"{BOB}/data/diabetes/note-1"
    fetched = web.bob.get(first)
    assert fetched.status == 200


def test_post_invalid_turtle_is_400(web):
    response = web.bob.request("POST", f"{BOB}/data/diabetes/", b"<> <broken", TURTLE)
    assert response.status == 400
    assert "turtle parse error" in response.text


def test_post_reserved_slug_is_400(web):
    response = web.bob.request(
        "POST", f"{BOB}/data/diabetes/", b"<> a <https://x.example/ns#N> .", TURTLE,
        {"Slug": "evil.acl"},
    )
    assert response.status == 400


def test_post_targets_containers_only(web):
    response = web.bob.request("POST", f"{BOB}/data/diabetes/diets", b"", TURTLE)
    assert response.status == 405


def test_post_requires_append(web):
    response = web.alice.request(
        "POST", f"{BOB}/data/diabetes/", b"<> a <https://x.example/ns#N> .", TURTLE
    )
    assert response.status == 403
    assert response.header("x-needed-mode") == "Append"


def test_post_container_via_link_type(web):
    created = web.bob.create_container(f"{BOB}/", "projects")
    assert created == f"{BOB}/projects/"
    listing = web.bob.get_graph(f"{BOB}/")
    assert Iri(f"{BOB}/projects") in set(
        t.object for t in listing if t.predicate.value == vocab.LDP_CONTAINS
    )


def test_post_container_records_extra_types(web):
    event_type = f"{BOB}/ns/type#Event"
    created = web.bob.create_container(f"{BOB}/", "party", types=[event_type])
    # parent listing annotates the child with its declared types
    listing = web.bob.get_graph(f"{BOB}/")
    assert event_type in {
        o.value for o in listing.objects(Iri(created.rstrip("/")), vocab.TYPE)
    }
    # the child's own representation is a basic container
    own = web.bob.get_graph(created)
    types = {o.value for o in own.objects(Iri(created), vocab.TYPE)}
    assert vocab.LDP_BASIC_CONTAINER in types
    assert event_type in types


def test_inbox_rejects_non_rdf_payloads(web):
    inbox = "https://alice.uthsc.edu/inbox/"
    refused = web.bob.request("POST", inbox, b"\x89PNG...", "image/png")
    assert refused.status == 415
    accepted = web.bob.request(
        "POST", inbox, b"<> a <https://x.example/ns#Ping> .", TURTLE
    )
    assert accepted.status == 201


def test_binary_upload_outside_inbox_is_kept_byte_exact(web):
    blob = bytes(range(256))
    iri = web.bob.create(f"{BOB}/data/diabetes/", blob, slug="scan", content_type="application/octet-stream")
    fetched = web.bob.get(iri)
    assert fetched.status == 200
    assert fetched.body == blob
    assert fetched.header("content-type") == "application/octet-stream"


def test_chat_channel_fans_out_to_subscriber_inboxes(web):
    channel = f"{BOB}/diabetes/"
    web.bob.put(
        channel + ".acl",
        compose_acl_turtle(channel, [
            {"agent": BOB_ID, "modes": ["Read", "Write", "Control", "Append"]},
            {"agent": ALICE_ID, "modes": ["Read"]},
        ]),
    )
    web.server.messaging.subscribe(
        ResourceId.from_iri(channel), ALICE_ID, AgentContext(ALICE_ID)
    )
    before = len(list(web.alice.get_graph("https://alice.uthsc.edu/inbox/")))

    message = web.bob.create(channel, '<> <http://www.w3.org/ns/oa#bodyValue> "hi all" .')

    inbox_graph = web.alice.get_graph("https://alice.uthsc.edu/inbox/")
    notes = [
        o.value
        for o in inbox_graph.objects(Iri("https://alice.uthsc.edu/inbox/"), vocab.LDP_CONTAINS)
    ]
    assert len(inbox_graph) > before
    latest = web.alice.get_graph(sorted(notes)[-1])
    targets = {
        t.object.value for t in latest if t.predicate.value == vocab.OA_HAS_TARGET
    }
    assert message in targets


# ---------------------------------------------------------------------------
# PUT
# ---------------------------------------------------------------------------


def test_put_creates_then_updates(web):
    iri = f"{BOB}/data/diabetes/plan"
    first = web.bob.request("PUT", iri, b'<> <https://x.example/ns#v> "1" .', TURTLE)
    assert first.status == 201
    assert first.header("location") == iri
    second = web.bob.request("PUT", iri, b'<> <https://x.example/ns#v> "2" .', TURTLE)
    assert second.status == 204
    assert '"2"' in web.bob.get(iri).text


def test_put_without_parent_is_404(web):
    response = web.bob.request("PUT", f"{BOB}/nowhere/doc", b"<> a <https://x.example/ns#N> .", TURTLE)
    assert response.status == 404


def test_put_to_container_is_405(web):
    assert web.bob.request("PUT", f"{BOB}/calendar/", b"", TURTLE).status == 405


def test_put_requires_write(web):
    response = web.alice.request("PUT", f"{BOB}/data/diabetes/diets", b"<> a <https://x.example/ns#N> .", TURTLE)
    assert response.status == 403
    assert response.header("x-needed-mode") == "Write"


def test_chunked_upload_is_411_not_silently_empty(web):
    """A framed body must never be read as zero-length content."""
    response = web.transport.send(
        "PUT",
        f"{BOB}/data/diabetes/plan",
        {
            "Authorization": "Bearer bob-token",
            "Content-Type": "text/turtle",
            "Transfer-Encoding": "chunked",
        },
        b'<> <https://x.example/ns#v> "1" .',
    )
    assert response.status == 411
    assert "Content-Length" in response.body.decode()


def test_put_acl_rejects_documents_that_do_not_authorize(web):
    acl_iri = f"{BOB}/data/diabetes/diets.acl"
    garbage = web.bob.request("PUT", acl_iri, b"not turtle at all {", TURTLE)
    assert garbage.status == 400
    assert "invalid ACL" in garbage.text

    no_modes = f'<#r> a <{vocab.ACL_AUTHORIZATION}> ; <{vocab.ACL_ACCESS_TO}> <{BOB}/data/diabetes/diets> ; <{vocab.ACL_AGENT}> <{ALICE_ID}> .'
    response = web.bob.request("PUT", acl_iri, no_modes.encode(), TURTLE)
    assert response.status == 400


def test_put_acl_takes_effect_immediately(web):
    doc = f"{BOB}/data/diabetes/diets"
    assert web.alice.get(doc).status == 403
    web.bob.put(
        doc + ".acl",
        compose_acl_turtle(doc, [
            {"agent": BOB_ID, "modes": ["Read", "Write", "Control"]},
            {"agent": ALICE_ID, "modes": ["Read"]},
        ]),
    )
    assert web.alice.get(doc).status == 200
    assert web.alice.request("PUT", doc, b"<> a <https://x.example/ns#N> .", TURTLE).status == 403


def test_acl_documents_need_control_to_read_or_write(web):
    root_acl = f"{BOB}/.acl"
    assert web.bob.get(root_acl).status == 200
    denied = web.alice.get(root_acl)
    assert denied.status == 403
    assert denied.header("x-needed-mode") == "Control"
    rewrite = web.alice.request(
        "PUT", root_acl,
        compose_acl_turtle(f"{BOB}/", [{"agent": ALICE_ID, "modes": ["Read"]}]).encode(),
        TURTLE,
    )
    assert rewrite.status == 403


# ---------------------------------------------------------------------------
# DELETE
# ---------------------------------------------------------------------------


def test_delete_round_trip(web):
    iri = web.bob.create(f"{BOB}/data/diabetes/", "<> a <https://x.example/ns#Tmp> .", slug="tmp")
    assert web.bob.request("DELETE", iri).status == 204
    assert web.bob.get(iri).status == 404


def test_delete_guards(web):
    assert web.bob.request("DELETE", f"{BOB}/").status == 405
    assert web.bob.request("DELETE", f"{BOB}/data/diabetes/").status == 409
    denied = web.alice.request("DELETE", f"{BOB}/data/diabetes/diets")
    assert denied.status == 403


# ---------------------------------------------------------------------------
# OPTIONS and CORS
# ---------------------------------------------------------------------------


def test_options_needs_no_auth(web):
    response = web.anon.request("OPTIONS", f"{BOB}/anything")
    assert response.status == 204
    assert "GET" in response.header("allow")


def test_cors_headers_echo_origin(web):
    response = web.client("bob-token", "https://some.app.example").get(f"{BOB}/profile/card")
    assert response.status == 200  # no trusted-app declaration: origin not gated
    assert response.header("access-control-allow-origin") == "https://some.app.example"
    assert "X-Needed-Mode" in response.header("access-control-expose-headers")


def test_declared_apps_gate_origins_over_http(seeded_store):
    _seed_trusted_apps(
        seeded_store, "bob.uthsc.edu", BOB_ID,
        [{"origin": "https://calendar.app.com", "modes": ["Read", "Append"]}],
    )
    web = Web(seeded_store)
    via_app = web.client("bob-token", "https://calendar.app.com")

    assert via_app.get(f"{BOB}/calendar/").status == 200
    write = via_app.request(
        "PUT", f"{BOB}/calendar/checkup", b"<> a <https://x.example/ns#Event> .", TURTLE
    )
    assert write.status == 403  # the app only carries Read+Append for Bob
    assert write.header("x-needed-mode") == "Write"
    post = via_app.request(
        "POST", f"{BOB}/calendar/", b"<> a <https://x.example/ns#Event> .", TURTLE
    )
    assert post.status == 201  # Append is within the app's grant

    undeclared = web.client("bob-token", "https://rogue.app.com")
    assert undeclared.get(f"{BOB}/calendar/").status == 403


# ---------------------------------------------------------------------------
# Static UI mount
# ---------------------------------------------------------------------------


@pytest.fixture
def ui_web(seeded_store, tmp_path):
    dist = tmp_path / "dist"
    dist.mkdir()
    (dist / "index.html").write_text("<!DOCTYPE html><title>console</title>")
    (dist / "app.js").write_text("console.log('ready');")
    web = Web(seeded_store)
    web.server = PhlServer(seeded_store, tokens=web.server.tokens, ui_dist=str(dist))
    web.transport.app = web.server.wsgi_app
    return web


def test_ui_serves_static_assets(ui_web):
    index = ui_web.anon.get(f"{BOB}/ui/")
    assert index.status == 200
    assert index.header("content-type").startswith("text/html")
    assert "console" in index.text

    script = ui_web.anon.get(f"{BOB}/ui/app.js")
    assert script.status == 200
    assert "javascript" in script.header("content-type")


def test_ui_falls_back_for_client_side_routes(ui_web):
    response = ui_web.anon.get(f"{BOB}/ui/agents")
    assert response.status == 200
    assert "console" in response.text


def test_ui_blocks_path_traversal(ui_web):
    assert ui_web.anon.get(f"{BOB}/ui/../config.json").status == 404
    assert ui_web.anon.get(f"{BOB}/ui/%2e%2e/secret").status in (200, 404)
    assert ui_web.anon.get(f"{BOB}/ui/missing.js").status == 404


def test_ui_mount_absent_without_config(web):
    assert web.bob.get(f"{BOB}/ui/").status == 404
