"""Replay multi-actor scripts against a running pod server.

Scripts are line-delimited JSON records, one step per line (blank lines
and ``#`` comments ignored).  Every step goes through the public HTTP
interface via a ``PodClient`` — the runner holds no store handle, so a
passing script proves the interaction works for ordinary remote clients.

Steps carry ``save_as`` to bind created IRIs to names; later string
arguments may reference them as ``$name``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional

from . import vocab
from .errors import (
    AuthorizationError,
    FetchError,
    NotFoundError,
    ScenarioStepError,
)
from .identity import (
    inbox_acl_graph,
    parse_profile,
    profile_card_graph,
    root_acl_graph,
    webid_for,
)
from .messaging import SUBSCRIBERS_NAME
from .query import parse_pattern_params
from .rdf import BlankNode, Graph, Iri, Literal, Triple, serialize_turtle
from .recommender import DEFAULT_THRESHOLDS, run_tick
from .store import ResourceId
from .wac import compose_acl_turtle

STEP_ACTIONS = (
    "create-profile", "link-extended", "set-acl", "trust-app", "create-resource",
    "subscribe", "post-message", "annotate", "share", "send-notification",
    "expect-allow", "expect-deny", "expect-contains", "tick",
)

_VAR_RE = re.compile(r"\$([A-Za-z_][A-Za-z0-9_-]*)")


def load_script(text: str) -> list:
    """Parse a scenario file into a list of step dicts."""
    steps = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ScenarioStepError(lineno, f"unparseable step: {exc}")
        if not isinstance(record, dict) or "step" not in record:
            raise ScenarioStepError(lineno, "each step needs a 'step' field")
        if record["step"] not in STEP_ACTIONS:
            raise ScenarioStepError(lineno, f"unknown step {record['step']!r}")
        steps.append(record)
    return steps


@dataclass
class Actor:
    name: str
    authority: str
    webid: str
    client: object


@dataclass
class ScenarioRunner:
    """Executes steps sequentially; first failure aborts with its index."""

    make_client: Callable  # (token, origin=None) -> PodClient
    tokens_by_webid: dict
    app_origin: Optional[str] = None
    candidates: list = field(default_factory=list)
    now: Optional[datetime] = None
    default_seed: int = 0
    thresholds: object = DEFAULT_THRESHOLDS
    actors: dict = field(default_factory=dict)
    vars: dict = field(default_factory=dict)
    transcript: list = field(default_factory=list)

    def run(self, steps: list) -> list:
        for index, raw in enumerate(steps):
            try:
                step = self._resolve(raw)
            except KeyError as exc:
                raise ScenarioStepError(index, str(exc).strip("'\""))
            action = step["step"]
            handler = getattr(self, "_step_" + action.replace("-", "_"))
            try:
                detail = handler(index, step)
            except ScenarioStepError:
                raise
            except (AuthorizationError, NotFoundError, FetchError, KeyError, ValueError) as exc:
                raise ScenarioStepError(index, f"{action}: {exc}")
            actor = step.get("actor", "-")
            self.transcript.append(f"{index:02d} {action:<16} {actor:<8} {detail}")
        return self.transcript

    # ------------------------------------------------------------------
    # plumbing

    def _resolve(self, value):
        if isinstance(value, str):
            def repl(match):
                name = match.group(1)
                if name not in self.vars:
                    raise KeyError(f"undefined scenario variable ${name}")
                return self.vars[name]
            return _VAR_RE.sub(repl, value)
        if isinstance(value, list):
            return [self._resolve(v) for v in value]
        if isinstance(value, dict):
            return {k: self._resolve(v) for k, v in value.items()}
        return value

    def _save(self, step: dict, location: str) -> None:
        if step.get("save_as"):
            self.vars[step["save_as"]] = location

    def _actor(self, index: int, name: str) -> Actor:
        if name == "anon":
            return Actor("anon", "", "", self.make_client(None))
        if name not in self.actors:
            raise ScenarioStepError(index, f"actor {name!r} used before create-profile")
        return self.actors[name]

    def _register(self, index: int, name: str, authority: str) -> Actor:
        webid = webid_for(authority)
        token = self.tokens_by_webid.get(webid)
        if token is None:
            raise ScenarioStepError(index, f"no token configured for {webid}")
        actor = Actor(name, authority, webid, self.make_client(token))
        self.actors[name] = actor
        return actor

    def _webid_of(self, index: int, who: str) -> str:
        if who in self.actors:
            return self.actors[who].webid
        if who.startswith("http"):
            return who
        return webid_for(who)

    def _inbox_of(self, index: int, who: str) -> str:
        webid = self._webid_of(index, who)
        return f"https://{ResourceId.from_iri(webid).authority}/inbox/"

    # ------------------------------------------------------------------
    # provisioning steps

    def _step_create_profile(self, index: int, step: dict) -> str:
        authority = step["authority"]
        actor = self._register(index, step["actor"], authority)
        card_iri = f"https://{authority}/profile/card"
        try:
            actor.client.get_graph(card_iri)
            return f"profile exists at {card_iri}"
        except (NotFoundError, AuthorizationError, FetchError):
            pass
        card = profile_card_graph(authority, step.get("name", step["actor"]), step.get("zip"))
        if actor.client.get(f"https://{authority}/profile/").status == 404:
            actor.client.create_container(f"https://{authority}/", "profile")
        actor.client.put(card_iri, serialize_turtle(card))
        actor.client.put(
            f"https://{authority}/.acl", serialize_turtle(root_acl_graph(authority))
        )
        inbox_status = "inbox exists"
        if actor.client.get(f"https://{authority}/inbox/").status == 404:
            actor.client.create_container(
                f"https://{authority}/", "inbox", types=[vocab.INBOX_TYPE]
            )
            actor.client.put(
                f"https://{authority}/inbox/.acl",
                serialize_turtle(inbox_acl_graph(authority)),
            )
            inbox_status = "inbox created"
        return f"created {card_iri} ({inbox_status})"

    def _step_link_extended(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        doc_iri = f"https://{actor.authority}/{step['doc'].strip('/')}"
        if step.get("body"):
            body = step["body"]
        else:
            triples = [Triple(Iri(""), Iri(vocab.FOAF_MAKER), Iri(actor.webid))]
            for friend in step.get("knows", []):
                triples.append(
                    Triple(Iri(""), Iri(vocab.FOAF_KNOWS), Iri(self._webid_of(index, friend)))
                )
            body = serialize_turtle(Graph(triples, doc_iri))
        actor.client.put(doc_iri, body)
        card_iri = f"https://{actor.authority}/profile/card"
        card = actor.client.get_graph(card_iri)
        link = Triple(Iri(actor.webid), Iri(vocab.RDFS_SEE_ALSO), Iri(doc_iri))
        if link not in card:
            actor.client.put(card_iri, serialize_turtle(card.with_triples([link])))
        return f"linked {doc_iri}"

    def _step_set_acl(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        resource = self._absolute(actor, step["resource"])
        turtle = compose_acl_turtle(resource, step["rules"])
        acl_iri = ResourceId.from_iri(resource).acl_id().iri
        actor.client.put(acl_iri, turtle)
        return f"{acl_iri} ({len(step['rules'])} rules)"

    def _step_trust_app(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        card_iri = f"https://{actor.authority}/profile/card"
        card = actor.client.get_graph(card_iri)
        existing = {t.subject.label for t in card if isinstance(t.subject, BlankNode)}
        label = f"app{len(existing)}"
        while label in existing:
            label += "x"
        node = BlankNode(label)
        triples = [
            Triple(Iri(actor.webid), Iri(vocab.ACL_TRUSTED_APP), node),
            Triple(node, Iri(vocab.ACL_ORIGIN), Iri(step["origin"])),
        ]
        for mode in step["modes"]:
            triples.append(Triple(node, Iri(vocab.ACL_MODE), Iri(vocab.ACL_NS + mode)))
        actor.client.put(card_iri, serialize_turtle(card.with_triples(triples)))
        return f"{step['origin']} modes={','.join(step['modes'])}"

    def _step_create_resource(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        container = self._absolute(actor, step["container"])
        kind = step.get("kind", "rdf")
        if kind == "container":
            location = actor.client.create_container(
                container, step.get("slug"), types=step.get("types", [])
            )
        elif kind == "text":
            location = actor.client.create(
                container, step.get("body", ""), step.get("slug"), "text/plain"
            )
        else:
            location = actor.client.create(container, step["body"], step.get("slug"))
        self._save(step, location)
        return f"created {location}"

    # ------------------------------------------------------------------
    # interaction steps

    def _step_subscribe(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        channel = self._absolute(actor, step["channel"])
        if not channel.endswith("/"):
            channel += "/"
        actor.client.get_graph(channel)  # subscription requires Read on the channel
        subscribers_iri = channel + SUBSCRIBERS_NAME
        try:
            graph = actor.client.get_graph(subscribers_iri)
        except NotFoundError:
            graph = Graph([], subscribers_iri)
        triple = Triple(Iri(channel), Iri(vocab.PHL_SUBSCRIBER), Iri(actor.webid))
        if triple not in graph:
            actor.client.put(subscribers_iri, serialize_turtle(graph.with_triples([triple])))
        return f"{actor.webid} -> {channel}"

    def _step_post_message(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        channel = self._absolute(actor, step["channel"])
        if step.get("body"):
            body = step["body"]
        else:
            message_type = vocab.pod_type(actor.authority, "Message")
            body = serialize_turtle(
                Graph(
                    [
                        Triple(Iri(""), Iri(vocab.TYPE), Iri(message_type)),
                        Triple(Iri(""), Iri(vocab.OA_BODY_VALUE), Literal(step["text"])),
                        Triple(Iri(""), Iri(vocab.FOAF_MAKER), Iri(actor.webid)),
                    ]
                )
            )
        location = actor.client.create(channel, body, step.get("slug"))
        self._save(step, location)
        return f"posted {location}"

    def _step_annotate(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        comments = f"https://{actor.authority}/comments/"
        if actor.client.get(comments).status == 404:
            actor.client.create_container(f"https://{actor.authority}/", "comments")
        body = serialize_turtle(
            Graph(
                [
                    Triple(Iri(""), Iri(vocab.TYPE), Iri(vocab.OA_ANNOTATION)),
                    Triple(Iri(""), Iri(vocab.OA_HAS_TARGET), Iri(step["target"])),
                    Triple(Iri(""), Iri(vocab.OA_BODY_VALUE), Literal(step["text"])),
                ]
            )
        )
        location = actor.client.create(comments, body, step.get("slug"))
        owner = webid_for(ResourceId.from_iri(step["target"]).authority)
        if owner != actor.webid:
            self._notify(actor, owner, location)
        self._save(step, location)
        return f"annotated {step['target']} as {location}"

    def _step_share(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        resource = self._absolute(actor, step["resource"])
        recipient = self._webid_of(index, step["recipient"])
        detail = ""
        if step.get("grant_read"):
            rid = ResourceId.from_iri(resource)
            own_acl = rid.acl_id().iri
            base = self._effective_acl_graph(actor, rid)
            rule = Iri(f"{own_acl}#shared-{_fragment_safe(recipient)}")
            grant = [
                Triple(rule, Iri(vocab.TYPE), Iri(vocab.ACL_AUTHORIZATION)),
                Triple(rule, Iri(vocab.ACL_ACCESS_TO), Iri(resource)),
                Triple(rule, Iri(vocab.ACL_AGENT), Iri(recipient)),
                Triple(rule, Iri(vocab.ACL_MODE), Iri(vocab.ACL_READ)),
            ]
            actor.client.put(own_acl, serialize_turtle(base.with_triples(grant)))
            detail = " (Read granted)"
        note = self._notify(actor, recipient, resource)
        self._save(step, note)
        return f"shared {resource} with {recipient}{detail}"

    def _step_send_notification(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        inbox = step.get("inbox") or self._inbox_of(index, step["recipient"])
        location = actor.client.create(inbox, step["body"], step.get("slug"))
        self._save(step, location)
        return f"notified {inbox} ({location})"

    # ------------------------------------------------------------------
    # expectation steps

    def _step_expect_allow(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        method = step.get("method", "GET").upper()
        resource = step["resource"]
        body = (step.get("body") or "").encode()
        response = actor.client.request(
            method, resource, body, step.get("content_type", "text/turtle") if body else None
        )
        if response.status >= 400:
            raise ScenarioStepError(
                index, f"expected allow, got {response.status} for {method} {resource}"
            )
        return f"{method} {resource} -> {response.status}"

    def _step_expect_deny(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        method = step.get("method", "GET").upper()
        resource = step["resource"]
        body = (step.get("body") or "").encode()
        response = actor.client.request(
            method, resource, body, step.get("content_type", "text/turtle") if body else None
        )
        if response.status not in (401, 403):
            raise ScenarioStepError(
                index, f"expected deny, got {response.status} for {method} {resource}"
            )
        return f"{method} {resource} -> {response.status}"

    def _step_expect_contains(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        resource = step["resource"]
        if resource.endswith("/*"):
            graph = actor.client.glob(resource[:-2] + "/")
        else:
            graph = actor.client.get_graph(resource)
        pattern = parse_pattern_params(
            step.get("s", "_"), step.get("p", "_"), step.get("o", "_")
        )
        hits = len(graph.match(pattern))
        wanted = step.get("count", 1)
        if step.get("exactly"):
            ok = hits == wanted
            relation = "exactly"
        else:
            ok = hits >= wanted
            relation = "at least"
        if not ok:
            raise ScenarioStepError(
                index,
                f"{resource}: wanted {relation} {wanted} matches of "
                f"(s={step.get('s', '_')} p={step.get('p', '_')} o={step.get('o', '_')}), got {hits}",
            )
        return f"{resource} matched {hits}"

    def _step_tick(self, index: int, step: dict) -> str:
        actor = self._actor(index, step["actor"])
        token = self.tokens_by_webid[actor.webid]
        client = self.make_client(token, self.app_origin)
        now = self.now or datetime.now(timezone.utc)
        if step.get("now"):
            now = datetime.fromisoformat(step["now"].replace("Z", "+00:00"))
        report = run_tick(
            client,
            actor.webid,
            self.candidates,
            seed=step.get("seed", self.default_seed),
            now=now,
            thresholds=self.thresholds,
            patient_name=step.get("patient_name", actor.name.title()),
        )
        expected = step.get("expect")
        if expected and report.outcome != expected:
            raise ScenarioStepError(
                index, f"tick expected {expected}, got {report.outcome}: {report.detail}"
            )
        if report.created_iri:
            self._save(step, report.created_iri)
        return f"{report.outcome} candidate={report.candidate_id or '-'} {report.created_iri or ''}".rstrip()

    # ------------------------------------------------------------------

    def _absolute(self, actor: Actor, path_or_iri: str) -> str:
        if path_or_iri.startswith("http"):
            return path_or_iri
        return f"https://{actor.authority}/{path_or_iri.lstrip('/')}"

    def _notify(self, actor: Actor, recipient_webid: str, target_iri: str) -> str:
        inbox = f"https://{ResourceId.from_iri(recipient_webid).authority}/inbox/"
        body = serialize_turtle(
            Graph(
                [
                    Triple(Iri(""), Iri(vocab.TYPE), Iri(vocab.PHL_NOTIFICATION)),
                    Triple(Iri(""), Iri(vocab.OA_HAS_TARGET), Iri(target_iri)),
                    Triple(Iri(""), Iri(vocab.PHL_SENDER), Iri(actor.webid)),
                ]
            )
        )
        return actor.client.create(inbox, body)

    def _effective_acl_graph(self, actor: Actor, rid: ResourceId) -> Graph:
        probe: Optional[ResourceId] = rid
        while probe is not None:
            acl_iri = probe.acl_id().iri
            try:
                return actor.client.get_graph(acl_iri)
            except NotFoundError:
                probe = probe.parent()
        return Graph([], rid.acl_id().iri)


def _fragment_safe(webid: str) -> str:
    return "".join(c if c.isalnum() else "-" for c in webid)[:80]


def run_scenario(runner: ScenarioRunner, text: str) -> list:
    """Load and execute a script; returns the transcript, raising on failure."""
    return runner.run(load_script(text))
