"""Operator command line: serve pods, seed worlds, replay scripts, inspect state.

All commands read one JSON config file describing the storage root, the
bearer-token table, the listen address, and recommender settings.  Paths in
the config resolve relative to the config file's directory.
"""

from __future__ import annotations

import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import vocab
from .client import HttpTransport, PodClient, WsgiTransport
from .errors import PhlError, ScenarioStepError
from .identity import card_rid, create_profile, link_extended, parse_profile, webid_for
from .ingest import (
    Preferences,
    ingest_odl,
    ingest_registry,
    ingest_sdoh,
    preferences_graph,
    read_sdoh_csv,
)
from .query import Budget, LocalFetcher, PathExpression, encode_term, resolve_path, resolve_property
from .rdf import Graph, Iri, Triple, serialize_turtle
from .recommender import Thresholds, load_candidates, run_tick
from .scenario import ScenarioRunner, load_script
from .server import PhlServer, serve as serve_forever
from .store import PodStore, ResourceId
from .wac import AclEngine, AgentContext, compose_acl_turtle


def load_config(path) -> dict:
    path = Path(path)
    config = json.loads(path.read_text())
    config["_dir"] = path.parent.resolve()
    return config


def _config_path(config: dict, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else config["_dir"] / p


def make_clock(config: dict):
    frozen = config.get("frozen_time")
    if not frozen:
        return None
    moment = datetime.fromisoformat(frozen.replace("Z", "+00:00"))
    return lambda: moment


def make_store(config: dict) -> PodStore:
    return PodStore(_config_path(config, config["storage_root"]), clock=make_clock(config))


def make_server(config: dict, store: PodStore | None = None) -> PhlServer:
    store = store or make_store(config)
    ui_dist = config.get("ui_dist")
    return PhlServer(
        store,
        tokens=config.get("tokens", {}),
        ui_dist=str(_config_path(config, ui_dist)) if ui_dist else None,
    )


def _thresholds(config: dict) -> Thresholds:
    raw = config.get("recommender", {}).get("thresholds", {})
    return Thresholds(
        walkability=raw.get("walkability", 0.4),
        heart_rate=raw.get("heart_rate", 100.0),
    )


def _candidate_pool(config: dict) -> list:
    rec = config.get("recommender", {})
    pool_path = rec.get("candidates")
    if not pool_path:
        return []
    return load_candidates(_config_path(config, pool_path).read_text().splitlines())


@click.group()
def main():
    """Personal health library: multi-pod server, scenario replay, recommender."""


# ---------------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def serve(config_path):
    """Run the HTTP server for every pod in the storage root."""
    config = load_config(config_path)
    store = make_store(config)
    server = make_server(config, store)
    host = config.get("host", "127.0.0.1")
    port = config.get("port", 8080)
    httpd, thread = serve_forever(server, host, port)
    click.echo(f"serving {len(store.authorities())} pods at http://{host}:{port}", err=True)
    try:
        thread.join()
    except KeyboardInterrupt:
        httpd.shutdown()


# ---------------------------------------------------------------------------


@main.command()
@click.option("--dir", "fixture_dir", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def seed(fixture_dir, config_path):
    """Build a fixture world (pods, profiles, data, ACLs) into the storage root."""
    config = load_config(config_path)
    store = make_store(config)
    for line in seed_world(store, Path(fixture_dir)):
        click.echo(line)


def seed_world(store: PodStore, fixture_dir: Path) -> list:
    """Offline world construction from a fixture directory's world.json."""
    world = json.loads((fixture_dir / "world.json").read_text())
    lines = []
    for entry in world.get("pods", []):
        authority = entry["authority"]
        webid = webid_for(authority)
        if authority not in store.authorities():
            store.create_pod(authority, webid)
        parts = []
        if entry.get("name"):
            if store.exists(card_rid(authority)):
                parts.append("profile exists")
            else:
                create_profile(store, authority, entry["name"], entry.get("zip"))
                parts.append(f"profile {entry['name']}")
        for container in entry.get("containers", []):
            rid = _ensure_containers(store, authority, container["path"])
            if container.get("types"):
                store.set_container_types(rid, set(container["types"]))
            parts.append(container["path"] + "/")
        extended = entry.get("extended")
        if extended:
            doc_iri = f"https://{authority}/{extended['doc']}"
            triples = [Triple(Iri(""), Iri(vocab.FOAF_MAKER), Iri(webid))]
            for friend in extended.get("knows", []):
                friend_webid = friend if friend.startswith("http") else webid_for(friend)
                triples.append(Triple(Iri(""), Iri(vocab.FOAF_KNOWS), Iri(friend_webid)))
            store.put_resource(
                ResourceId.from_iri(doc_iri),
                "rdf",
                serialize_turtle(Graph(triples, doc_iri)).encode(),
            )
            link_extended(store, webid, doc_iri)
            parts.append(f"extended {extended['doc']}")
        if entry.get("trusted_apps"):
            _seed_trusted_apps(store, authority, webid, entry["trusted_apps"])
            parts.append(f"{len(entry['trusted_apps'])} trusted apps")
        if entry.get("registry"):
            report = ingest_registry(
                store, authority, (fixture_dir / entry["registry"]).read_text().splitlines()
            )
            parts.append(f"registry +{report.added}")
        if entry.get("odl"):
            report = ingest_odl(
                store, authority, (fixture_dir / entry["odl"]).read_text().splitlines()
            )
            parts.append(f"odl +{report.added}")
        if entry.get("sdoh"):
            rows = read_sdoh_csv(fixture_dir / entry["sdoh"])
            report = ingest_sdoh(store, rows, authority)
            parts.append(f"sdoh +{report.added}")
        if entry.get("preferences"):
            prefs_raw = entry["preferences"]
            prefs = Preferences(
                focus=frozenset(prefs_raw.get("focus", ["diet", "exercise", "medication-adherence"])),
                frame=prefs_raw.get("frame", "motivational"),
                frequency=prefs_raw.get("frequency", "weekly"),
                languages=frozenset(prefs_raw.get("languages", [])),
            )
            _ensure_containers(store, authority, "settings")
            store.put_resource(
                ResourceId(authority, ("settings", "preferences"), False),
                "rdf",
                serialize_turtle(preferences_graph(authority, prefs)).encode(),
            )
            parts.append("preferences")
        for res in entry.get("resources", []):
            container = _ensure_containers(store, authority, res["container"])
            if res.get("file"):
                body = (fixture_dir / res["file"]).read_bytes()
            else:
                body = res.get("body", "").encode()
            rid = container.child(res["slug"])
            if not store.exists(rid):
                store.create_resource(
                    container, res["slug"], res.get("kind", "rdf"), body,
                    res.get("content_type", "text/turtle"),
                )
            parts.append(res["slug"])
        for acl in entry.get("acls", []):
            resource = acl["resource"]
            if not resource.startswith("http"):
                tail = resource.lstrip("/")
                resource = f"https://{authority}/{tail}"
            turtle = compose_acl_turtle(resource, acl["rules"])
            acl_rid = ResourceId.from_iri(resource).acl_id()
            store.put_resource(acl_rid, "rdf", turtle.encode())
            parts.append(f"acl {acl['resource']}")
        lines.append(f"pod {authority}: " + ", ".join(parts) if parts else f"pod {authority}")
    return lines


def _ensure_containers(store: PodStore, authority: str, path: str) -> ResourceId:
    rid = ResourceId(authority, (), True)
    for segment in [s for s in path.split("/") if s]:
        child = rid.child(segment, container=True)
        if not store.exists(child):
            store.create_container(rid, segment)
        rid = child
    return rid


def _seed_trusted_apps(store: PodStore, authority: str, webid: str, apps: list) -> None:
    from .rdf import BlankNode

    card = ResourceId(authority, ("profile", "card"), False)
    graph = store.resource_graph(card)
    triples = []
    for n, app in enumerate(apps):
        node = BlankNode(f"seededapp{n}")
        triples.append(Triple(Iri(webid), Iri(vocab.ACL_TRUSTED_APP), node))
        triples.append(Triple(node, Iri(vocab.ACL_ORIGIN), Iri(app["origin"])))
        for mode in app["modes"]:
            triples.append(Triple(node, Iri(vocab.ACL_MODE), Iri(vocab.ACL_NS + mode)))
    store.update_resource(card, serialize_turtle(graph.with_triples(triples)).encode())


# ---------------------------------------------------------------------------


@main.command()
@click.argument("script", type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", "seed_value", default=0, show_default=True)
@click.option("--base-url", default=None, help="Server to talk to; defaults to config host:port.")
@click.option("--embedded", is_flag=True, help="Run against an in-process server instead.")
def scenario(script, config_path, seed_value, base_url, embedded):
    """Replay a scripted multi-actor interaction over the HTTP interface."""
    config = load_config(config_path)
    runner = build_runner(config, base_url=base_url, embedded=embedded, seed=seed_value)
    try:
        transcript = runner.run(load_script(Path(script).read_text()))
    except ScenarioStepError as exc:
        for line in runner.transcript:
            click.echo(line)
        click.echo(f"FAIL step {exc.index}: {exc}", err=True)
        sys.exit(1)
    for line in transcript:
        click.echo(line)
    click.echo(f"OK ({len(transcript)} steps)")


def build_runner(
    config: dict, base_url: str | None = None, embedded: bool = False, seed: int = 0
) -> ScenarioRunner:
    if embedded:
        transport = WsgiTransport(make_server(config).wsgi_app)
    else:
        host = config.get("host", "127.0.0.1")
        port = config.get("port", 8080)
        transport = HttpTransport(base_url or f"http://{host}:{port}")
    tokens_by_webid = {webid: token for token, webid in config.get("tokens", {}).items()}
    clock = make_clock(config)
    return ScenarioRunner(
        make_client=lambda token, origin=None: PodClient(transport, token=token, origin=origin),
        tokens_by_webid=tokens_by_webid,
        app_origin=config.get("recommender", {}).get("origin"),
        candidates=_candidate_pool(config),
        now=clock() if clock else None,
        default_seed=seed,
        thresholds=_thresholds(config),
    )


# ---------------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--root", required=True, help="Pod authority or WebID to start from.")
@click.option("--path", "path_expr", default="", help="Slash path of hops from the profile.")
@click.option("--property", "prop", required=True, help="Final property (name, curie, or IRI).")
@click.option("--as", "as_token", default=None, help="Bearer token to evaluate as.")
@click.option("--budget", default=50, show_default=True)
def query(config_path, root, path_expr, prop, as_token, budget):
    """Follow a path expression through pod documents and print the results."""
    config = load_config(config_path)
    store = make_store(config)
    engine = AclEngine(store)
    webid = root if root.startswith("http") else webid_for(root)
    ctx = AgentContext(config.get("tokens", {}).get(as_token), None)
    fetcher = LocalFetcher(store, engine, Budget(budget))
    expr = PathExpression(webid, path_expr, resolve_property(prop))
    try:
        results = resolve_path(expr, ctx, fetcher)
    except PhlError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for term in sorted(encode_term(t) for t in results):
        click.echo(term)


# ---------------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.argument("authority", required=False)
def dump(config_path, authority):
    """Print a stable-sorted tree of one pod (or all pods) for diffing."""
    config = load_config(config_path)
    store = make_store(config)
    targets = [authority] if authority else store.authorities()
    for target in sorted(targets):
        for line in dump_pod_lines(store, target):
            click.echo(line)


def dump_pod_lines(store: PodStore, authority: str) -> list:
    """One line per node: path, kind, content type, body hash, container types."""
    lines = []

    def walk(rid: ResourceId):
        if rid.is_container:
            types = ",".join(sorted(store.container_types(rid))) or "-"
            lines.append(f"{authority} {rid.iri} container - - {types}")
            for child in store.list_children(rid, include_acl=True):
                walk(child)
        else:
            resource = store.get_resource(rid)
            digest = hashlib.sha256(resource.body).hexdigest()[:12]
            lines.append(
                f"{authority} {rid.iri} {resource.kind} {resource.content_type} {digest} -"
            )

    walk(store.pod(authority).root_id)
    return sorted(lines)


# ---------------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--patient", required=True, help="Patient pod authority.")
@click.option("--seed", "seed_value", default=0, show_default=True)
@click.option("--now", "now_arg", default=None, help="Override tick time (ISO 8601).")
@click.option("--base-url", default=None, help="Talk to a running server instead of in-process.")
@click.option("--expect", default=None, type=click.Choice(["created", "gate-closed", "no-candidate"]))
def tick(config_path, patient, seed_value, now_arg, base_url, expect):
    """Run one recommender pass for a patient and print the outcome."""
    config = load_config(config_path)
    if base_url:
        transport = HttpTransport(base_url)
    else:
        transport = WsgiTransport(make_server(config).wsgi_app)
    webid = patient if patient.startswith("http") else webid_for(patient)
    tokens_by_webid = {w: t for t, w in config.get("tokens", {}).items()}
    token = tokens_by_webid.get(webid)
    if token is None:
        click.echo(f"error: no token configured for {webid}", err=True)
        sys.exit(1)
    client = PodClient(
        transport, token=token, origin=config.get("recommender", {}).get("origin")
    )
    clock = make_clock(config)
    now = clock() if clock else datetime.now(timezone.utc)
    if now_arg:
        now = datetime.fromisoformat(now_arg.replace("Z", "+00:00"))
    try:
        profile = parse_profile(client.get_graph(webid), webid)
        report = run_tick(
            client,
            webid,
            _candidate_pool(config),
            seed=seed_value,
            now=now,
            thresholds=_thresholds(config),
            patient_name=profile.name,
        )
    except PhlError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"outcome: {report.outcome}")
    if report.candidate_id:
        click.echo(f"candidate: {report.candidate_id}")
    if report.created_iri:
        click.echo(f"created: {report.created_iri}")
    if report.detail:
        click.echo(f"detail: {report.detail}")
    for candidate_id, rule in sorted(report.rejections.items()):
        click.echo(f"rejected: {candidate_id} by {rule}")
    if expect and report.outcome != expect:
        click.echo(f"error: expected {expect}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
