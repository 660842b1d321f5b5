"""WebID profiles, extended-profile links, and a bearer-token login scheme.

A profile lives at ``/profile/card`` in its pod and the ``#me`` fragment is
the WebID.  Bearer tokens map straight to WebIDs — a deliberately simple
stand-in for certificate-based authentication, loaded once from server
config and never stored inside any pod.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional

from . import vocab
from .errors import FetchError, NotFoundError, ProfileExistsError
from .rdf import Graph, Iri, Literal, Triple, serialize_turtle
from .store import PodStore, ResourceId
from .wac import AgentContext, parse_trusted_apps

PROFILE_SEGMENTS = ("profile", "card")


def webid_for(authority: str) -> str:
    return f"https://{authority}/profile/card#me"


def profile_doc_iri(webid: str) -> str:
    return webid.split("#", 1)[0]


def card_rid(authority: str) -> ResourceId:
    return ResourceId(authority, PROFILE_SEGMENTS, False)


@dataclass(frozen=True)
class WebIdProfile:
    webid: str
    name: str = ""
    see_also: frozenset = frozenset()
    knows: frozenset = frozenset()
    trusted_apps: tuple = ()
    inbox: Optional[str] = None


def parse_profile(graph: Graph, webid: str) -> WebIdProfile:
    me = Iri(webid)
    doc = Iri(profile_doc_iri(webid))
    name = ""
    name_term = graph.value(me, vocab.FOAF_NAME)
    if isinstance(name_term, Literal):
        name = name_term.lexical
    see_also = frozenset(
        o.value
        for subject in (me, doc)
        for o in graph.objects(subject, vocab.RDFS_SEE_ALSO)
        if isinstance(o, Iri)
    )
    knows = frozenset(
        o.value
        for subject in (me, doc)
        for o in graph.objects(subject, vocab.FOAF_KNOWS)
        if isinstance(o, Iri)
    )
    inbox_term = graph.value(me, vocab.LDP_INBOX)
    inbox = inbox_term.value if isinstance(inbox_term, Iri) else None
    return WebIdProfile(
        webid, name, see_also, knows, tuple(parse_trusted_apps(graph, webid)), inbox
    )


def profile_card_graph(authority: str, name: str, zip_code: Optional[str] = None) -> Graph:
    """The initial `/profile/card` document for a fresh pod."""
    rid = card_rid(authority)
    doc = Iri(rid.iri)
    me = Iri(webid_for(authority))
    triples = [
        Triple(doc, Iri(vocab.TYPE), Iri(vocab.FOAF_PROFILE_DOC)),
        Triple(doc, Iri(vocab.FOAF_MAKER), me),
        Triple(me, Iri(vocab.TYPE), Iri(vocab.FOAF_PERSON)),
        Triple(me, Iri(vocab.FOAF_NAME), Literal(name)),
        Triple(me, Iri(vocab.LDP_INBOX), Iri(f"https://{authority}/inbox/")),
    ]
    if zip_code:
        triples.append(Triple(me, Iri(vocab.PHL_ZIP), Literal(zip_code)))
    return Graph(triples, rid.iri)


def root_acl_graph(authority: str) -> Graph:
    """Owner-only full access on the pod root (inherited until overridden)."""
    root_iri = f"https://{authority}/"
    rule = Iri(f"{root_iri}.acl#owner")
    return Graph(
        [
            Triple(rule, Iri(vocab.TYPE), Iri(vocab.ACL_AUTHORIZATION)),
            Triple(rule, Iri(vocab.ACL_ACCESS_TO), Iri(root_iri)),
            Triple(rule, Iri(vocab.ACL_AGENT), Iri(webid_for(authority))),
        ]
        + [
            Triple(rule, Iri(vocab.ACL_MODE), Iri(m))
            for m in (vocab.ACL_READ, vocab.ACL_WRITE, vocab.ACL_CONTROL, vocab.ACL_APPEND)
        ],
    )


def inbox_acl_graph(authority: str) -> Graph:
    """Anyone may drop a notification in; only the owner sees or manages them."""
    inbox_iri = f"https://{authority}/inbox/"
    owner_rule = Iri(f"{inbox_iri}.acl#owner")
    world_rule = Iri(f"{inbox_iri}.acl#world")
    return Graph(
        [
            Triple(owner_rule, Iri(vocab.TYPE), Iri(vocab.ACL_AUTHORIZATION)),
            Triple(owner_rule, Iri(vocab.ACL_ACCESS_TO), Iri(inbox_iri)),
            Triple(owner_rule, Iri(vocab.ACL_AGENT), Iri(webid_for(authority))),
            Triple(world_rule, Iri(vocab.TYPE), Iri(vocab.ACL_AUTHORIZATION)),
            Triple(world_rule, Iri(vocab.ACL_ACCESS_TO), Iri(inbox_iri)),
            Triple(world_rule, Iri(vocab.ACL_AGENT_CLASS), Iri(vocab.FOAF_AGENT)),
            Triple(world_rule, Iri(vocab.ACL_MODE), Iri(vocab.ACL_APPEND)),
        ]
        + [
            Triple(owner_rule, Iri(vocab.ACL_MODE), Iri(m))
            for m in (vocab.ACL_READ, vocab.ACL_WRITE, vocab.ACL_CONTROL, vocab.ACL_APPEND)
        ],
    )


def create_profile(
    store: PodStore, authority: str, name: str, zip_code: Optional[str] = None
) -> WebIdProfile:
    """Provision `/profile/card` plus a root ACL making the owner omnipotent."""
    pod = store.pod(authority)
    rid = card_rid(authority)
    if store.exists(rid):
        raise ProfileExistsError(f"{rid.iri} already exists")
    webid = webid_for(authority)
    profile_container = ResourceId(authority, ("profile",), True)
    if not store.exists(profile_container):
        store.create_container(pod.root_id, "profile")
    card = profile_card_graph(authority, name, zip_code)
    store.create_resource(profile_container, "card", "rdf", serialize_turtle(card).encode())
    store.put_resource(
        pod.root_id.acl_id(), "rdf", serialize_turtle(root_acl_graph(authority)).encode()
    )

    inbox = ResourceId(authority, ("inbox",), True)
    if not store.exists(inbox):
        store.create_container(pod.root_id, "inbox", types=[vocab.INBOX_TYPE])
        store.put_resource(
            inbox.acl_id(), "rdf", serialize_turtle(inbox_acl_graph(authority)).encode()
        )
    return parse_profile(store.resource_graph(rid), webid)


def link_extended(store: PodStore, webid: str, doc_iri: str) -> None:
    """Add one `rdfs:seeAlso` from the main profile to an extended document."""
    rid = card_rid(ResourceId.from_iri(webid).authority)
    graph = store.resource_graph(rid)
    triple = Triple(Iri(webid), Iri(vocab.RDFS_SEE_ALSO), Iri(doc_iri))
    if triple in graph:
        return
    store.update_resource(rid, serialize_turtle(graph.with_triples([triple])).encode())


def authenticate(
    tokens: Mapping[str, str], token: Optional[str], origin: Optional[str] = None
) -> AgentContext:
    """Unknown or missing tokens fall back to the anonymous context."""
    webid = tokens.get(token) if token else None
    return AgentContext(webid=webid, origin=origin)


def trust_network(start: str, depth: int, fetch: Callable[[str], Graph]) -> frozenset:
    """Transitive `foaf:knows` closure up to ``depth`` hops from ``start``.

    Extended profiles linked by `rdfs:seeAlso` count toward the same hop;
    unreachable documents are skipped; cycles terminate because each WebID
    is expanded at most once.
    """
    found: set = set()
    frontier = {start}
    expanded: set = set()
    for _ in range(max(depth, 0)):
        next_frontier: set = set()
        for webid in sorted(frontier):
            if webid in expanded:
                continue
            expanded.add(webid)
            graph = _profile_with_extensions(webid, fetch)
            if graph is None:
                continue
            for o in graph.objects(Iri(webid), vocab.FOAF_KNOWS):
                if isinstance(o, Iri):
                    next_frontier.add(o.value)
            # Some extended profiles hang knows off the document node.
            for doc in _documents_of(webid, graph):
                for o in graph.objects(Iri(doc), vocab.FOAF_KNOWS):
                    if isinstance(o, Iri):
                        next_frontier.add(o.value)
        found |= next_frontier
        frontier = next_frontier - expanded
        if not frontier:
            break
    found.discard(start)
    return frozenset(found)


def _profile_with_extensions(webid: str, fetch: Callable[[str], Graph]) -> Optional[Graph]:
    try:
        graph = fetch(profile_doc_iri(webid))
    except (FetchError, NotFoundError):
        return None
    profile = parse_profile(graph, webid)
    for extra in sorted(profile.see_also):
        try:
            graph = graph.union(fetch(profile_doc_iri(extra)))
        except (FetchError, NotFoundError):
            continue
    return graph


def _documents_of(webid: str, graph: Graph) -> list:
    docs = {profile_doc_iri(webid)}
    for o in graph.objects(Iri(webid), vocab.RDFS_SEE_ALSO):
        if isinstance(o, Iri):
            docs.add(profile_doc_iri(o.value))
    return sorted(docs)
