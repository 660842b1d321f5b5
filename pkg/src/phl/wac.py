"""Web Access Control evaluation.

Parses Authorization resources, resolves agent groups (possibly living in
other pods), and decides allow/deny for an (agent, app origin, resource,
mode) request.  Deny by default; an ancestor container's ACL governs
descendants wholesale until a resource stores its own `.acl`, which then
fully replaces the inherited rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional
from urllib.parse import urlsplit

from . import vocab
from .errors import FetchError, MalformedAclError, NotFoundError
from .rdf import Graph, Iri, Triple, serialize_turtle
from .store import PodStore, ResourceId


class AccessMode(Enum):
    READ = "Read"
    WRITE = "Write"
    CONTROL = "Control"
    APPEND = "Append"


_MODE_BY_IRI = {
    vocab.ACL_READ: AccessMode.READ,
    vocab.ACL_WRITE: AccessMode.WRITE,
    vocab.ACL_CONTROL: AccessMode.CONTROL,
    vocab.ACL_APPEND: AccessMode.APPEND,
}


def mode_satisfied(requested: AccessMode, granted: set) -> bool:
    """Modes are independent, except Write stands in for Append."""
    if requested in granted:
        return True
    return requested is AccessMode.APPEND and AccessMode.WRITE in granted


@dataclass(frozen=True)
class Authorization:
    id: str
    access_to: frozenset
    modes: frozenset
    agents: frozenset = frozenset()
    agent_groups: frozenset = frozenset()
    agent_classes: frozenset = frozenset()
    default_flag: bool = False


@dataclass(frozen=True)
class AgentGroup:
    id: str
    uid: str = ""
    members: frozenset = frozenset()


@dataclass(frozen=True)
class TrustedApp:
    origin: str
    modes: frozenset


@dataclass(frozen=True)
class AgentContext:
    """Who is asking: a WebID (or anonymous) plus an optional app origin."""

    webid: Optional[str] = None
    origin: Optional[str] = None

    @property
    def is_anonymous(self) -> bool:
        return self.webid is None


@dataclass(frozen=True)
class Decision:
    allowed: bool
    rule: Optional[str]  # IRI of the matched authorization, if any
    reason: str
    acl: Optional[str] = None

    def log_line(self, ctx: AgentContext, resource: str, mode: AccessMode) -> str:
        return (
            f"decision agent={ctx.webid or 'anon'} origin={ctx.origin or '-'} "
            f"resource={resource} mode={mode.value} rule={self.rule or '-'}"
        )


def parse_acl(graph: Graph) -> list:
    """One Authorization per subject carrying acl:accessTo; other triples ignored."""
    subjects = sorted(
        graph.subjects(vocab.ACL_ACCESS_TO),
        key=lambda s: getattr(s, "value", getattr(s, "label", "")),
    )
    authorizations = []
    for subject in subjects:
        sv = subject.value if isinstance(subject, Iri) else f"_:{subject.label}"
        access_to = frozenset(
            o.value for o in graph.objects(subject, vocab.ACL_ACCESS_TO) if isinstance(o, Iri)
        )
        modes = frozenset(
            _MODE_BY_IRI[o.value]
            for o in graph.objects(subject, vocab.ACL_MODE)
            if isinstance(o, Iri) and o.value in _MODE_BY_IRI
        )
        agents = frozenset(
            o.value for o in graph.objects(subject, vocab.ACL_AGENT) if isinstance(o, Iri)
        )
        groups = frozenset(
            o.value for o in graph.objects(subject, vocab.ACL_AGENT_GROUP) if isinstance(o, Iri)
        )
        classes = frozenset(
            o.value for o in graph.objects(subject, vocab.ACL_AGENT_CLASS) if isinstance(o, Iri)
        )
        default_flag = bool(list(graph.objects(subject, vocab.ACL_DEFAULT)))
        if not modes:
            raise MalformedAclError(f"authorization {sv} grants no access mode")
        if not (agents or groups or classes):
            raise MalformedAclError(f"authorization {sv} names no agent clause")
        authorizations.append(
            Authorization(sv, access_to, modes, agents, groups, classes, default_flag)
        )
    return authorizations


_MODE_IRI_BY_NAME = {
    "Read": vocab.ACL_READ,
    "Write": vocab.ACL_WRITE,
    "Control": vocab.ACL_CONTROL,
    "Append": vocab.ACL_APPEND,
}


def compose_acl_turtle(resource_iri: str, rules: list) -> str:
    """Build a WAC document from plain rule dicts.

    Each rule may carry ``agent`` (WebID or list), ``group`` (IRI or list),
    ``public: true`` (everyone), ``authenticated: true`` (any WebID), and
    must carry ``modes`` (subset of Read/Write/Control/Append).  The same
    shape backs the CLI scenario `set-acl` step and the ACL editor form.
    """
    acl_iri = ResourceId.from_iri(resource_iri).acl_id().iri
    triples = []
    for index, rule in enumerate(rules):
        subject = Iri(f"{acl_iri}#rule-{index}")
        triples.append(Triple(subject, Iri(vocab.TYPE), Iri(vocab.ACL_AUTHORIZATION)))
        triples.append(Triple(subject, Iri(vocab.ACL_ACCESS_TO), Iri(resource_iri)))
        agents = rule.get("agent") or []
        if isinstance(agents, str):
            agents = [agents]
        for webid in agents:
            triples.append(Triple(subject, Iri(vocab.ACL_AGENT), Iri(webid)))
        groups = rule.get("group") or []
        if isinstance(groups, str):
            groups = [groups]
        for group in groups:
            triples.append(Triple(subject, Iri(vocab.ACL_AGENT_GROUP), Iri(group)))
        if rule.get("public"):
            triples.append(Triple(subject, Iri(vocab.ACL_AGENT_CLASS), Iri(vocab.FOAF_AGENT)))
        if rule.get("authenticated"):
            triples.append(
                Triple(subject, Iri(vocab.ACL_AGENT_CLASS), Iri(vocab.ACL_AUTHENTICATED_AGENT))
            )
        modes = rule.get("modes") or []
        if not modes:
            raise MalformedAclError(f"rule {index} grants no access mode")
        if not (agents or groups or rule.get("public") or rule.get("authenticated")):
            raise MalformedAclError(f"rule {index} names no agent clause")
        for mode in modes:
            if mode not in _MODE_IRI_BY_NAME:
                raise MalformedAclError(f"rule {index}: unknown mode {mode!r}")
            triples.append(Triple(subject, Iri(vocab.ACL_MODE), Iri(_MODE_IRI_BY_NAME[mode])))
    return serialize_turtle(Graph(triples, acl_iri))


def resolve_group(group_iri: str, fetch: Callable[[str], Graph]) -> AgentGroup:
    """Membership is exactly the document's vcard:hasMember triples.

    An unreachable group document yields empty membership so that a network
    failure can never widen access.
    """
    doc_iri = group_iri.split("#", 1)[0]
    try:
        graph = fetch(doc_iri)
    except (FetchError, NotFoundError):
        return AgentGroup(group_iri)
    subject = Iri(group_iri)
    members = frozenset(
        o.value for o in graph.objects(subject, vocab.VCARD_HAS_MEMBER) if isinstance(o, Iri)
    )
    uid = ""
    for o in graph.objects(subject, vocab.VCARD_HAS_UID):
        uid = getattr(o, "value", getattr(o, "lexical", ""))
        break
    return AgentGroup(group_iri, uid, members)


def parse_trusted_apps(profile: Graph, webid: str) -> list:
    """acl:trustedApp blank nodes hanging off the profile owner's WebID."""
    apps = []
    for node in profile.objects(Iri(webid), vocab.ACL_TRUSTED_APP):
        origins = [
            o.value for o in profile.objects(node, vocab.ACL_ORIGIN) if isinstance(o, Iri)
        ]
        modes = frozenset(
            _MODE_BY_IRI[o.value]
            for o in profile.objects(node, vocab.ACL_MODE)
            if isinstance(o, Iri) and o.value in _MODE_BY_IRI
        )
        for origin in origins:
            apps.append(TrustedApp(origin, modes))
    return apps


def normalize_origin(origin: str) -> str:
    """Origins compare by scheme and host case-insensitively (host lowered)."""
    parts = urlsplit(origin.strip().rstrip("/"))
    if not parts.scheme:
        return origin.strip().rstrip("/").lower()
    host = parts.netloc.lower()
    return f"{parts.scheme.lower()}://{host}"


def _covers(auth: Authorization, rid: ResourceId) -> bool:
    """An authorization covers a resource it names, or any descendant of a
    container it names (wholesale inheritance)."""
    targets = {_canonical(t) for t in auth.access_to}
    chain = []
    current: Optional[ResourceId] = rid
    while current is not None:
        chain.append(_canonical(current.iri))
        current = current.parent()
    return any(link in targets for link in chain)


def _canonical(iri: str) -> str:
    parts = urlsplit(iri)
    if parts.scheme not in ("http", "https"):
        return iri.rstrip("/")
    path = (parts.path or "/").rstrip("/")
    return f"https://{parts.netloc.lower()}{path}"


class AclEngine:
    """Decides requests against the pods in one store.

    ``fetch_graph`` dereferences document IRIs for group resolution; the
    default reads straight from the store with server privilege, which is
    what cross-pod lookups inside one process need.
    """

    def __init__(self, store: PodStore, fetch_graph: Optional[Callable[[str], Graph]] = None):
        self.store = store
        self.fetch_graph = fetch_graph or self._local_fetch
        # Parse caches keyed by (iri, body bytes): any rewrite of the
        # document changes the key, so entries never go stale.
        self._acl_cache: dict = {}
        self._graph_cache: dict = {}

    def _local_fetch(self, doc_iri: str) -> Graph:
        rid = self.store.resolve(doc_iri)
        if rid.is_container:
            return self.store.resource_graph(rid)
        resource = self.store.get_resource(rid)
        if resource.kind != "rdf":
            raise NotFoundError(f"{rid.iri} has no RDF representation")
        key = (rid.iri, resource.body)
        graph = self._graph_cache.get(key)
        if graph is None:
            graph = resource.graph()
            self._graph_cache[key] = graph
        return graph

    def effective_acl(self, rid: ResourceId):
        try:
            acl_rid = self.store.locate_acl(rid)
        except NotFoundError:
            return None, []
        resource = self.store.get_resource(acl_rid)
        key = (acl_rid.iri, resource.body)
        cached = self._acl_cache.get(key)
        if cached is None:
            try:
                cached = parse_acl(resource.graph())
            except MalformedAclError:
                # A broken ACL document must fail closed.
                cached = []
            self._acl_cache[key] = cached
        return acl_rid, cached

    def authorize(self, ctx: AgentContext, rid: ResourceId, mode: AccessMode) -> Decision:
        acl_rid, authorizations = self.effective_acl(rid)
        acl_iri = acl_rid.iri if acl_rid else None
        rule: Optional[str] = None
        if acl_rid is None:
            # An ungoverned pod (no ACL document on the whole ancestor
            # chain) stays usable by its recorded owner so it can be
            # provisioned over HTTP; everyone else is denied.
            owner = self._pod_owner(rid.authority)
            if not owner or ctx.webid != owner:
                return Decision(False, None, "no effective authorization", acl_iri)
            rule = "owner"
        elif not authorizations:
            return Decision(False, None, "no effective authorization", acl_iri)
        else:
            matched: Optional[Authorization] = None
            group_cache: dict = {}
            for auth in authorizations:
                if not mode_satisfied(mode, auth.modes):
                    continue
                if not _covers(auth, rid):
                    continue
                if self._agent_matches(ctx, auth, group_cache):
                    matched = auth
                    break
            if matched is None:
                return Decision(False, None, f"no authorization grants {mode.value}", acl_iri)
            rule = matched.id

        if ctx.origin is not None:
            trusted = self._owner_trusted_apps(rid)
            if trusted:
                wanted = normalize_origin(ctx.origin)
                origin_modes: set = set()
                for app in trusted:
                    if normalize_origin(app.origin) == wanted:
                        origin_modes |= set(app.modes)
                if not mode_satisfied(mode, origin_modes):
                    return Decision(
                        False,
                        None,
                        f"origin {ctx.origin} not trusted for {mode.value}",
                        acl_iri,
                    )
        return Decision(True, rule, f"granted by {rule}", acl_iri)

    def _pod_owner(self, authority: str) -> Optional[str]:
        try:
            return self.store.pod(authority).owner_webid
        except NotFoundError:
            return None

    def _agent_matches(self, ctx: AgentContext, auth: Authorization, cache: dict) -> bool:
        if vocab.FOAF_AGENT in auth.agent_classes:
            return True
        if ctx.webid is None:
            return False
        if vocab.ACL_AUTHENTICATED_AGENT in auth.agent_classes:
            return True
        if ctx.webid in auth.agents:
            return True
        for group_iri in sorted(auth.agent_groups):
            if group_iri not in cache:
                cache[group_iri] = resolve_group(group_iri, self.fetch_graph)
            if ctx.webid in cache[group_iri].members:
                return True
        return False

    def _owner_trusted_apps(self, rid: ResourceId) -> list:
        try:
            pod = self.store.pod(rid.authority)
        except NotFoundError:
            return []
        webid = pod.owner_webid
        if not webid:
            return []
        try:
            profile = self.fetch_graph(webid.split("#", 1)[0])
        except (FetchError, NotFoundError):
            return []
        return parse_trusted_apps(profile, webid)
