"""Link-following query over one or many pods.

Three layers, all built on dereferencing (authorized GET + parse):

* ``resolve_path`` — the path-expression pipeline: root WebID, an entry
  path like ``inbox/lab_tests/test1``, and a final property name.
* ``eval_pattern`` — a pod-wide triple-pattern endpoint that only ever
  reflects resources the caller may Read.
* ``federated_query`` — evaluates patterns against several pods and joins
  the bindings on shared variables, under a hard fetch budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional
from urllib.parse import urlsplit

from . import vocab
from .errors import (
    AuthorizationError,
    BudgetExhaustedError,
    FetchError,
    NotFoundError,
    UnresolvableSegmentError,
)
from .identity import profile_doc_iri
from .rdf import Graph, Iri, Literal, Term, Triple, TriplePattern, Var
from .store import PodStore, ResourceId
from .wac import AccessMode, AclEngine, AgentContext


class Budget:
    """Counts every remote interaction a query is allowed to make."""

    def __init__(self, limit: int):
        if limit <= 0:
            raise ValueError("fetch budget must be positive")
        self.limit = limit
        self.spent = 0

    def charge(self, what: str = "") -> None:
        if self.spent >= self.limit:
            raise BudgetExhaustedError(
                f"fetch budget of {self.limit} exhausted" + (f" at {what}" if what else "")
            )
        self.spent += 1


class LocalFetcher:
    """Dereferences IRIs against an in-process store through the normal
    authorization path — the engine's view when it runs inside the server."""

    def __init__(self, store: PodStore, engine: AclEngine, budget: Optional[Budget] = None):
        self.store = store
        self.engine = engine
        self.budget = budget

    def fetch(self, iri: str, ctx: AgentContext) -> Graph:
        doc = iri.split("#", 1)[0]
        if self.budget is not None:
            self.budget.charge(doc)
        try:
            rid = self.store.resolve(doc)
        except NotFoundError as exc:
            raise FetchError(str(exc)) from exc
        decision = self.engine.authorize(ctx, rid, AccessMode.READ)
        if not decision.allowed:
            raise AuthorizationError(decision.reason, mode="Read", resource=rid.iri)
        return self.store.resource_graph(rid)


def dereference(iri: str, ctx: AgentContext, fetcher) -> Graph:
    """GET the document behind an IRI (fragment stripped) as Turtle."""
    return fetcher.fetch(iri.split("#", 1)[0], ctx)


# ---------------------------------------------------------------------------
# Path expressions
# ---------------------------------------------------------------------------

# Short names accepted in entry paths and property positions.
VOCABULARY = {
    "inbox": vocab.LDP_INBOX,
    "seeAlso": vocab.RDFS_SEE_ALSO,
    "knows": vocab.FOAF_KNOWS,
    "name": vocab.FOAF_NAME,
    "maker": vocab.FOAF_MAKER,
    "hasTarget": vocab.OA_HAS_TARGET,
    "bodyValue": vocab.OA_BODY_VALUE,
    "hasMember": vocab.VCARD_HAS_MEMBER,
    "testResult": vocab.PHL_TEST_RESULT,
    "contains": vocab.LDP_CONTAINS,
    "subscriber": vocab.PHL_SUBSCRIBER,
    "focus": vocab.PHL_FOCUS,
    "frame": vocab.PHL_FRAME,
    "frequency": vocab.PHL_FREQUENCY,
    "walkabilityScore": vocab.PHL_WALKABILITY,
    "zip": vocab.PHL_ZIP,
    "value": vocab.PHL_VALUE,
    "code": vocab.PHL_CODE,
}


def resolve_property(name: str) -> str:
    """A property is a short vocabulary name, a prefixed name, or an IRI."""
    if name in VOCABULARY:
        return VOCABULARY[name]
    if name.startswith("http://") or name.startswith("https://") or name.startswith("urn:"):
        return name
    if ":" in name:
        from .rdf import PrefixMap

        return PrefixMap().expand(name).value
    raise UnresolvableSegmentError(name)


@dataclass(frozen=True)
class PathExpression:
    root: str  # WebID
    entry: str  # slash path, may be empty
    property: str

    def segments(self) -> list:
        return [seg for seg in self.entry.split("/") if seg]


def resolve_path(expr: PathExpression, ctx: AgentContext, fetcher) -> set:
    """Follow the entry chain document by document, then match the property.

    Pipeline: (1) profile document from the WebID; (2) each entry segment
    resolved to an IRI using the current document's links (vocabulary terms,
    then container children); (3) the property becomes a triple pattern;
    (4) every hop is a fresh dereference; (5) the pattern is evaluated on
    the final document(s).
    """
    prop_iri = resolve_property(expr.property)
    profile_iri = profile_doc_iri(expr.root)
    focus = expr.root
    try:
        current = dereference(profile_iri, ctx, fetcher)
    except (FetchError, AuthorizationError) as exc:
        raise type(exc)(f"at profile document {profile_iri}: {exc}") from exc

    segments = expr.segments()
    if not segments:
        docs = [current]
        for extra in sorted(_see_also(current, focus)):
            try:
                docs.append(dereference(extra, ctx, fetcher))
            except (FetchError, AuthorizationError):
                continue  # unreachable extended profiles are skipped
        return _match_property(docs, focus, prop_iri)

    for hop, segment in enumerate(segments):
        target, guessed = _resolve_segment(current, focus, segment)
        if target is None:
            raise UnresolvableSegmentError(segment)
        try:
            current = dereference(target, ctx, fetcher)
        except FetchError as exc:
            if guessed:
                # The segment matched nothing in the document; the pod-root
                # guess not existing either means it simply doesn't resolve.
                raise UnresolvableSegmentError(segment) from exc
            raise FetchError(f"at hop {hop} ({segment} -> {target}): {exc}") from exc
        except AuthorizationError as exc:
            raise AuthorizationError(
                f"at hop {hop} ({segment} -> {target}): {exc}", mode="Read", resource=target
            ) from exc
        focus = target
    return _match_property([current], focus, prop_iri)


def _see_also(graph: Graph, webid: str) -> set:
    out = set()
    for subject in (Iri(webid), Iri(profile_doc_iri(webid))):
        for o in graph.objects(subject, vocab.RDFS_SEE_ALSO):
            if isinstance(o, Iri):
                out.add(o.value)
    return out


def _resolve_segment(graph: Graph, focus: str, segment: str):
    """Returns (target IRI or None, guessed) — guessed marks the pod-root
    fallback, whose target existence is only known after fetching."""
    focus_terms = [Iri(v) for v in _slash_variants(focus)]
    if "#" in focus:
        focus_terms.append(Iri(profile_doc_iri(focus)))
    # 1. vocabulary term naming a link from the focus node
    if segment in VOCABULARY:
        for subject in focus_terms:
            found = graph.value(subject, VOCABULARY[segment])
            if isinstance(found, Iri):
                return found.value, False
    # 2. a contained child whose last path segment matches
    for subject in focus_terms:
        for o in graph.objects(subject, vocab.LDP_CONTAINS):
            if isinstance(o, Iri) and _leaf_name(o.value) == segment:
                return o.value, False
    # 3. the pod root's children (lets entries start anywhere in the pod)
    if "#" in focus and segment:
        return f"{_pod_root(focus)}{segment}", True
    return None, False


def _leaf_name(iri: str) -> str:
    return iri.rstrip("/").rsplit("/", 1)[-1]


def _slash_variants(iri: str) -> list:
    if "#" in iri or iri.endswith("//"):
        return [iri]
    if iri.endswith("/"):
        return [iri, iri.rstrip("/")]
    return [iri, iri + "/"]


def _pod_root(webid: str) -> str:
    parts = urlsplit(webid)
    return f"{parts.scheme}://{parts.netloc}/"


def _match_property(docs: Iterable[Graph], focus: str, prop_iri: str) -> set:
    subjects = {Iri(v) for v in _slash_variants(focus)}
    for doc in docs:
        if doc.base_iri:
            subjects.add(Iri(doc.base_iri))
    if "#" in focus:
        subjects.add(Iri(profile_doc_iri(focus)))
    out: set = set()
    for doc in docs:
        for subject in subjects:
            out |= doc.objects(subject, prop_iri)
    return out


# ---------------------------------------------------------------------------
# Pattern endpoint
# ---------------------------------------------------------------------------


def eval_pattern(
    store: PodStore, engine: AclEngine, authority: str, pattern: TriplePattern, ctx: AgentContext
) -> set:
    """Match a pattern over every resource in the pod the ctx may Read.

    Scope is container listings plus RDF leaf bodies; ACL documents are
    metadata and stay out of query results.
    """
    pod = store.pod(authority)
    matched: set = set()
    stack = [pod.root_id]
    while stack:
        rid = stack.pop()
        if store.is_container(rid):
            children = store.list_children(rid)
            stack.extend(children)
            if engine.authorize(ctx, rid, AccessMode.READ).allowed:
                matched |= store.container_graph(rid).match(pattern)
        else:
            if rid.name.endswith(".acl"):
                continue
            try:
                resource = store.get_resource(rid)
            except NotFoundError:
                continue
            if resource.kind != "rdf":
                continue
            if engine.authorize(ctx, rid, AccessMode.READ).allowed:
                matched |= resource.graph().match(pattern)
    return matched


def parse_pattern_params(s: str, p: str, o: str) -> TriplePattern:
    """Decode the endpoint's query parameters: `_` is a wildcard and an
    object starting with `\"` is a literal (optionally `\"lex\"^^<dt>`)."""
    return TriplePattern(_decode_term(s), _decode_term(p), _decode_term(o, literal_ok=True))


def _decode_term(raw: str, literal_ok: bool = False):
    if raw is None or raw == "" or raw == "_":
        return None
    if raw.startswith('"'):
        if not literal_ok:
            raise ValueError("literals only allowed in the object position")
        body = raw[1:]
        if '"^^' in body:
            lexical, dt = body.rsplit('"^^', 1)
            return Literal(lexical, dt.strip("<>"))
        return Literal(body.rstrip('"'))
    return Iri(raw)


def encode_term(term) -> str:
    if term is None or isinstance(term, Var):
        return "_"
    if isinstance(term, str):  # bare strings are IRI shorthand, as in patterns
        return term
    if isinstance(term, Literal):
        if term.datatype and term.datatype != vocab.XSD_NS + "string":
            return f'"{term.lexical}"^^<{term.datatype}>'
        return f'"{term.lexical}"'
    return term.value


# ---------------------------------------------------------------------------
# Federation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FederationConfig:
    """Which pods to ask, and how many fetches the whole query may spend."""

    endpoints: tuple
    fetch_budget: int = 50

    def __post_init__(self):
        if self.fetch_budget <= 0:
            raise ValueError("fetch budget must be positive")
        authorities = [a for a, _ in self.endpoints]
        if len(set(authorities)) != len(authorities):
            raise ValueError("duplicate authorities in federation config")


def federated_query(
    patterns: list,
    endpoints: dict,
    ctx: AgentContext,
    budget: Optional[Budget] = None,
) -> list:
    """Join triple patterns across pods.

    ``endpoints`` maps authority -> callable(pattern) -> set of Triple;
    each call costs one unit of budget.  Returns a list of bindings
    (dicts var name -> Term), equal to the join over the union of all
    endpoint graphs.  On budget exhaustion the partial bindings computed
    so far ride along on the error.
    """
    if not patterns:
        raise ValueError("at least one pattern required")
    budget = budget or Budget(50)
    order = sorted(
        range(len(patterns)), key=lambda i: (-patterns[i].bound_count(), i)
    )
    bindings: list = [dict()]
    done: list = []
    for index in order:
        pattern = patterns[index]
        matches: set = set()
        try:
            for authority in sorted(endpoints):
                budget.charge(f"pattern {index} at {authority}")
                matches |= endpoints[authority](pattern)
        except BudgetExhaustedError as exc:
            raise BudgetExhaustedError(str(exc), partial=bindings) from exc
        bindings = _extend(bindings, pattern, matches)
        done.append(index)
        if not bindings:
            break
    return bindings


def _extend(bindings: list, pattern: TriplePattern, matches: set) -> list:
    out = []
    for binding in bindings:
        for triple in matches:
            merged = _unify(binding, pattern, triple)
            if merged is not None:
                out.append(merged)
    # deduplicate on the full variable assignment
    seen = set()
    unique = []
    for b in out:
        key = tuple(sorted((k, repr(v)) for k, v in b.items()))
        if key not in seen:
            seen.add(key)
            unique.append(b)
    return unique


def _unify(binding: dict, pattern: TriplePattern, triple: Triple) -> Optional[dict]:
    merged = dict(binding)
    for wanted, actual in (
        (pattern.subject, triple.subject),
        (pattern.predicate, triple.predicate),
        (pattern.object, triple.object),
    ):
        if isinstance(wanted, Var):
            if wanted.name in merged and merged[wanted.name] != actual:
                return None
            merged[wanted.name] = actual
        elif wanted is None:
            continue
        elif isinstance(wanted, str):
            if not (isinstance(actual, Iri) and actual.value == wanted):
                return None
        elif wanted != actual:
            return None
    return merged


def substituted(pattern: TriplePattern, binding: dict) -> TriplePattern:
    def sub(pos):
        if isinstance(pos, Var) and pos.name in binding:
            return binding[pos.name]
        return pos

    return TriplePattern(sub(pattern.subject), sub(pattern.predicate), sub(pattern.object))
