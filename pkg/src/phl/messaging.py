"""Inbox notifications, channel messages with subscriber fan-out,
cross-pod annotations, and resource sharing.

Everything here is "just resources": a notification is a child of an inbox
container, a channel's subscriber list is an RDF document inside the
channel, an annotation lives in its author's pod and points at the target
with `oa:hasTarget`.  All writes go through the normal authorization path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from . import vocab
from .errors import (
    AuthorizationError,
    FetchError,
    NotFoundError,
    UnsupportedPayloadError,
)
from .identity import parse_profile, profile_doc_iri, webid_for
from .rdf import Graph, Iri, Literal, Triple, TurtleSyntaxError, parse_turtle, serialize_turtle
from .store import PodStore, ResourceId
from .wac import AccessMode, AclEngine, AgentContext

SUBSCRIBERS_NAME = "subscribers"


@dataclass(frozen=True)
class Delivery:
    """Outcome of one fan-out or share push."""

    recipient: str
    inbox: Optional[str]
    delivered: bool
    detail: str = ""


class MessagingService:
    def __init__(self, store: PodStore, engine: AclEngine):
        self.store = store
        self.engine = engine

    # ------------------------------------------------------------------
    # Notifications

    def send_notification(self, inbox: ResourceId, payload: bytes, ctx: AgentContext) -> ResourceId:
        decision = self.engine.authorize(ctx, inbox, AccessMode.APPEND)
        if not decision.allowed:
            raise AuthorizationError(decision.reason, mode="Append", resource=inbox.iri)
        try:
            parse_turtle(payload.decode("utf-8"), inbox.iri)
        except (TurtleSyntaxError, UnicodeDecodeError) as exc:
            raise UnsupportedPayloadError(f"notification payload must be RDF: {exc}") from exc
        return self.store.create_resource(inbox, None, "rdf", payload)

    def inbox_for(self, webid: str) -> ResourceId:
        """The inbox a profile advertises, defaulting to `/inbox/`."""
        authority = ResourceId.from_iri(webid).authority
        try:
            graph = self.store.resource_graph(self.store.resolve(profile_doc_iri(webid)))
            advertised = parse_profile(graph, webid).inbox
        except NotFoundError:
            advertised = None
        iri = advertised or f"https://{authority}/inbox/"
        return self.store.resolve(iri)

    # ------------------------------------------------------------------
    # Channels

    def post_message(self, channel: ResourceId, body: bytes, ctx: AgentContext):
        """Create a message and push one notification per subscriber.

        Returns (message id, deliveries); failed deliveries never roll the
        message back.
        """
        decision = self.engine.authorize(ctx, channel, AccessMode.APPEND)
        if not decision.allowed:
            raise AuthorizationError(decision.reason, mode="Append", resource=channel.iri)
        message = self.store.create_resource(channel, None, "rdf", body)
        deliveries = self.fan_out(channel, message)
        return message, deliveries

    def subscribe(self, channel: ResourceId, subscriber: str, ctx: AgentContext) -> None:
        """Self-service subscription, gated on Read access to the channel."""
        decision = self.engine.authorize(ctx, channel, AccessMode.READ)
        if not decision.allowed:
            raise AuthorizationError(decision.reason, mode="Read", resource=channel.iri)
        rid = channel.child(SUBSCRIBERS_NAME)
        triple = Triple(Iri(channel.iri), Iri(vocab.PHL_SUBSCRIBER), Iri(subscriber))
        if self.store.exists(rid):
            graph = self.store.resource_graph(rid)
            if triple in graph:
                return
            graph = graph.with_triples([triple])
            self.store.update_resource(rid, serialize_turtle(graph).encode())
        else:
            graph = Graph([triple], rid.iri)
            self.store.create_resource(channel, SUBSCRIBERS_NAME, "rdf", serialize_turtle(graph).encode())

    def subscribers(self, channel: ResourceId) -> list:
        rid = channel.child(SUBSCRIBERS_NAME)
        if not self.store.exists(rid):
            return []
        graph = self.store.resource_graph(rid)
        return sorted(
            o.value
            for o in graph.objects(Iri(channel.iri), vocab.PHL_SUBSCRIBER)
            if isinstance(o, Iri)
        )

    def fan_out(self, channel: ResourceId, message: ResourceId) -> list:
        """One notification per subscriber; delivered and failed together
        always cover the whole subscriber set."""
        sender = self.store.pod(channel.authority).owner_webid or webid_for(channel.authority)
        ctx = AgentContext(webid=sender)
        deliveries = []
        for subscriber in self.subscribers(channel):
            deliveries.append(
                self._push(subscriber, message.iri, sender, ctx, note_type=vocab.PHL_NOTIFICATION)
            )
        return deliveries

    # ------------------------------------------------------------------
    # Annotations and sharing

    def annotate(
        self, author_authority: str, target: str, body_text: str, ctx: AgentContext
    ):
        """Store a comment in the author's pod linking the target resource,
        then notify the target pod's owner (unless annotating yourself)."""
        if ctx.webid is None:
            raise AuthorizationError("annotation requires an authenticated author")
        comments = self._comments_container(author_authority, ctx)
        decision = self.engine.authorize(ctx, comments, AccessMode.APPEND)
        if not decision.allowed:
            raise AuthorizationError(decision.reason, mode="Append", resource=comments.iri)
        graph = Graph(
            [
                Triple(Iri(""), Iri(vocab.TYPE), Iri(vocab.OA_ANNOTATION)),
                Triple(Iri(""), Iri(vocab.OA_HAS_TARGET), Iri(target)),
                Triple(Iri(""), Iri(vocab.OA_BODY_VALUE), Literal(body_text)),
            ]
        )
        annotation = self.store.create_resource(
            comments, None, "rdf", serialize_turtle(graph).encode()
        )

        target_authority = ResourceId.from_iri(target).authority
        try:
            owner = self.store.pod(target_authority).owner_webid
        except NotFoundError:
            owner = ""
        if not owner or owner == ctx.webid:
            return annotation, Delivery(owner or target_authority, None, False, "self or unknown owner; not notified")
        delivery = self._push(owner, annotation.iri, ctx.webid, ctx, note_type=vocab.OA_ANNOTATION)
        return annotation, delivery

    def share_resource(
        self,
        resource: ResourceId,
        recipient: str,
        ctx: AgentContext,
        grant_read: bool = False,
    ) -> Delivery:
        """Push a pointer to the resource into the recipient's inbox;
        optionally also append a Read authorization (needs Control)."""
        decision = self.engine.authorize(ctx, resource, AccessMode.READ)
        if not decision.allowed:
            raise AuthorizationError(decision.reason, mode="Read", resource=resource.iri)
        if grant_read:
            self.grant_read(resource, recipient, ctx)
        sender = ctx.webid or "anonymous"
        return self._push(recipient, resource.iri, sender, ctx, note_type=vocab.PHL_NOTIFICATION)

    def grant_read(self, resource: ResourceId, recipient: str, ctx: AgentContext) -> None:
        decision = self.engine.authorize(ctx, resource, AccessMode.CONTROL)
        if not decision.allowed:
            raise AuthorizationError(decision.reason, mode="Control", resource=resource.iri)
        acl_rid = resource.acl_id()
        subject = Iri(f"{acl_rid.iri}#shared-{_fragment_safe(recipient)}")
        grant = [
            Triple(subject, Iri(vocab.TYPE), Iri(vocab.ACL_AUTHORIZATION)),
            Triple(subject, Iri(vocab.ACL_ACCESS_TO), Iri(resource.iri)),
            Triple(subject, Iri(vocab.ACL_MODE), Iri(vocab.ACL_READ)),
            Triple(subject, Iri(vocab.ACL_AGENT), Iri(recipient)),
        ]
        if self.store.exists(acl_rid):
            graph = self.store.resource_graph(acl_rid)
        else:
            # Starting a resource-local ACL replaces inherited rules wholesale,
            # so carry the effective ones over before adding the new grant.
            effective_rid, _ = self.engine.effective_acl(resource)
            graph = Graph((), acl_rid.iri)
            if effective_rid is not None:
                graph = self.store.resource_graph(effective_rid)
                graph = Graph(graph.triples, acl_rid.iri)
        self.store.put_resource(acl_rid, "rdf", serialize_turtle(graph.with_triples(grant)).encode())

    # ------------------------------------------------------------------

    def _comments_container(self, authority: str, ctx: AgentContext) -> ResourceId:
        rid = ResourceId(authority, ("comments",), True)
        if not self.store.exists(rid):
            pod = self.store.pod(authority)
            decision = self.engine.authorize(ctx, pod.root_id, AccessMode.WRITE)
            if not decision.allowed:
                raise AuthorizationError(decision.reason, mode="Write", resource=pod.root_id.iri)
            self.store.create_container(pod.root_id, "comments")
        return rid

    def _push(
        self, recipient: str, target_iri: str, sender: str, ctx: AgentContext, note_type: str
    ) -> Delivery:
        try:
            inbox = self.inbox_for(recipient)
        except (NotFoundError, FetchError) as exc:
            return Delivery(recipient, None, False, f"inbox unreachable: {exc}")
        payload = Graph(
            [
                Triple(Iri(""), Iri(vocab.TYPE), Iri(note_type)),
                Triple(Iri(""), Iri(vocab.OA_HAS_TARGET), Iri(target_iri)),
                Triple(Iri(""), Iri(vocab.PHL_SENDER), Iri(sender)),
            ]
        )
        body = serialize_turtle(payload).encode()
        try:
            created = self.send_notification(inbox, body, ctx)
        except (AuthorizationError, NotFoundError, UnsupportedPayloadError) as exc:
            return Delivery(recipient, inbox.iri, False, str(exc))
        return Delivery(recipient, inbox.iri, True, created.iri)


def _fragment_safe(webid: str) -> str:
    return "".join(c if c.isalnum() else "-" for c in webid)[:80]
