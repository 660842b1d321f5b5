"""HTTP facade over the pod store.

One WSGI app hosts every pod in the store, telling them apart by the Host
header, so a whole multi-actor world runs in a single process while staying
separable on the wire.  The request pipeline is fixed: authenticate →
route → authorize (mode derived from the method) → operation → serialize.
No handler does its own ad-hoc authorization.
"""

from __future__ import annotations

import logging
import mimetypes
import threading
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, quote
from wsgiref.simple_server import WSGIRequestHandler, make_server

from . import vocab
from .errors import (
    AuthorizationError,
    ContainerNotEmptyError,
    InvalidSlugError,
    MalformedAclError,
    NotFoundError,
    SlugConflictError,
    UnsupportedPayloadError,
)
from .identity import authenticate, parse_profile
from .messaging import MessagingService
from .query import eval_pattern, parse_pattern_params
from .rdf import Graph, TurtleSyntaxError, parse_turtle, serialize_turtle
from .store import PodStore, ResourceId
from .wac import AccessMode, AclEngine, AgentContext, parse_acl

log = logging.getLogger("phl.server")

TURTLE = "text/turtle"
HTML = "text/html"
MODE_HINT_HEADER = "X-Needed-Mode"


class HttpError(Exception):
    def __init__(self, status: int, message: str, headers: Optional[list] = None):
        super().__init__(message)
        self.status = status
        self.message = message
        self.headers = headers or []


_STATUS_TEXT = {
    200: "OK", 201: "Created", 204: "No Content", 400: "Bad Request",
    401: "Unauthorized", 403: "Forbidden", 404: "Not Found",
    405: "Method Not Allowed", 406: "Not Acceptable", 409: "Conflict",
    411: "Length Required", 415: "Unsupported Media Type",
    500: "Internal Server Error",
}


class PhlServer:
    """The WSGI application plus everything it needs to answer requests."""

    def __init__(
        self,
        store: PodStore,
        tokens: Optional[dict] = None,
        ui_dist: Optional[str] = None,
    ):
        self.store = store
        self.tokens = tokens or {}
        self.engine = AclEngine(store)
        self.messaging = MessagingService(store, self.engine)
        self.ui_dist = Path(ui_dist) if ui_dist else None

    # ------------------------------------------------------------------
    # WSGI entry point

    def wsgi_app(self, environ, start_response):
        try:
            status, headers, body = self._handle(environ)
        except HttpError as exc:
            status, headers, body = (
                exc.status,
                exc.headers + [("Content-Type", "text/plain; charset=utf-8")],
                (exc.message + "\n").encode(),
            )
        except Exception:  # pragma: no cover - last-resort guard
            log.exception("unhandled error")
            status, headers, body = 500, [("Content-Type", "text/plain")], b"internal error\n"
        origin = environ.get("HTTP_ORIGIN")
        if origin:
            headers = headers + [
                ("Access-Control-Allow-Origin", origin),
                ("Access-Control-Allow-Headers", "Authorization, Content-Type, Slug, Link"),
                ("Access-Control-Allow-Methods", "GET, HEAD, POST, PUT, DELETE, OPTIONS"),
                ("Access-Control-Expose-Headers", "Location, Link, " + MODE_HINT_HEADER),
            ]
        headers.append(("Content-Length", str(len(body))))
        start_response(f"{status} {_STATUS_TEXT.get(status, 'Unknown')}", headers)
        if environ.get("REQUEST_METHOD") == "HEAD":
            return [b""]
        return [body]

    __call__ = wsgi_app

    # ------------------------------------------------------------------

    def _handle(self, environ):
        method = environ.get("REQUEST_METHOD", "GET").upper()
        path = environ.get("PATH_INFO", "/")
        host = (environ.get("HTTP_HOST") or environ.get("SERVER_NAME", "")).split(":")[0].lower()

        if method == "OPTIONS":
            return 204, [("Allow", "GET, HEAD, POST, PUT, DELETE, OPTIONS")], b""
        if path.startswith("/ui") and self.ui_dist is not None:
            return self._serve_ui(path)

        ctx = self._authenticate(environ)

        try:
            self.store.pod(host)
        except NotFoundError:
            raise HttpError(404, f"no pod served for host {host!r}")

        if path == "/query" and method in ("GET", "HEAD"):
            return self._pattern_endpoint(host, environ, ctx)

        if path.endswith("/*") and method in ("GET", "HEAD"):
            return self._glob(host, path[:-2] or "/", environ, ctx)

        if method in ("GET", "HEAD"):
            return self._get(host, path, environ, ctx)
        if method == "POST":
            return self._post(host, path, environ, ctx)
        if method == "PUT":
            return self._put(host, path, environ, ctx)
        if method == "DELETE":
            return self._delete(host, path, ctx)
        raise HttpError(405, f"method {method} not supported")

    # ------------------------------------------------------------------
    # Pipeline pieces

    def _authenticate(self, environ) -> AgentContext:
        header = environ.get("HTTP_AUTHORIZATION", "")
        origin = environ.get("HTTP_ORIGIN") or None
        if not header:
            return AgentContext(webid=None, origin=origin)
        scheme, _, token = header.partition(" ")
        if scheme.lower() != "bearer" or not token.strip():
            raise HttpError(401, "malformed Authorization header")
        ctx = authenticate(self.tokens, token.strip(), origin)
        if ctx.webid is None:
            raise HttpError(401, "unknown bearer token")
        return ctx

    def _authorize(self, ctx: AgentContext, rid: ResourceId, mode: AccessMode) -> None:
        governed = rid.governed_id()
        if governed is not None:
            mode = AccessMode.CONTROL
            decision = self.engine.authorize(ctx, governed, mode)
        else:
            decision = self.engine.authorize(ctx, rid, mode)
        log.info(decision.log_line(ctx, "/" + "/".join(rid.segments), mode))
        if not decision.allowed:
            raise HttpError(
                403,
                f"access denied: {decision.reason}",
                headers=[(MODE_HINT_HEADER, mode.value)],
            )

    def _target(self, host: str, path: str) -> ResourceId:
        iri = f"https://{host}{path}"
        return self.store.resolve(iri)  # raises NotFoundError

    # ------------------------------------------------------------------
    # Handlers

    def _get(self, host, path, environ, ctx):
        try:
            rid = self._target(host, path)
        except NotFoundError as exc:
            raise HttpError(404, str(exc))
        self._authorize(ctx, rid, AccessMode.READ)

        if rid.is_container:
            want = _negotiate(environ.get("HTTP_ACCEPT", ""), [TURTLE, HTML])
            if want is None:
                raise HttpError(406, "container available as text/turtle or text/html")
            headers = self._link_headers(rid)
            if want == HTML:
                body = self._container_html(rid).encode()
                return 200, [("Content-Type", HTML + "; charset=utf-8")] + headers, body
            body = serialize_turtle(self.store.container_graph(rid)).encode()
            return 200, [("Content-Type", TURTLE + "; charset=utf-8")] + headers, body

        resource = self.store.get_resource(rid)
        if resource.kind == "rdf":
            if _negotiate(environ.get("HTTP_ACCEPT", ""), [TURTLE]) is None:
                raise HttpError(406, "resource available as text/turtle")
            content_type = TURTLE + "; charset=utf-8"
        else:
            content_type = resource.content_type
        return 200, [("Content-Type", content_type)] + self._link_headers(rid), resource.body

    def _glob(self, host, container_path, environ, ctx):
        try:
            rid = self._target(host, container_path)
        except NotFoundError as exc:
            raise HttpError(404, str(exc))
        if not rid.is_container:
            raise HttpError(404, "glob only applies to containers")
        self._authorize(ctx, rid, AccessMode.READ)
        may_read = lambda child: self.engine.authorize(ctx, child, AccessMode.READ).allowed
        graph = self.store.glob_aggregate(rid, may_read)
        if _negotiate(environ.get("HTTP_ACCEPT", ""), [TURTLE]) is None:
            raise HttpError(406, "aggregate available as text/turtle")
        body = serialize_turtle(graph).encode()
        return 200, [("Content-Type", TURTLE + "; charset=utf-8")] + self._link_headers(rid), body

    def _pattern_endpoint(self, host, environ, ctx):
        pod = self.store.pod(host)
        self._authorize(ctx, pod.root_id, AccessMode.READ)
        params = parse_qs(environ.get("QUERY_STRING", ""), keep_blank_values=True)
        try:
            pattern = parse_pattern_params(
                params.get("s", ["_"])[0], params.get("p", ["_"])[0], params.get("o", ["_"])[0]
            )
        except ValueError as exc:
            raise HttpError(400, str(exc))
        matched = eval_pattern(self.store, self.engine, host, pattern, ctx)
        body = serialize_turtle(Graph(matched)).encode()
        return 200, [("Content-Type", TURTLE + "; charset=utf-8")], body

    def _post(self, host, path, environ, ctx):
        try:
            rid = self._target(host, path)
        except NotFoundError as exc:
            raise HttpError(404, str(exc))
        if not rid.is_container:
            raise HttpError(405, "POST targets containers")
        self._authorize(ctx, rid, AccessMode.APPEND)

        body = _read_body(environ)
        content_type = (environ.get("CONTENT_TYPE") or TURTLE).split(";")[0].strip().lower()
        slug = environ.get("HTTP_SLUG") or None
        type_links = _link_rel_types(environ.get("HTTP_LINK") or "")
        wants_container = vocab.LDP_BASIC_CONTAINER in type_links
        extra_types = sorted(type_links - {vocab.LDP_BASIC_CONTAINER, vocab.LDP_CONTAINER})

        container_types = self.store.container_types(rid)
        is_inbox = vocab.INBOX_TYPE in container_types or vocab.LDP_INBOX in container_types
        try:
            if wants_container:
                created = self.store.create_container(rid, slug, types=extra_types)
            elif content_type == TURTLE:
                created = self.store.create_resource(rid, slug, "rdf", body)
            elif is_inbox:
                raise UnsupportedPayloadError("inbox accepts RDF (text/turtle) payloads only")
            else:
                kind = "text" if content_type.startswith("text/") else "binary"
                created = self.store.create_resource(rid, slug, kind, body, content_type)
        except TurtleSyntaxError as exc:
            raise HttpError(400, f"turtle parse error: {exc}")
        except InvalidSlugError as exc:
            raise HttpError(400, str(exc))
        except SlugConflictError as exc:
            raise HttpError(409, str(exc))
        except UnsupportedPayloadError as exc:
            raise HttpError(415, str(exc))

        if vocab.LONG_CHAT_TYPE in container_types and not wants_container:
            deliveries = self.messaging.fan_out(rid, created)
            for d in deliveries:
                log.info(
                    "fan-out channel=%s message=%s recipient=%s delivered=%s",
                    rid.iri, created.iri, d.recipient, d.delivered,
                )
        return 201, [("Location", created.iri)], b""

    def _put(self, host, path, environ, ctx):
        iri = f"https://{host}{path}"
        try:
            rid = self.store.resolve(iri)
        except NotFoundError:
            rid = ResourceId.from_iri(iri)
        if rid.is_container:
            raise HttpError(405, "PUT applies to non-container resources")
        self._authorize(ctx, rid, AccessMode.WRITE)

        body = _read_body(environ)
        content_type = (environ.get("CONTENT_TYPE") or TURTLE).split(";")[0].strip().lower()
        if rid.governed_id() is not None:
            # ACL documents must at least parse as a set of authorizations.
            try:
                parse_acl(parse_turtle(body.decode("utf-8"), rid.iri))
            except (TurtleSyntaxError, UnicodeDecodeError, MalformedAclError) as exc:
                raise HttpError(400, f"invalid ACL document: {exc}")
        kind = "rdf" if content_type == TURTLE else (
            "text" if content_type.startswith("text/") else "binary"
        )
        try:
            created = self.store.put_resource(rid, kind, body, content_type)
        except TurtleSyntaxError as exc:
            raise HttpError(400, f"turtle parse error: {exc}")
        except (InvalidSlugError, SlugConflictError) as exc:
            raise HttpError(409, str(exc))
        except NotFoundError as exc:
            raise HttpError(404, str(exc))
        if created:
            return 201, [("Location", rid.iri)], b""
        return 204, [], b""

    def _delete(self, host, path, ctx):
        try:
            rid = self._target(host, path)
        except NotFoundError as exc:
            raise HttpError(404, str(exc))
        if rid.is_root:
            raise HttpError(405, "cannot delete the pod root")
        self._authorize(ctx, rid, AccessMode.WRITE)
        try:
            self.store.delete_resource(rid)
        except ContainerNotEmptyError as exc:
            raise HttpError(409, str(exc))
        return 204, [], b""

    # ------------------------------------------------------------------
    # Presentation helpers

    def _link_headers(self, rid: ResourceId) -> list:
        links = [f'<{rid.acl_id().iri}>; rel="acl"']
        if rid.is_container:
            links.append(
                f'<https://{rid.authority}/query>; rel="{vocab.PATTERN_ENDPOINT_REL}"'
            )
        if rid.segments == ("profile", "card"):
            webid = f"https://{rid.authority}/profile/card#me"
            try:
                profile = parse_profile(self.store.resource_graph(rid), webid)
                if profile.inbox and self.store.exists(self.store.resolve(profile.inbox)):
                    links.append(f'<{profile.inbox}>; rel="{vocab.LDP_INBOX}"')
            except NotFoundError:
                pass
        return [("Link", ", ".join(links))]

    def _container_html(self, rid: ResourceId) -> str:
        children = self.store.list_children(rid)
        items = "\n".join(
            f'    <li><a href="{quote(child.display_iri, safe=":/#")}">{child.name}</a></li>'
            for child in children
        )
        return (
            "<!DOCTYPE html>\n<html>\n<head><title>"
            f"{rid.iri}</title></head>\n<body>\n  <h1>{rid.iri}</h1>\n  <ul>\n"
            f"{items}\n  </ul>\n</body>\n</html>\n"
        )

    def _serve_ui(self, path: str):
        rel = path[len("/ui"):].lstrip("/") or "index.html"
        target = (self.ui_dist / rel).resolve()
        if not str(target).startswith(str(self.ui_dist.resolve())) or not target.is_file():
            if (self.ui_dist / "index.html").is_file() and "." not in rel:
                target = self.ui_dist / "index.html"  # client-side routing fallback
            else:
                raise HttpError(404, "no such UI asset")
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        return 200, [("Content-Type", content_type)], target.read_bytes()


# ---------------------------------------------------------------------------


def _link_rel_types(header: str) -> set:
    """IRIs carried as `<iri>; rel=\"type\"` entries of a Link header."""
    found = set()
    for entry in header.split(","):
        target, _, params = entry.partition(";")
        target = target.strip()
        if not (target.startswith("<") and target.endswith(">")):
            continue
        rel = ""
        for param in params.split(";"):
            name, _, value = param.strip().partition("=")
            if name.strip().lower() == "rel":
                rel = value.strip().strip('"').lower()
        if rel == "type":
            found.add(target[1:-1])
    return found


def _read_body(environ) -> bytes:
    if "chunked" in environ.get("HTTP_TRANSFER_ENCODING", "").lower():
        # wsgi.input is the raw stream; reading it here would hand back the
        # chunk framing as content.  Refuse rather than store garbage.
        raise HttpError(411, "chunked request bodies are not supported; send Content-Length")
    try:
        length = int(environ.get("CONTENT_LENGTH") or 0)
    except ValueError:
        length = 0
    if length <= 0:
        return b""
    return environ["wsgi.input"].read(length)


def _negotiate(accept_header: str, available: list) -> Optional[str]:
    """Pick the best available media type for an Accept header."""
    if not accept_header.strip():
        return available[0]
    ranked = []
    for position, part in enumerate(accept_header.split(",")):
        bits = part.strip().split(";")
        media = bits[0].strip().lower()
        if not media:
            continue
        q = 1.0
        for param in bits[1:]:
            name, _, value = param.strip().partition("=")
            if name.strip() == "q":
                try:
                    q = float(value)
                except ValueError:
                    q = 0.0
        ranked.append((-q, position, media))
    for _, _, media in sorted(ranked):
        if media == "*/*":
            return available[0]
        for candidate in available:
            if media == candidate or (
                media.endswith("/*") and candidate.startswith(media[:-1])
            ):
                return candidate
    return None


class _QuietHandler(WSGIRequestHandler):
    def log_message(self, format, *args):  # route through logging instead of stderr
        log.debug("%s - %s", self.address_string(), format % args)


def serve(server: PhlServer, host: str = "127.0.0.1", port: int = 8080):
    """Run a threaded HTTP server until the returned handle is shut down."""
    httpd = make_server(host, port, server.wsgi_app, handler_class=_QuietHandler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    return httpd, thread
