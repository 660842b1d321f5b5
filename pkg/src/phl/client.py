"""Clients for talking to pod servers.

Two transports carry the same request shape: ``WsgiTransport`` calls the
WSGI app in-process (tests, CLI offline mode) and ``HttpTransport`` goes
over the network with ``requests``.  ``PodClient`` layers resource
operations on either one and doubles as the capability object the
recommender tick consumes (``get_graph`` / ``create``).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Optional
from urllib.parse import urlsplit

from .errors import AuthorizationError, FetchError, NotFoundError
from .query import Budget, encode_term, parse_pattern_params
from .rdf import Graph, TriplePattern, parse_turtle

TURTLE = "text/turtle"


@dataclass
class Response:
    status: int
    headers: dict  # lower-cased header name -> value
    body: bytes

    def header(self, name: str, default: str = "") -> str:
        return self.headers.get(name.lower(), default)

    @property
    def text(self) -> str:
        return self.body.decode("utf-8", "replace")


class WsgiTransport:
    """Drive a WSGI app directly, with the IRI authority as virtual host."""

    def __init__(self, app):
        self.app = app

    def send(self, method: str, iri: str, headers: dict, body: bytes) -> Response:
        parts = urlsplit(iri)
        environ = {
            "REQUEST_METHOD": method,
            "PATH_INFO": parts.path or "/",
            "QUERY_STRING": parts.query,
            "SERVER_NAME": parts.hostname or "localhost",
            "SERVER_PORT": str(parts.port or 443),
            "HTTP_HOST": parts.netloc,
            "wsgi.input": io.BytesIO(body),
            "wsgi.url_scheme": parts.scheme or "https",
            "CONTENT_LENGTH": str(len(body)),
        }
        for name, value in headers.items():
            key = name.upper().replace("-", "_")
            if key == "CONTENT_TYPE":
                environ["CONTENT_TYPE"] = value
            else:
                environ["HTTP_" + key] = value
        captured = {}

        def start_response(status, response_headers):
            captured["status"] = int(status.split(" ", 1)[0])
            captured["headers"] = {k.lower(): v for k, v in response_headers}

        chunks = self.app(environ, start_response)
        return Response(captured["status"], captured["headers"], b"".join(chunks))


class HttpTransport:
    """Send requests to a real listening server.

    Pod IRIs keep their made-up authorities (bob.uthsc.edu, ...); the
    transport rewrites them to ``base_url`` and carries the original
    authority in the Host header, the same virtual hosting the server
    uses.
    """

    def __init__(self, base_url: str, session=None):
        if session is None:
            import requests

            session = requests.Session()
        self.base_url = base_url.rstrip("/")
        self.session = session

    def send(self, method: str, iri: str, headers: dict, body: bytes) -> Response:
        parts = urlsplit(iri)
        url = self.base_url + (parts.path or "/")
        if parts.query:
            url += "?" + parts.query
        sent = dict(headers)
        sent["Host"] = parts.netloc
        resp = self.session.request(method, url, headers=sent, data=body)
        return Response(resp.status_code, {k.lower(): v for k, v in resp.headers.items()}, resp.content)


@dataclass
class PodClient:
    """Resource operations for one agent (token + app origin) over a transport."""

    transport: object
    token: Optional[str] = None
    origin: Optional[str] = None
    extra_headers: dict = field(default_factory=dict)

    def request(
        self,
        method: str,
        iri: str,
        body: bytes = b"",
        content_type: Optional[str] = None,
        headers: Optional[dict] = None,
    ) -> Response:
        sent = dict(self.extra_headers)
        if headers:
            sent.update(headers)
        if self.token:
            sent.setdefault("Authorization", f"Bearer {self.token}")
        if self.origin:
            sent.setdefault("Origin", self.origin)
        if content_type:
            sent["Content-Type"] = content_type
        return self.transport.send(method, iri, sent, body)

    # -- reads ---------------------------------------------------------

    def get(self, iri: str, accept: Optional[str] = None) -> Response:
        headers = {"Accept": accept} if accept else None
        return self.request("GET", iri, headers=headers)

    def get_graph(self, iri: str) -> Graph:
        doc = iri.split("#", 1)[0]
        response = self.get(doc, accept=TURTLE)
        self._raise_for(response, doc)
        return parse_turtle(response.text, doc)

    def glob(self, container_iri: str) -> Graph:
        target = container_iri.rstrip("/") + "/*"
        response = self.get(target, accept=TURTLE)
        self._raise_for(response, target)
        return parse_turtle(response.text, container_iri)

    # -- writes --------------------------------------------------------

    def create(
        self,
        container_iri: str,
        body,
        slug: Optional[str] = None,
        content_type: str = TURTLE,
    ) -> str:
        payload = body.encode("utf-8") if isinstance(body, str) else body
        headers = {"Slug": slug} if slug else {}
        response = self.request("POST", container_iri, payload, content_type, headers)
        self._raise_for(response, container_iri, expected=201)
        return response.header("location")

    def create_container(self, parent_iri: str, slug: Optional[str], types=()) -> str:
        links = ['<http://www.w3.org/ns/ldp#BasicContainer>; rel="type"']
        links += [f'<{type_iri}>; rel="type"' for type_iri in types]
        headers = {"Link": ", ".join(links)}
        if slug:
            headers["Slug"] = slug
        response = self.request("POST", parent_iri, b"", TURTLE, headers)
        self._raise_for(response, parent_iri, expected=201)
        return response.header("location")

    def put(self, iri: str, body, content_type: str = TURTLE) -> Response:
        payload = body.encode("utf-8") if isinstance(body, str) else body
        response = self.request("PUT", iri, payload, content_type)
        self._raise_for(response, iri, expected=(201, 204))
        return response

    def delete(self, iri: str) -> None:
        response = self.request("DELETE", iri)
        self._raise_for(response, iri, expected=204)

    # -- query ---------------------------------------------------------

    def query_pattern(self, authority: str, pattern: TriplePattern) -> set:
        iri = (
            f"https://{authority}/query?s={_q(encode_term(pattern.subject))}"
            f"&p={_q(encode_term(pattern.predicate))}&o={_q(encode_term(pattern.object))}"
        )
        response = self.get(iri, accept=TURTLE)
        self._raise_for(response, iri)
        return set(parse_turtle(response.text, f"https://{authority}/"))

    def pattern_endpoint(self, authority: str) -> Callable[[TriplePattern], set]:
        return lambda pattern: self.query_pattern(authority, pattern)

    # -------------------------------------------------------------------

    @staticmethod
    def _raise_for(response: Response, iri: str, expected=(200,)) -> None:
        if isinstance(expected, int):
            expected = (expected,)
        if response.status in expected:
            return
        detail = response.text.strip() or f"status {response.status}"
        if response.status == 404:
            raise NotFoundError(f"{iri}: {detail}")
        if response.status in (401, 403):
            raise AuthorizationError(f"{iri}: {detail}")
        raise FetchError(f"{iri}: {detail}")


class RemoteFetcher:
    """Budgets and error-maps client fetches for the path/federation engine."""

    def __init__(self, client: PodClient, budget: Optional[Budget] = None):
        self.client = client
        self.budget = budget or Budget(50)

    def fetch(self, iri: str, ctx=None) -> Graph:
        doc = iri.split("#", 1)[0]
        self.budget.charge(doc)
        try:
            return self.client.get_graph(doc)
        except NotFoundError as exc:
            raise FetchError(str(exc)) from exc


def _q(value: str) -> str:
    from urllib.parse import quote

    return quote(value, safe="")


def parse_query_iri(iri: str) -> TriplePattern:
    """Inverse of the pattern-endpoint URL construction (handy in tests)."""
    from urllib.parse import parse_qs

    params = parse_qs(urlsplit(iri).query, keep_blank_values=True)
    return parse_pattern_params(
        params.get("s", ["_"])[0], params.get("p", ["_"])[0], params.get("o", ["_"])[0]
    )
