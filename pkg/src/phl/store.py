"""Per-pod LDP resource trees with file-system persistence.

One directory per container, one file per resource, a `<name>.meta` JSON
sidecar recording kind/content-type/timestamps, and `.acl` documents stored
as sibling Turtle resources.  Every mutation is written through to disk
before the call returns, so a restarted store reproduces the same tree.
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional
from urllib.parse import urlsplit

from . import vocab
from .errors import (
    ContainerNotEmptyError,
    InvalidSlugError,
    NotFoundError,
    SlugConflictError,
)
from .rdf import Graph, Iri, Triple, parse_turtle

TURTLE = "text/turtle"

_SLUG_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9._~-]*")
_RESERVED_SUFFIXES = (".meta", ".tmp")
_DECONFLICT_LIMIT = 1000


@dataclass(frozen=True, slots=True)
class ResourceId:
    """Address of one node in a pod tree: authority + path segments."""

    authority: str
    segments: tuple
    is_container: bool = False

    def __post_init__(self):
        for seg in self.segments:
            if seg in ("", ".", ".."):
                raise ValueError(f"bad path segment {seg!r}")

    @property
    def iri(self) -> str:
        path = "/".join(self.segments)
        tail = "/" if self.is_container and self.segments else ""
        return f"https://{self.authority}/{path}{tail}"

    @property
    def display_iri(self) -> str:
        """Container IRI without the trailing slash — the form listings advertise."""
        return self.iri.rstrip("/") if self.segments else self.iri

    @property
    def name(self) -> str:
        return self.segments[-1] if self.segments else ""

    @property
    def is_root(self) -> bool:
        return not self.segments

    def parent(self) -> Optional["ResourceId"]:
        if not self.segments:
            return None
        return ResourceId(self.authority, self.segments[:-1], True)

    def child(self, name: str, container: bool = False) -> "ResourceId":
        return ResourceId(self.authority, self.segments + (name,), container)

    def acl_id(self) -> "ResourceId":
        """Where this node's own ACL document lives."""
        if self.is_container:
            return ResourceId(self.authority, self.segments + (".acl",), False)
        return ResourceId(self.authority, self.segments[:-1] + (self.name + ".acl",), False)

    def governed_id(self) -> Optional["ResourceId"]:
        """Inverse of acl_id for paths naming an ACL document, else None."""
        if self.is_container or not self.segments:
            return None
        if self.name == ".acl":
            return ResourceId(self.authority, self.segments[:-1], True)
        if self.name.endswith(".acl"):
            return ResourceId(
                self.authority, self.segments[:-1] + (self.name[: -len(".acl")],), False
            )
        return None

    @classmethod
    def from_iri(cls, iri: str, container: Optional[bool] = None) -> "ResourceId":
        parts = urlsplit(iri)
        if parts.scheme not in ("http", "https"):
            raise ValueError(f"not a pod resource IRI: {iri!r}")
        path = parts.path or "/"
        is_container = path.endswith("/") if container is None else container
        segments = tuple(seg for seg in path.split("/") if seg)
        return cls(parts.netloc.lower(), segments, is_container or not segments)


def _now_iso(clock) -> str:
    moment = clock() if clock else datetime.now(timezone.utc)
    return moment.replace(microsecond=0).isoformat().replace("+00:00", "Z")


@dataclass
class _Node:
    rid: ResourceId
    kind: str  # container | rdf | binary | text
    content_type: str
    created: str
    modified: str
    body: bytes = b""
    types: set = field(default_factory=set)
    children: dict = field(default_factory=dict)
    next_id: int = 1
    owner_webid: str = ""

    @property
    def is_container(self) -> bool:
        return self.kind == "container"


@dataclass(frozen=True)
class StoredResource:
    """Snapshot of one leaf resource as handed to callers."""

    id: ResourceId
    kind: str
    content_type: str
    body: bytes
    created: str
    modified: str

    def graph(self) -> Graph:
        if self.kind != "rdf":
            raise ValueError(f"{self.id.iri} is not an RDF resource")
        return parse_turtle(self.body.decode("utf-8"), self.id.iri)


class Pod:
    def __init__(self, authority: str, root: _Node, directory: Path):
        self.authority = authority
        self.root = root
        self.directory = directory

    @property
    def owner_webid(self) -> str:
        return self.root.owner_webid

    @property
    def root_id(self) -> ResourceId:
        return self.root.rid


class PodStore:
    """All pods under one storage root; mutations serialized by a store lock."""

    def __init__(self, storage_root, clock: Optional[Callable[[], datetime]] = None):
        self.storage_root = Path(storage_root)
        self.clock = clock
        self._pods: dict[str, Pod] = {}
        self._lock = threading.RLock()
        self.storage_root.mkdir(parents=True, exist_ok=True)
        self._load()

    # ------------------------------------------------------------------
    # Pod lifecycle

    def create_pod(self, authority: str, owner_webid: str) -> Pod:
        authority = authority.lower()
        with self._lock:
            if authority in self._pods:
                raise ValueError(f"pod {authority!r} already exists")
            rid = ResourceId(authority, (), True)
            now = _now_iso(self.clock)
            root = _Node(rid, "container", TURTLE, now, now, owner_webid=owner_webid)
            pod = Pod(authority, root, self.storage_root / authority)
            pod.directory.mkdir(parents=True, exist_ok=True)
            self._pods[authority] = pod
            self._write_container_meta(root)
            return pod

    def pod(self, authority: str) -> Pod:
        found = self._pods.get(authority.lower())
        if found is None:
            raise NotFoundError(f"no pod for authority {authority!r}")
        return found

    def pods(self) -> dict[str, Pod]:
        return dict(self._pods)

    def authorities(self) -> list[str]:
        return sorted(self._pods)

    # ------------------------------------------------------------------
    # Lookup

    def _node(self, rid: ResourceId) -> _Node:
        pod = self.pod(rid.authority)
        node = pod.root
        for seg in rid.segments:
            if not node.is_container or seg not in node.children:
                raise NotFoundError(f"not found: {rid.iri}")
            node = node.children[seg]
        if node.is_container != rid.is_container:
            raise NotFoundError(f"not found: {rid.iri}")
        return node

    def exists(self, rid: ResourceId) -> bool:
        try:
            self._node(rid)
            return True
        except NotFoundError:
            return False

    def resolve(self, iri: str) -> ResourceId:
        """Find the node an IRI names, accepting either slash flavor."""
        rid = ResourceId.from_iri(iri)
        with self._lock:
            if self.exists(rid):
                return rid
            flipped = ResourceId(rid.authority, rid.segments, not rid.is_container)
            if flipped.segments and self.exists(flipped):
                return flipped
        raise NotFoundError(f"not found: {iri}")

    def is_container(self, rid: ResourceId) -> bool:
        try:
            return self._node(rid).is_container
        except NotFoundError:
            return False

    def list_children(
        self, container: ResourceId, include_acl: bool = False
    ) -> list[ResourceId]:
        with self._lock:
            node = self._node(container)
            if not node.is_container:
                raise NotFoundError(f"not a container: {container.iri}")
            return [
                child.rid
                for name, child in sorted(node.children.items())
                if include_acl or not _is_acl_name(name)
            ]

    # ------------------------------------------------------------------
    # CRUD

    def create_resource(
        self,
        container: ResourceId,
        slug: Optional[str],
        kind: str,
        body: bytes,
        content_type: str = TURTLE,
    ) -> ResourceId:
        if kind not in ("rdf", "binary", "text"):
            raise ValueError(f"unknown resource kind {kind!r}")
        with self._lock:
            parent = self._node(container)
            if not parent.is_container:
                raise NotFoundError(f"not a container: {container.iri}")
            name = self._place_name(parent, slug)
            rid = container.child(name)
            if kind == "rdf":
                parse_turtle(body.decode("utf-8"), rid.iri)  # reject bad payloads early
            now = _now_iso(self.clock)
            node = _Node(rid, kind, content_type, now, now, body=bytes(body))
            parent.children[name] = node
            parent.modified = now
            self._write_leaf(node)
            self._write_container_meta(parent)
            return rid

    def create_container(
        self, parent_id: ResourceId, slug: Optional[str], types: Iterable[str] = ()
    ) -> ResourceId:
        with self._lock:
            parent = self._node(parent_id)
            if not parent.is_container:
                raise NotFoundError(f"not a container: {parent_id.iri}")
            name = self._place_name(parent, slug)
            rid = parent_id.child(name, container=True)
            now = _now_iso(self.clock)
            node = _Node(rid, "container", TURTLE, now, now, types=set(types))
            parent.children[name] = node
            parent.modified = now
            (self.storage_root / rid.authority).joinpath(*rid.segments).mkdir(parents=True)
            self._write_container_meta(node)
            self._write_container_meta(parent)
            return rid

    def get_resource(self, rid: ResourceId) -> StoredResource:
        with self._lock:
            node = self._node(rid)
            if node.is_container:
                raise NotFoundError(f"{rid.iri} is a container")
            return StoredResource(
                rid, node.kind, node.content_type, node.body, node.created, node.modified
            )

    def container_graph(self, rid: ResourceId) -> Graph:
        """RDF representation: one ldp:contains per child plus type annotations."""
        with self._lock:
            node = self._node(rid)
            if not node.is_container:
                raise NotFoundError(f"not a container: {rid.iri}")
            subject = Iri(rid.iri)
            triples = [Triple(subject, Iri(vocab.TYPE), Iri(vocab.LDP_BASIC_CONTAINER))]
            for type_iri in sorted(node.types):
                triples.append(Triple(subject, Iri(vocab.TYPE), Iri(type_iri)))
            for name, child in sorted(node.children.items()):
                if _is_acl_name(name):
                    continue
                child_iri = Iri(child.rid.display_iri)
                triples.append(Triple(subject, Iri(vocab.LDP_CONTAINS), child_iri))
                # Child containers carry their type annotations in the listing.
                for type_iri in sorted(child.types):
                    triples.append(Triple(child_iri, Iri(vocab.TYPE), Iri(type_iri)))
            return Graph(triples, rid.iri)

    def resource_graph(self, rid: ResourceId) -> Graph:
        with self._lock:
            node = self._node(rid)
            if node.is_container:
                return self.container_graph(rid)
            if node.kind != "rdf":
                raise NotFoundError(f"{rid.iri} has no RDF representation")
            return parse_turtle(node.body.decode("utf-8"), rid.iri)

    def update_resource(self, rid: ResourceId, body: bytes) -> None:
        with self._lock:
            node = self._node(rid)
            if node.is_container:
                raise NotFoundError(f"cannot PUT a container body: {rid.iri}")
            if node.kind == "rdf":
                parse_turtle(body.decode("utf-8"), rid.iri)
            node.body = bytes(body)
            node.modified = _now_iso(self.clock)
            self._write_leaf(node)

    def put_resource(
        self, rid: ResourceId, kind: str, body: bytes, content_type: str = TURTLE
    ) -> bool:
        """Replace rid's body, creating it under its parent if absent.

        Returns True when the resource was created.
        """
        with self._lock:
            if self.exists(rid):
                self.update_resource(rid, body)
                return False
            parent_id = rid.parent()
            if parent_id is None or not self.exists(parent_id):
                raise NotFoundError(f"no parent container for {rid.iri}")
            parent = self._node(parent_id)
            if rid.name in parent.children:
                raise SlugConflictError(f"{rid.iri} collides with a container")
            if rid.is_container:
                raise InvalidSlugError("PUT cannot create containers")
            if kind == "rdf":
                parse_turtle(body.decode("utf-8"), rid.iri)
            now = _now_iso(self.clock)
            node = _Node(rid, kind, content_type, now, now, body=bytes(body))
            parent.children[rid.name] = node
            parent.modified = now
            self._write_leaf(node)
            self._write_container_meta(parent)
            return True

    def delete_resource(self, rid: ResourceId) -> None:
        with self._lock:
            node = self._node(rid)
            if rid.is_root:
                raise InvalidSlugError("cannot delete the pod root")
            if node.is_container:
                real = [n for n in node.children if not _is_acl_name(n)]
                if real:
                    raise ContainerNotEmptyError(f"container not empty: {rid.iri}")
            parent = self._node(rid.parent())
            del parent.children[rid.name]
            parent.modified = _now_iso(self.clock)
            disk = self._disk_path(rid)
            if node.is_container:
                for leftover in node.children.values():
                    self._remove_leaf_files(leftover.rid)
                _remove_file(disk / ".meta")
                if disk.exists():
                    disk.rmdir()
            else:
                self._remove_leaf_files(rid)
                # A deleted resource takes its own ACL document with it.
                acl_name = rid.name + ".acl"
                if acl_name in parent.children:
                    del parent.children[acl_name]
                    self._remove_leaf_files(rid.acl_id())
            self._write_container_meta(parent)

    # ------------------------------------------------------------------
    # Aggregation and ACL location

    def glob_aggregate(
        self, container: ResourceId, may_read: Callable[[ResourceId], bool] = lambda rid: True
    ) -> Graph:
        """Listing triples plus the union of readable immediate RDF children."""
        with self._lock:
            result = self.container_graph(container)
            node = self._node(container)
            for name, child in sorted(node.children.items()):
                if _is_acl_name(name) or child.is_container or child.kind != "rdf":
                    continue
                if not may_read(child.rid):
                    continue
                result = result.union(self.resource_graph(child.rid))
            return Graph(result.triples, container.iri)

    def locate_acl(self, rid: ResourceId) -> ResourceId:
        """This node's own ACL if stored, else the nearest ancestor's."""
        with self._lock:
            current: Optional[ResourceId] = rid
            while current is not None:
                acl = current.acl_id()
                if self.exists(acl):
                    return acl
                current = current.parent()
            raise NotFoundError(f"no ACL found up to the root for {rid.iri}")

    # ------------------------------------------------------------------
    # Naming

    def _place_name(self, parent: _Node, slug: Optional[str]) -> str:
        if slug is None or slug == "":
            while True:
                name = str(parent.next_id)
                parent.next_id += 1
                if name not in parent.children:
                    return name
        if not _SLUG_RE.fullmatch(slug) or slug.endswith(_RESERVED_SUFFIXES) or slug.endswith(".acl"):
            raise InvalidSlugError(f"invalid slug {slug!r}")
        if slug not in parent.children:
            return slug
        for i in range(1, _DECONFLICT_LIMIT):
            name = f"{slug}-{i}"
            if name not in parent.children:
                return name
        raise SlugConflictError(f"cannot de-conflict slug {slug!r}")

    # ------------------------------------------------------------------
    # Persistence

    def _disk_path(self, rid: ResourceId) -> Path:
        return self.storage_root.joinpath(rid.authority, *rid.segments)

    def _write_leaf(self, node: _Node) -> None:
        path = self._disk_path(node.rid)
        _atomic_write(path, node.body)
        meta = {
            "kind": node.kind,
            "content_type": node.content_type,
            "created": node.created,
            "modified": node.modified,
        }
        _atomic_write(path.with_name(path.name + ".meta"), _json_bytes(meta))

    def _write_container_meta(self, node: _Node) -> None:
        meta = {
            "kind": "container",
            "types": sorted(node.types),
            "created": node.created,
            "modified": node.modified,
            "next_id": node.next_id,
        }
        if node.rid.is_root:
            meta["owner_webid"] = node.owner_webid
        _atomic_write(self._disk_path(node.rid) / ".meta", _json_bytes(meta))

    def set_container_types(self, rid: ResourceId, types: Iterable[str]) -> None:
        with self._lock:
            node = self._node(rid)
            if not node.is_container:
                raise NotFoundError(f"not a container: {rid.iri}")
            node.types = set(types)
            node.modified = _now_iso(self.clock)
            self._write_container_meta(node)

    def container_types(self, rid: ResourceId) -> set:
        with self._lock:
            return set(self._node(rid).types)

    def _remove_leaf_files(self, rid: ResourceId) -> None:
        path = self._disk_path(rid)
        _remove_file(path)
        _remove_file(path.with_name(path.name + ".meta"))

    def _load(self) -> None:
        for entry in sorted(self.storage_root.iterdir()) if self.storage_root.exists() else []:
            if not entry.is_dir():
                continue
            authority = entry.name
            rid = ResourceId(authority, (), True)
            root = self._load_container(rid, entry)
            self._pods[authority] = Pod(authority, root, entry)

    def _load_container(self, rid: ResourceId, directory: Path) -> _Node:
        meta = _read_json(directory / ".meta")
        node = _Node(
            rid,
            "container",
            TURTLE,
            meta.get("created", _now_iso(self.clock)),
            meta.get("modified", _now_iso(self.clock)),
            types=set(meta.get("types", [])),
            next_id=meta.get("next_id", 1),
            owner_webid=meta.get("owner_webid", ""),
        )
        for entry in sorted(directory.iterdir()):
            if entry.name == ".meta":
                continue
            if entry.is_dir():
                child_rid = rid.child(entry.name, container=True)
                node.children[entry.name] = self._load_container(child_rid, entry)
            elif not entry.name.endswith(".meta"):
                leaf_meta = _read_json(entry.with_name(entry.name + ".meta"))
                child_rid = rid.child(entry.name)
                node.children[entry.name] = _Node(
                    child_rid,
                    leaf_meta.get("kind", "binary"),
                    leaf_meta.get("content_type", "application/octet-stream"),
                    leaf_meta.get("created", ""),
                    leaf_meta.get("modified", ""),
                    body=entry.read_bytes(),
                )
        return node


def _is_acl_name(name: str) -> bool:
    return name == ".acl" or name.endswith(".acl")


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _remove_file(path: Path) -> None:
    try:
        path.unlink()
    except FileNotFoundError:
        pass


def _json_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text("utf-8"))
    except (FileNotFoundError, json.JSONDecodeError):
        return {}
