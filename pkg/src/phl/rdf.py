"""RDF graph model plus a Turtle-subset parser and serializer.

The supported Turtle subset: @prefix directives, the `a` keyword,
absolute/relative IRIs, prefixed names, predicate lists (`;`), object
lists (`,`), quoted string literals with optional `^^` datatype, comments,
and anonymous blank-node property lists (`[ ... ]`).  Collections,
numeric/boolean shorthand, language tags, and multi-line strings are out.

Graphs are immutable values: every mutation builds a new Graph.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union
from urllib.parse import urljoin, urlsplit

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
FOAF_NS = "http://xmlns.com/foaf/0.1/"
LDP_NS = "http://www.w3.org/ns/ldp#"
ACL_NS = "http://www.w3.org/ns/auth/acl#"
VCARD_NS = "http://www.w3.org/2006/vcard/ns#"
OA_NS = "http://www.w3.org/ns/oa#"

RDF_TYPE = RDF_NS + "type"
XSD_STRING = XSD_NS + "string"


class TurtleSyntaxError(ValueError):
    """Raised on malformed Turtle input; carries line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __str__(self) -> str:
        return "_:" + self.label


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING

    def __str__(self) -> str:
        return f'"{self.lexical}"'


Term = Union[Iri, BlankNode, Literal]


@dataclass(frozen=True, slots=True)
class Var:
    """Named wildcard; join key in federated patterns."""

    name: str


def term_sort_key(term: Term) -> tuple:
    if isinstance(term, Iri):
        return (0, term.value, "")
    if isinstance(term, BlankNode):
        return (1, term.label, "")
    return (2, term.lexical, term.datatype)


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise ValueError("triple subject cannot be a literal")
        if not isinstance(self.predicate, Iri):
            raise ValueError("triple predicate must be an IRI")

    def sort_key(self) -> tuple:
        return (
            term_sort_key(self.subject),
            term_sort_key(self.predicate),
            term_sort_key(self.object),
        )


@dataclass(frozen=True, slots=True)
class TriplePattern:
    """Statement template; None or a Var in a position means wildcard."""

    subject: Union[Term, Var, None] = None
    predicate: Union[Term, Var, None] = None
    object: Union[Term, Var, None] = None

    def positions(self) -> tuple:
        return (self.subject, self.predicate, self.object)

    def bound_count(self) -> int:
        return sum(
            1 for p in self.positions() if p is not None and not isinstance(p, Var)
        )


def _position_matches(wanted, actual: Term) -> bool:
    if wanted is None or isinstance(wanted, Var):
        return True
    if isinstance(wanted, str):  # bare strings are IRI shorthand
        return isinstance(actual, Iri) and actual.value == wanted
    return wanted == actual


class Graph:
    """Immutable set of triples with the IRI of the source document."""

    __slots__ = ("_triples", "base_iri")

    def __init__(self, triples: Iterable[Triple] = (), base_iri: Optional[str] = None):
        self._triples = frozenset(triples)
        self.base_iri = base_iri

    @property
    def triples(self) -> frozenset:
        return self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __eq__(self, other) -> bool:
        # Base IRI is provenance, not content.
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"Graph({len(self._triples)} triples, base={self.base_iri!r})"

    def match(self, pattern: TriplePattern) -> set[Triple]:
        return {
            t
            for t in self._triples
            if _position_matches(pattern.subject, t.subject)
            and _position_matches(pattern.predicate, t.predicate)
            and _position_matches(pattern.object, t.object)
        }

    def objects(self, subject=None, predicate=None) -> set[Term]:
        return {t.object for t in self.match(TriplePattern(subject, predicate, None))}

    def subjects(self, predicate=None, obj=None) -> set[Term]:
        return {t.subject for t in self.match(TriplePattern(None, predicate, obj))}

    def value(self, subject=None, predicate=None) -> Optional[Term]:
        found = self.objects(subject, predicate)
        if not found:
            return None
        return min(found, key=term_sort_key)

    def union(self, other: "Graph") -> "Graph":
        return Graph(self._triples | other._triples, self.base_iri)

    def with_triples(self, extra: Iterable[Triple]) -> "Graph":
        return Graph(self._triples | set(extra), self.base_iri)

    def without_triples(self, gone: Iterable[Triple]) -> "Graph":
        return Graph(self._triples - set(gone), self.base_iri)


DEFAULT_PREFIXES = {
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "xsd": XSD_NS,
    "foaf": FOAF_NS,
    "ldp": LDP_NS,
    "acl": ACL_NS,
    "vcard": VCARD_NS,
    "oa": OA_NS,
}


class PrefixMap:
    """Prefix label to namespace IRI bindings; well-known labels preloaded."""

    def __init__(self, bindings: Optional[dict] = None, include_defaults: bool = True):
        self._bindings: dict[str, str] = dict(DEFAULT_PREFIXES) if include_defaults else {}
        if bindings:
            self._bindings.update(bindings)

    def bind(self, label: str, namespace: str) -> None:
        self._bindings[label] = namespace

    def namespace(self, label: str) -> Optional[str]:
        return self._bindings.get(label)

    def bindings(self) -> dict[str, str]:
        return dict(self._bindings)

    def expand(self, name: str) -> Iri:
        """Expand a `prefix:local` name to an IRI."""
        prefix, _, local = name.partition(":")
        ns = self._bindings.get(prefix)
        if ns is None:
            raise KeyError(f"unbound prefix {prefix!r}")
        return Iri(ns + local)

    def compact(self, iri: str) -> Optional[str]:
        """Return `prefix:local` for iri if a binding covers it, else None."""
        best = None
        for label, ns in self._bindings.items():
            if iri.startswith(ns) and len(iri) > len(ns):
                local = iri[len(ns):]
                if not _SAFE_LOCAL.fullmatch(local):
                    continue
                if best is None or len(ns) > len(self._bindings[best[0]]):
                    best = (label, local)
        if best is None:
            return None
        return f"{best[0]}:{best[1]}"


_SAFE_LOCAL = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")

# Schemes urljoin refuses to merge relative references against.
_HIER_SCHEMES = {"http", "https", "file", "ftp"}


def resolve_iri(reference: str, base: Optional[str]) -> str:
    """Resolve a (possibly relative) IRI reference against a base document IRI."""
    scheme = urlsplit(reference).scheme
    if scheme:
        return reference
    if not base:
        raise ValueError(f"relative IRI {reference!r} with no base")
    if urlsplit(base).scheme in _HIER_SCHEMES:
        return urljoin(base, reference)
    # Non-hierarchical base (urn:...): only the empty/fragment forms make sense.
    if reference == "":
        return base
    if reference.startswith("#"):
        return base.split("#", 1)[0] + reference
    raise ValueError(f"cannot resolve {reference!r} against non-hierarchical base {base!r}")


# --------------------------------------------------------------------------
# Tokenizer
# --------------------------------------------------------------------------

_TOK_IRIREF = "IRIREF"
_TOK_PNAME = "PNAME"
_TOK_BLANK = "BLANK"
_TOK_STRING = "STRING"
_TOK_PUNCT = "PUNCT"
_TOK_A = "A"
_TOK_PREFIX = "PREFIX"
_TOK_EOF = "EOF"

_PN_CHARS = re.compile(r"[A-Za-z0-9_\-.%·À-￿]")


@dataclass(slots=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.column = 1

    def _error(self, message: str):
        raise TurtleSyntaxError(message, self.line, self.column)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.text) and self.text[self.pos] == "\n":
                self.line += 1
                self.column = 1
            else:
                self.column += 1
            self.pos += 1

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def tokens(self) -> Iterator[_Token]:
        while True:
            self._skip_ws_and_comments()
            line, column = self.line, self.column
            ch = self._peek()
            if ch == "":
                yield _Token(_TOK_EOF, "", line, column)
                return
            if ch == "<":
                yield self._iriref(line, column)
            elif ch == '"':
                yield self._string(line, column)
            elif ch in ".;,[]":
                self._advance()
                yield _Token(_TOK_PUNCT, ch, line, column)
            elif ch == "^":
                if self._peek(1) != "^":
                    self._error("expected '^^'")
                self._advance(2)
                yield _Token(_TOK_PUNCT, "^^", line, column)
            elif ch == "@":
                word = self._word_after_at()
                if word == "prefix":
                    yield _Token(_TOK_PREFIX, "@prefix", line, column)
                elif word == "base":
                    self._error("@base directives are not supported")
                else:
                    self._error(f"unsupported directive or language tag @{word}")
            elif ch == "_" and self._peek(1) == ":":
                yield self._blank_label(line, column)
            else:
                yield self._pname_or_keyword(line, column)

    def _skip_ws_and_comments(self) -> None:
        while True:
            ch = self._peek()
            if ch and ch in " \t\r\n":
                self._advance()
            elif ch == "#":
                while self._peek() not in ("", "\n"):
                    self._advance()
            else:
                return

    def _iriref(self, line, column) -> _Token:
        self._advance()  # <
        chars = []
        while True:
            ch = self._peek()
            if ch == ">":
                self._advance()
                return _Token(_TOK_IRIREF, "".join(chars), line, column)
            if ch == "" or ch in "\n\"<{}|^`\\ ":
                raise TurtleSyntaxError(
                    f"invalid character {ch!r} in IRI" if ch else "unterminated IRI",
                    self.line,
                    self.column,
                )
            chars.append(ch)
            self._advance()

    def _string(self, line, column) -> _Token:
        self._advance()  # opening quote
        chars = []
        while True:
            ch = self._peek()
            if ch == '"':
                self._advance()
                if self._peek() == "@":
                    self._error("language tags are not supported")
                return _Token(_TOK_STRING, "".join(chars), line, column)
            if ch in ("", "\n"):
                raise TurtleSyntaxError("unterminated string literal", line, column)
            if ch == "\\":
                self._advance()
                esc = self._peek()
                mapped = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}.get(esc)
                if mapped is not None:
                    chars.append(mapped)
                    self._advance()
                elif esc in ("u", "U"):
                    width = 4 if esc == "u" else 8
                    self._advance()
                    hexdigits = self.text[self.pos : self.pos + width]
                    if len(hexdigits) < width or not all(
                        c in "0123456789abcdefABCDEF" for c in hexdigits
                    ):
                        self._error("malformed unicode escape")
                    chars.append(chr(int(hexdigits, 16)))
                    self._advance(width)
                else:
                    self._error(f"unsupported escape \\{esc}")
            else:
                chars.append(ch)
                self._advance()

    def _word_after_at(self) -> str:
        self._advance()  # @
        chars = []
        while self._peek().isalpha():
            chars.append(self._peek())
            self._advance()
        return "".join(chars)

    def _blank_label(self, line, column) -> _Token:
        self._advance(2)  # _:
        chars = []
        while _PN_CHARS.match(self._peek() or " "):
            chars.append(self._peek())
            self._advance()
        if not chars:
            self._error("empty blank node label")
        label = "".join(chars).rstrip(".")
        if not label:
            self._error("empty blank node label")
        # Trailing dots belong to statement punctuation.
        self.pos -= len("".join(chars)) - len(label)
        self.column -= len("".join(chars)) - len(label)
        return _Token(_TOK_BLANK, label, line, column)

    def _pname_or_keyword(self, line, column) -> _Token:
        chars = []
        while True:
            ch = self._peek()
            if ch == ":" or _PN_CHARS.match(ch or " "):
                chars.append(ch)
                self._advance()
            else:
                break
        if not chars:
            self._error(f"unexpected character {self._peek()!r}")
        word = "".join(chars)
        # A trailing dot is the statement terminator, not part of the name.
        trimmed = word.rstrip(".")
        if trimmed != word:
            back = len(word) - len(trimmed)
            self.pos -= back
            self.column -= back
            word = trimmed
        if not word:
            self._error("unexpected '.'")
        if word == "a":
            return _Token(_TOK_A, "a", line, column)
        if ":" not in word:
            raise TurtleSyntaxError(
                f"expected prefixed name or keyword, got {word!r}", line, column
            )
        return _Token(_TOK_PNAME, word, line, column)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, base: Optional[str]):
        self.base = base
        self.prefixes: dict[str, str] = {}
        self.triples: set[Triple] = set()
        self._tokens = list(_Tokenizer(text).tokens())
        self._index = 0
        self._blank_counter = 0
        self._used_blank_labels: set[str] = set()

    # Token stream helpers

    def _peek(self) -> _Token:
        return self._tokens[self._index]

    def _next(self) -> _Token:
        tok = self._tokens[self._index]
        if tok.kind != _TOK_EOF:
            self._index += 1
        return tok

    def _expect_punct(self, value: str) -> None:
        tok = self._next()
        if tok.kind != _TOK_PUNCT or tok.value != value:
            raise TurtleSyntaxError(
                f"expected {value!r}, got {tok.value!r}", tok.line, tok.column
            )

    def _fresh_blank(self) -> BlankNode:
        while True:
            self._blank_counter += 1
            label = f"b{self._blank_counter}"
            if label not in self._used_blank_labels:
                self._used_blank_labels.add(label)
                return BlankNode(label)

    # Productions

    def parse(self) -> Graph:
        while True:
            tok = self._peek()
            if tok.kind == _TOK_EOF:
                break
            if tok.kind == _TOK_PREFIX:
                self._directive()
            else:
                self._triples_block()
        return Graph(self.triples, self.base)

    def _directive(self) -> None:
        self._next()  # @prefix
        tok = self._next()
        if tok.kind != _TOK_PNAME or not tok.value.endswith(":"):
            raise TurtleSyntaxError("expected prefix label", tok.line, tok.column)
        label = tok.value[:-1]
        iri_tok = self._next()
        if iri_tok.kind != _TOK_IRIREF:
            raise TurtleSyntaxError("expected namespace IRI", iri_tok.line, iri_tok.column)
        self.prefixes[label] = iri_tok.value
        self._expect_punct(".")

    def _triples_block(self) -> None:
        tok = self._peek()
        if tok.kind == _TOK_PUNCT and tok.value == "[":
            subject = self._blank_node_property_list()
            # A bare property list may stand alone as a statement.
            if not (self._peek().kind == _TOK_PUNCT and self._peek().value == "."):
                self._predicate_object_list(subject)
        else:
            subject = self._subject()
            self._predicate_object_list(subject)
        self._expect_punct(".")

    def _subject(self) -> Term:
        tok = self._next()
        if tok.kind == _TOK_IRIREF:
            return self._resolve(tok)
        if tok.kind == _TOK_PNAME:
            return self._expand(tok)
        if tok.kind == _TOK_BLANK:
            self._used_blank_labels.add(tok.value)
            return BlankNode(tok.value)
        raise TurtleSyntaxError(
            f"expected subject, got {tok.value!r}", tok.line, tok.column
        )

    def _verb(self) -> Iri:
        tok = self._next()
        if tok.kind == _TOK_A:
            return Iri(RDF_TYPE)
        if tok.kind == _TOK_IRIREF:
            return self._resolve(tok)
        if tok.kind == _TOK_PNAME:
            return self._expand(tok)
        raise TurtleSyntaxError(
            f"expected predicate, got {tok.value!r}", tok.line, tok.column
        )

    def _predicate_object_list(self, subject: Term) -> None:
        while True:
            predicate = self._verb()
            self._object_list(subject, predicate)
            tok = self._peek()
            if tok.kind == _TOK_PUNCT and tok.value == ";":
                self._next()
                # Tolerate trailing ';' before '.' or ']'.
                nxt = self._peek()
                if nxt.kind == _TOK_PUNCT and nxt.value in (".", "]"):
                    return
                continue
            return

    def _object_list(self, subject: Term, predicate: Iri) -> None:
        while True:
            obj = self._object()
            self.triples.add(Triple(subject, predicate, obj))
            tok = self._peek()
            if tok.kind == _TOK_PUNCT and tok.value == ",":
                self._next()
                continue
            return

    def _object(self) -> Term:
        tok = self._peek()
        if tok.kind == _TOK_PUNCT and tok.value == "[":
            return self._blank_node_property_list()
        tok = self._next()
        if tok.kind == _TOK_IRIREF:
            return self._resolve(tok)
        if tok.kind == _TOK_PNAME:
            return self._expand(tok)
        if tok.kind == _TOK_BLANK:
            self._used_blank_labels.add(tok.value)
            return BlankNode(tok.value)
        if tok.kind == _TOK_STRING:
            datatype = XSD_STRING
            nxt = self._peek()
            if nxt.kind == _TOK_PUNCT and nxt.value == "^^":
                self._next()
                dt_tok = self._next()
                if dt_tok.kind == _TOK_IRIREF:
                    datatype = self._resolve(dt_tok).value
                elif dt_tok.kind == _TOK_PNAME:
                    datatype = self._expand(dt_tok).value
                else:
                    raise TurtleSyntaxError(
                        "expected datatype IRI", dt_tok.line, dt_tok.column
                    )
            return Literal(tok.value, datatype)
        raise TurtleSyntaxError(
            f"expected object, got {tok.value!r}", tok.line, tok.column
        )

    def _blank_node_property_list(self) -> BlankNode:
        self._expect_punct("[")
        node = self._fresh_blank()
        tok = self._peek()
        if not (tok.kind == _TOK_PUNCT and tok.value == "]"):
            self._predicate_object_list(node)
        self._expect_punct("]")
        return node

    def _resolve(self, tok: _Token) -> Iri:
        try:
            return Iri(resolve_iri(tok.value, self.base))
        except ValueError as exc:
            raise TurtleSyntaxError(str(exc), tok.line, tok.column) from exc

    def _expand(self, tok: _Token) -> Iri:
        prefix, _, local = tok.value.partition(":")
        ns = self.prefixes.get(prefix)
        if ns is None:
            ns = DEFAULT_PREFIXES.get(prefix)
        if ns is None:
            raise TurtleSyntaxError(f"unresolved prefix {prefix!r}", tok.line, tok.column)
        return Iri(ns + local)


def parse_turtle(text: str, base: Optional[str] = None) -> Graph:
    """Parse Turtle text into a Graph, resolving relative IRIs against base."""
    return _Parser(text, base).parse()


# --------------------------------------------------------------------------
# Serializer
# --------------------------------------------------------------------------

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape_literal(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _render_term(term: Term, prefixes: PrefixMap, used: Optional[set] = None) -> str:
    if isinstance(term, Iri):
        compacted = prefixes.compact(term.value)
        if compacted and used is not None:
            used.add(compacted.split(":", 1)[0])
        return compacted if compacted else f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    rendered = f'"{_escape_literal(term.lexical)}"'
    if term.datatype != XSD_STRING:
        dt = prefixes.compact(term.datatype)
        if dt and used is not None:
            used.add(dt.split(":", 1)[0])
        rendered += "^^" + (dt if dt else f"<{term.datatype}>")
    return rendered


def serialize_turtle(graph: Graph, prefixes: Optional[PrefixMap] = None) -> str:
    """Deterministic Turtle text: sorted prefixes, one sorted triple per line.

    Only prefixes that the triples actually use are declared.
    """
    prefixes = prefixes or PrefixMap()
    used: set = set()
    body = [
        f"{_render_term(triple.subject, prefixes, used)} "
        f"{_render_term(triple.predicate, prefixes, used)} "
        f"{_render_term(triple.object, prefixes, used)} ."
        for triple in sorted(graph.triples, key=Triple.sort_key)
    ]
    header = [
        f"@prefix {label}: <{ns}> ."
        for label, ns in sorted(prefixes.bindings().items())
        if label in used
    ]
    if header:
        header.append("")
    return "\n".join(header + body) + "\n"


# --------------------------------------------------------------------------
# Isomorphism
# --------------------------------------------------------------------------


def _blank_nodes(graph: Graph) -> set[BlankNode]:
    found = set()
    for t in graph:
        if isinstance(t.subject, BlankNode):
            found.add(t.subject)
        if isinstance(t.object, BlankNode):
            found.add(t.object)
    return found


def _signature(node: BlankNode, graph: Graph) -> tuple:
    """Blank-node fingerprint invariant under relabeling."""
    marks = []
    for t in graph:
        s_blank = isinstance(t.subject, BlankNode)
        o_blank = isinstance(t.object, BlankNode)
        if t.subject == node:
            marks.append(("s", t.predicate.value, None if o_blank else t.object))
        if t.object == node:
            marks.append(("o", t.predicate.value, None if s_blank else t.subject))
    return tuple(sorted(marks, key=repr))


def _apply_mapping(triple: Triple, mapping: dict) -> Triple:
    s = mapping.get(triple.subject, triple.subject)
    o = mapping.get(triple.object, triple.object)
    return Triple(s, triple.predicate, o)


def isomorphic(g1: Graph, g2: Graph) -> bool:
    """True iff the graphs are equal up to blank-node relabeling."""
    if len(g1) != len(g2):
        return False
    ground1 = {t for t in g1 if not _blank_in(t)}
    ground2 = {t for t in g2 if not _blank_in(t)}
    if ground1 != ground2:
        return False
    blanks1 = sorted(_blank_nodes(g1), key=lambda b: b.label)
    blanks2 = sorted(_blank_nodes(g2), key=lambda b: b.label)
    if len(blanks1) != len(blanks2):
        return False
    if not blanks1:
        return True
    sig2 = {b: _signature(b, g2) for b in blanks2}
    candidates = {
        b1: [b2 for b2 in blanks2 if sig2[b2] == _signature(b1, g1)] for b1 in blanks1
    }
    if any(not opts for opts in candidates.values()):
        return False
    target = g2.triples

    def assign(index: int, mapping: dict, used: set) -> bool:
        if index == len(blanks1):
            mapped = {_apply_mapping(t, mapping) for t in g1}
            return mapped == target
        node = blanks1[index]
        for choice in candidates[node]:
            if choice in used:
                continue
            mapping[node] = choice
            used.add(choice)
            if assign(index + 1, mapping, used):
                return True
            used.discard(choice)
            del mapping[node]
        return False

    return assign(0, {}, set())


def _blank_in(triple: Triple) -> bool:
    return isinstance(triple.subject, BlankNode) or isinstance(triple.object, BlankNode)


def match_pattern(graph: Graph, pattern: TriplePattern) -> set[Triple]:
    """Triples of graph matching every bound position of pattern."""
    return graph.match(pattern)
