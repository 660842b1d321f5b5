/** Turtle reader/writer for the subset the pod server speaks.
 *
 * Accepted on input: @prefix directives, `a`, semicolon/comma lists,
 * absolute and relative IRIs, prefixed names, quoted literals with
 * \\ \" \n \r \t \uXXXX \UXXXXXXXX escapes and optional ^^datatype,
 * labelled blank nodes, and anonymous `[ ... ]` property lists.
 * Output is deterministic: sorted prefix header, one sorted triple
 * per line — diffable and byte-stable for identical graphs.
 */

import { Graph, IriTerm, Term, Triple, blank, iri, literal, resolveIri, termKey, triple } from "./rdf.js";
import { DEFAULT_PREFIXES, RDF_TYPE, XSD_STRING } from "./vocab.js";

export class TurtleSyntaxError extends Error {
  constructor(
    message: string,
    readonly line: number,
    readonly column: number,
  ) {
    super(`line ${line}:${column}: ${message}`);
    this.name = "TurtleSyntaxError";
  }
}

type TokenKind = "iriref" | "pname" | "blank" | "string" | "punct" | "a" | "prefix" | "eof";

interface Token {
  kind: TokenKind;
  value: string;
  line: number;
  column: number;
}

const PN_CHAR = /[A-Za-z0-9_\-.%·À-￿]/;
const HEX = /^[0-9a-fA-F]+$/;

class Tokenizer {
  private pos = 0;
  private line = 1;
  private column = 1;

  constructor(private readonly text: string) {}

  private fail(message: string): never {
    throw new TurtleSyntaxError(message, this.line, this.column);
  }

  private peek(offset = 0): string {
    return this.text[this.pos + offset] ?? "";
  }

  private advance(n = 1): void {
    for (let i = 0; i < n; i++) {
      if (this.text[this.pos] === "\n") {
        this.line += 1;
        this.column = 1;
      } else {
        this.column += 1;
      }
      this.pos += 1;
    }
  }

  tokens(): Token[] {
    const out: Token[] = [];
    for (;;) {
      this.skipWsAndComments();
      const line = this.line;
      const column = this.column;
      const ch = this.peek();
      if (ch === "") {
        out.push({ kind: "eof", value: "", line, column });
        return out;
      }
      if (ch === "<") {
        out.push(this.iriref(line, column));
      } else if (ch === '"') {
        out.push(this.string(line, column));
      } else if (".;,[]".includes(ch)) {
        this.advance();
        out.push({ kind: "punct", value: ch, line, column });
      } else if (ch === "^") {
        if (this.peek(1) !== "^") this.fail("expected '^^'");
        this.advance(2);
        out.push({ kind: "punct", value: "^^", line, column });
      } else if (ch === "@") {
        const word = this.wordAfterAt();
        if (word === "prefix") {
          out.push({ kind: "prefix", value: "@prefix", line, column });
        } else if (word === "base") {
          this.fail("@base directives are not supported");
        } else {
          this.fail(`unsupported directive or language tag @${word}`);
        }
      } else if (ch === "_" && this.peek(1) === ":") {
        out.push(this.blankLabel(line, column));
      } else {
        out.push(this.pnameOrKeyword(line, column));
      }
    }
  }

  private skipWsAndComments(): void {
    for (;;) {
      const ch = this.peek();
      if (ch !== "" && " \t\r\n".includes(ch)) {
        this.advance();
      } else if (ch === "#") {
        while (this.peek() !== "" && this.peek() !== "\n") this.advance();
      } else {
        return;
      }
    }
  }

  private iriref(line: number, column: number): Token {
    this.advance(); // <
    let value = "";
    for (;;) {
      const ch = this.peek();
      if (ch === ">") {
        this.advance();
        return { kind: "iriref", value, line, column };
      }
      if (ch === "" || '\n"<{}|^`\\ '.includes(ch)) {
        this.fail(ch === "" ? "unterminated IRI" : `invalid character ${JSON.stringify(ch)} in IRI`);
      }
      value += ch;
      this.advance();
    }
  }

  private string(line: number, column: number): Token {
    this.advance(); // opening quote
    let value = "";
    for (;;) {
      const ch = this.peek();
      if (ch === '"') {
        this.advance();
        if (this.peek() === "@") this.fail("language tags are not supported");
        return { kind: "string", value, line, column };
      }
      if (ch === "" || ch === "\n") {
        throw new TurtleSyntaxError("unterminated string literal", line, column);
      }
      if (ch === "\\") {
        this.advance();
        const esc = this.peek();
        const mapped: Record<string, string> = { '"': '"', "\\": "\\", n: "\n", t: "\t", r: "\r" };
        if (esc in mapped) {
          value += mapped[esc];
          this.advance();
        } else if (esc === "u" || esc === "U") {
          const width = esc === "u" ? 4 : 8;
          this.advance();
          const digits = this.text.slice(this.pos, this.pos + width);
          if (digits.length < width || !HEX.test(digits)) this.fail("malformed unicode escape");
          value += String.fromCodePoint(parseInt(digits, 16));
          this.advance(width);
        } else {
          this.fail(`unsupported escape \\${esc}`);
        }
      } else {
        value += ch;
        this.advance();
      }
    }
  }

  private wordAfterAt(): string {
    this.advance(); // @
    let word = "";
    while (/[A-Za-z]/.test(this.peek())) {
      word += this.peek();
      this.advance();
    }
    return word;
  }

  private blankLabel(line: number, column: number): Token {
    this.advance(2); // _:
    let label = "";
    while (this.peek() !== "" && PN_CHAR.test(this.peek())) {
      label += this.peek();
      this.advance();
    }
    // Trailing dots belong to statement punctuation.
    const trimmed = label.replace(/\.+$/, "");
    const back = label.length - trimmed.length;
    this.pos -= back;
    this.column -= back;
    if (!trimmed) this.fail("empty blank node label");
    return { kind: "blank", value: trimmed, line, column };
  }

  private pnameOrKeyword(line: number, column: number): Token {
    let word = "";
    for (;;) {
      const ch = this.peek();
      if (ch === ":" || (ch !== "" && PN_CHAR.test(ch))) {
        word += ch;
        this.advance();
      } else {
        break;
      }
    }
    if (!word) this.fail(`unexpected character ${JSON.stringify(this.peek())}`);
    const trimmed = word.replace(/\.+$/, "");
    const back = word.length - trimmed.length;
    this.pos -= back;
    this.column -= back;
    if (!trimmed) this.fail("unexpected '.'");
    if (trimmed === "a") return { kind: "a", value: "a", line, column };
    if (!trimmed.includes(":")) {
      throw new TurtleSyntaxError(
        `expected prefixed name or keyword, got ${JSON.stringify(trimmed)}`,
        line,
        column,
      );
    }
    return { kind: "pname", value: trimmed, line, column };
  }
}

class Parser {
  private readonly tokens: Token[];
  private index = 0;
  private readonly prefixes = new Map<string, string>();
  private readonly triples: Triple[] = [];
  private blankCounter = 0;
  private readonly usedBlankLabels = new Set<string>();

  constructor(
    text: string,
    private readonly base?: string,
  ) {
    this.tokens = new Tokenizer(text).tokens();
  }

  private peek(): Token {
    return this.tokens[this.index]!;
  }

  private next(): Token {
    const tok = this.tokens[this.index]!;
    if (tok.kind !== "eof") this.index += 1;
    return tok;
  }

  private expectPunct(value: string): void {
    const tok = this.next();
    if (tok.kind !== "punct" || tok.value !== value) {
      throw new TurtleSyntaxError(
        `expected ${JSON.stringify(value)}, got ${JSON.stringify(tok.value)}`,
        tok.line,
        tok.column,
      );
    }
  }

  private freshBlank(): Term {
    for (;;) {
      this.blankCounter += 1;
      const label = `b${this.blankCounter}`;
      if (!this.usedBlankLabels.has(label)) {
        this.usedBlankLabels.add(label);
        return blank(label);
      }
    }
  }

  parse(): Graph {
    for (;;) {
      const tok = this.peek();
      if (tok.kind === "eof") break;
      if (tok.kind === "prefix") {
        this.directive();
      } else {
        this.triplesBlock();
      }
    }
    return new Graph(this.triples, this.base);
  }

  private directive(): void {
    this.next(); // @prefix
    const label = this.next();
    if (label.kind !== "pname" || !label.value.endsWith(":")) {
      throw new TurtleSyntaxError("expected prefix label", label.line, label.column);
    }
    const ns = this.next();
    if (ns.kind !== "iriref") {
      throw new TurtleSyntaxError("expected namespace IRI", ns.line, ns.column);
    }
    this.prefixes.set(label.value.slice(0, -1), ns.value);
    this.expectPunct(".");
  }

  private triplesBlock(): void {
    const tok = this.peek();
    let subject: Term;
    if (tok.kind === "punct" && tok.value === "[") {
      subject = this.blankNodePropertyList();
      // A bare property list may stand alone as a statement.
      const nxt = this.peek();
      if (!(nxt.kind === "punct" && nxt.value === ".")) {
        this.predicateObjectList(subject);
      }
    } else {
      subject = this.subject();
      this.predicateObjectList(subject);
    }
    this.expectPunct(".");
  }

  private subject(): Term {
    const tok = this.next();
    if (tok.kind === "iriref") return this.resolve(tok);
    if (tok.kind === "pname") return this.expand(tok);
    if (tok.kind === "blank") {
      this.usedBlankLabels.add(tok.value);
      return blank(tok.value);
    }
    throw new TurtleSyntaxError(`expected subject, got ${JSON.stringify(tok.value)}`, tok.line, tok.column);
  }

  private verb(): IriTerm {
    const tok = this.next();
    if (tok.kind === "a") return iri(RDF_TYPE);
    if (tok.kind === "iriref") return this.resolve(tok);
    if (tok.kind === "pname") return this.expand(tok);
    throw new TurtleSyntaxError(`expected predicate, got ${JSON.stringify(tok.value)}`, tok.line, tok.column);
  }

  private predicateObjectList(subject: Term): void {
    for (;;) {
      const predicate = this.verb();
      this.objectList(subject, predicate);
      const tok = this.peek();
      if (tok.kind === "punct" && tok.value === ";") {
        this.next();
        // Tolerate a trailing ';' before '.' or ']'.
        const nxt = this.peek();
        if (nxt.kind === "punct" && (nxt.value === "." || nxt.value === "]")) return;
        continue;
      }
      return;
    }
  }

  private objectList(subject: Term, predicate: IriTerm): void {
    for (;;) {
      this.triples.push(triple(subject, predicate, this.object()));
      const tok = this.peek();
      if (tok.kind === "punct" && tok.value === ",") {
        this.next();
        continue;
      }
      return;
    }
  }

  private object(): Term {
    const ahead = this.peek();
    if (ahead.kind === "punct" && ahead.value === "[") {
      return this.blankNodePropertyList();
    }
    const tok = this.next();
    if (tok.kind === "iriref") return this.resolve(tok);
    if (tok.kind === "pname") return this.expand(tok);
    if (tok.kind === "blank") {
      this.usedBlankLabels.add(tok.value);
      return blank(tok.value);
    }
    if (tok.kind === "string") {
      let datatype = XSD_STRING;
      const nxt = this.peek();
      if (nxt.kind === "punct" && nxt.value === "^^") {
        this.next();
        const dt = this.next();
        if (dt.kind === "iriref") {
          datatype = this.resolve(dt).value;
        } else if (dt.kind === "pname") {
          datatype = this.expand(dt).value;
        } else {
          throw new TurtleSyntaxError("expected datatype IRI", dt.line, dt.column);
        }
      }
      return literal(tok.value, datatype);
    }
    throw new TurtleSyntaxError(`expected object, got ${JSON.stringify(tok.value)}`, tok.line, tok.column);
  }

  private blankNodePropertyList(): Term {
    this.expectPunct("[");
    const node = this.freshBlank();
    const tok = this.peek();
    if (!(tok.kind === "punct" && tok.value === "]")) {
      this.predicateObjectList(node);
    }
    this.expectPunct("]");
    return node;
  }

  private resolve(tok: Token): IriTerm {
    try {
      return iri(resolveIri(tok.value, this.base));
    } catch (error) {
      throw new TurtleSyntaxError(String((error as Error).message), tok.line, tok.column);
    }
  }

  private expand(tok: Token): IriTerm {
    const sep = tok.value.indexOf(":");
    const prefix = tok.value.slice(0, sep);
    const local = tok.value.slice(sep + 1);
    const ns = this.prefixes.get(prefix) ?? DEFAULT_PREFIXES[prefix];
    if (ns === undefined) {
      throw new TurtleSyntaxError(`unresolved prefix ${JSON.stringify(prefix)}`, tok.line, tok.column);
    }
    return iri(ns + local);
  }
}

export function parseTurtle(text: string, base?: string): Graph {
  return new Parser(text, base).parse();
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

const SAFE_LOCAL = /^[A-Za-z_][A-Za-z0-9_-]*$/;

function compact(value: string, used: Set<string>): string | undefined {
  let best: [string, string] | undefined;
  for (const [label, ns] of Object.entries(DEFAULT_PREFIXES)) {
    if (value.startsWith(ns) && value.length > ns.length) {
      const local = value.slice(ns.length);
      if (!SAFE_LOCAL.test(local)) continue;
      if (best === undefined || ns.length > DEFAULT_PREFIXES[best[0]]!.length) {
        best = [label, local];
      }
    }
  }
  if (best === undefined) return undefined;
  used.add(best[0]);
  return `${best[0]}:${best[1]}`;
}

function escapeLiteral(text: string): string {
  return text
    .replace(/\\/g, "\\\\")
    .replace(/"/g, '\\"')
    .replace(/\n/g, "\\n")
    .replace(/\r/g, "\\r")
    .replace(/\t/g, "\\t");
}

function renderTerm(term: Term, used: Set<string>): string {
  switch (term.kind) {
    case "iri":
      return compact(term.value, used) ?? `<${term.value}>`;
    case "blank":
      return `_:${term.label}`;
    case "literal": {
      const rendered = `"${escapeLiteral(term.value)}"`;
      if (term.datatype === XSD_STRING) return rendered;
      return `${rendered}^^${compact(term.datatype, used) ?? `<${term.datatype}>`}`;
    }
  }
}

/** Deterministic Turtle text: sorted prefix header, one sorted triple per line. */
export function serializeTurtle(graph: Graph): string {
  const used = new Set<string>();
  const body = graph.triples
    .map((t) => ({
      line: `${renderTerm(t.subject, used)} ${renderTerm(t.predicate, used)} ${renderTerm(t.object, used)} .`,
      key: tripleSortKey(t),
    }))
    .sort((a, b) => (a.key < b.key ? -1 : a.key > b.key ? 1 : 0))
    .map((entry) => entry.line);
  const header = Object.entries(DEFAULT_PREFIXES)
    .filter(([label]) => used.has(label))
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([label, ns]) => `@prefix ${label}: <${ns}> .`);
  if (header.length > 0) header.push("");
  return [...header, ...body].join("\n") + "\n";
}

function tripleSortKey(t: Triple): string {
  return `${termKey(t.subject)}\u0000${termKey(t.predicate)}\u0000${termKey(t.object)}`;
}
