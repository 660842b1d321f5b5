/** Terms, triples, and a small immutable graph over them. */

import { XSD_STRING } from "./vocab.js";

export interface IriTerm {
  readonly kind: "iri";
  readonly value: string;
}

export interface BlankTerm {
  readonly kind: "blank";
  readonly label: string;
}

export interface LiteralTerm {
  readonly kind: "literal";
  readonly value: string;
  readonly datatype: string;
}

export type Term = IriTerm | BlankTerm | LiteralTerm;

export const iri = (value: string): IriTerm => ({ kind: "iri", value });
export const blank = (label: string): BlankTerm => ({ kind: "blank", label });
export const literal = (value: string, datatype: string = XSD_STRING): LiteralTerm => ({
  kind: "literal",
  value,
  datatype,
});

export interface Triple {
  readonly subject: Term;
  readonly predicate: IriTerm;
  readonly object: Term;
}

export const triple = (subject: Term, predicate: IriTerm, object: Term): Triple => ({
  subject,
  predicate,
  object,
});

/** A stable text key per term — equality, sorting, and set membership. */
export function termKey(term: Term): string {
  switch (term.kind) {
    case "iri":
      return `<${term.value}>`;
    case "blank":
      return `_:${term.label}`;
    case "literal":
      return `"${term.value}"^^<${term.datatype}>`;
  }
}

export function termEquals(a: Term, b: Term): boolean {
  return termKey(a) === termKey(b);
}

export function tripleKey(t: Triple): string {
  return `${termKey(t.subject)} ${termKey(t.predicate)} ${termKey(t.object)}`;
}

/** Accept either a Term or a bare IRI string in query positions. */
type TermLike = Term | string;

function asTerm(value: TermLike): Term {
  return typeof value === "string" ? iri(value) : value;
}

export class Graph {
  readonly triples: readonly Triple[];
  readonly baseIri?: string;

  constructor(triples: Iterable<Triple> = [], baseIri?: string) {
    const seen = new Set<string>();
    const unique: Triple[] = [];
    for (const t of triples) {
      const key = tripleKey(t);
      if (!seen.has(key)) {
        seen.add(key);
        unique.push(t);
      }
    }
    this.triples = unique;
    this.baseIri = baseIri;
  }

  get size(): number {
    return this.triples.length;
  }

  match(subject?: TermLike, predicate?: TermLike, object?: TermLike): Triple[] {
    const s = subject === undefined ? undefined : termKey(asTerm(subject));
    const p = predicate === undefined ? undefined : termKey(asTerm(predicate));
    const o = object === undefined ? undefined : termKey(asTerm(object));
    return this.triples.filter(
      (t) =>
        (s === undefined || termKey(t.subject) === s) &&
        (p === undefined || termKey(t.predicate) === p) &&
        (o === undefined || termKey(t.object) === o),
    );
  }

  objects(subject?: TermLike, predicate?: TermLike): Term[] {
    return this.match(subject, predicate).map((t) => t.object);
  }

  /** First matching object, if any. */
  value(subject?: TermLike, predicate?: TermLike): Term | undefined {
    return this.match(subject, predicate)[0]?.object;
  }

  subjects(predicate?: TermLike, object?: TermLike): Term[] {
    const out: Term[] = [];
    const seen = new Set<string>();
    for (const t of this.match(undefined, predicate, object)) {
      const key = termKey(t.subject);
      if (!seen.has(key)) {
        seen.add(key);
        out.push(t.subject);
      }
    }
    return out;
  }

  /** Lexical form of the first matching literal object, if any. */
  literalValue(subject?: TermLike, predicate?: TermLike): string | undefined {
    for (const term of this.objects(subject, predicate)) {
      if (term.kind === "literal") return term.value;
    }
    return undefined;
  }
}

const SCHEME = /^[A-Za-z][A-Za-z0-9+.-]*:/;
const HIER_SCHEMES = new Set(["http:", "https:", "file:", "ftp:"]);

/** Resolve a possibly relative IRI reference against a base document IRI. */
export function resolveIri(reference: string, base?: string): string {
  if (SCHEME.test(reference)) return reference;
  if (!base) throw new Error(`relative IRI ${JSON.stringify(reference)} with no base`);
  const baseScheme = SCHEME.exec(base)?.[0].toLowerCase();
  if (baseScheme && HIER_SCHEMES.has(baseScheme)) {
    if (reference === "") return base;
    return new URL(reference, base).toString();
  }
  // Non-hierarchical base (urn:...): only the empty/fragment forms make sense.
  if (reference === "") return base;
  if (reference.startsWith("#")) return base.split("#", 1)[0] + reference;
  throw new Error(`cannot resolve ${JSON.stringify(reference)} against ${JSON.stringify(base)}`);
}
