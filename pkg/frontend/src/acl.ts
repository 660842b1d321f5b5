/** Access rule documents: the form model the Agents tab edits, plus the
 * conversions between that model and the Turtle documents the server stores.
 *
 * A rule grants modes over one or more resources to some combination of
 * named agents, agent groups, and the two agent classes (everyone /
 * any authenticated agent).  Parsing is strict in the same places the
 * server is strict: a rule with no mode or no agent clause is malformed,
 * because writing such a document would lock the resource rather than
 * open it.
 */

import { BlankTerm, Graph, IriTerm, Term, Triple, iri, triple } from "./rdf.js";
import { parseTurtle, serializeTurtle } from "./turtle.js";
import {
  ACCESS_MODES,
  ACL_ACCESS_TO,
  ACL_AGENT,
  ACL_AGENT_CLASS,
  ACL_AGENT_GROUP,
  ACL_AUTHENTICATED_AGENT,
  ACL_AUTHORIZATION,
  ACL_MODE,
  ACL_NS,
  AccessMode,
  FOAF_AGENT,
  RDF_TYPE,
} from "./vocab.js";

export interface AclRule {
  /** Fragment id of the rule inside the document ("" when parsed from an unnamed node). */
  id: string;
  accessTo: string[];
  agents: string[];
  groups: string[];
  public: boolean;
  authenticated: boolean;
  modes: AccessMode[];
}

export class MalformedAclError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MalformedAclError";
  }
}

/** The document that holds a resource's own access rules.  Containers keep
 * their trailing slash, so `/data/` is governed by `/data/.acl`. */
export function aclDocumentIri(resourceIri: string): string {
  return `${resourceIri}.acl`;
}

function iriValues(graph: Graph, subject: Term, predicate: string): string[] {
  const out: string[] = [];
  for (const term of graph.objects(subject, predicate)) {
    if (term.kind === "iri") out.push(term.value);
  }
  return out.sort();
}

function modeName(value: string): AccessMode {
  const name = value.startsWith(ACL_NS) ? value.slice(ACL_NS.length) : value;
  const known = ACCESS_MODES.find((m) => m === name);
  if (!known) throw new MalformedAclError(`unknown access mode ${JSON.stringify(value)}`);
  return known;
}

/** Read every rule out of an access document.
 *
 * Subjects without an acl:accessTo statement are ignored, matching the
 * server: stray annotations in the document carry no authority.
 */
export function parseAclRules(graph: Graph): AclRule[] {
  const subjects = graph
    .subjects(ACL_ACCESS_TO)
    .filter((s): s is IriTerm | BlankTerm => s.kind !== "literal");
  const rules: AclRule[] = [];
  for (const subject of subjects) {
    const accessTo = iriValues(graph, subject, ACL_ACCESS_TO);
    const agents = iriValues(graph, subject, ACL_AGENT);
    const groups = iriValues(graph, subject, ACL_AGENT_GROUP);
    const classes = iriValues(graph, subject, ACL_AGENT_CLASS);
    const modes = iriValues(graph, subject, ACL_MODE).map(modeName);
    const label = subject.kind === "iri" ? subject.value : `_:${subject.label}`;
    for (const cls of classes) {
      if (cls !== FOAF_AGENT && cls !== ACL_AUTHENTICATED_AGENT) {
        throw new MalformedAclError(`unknown agent class ${JSON.stringify(cls)} in ${label}`);
      }
    }
    const isPublic = classes.includes(FOAF_AGENT);
    const authenticated = classes.includes(ACL_AUTHENTICATED_AGENT);
    if (modes.length === 0) {
      throw new MalformedAclError(`rule ${label} grants no modes`);
    }
    if (agents.length === 0 && groups.length === 0 && !isPublic && !authenticated) {
      throw new MalformedAclError(`rule ${label} names no agents`);
    }
    rules.push({
      id: subject.kind === "iri" ? (subject.value.split("#")[1] ?? "") : "",
      accessTo,
      agents,
      groups,
      public: isPublic,
      authenticated,
      modes: sortModes(modes),
    });
  }
  return rules;
}

export function parseAclDocument(text: string, documentIri: string): AclRule[] {
  return parseAclRules(parseTurtle(text, documentIri));
}

function sortModes(modes: AccessMode[]): AccessMode[] {
  const unique = [...new Set(modes)];
  return unique.sort((a, b) => ACCESS_MODES.indexOf(a) - ACCESS_MODES.indexOf(b));
}

/** Compose the Turtle document for a rule set over one resource.
 *
 * Rules with an empty accessTo list default to the governed resource, so
 * a form that never mentions targets still produces a valid document.
 */
export function composeAclDocument(resourceIri: string, rules: AclRule[]): string {
  if (rules.length === 0) {
    throw new MalformedAclError("an access document needs at least one rule");
  }
  const docIri = aclDocumentIri(resourceIri);
  const out: Triple[] = [];
  rules.forEach((rule, index) => {
    if (rule.modes.length === 0) {
      throw new MalformedAclError(`rule ${index} grants no modes`);
    }
    if (rule.agents.length === 0 && rule.groups.length === 0 && !rule.public && !rule.authenticated) {
      throw new MalformedAclError(`rule ${index} names no agents`);
    }
    const subject = iri(`${docIri}#${rule.id || `rule-${index}`}`);
    out.push(triple(subject, iri(RDF_TYPE), iri(ACL_AUTHORIZATION)));
    const targets = rule.accessTo.length > 0 ? rule.accessTo : [resourceIri];
    for (const target of targets) out.push(triple(subject, iri(ACL_ACCESS_TO), iri(target)));
    for (const agent of rule.agents) out.push(triple(subject, iri(ACL_AGENT), iri(agent)));
    for (const group of rule.groups) out.push(triple(subject, iri(ACL_AGENT_GROUP), iri(group)));
    if (rule.public) out.push(triple(subject, iri(ACL_AGENT_CLASS), iri(FOAF_AGENT)));
    if (rule.authenticated) {
      out.push(triple(subject, iri(ACL_AGENT_CLASS), iri(ACL_AUTHENTICATED_AGENT)));
    }
    for (const mode of sortModes(rule.modes)) {
      out.push(triple(subject, iri(ACL_MODE), iri(ACL_NS + mode)));
    }
  });
  return serializeTurtle(new Graph(out, docIri));
}

/** Order- and id-insensitive canonical form, for comparing rule sets. */
export function canonicalRules(rules: AclRule[]): string {
  const keys = rules.map((rule) =>
    JSON.stringify({
      accessTo: [...rule.accessTo].map(stripSlash).sort(),
      agents: [...rule.agents].sort(),
      groups: [...rule.groups].sort(),
      public: rule.public,
      authenticated: rule.authenticated,
      modes: sortModes(rule.modes),
    }),
  );
  return JSON.stringify(keys.sort());
}

function stripSlash(value: string): string {
  return value.endsWith("/") && !value.endsWith("//") ? value.slice(0, -1) : value;
}

export function rulesEquivalent(a: AclRule[], b: AclRule[]): boolean {
  return canonicalRules(a) === canonicalRules(b);
}

/** A fresh owner-only rule set — the form's starting point for a resource
 * that has no document of its own yet.  Grants the same four modes the pod
 * writes for its owner, so round trips against pod-composed documents
 * compare equal. */
export function ownerRule(resourceIri: string, ownerWebId: string): AclRule {
  return {
    id: "",
    accessTo: [resourceIri],
    agents: [ownerWebId],
    groups: [],
    public: false,
    authenticated: false,
    modes: ["Read", "Write", "Append", "Control"],
  };
}
