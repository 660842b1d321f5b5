/** The patient's recommendation preferences document. */

import { Graph, iri, literal, triple, Triple } from "./rdf.js";
import { parseTurtle, serializeTurtle } from "./turtle.js";
import {
  FOCUS_VALUES,
  FRAME_VALUES,
  FREQUENCY_VALUES,
  PHL_FOCUS,
  PHL_FRAME,
  PHL_FREQUENCY,
  PHL_LANGUAGE,
} from "./vocab.js";

export interface Preferences {
  focus: string[];
  frame: string;
  frequency: string;
  languages: string[];
}

export const DEFAULT_PREFERENCES: Preferences = {
  focus: [...FOCUS_VALUES],
  frame: "motivational",
  frequency: "weekly",
  languages: [],
};

export function preferencesIri(authority: string): string {
  return `https://${authority}/settings/preferences`;
}

/** Read a preferences document; absent statements fall back to defaults,
 * matching how the recommender itself reads the document. */
export function parsePreferences(text: string, documentIri: string): Preferences {
  const graph = parseTurtle(text, documentIri);
  const subject = iri(documentIri);
  const focus = graph
    .objects(subject, PHL_FOCUS)
    .flatMap((t) => (t.kind === "literal" ? [t.value] : []))
    .sort();
  const frame = graph.literalValue(subject, PHL_FRAME);
  const frequency = graph.literalValue(subject, PHL_FREQUENCY);
  const languages = graph
    .objects(subject, PHL_LANGUAGE)
    .flatMap((t) => (t.kind === "literal" ? [t.value] : []))
    .sort();
  return {
    focus: focus.length > 0 ? focus : [...DEFAULT_PREFERENCES.focus],
    frame: frame ?? DEFAULT_PREFERENCES.frame,
    frequency: frequency ?? DEFAULT_PREFERENCES.frequency,
    languages,
  };
}

export function validatePreferences(prefs: Preferences): string[] {
  const problems: string[] = [];
  if (prefs.focus.length === 0) problems.push("pick at least one focus area");
  for (const value of prefs.focus) {
    if (!(FOCUS_VALUES as readonly string[]).includes(value)) {
      problems.push(`unknown focus ${JSON.stringify(value)}`);
    }
  }
  if (!(FRAME_VALUES as readonly string[]).includes(prefs.frame)) {
    problems.push(`unknown frame ${JSON.stringify(prefs.frame)}`);
  }
  if (!(FREQUENCY_VALUES as readonly string[]).includes(prefs.frequency)) {
    problems.push(`unknown frequency ${JSON.stringify(prefs.frequency)}`);
  }
  return problems;
}

/** Turtle body for a preferences document, shaped exactly like the one the
 * pod is seeded with so round trips are lossless. */
export function serializePreferences(authority: string, prefs: Preferences): string {
  const problems = validatePreferences(prefs);
  if (problems.length > 0) throw new Error(problems.join("; "));
  const subject = iri(preferencesIri(authority));
  const triples: Triple[] = [
    triple(subject, iri(PHL_FRAME), literal(prefs.frame)),
    triple(subject, iri(PHL_FREQUENCY), literal(prefs.frequency)),
  ];
  for (const value of [...prefs.focus].sort()) {
    triples.push(triple(subject, iri(PHL_FOCUS), literal(value)));
  }
  for (const lang of [...prefs.languages].sort()) {
    triples.push(triple(subject, iri(PHL_LANGUAGE), literal(lang)));
  }
  return serializeTurtle(new Graph(triples, subject.value));
}
