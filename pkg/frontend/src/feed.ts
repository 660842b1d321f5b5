/** Flattens recommendation and inbox graphs into displayable feed items. */

import { Graph, Term } from "./rdf.js";
import {
  OA_BODY_VALUE,
  OA_HAS_TARGET,
  PHL_CANDIDATE,
  PHL_FOCUS,
  PHL_FRAME,
  PHL_ISSUED_AT,
} from "./vocab.js";

export interface FeedItem {
  iri: string;
  message: string;
  issuedAt: string;
  candidate?: string;
  focus?: string;
  frame?: string;
  target?: string;
  source: "recommendation" | "notification";
}

function literalOf(graph: Graph, subject: Term, predicate: string): string | undefined {
  return graph.literalValue(subject, predicate);
}

/**
 * Every subject carrying a body value becomes one item. Items that also
 * carry a candidate id are recommendations; the rest are plain inbox
 * notifications.
 */
export function collectFeedItems(graph: Graph): FeedItem[] {
  const items: FeedItem[] = [];
  for (const subject of graph.subjects(OA_BODY_VALUE)) {
    if (subject.kind !== "iri") continue;
    const message = literalOf(graph, subject, OA_BODY_VALUE) ?? "";
    const candidate = literalOf(graph, subject, PHL_CANDIDATE);
    const targetTerm = graph.objects(subject, OA_HAS_TARGET)[0];
    items.push({
      iri: subject.value,
      message,
      issuedAt: literalOf(graph, subject, PHL_ISSUED_AT) ?? "",
      candidate,
      focus: literalOf(graph, subject, PHL_FOCUS),
      frame: literalOf(graph, subject, PHL_FRAME),
      target: targetTerm && targetTerm.kind === "iri" ? targetTerm.value : undefined,
      source: candidate === undefined ? "notification" : "recommendation",
    });
  }
  items.sort((a, b) => {
    if (a.issuedAt !== b.issuedAt) return a.issuedAt < b.issuedAt ? 1 : -1;
    return a.iri < b.iri ? -1 : 1;
  });
  return items;
}

/** Merge items from several graphs, newest first, deduped by IRI. */
export function mergeFeeds(...graphs: Graph[]): FeedItem[] {
  const seen = new Set<string>();
  const merged: FeedItem[] = [];
  for (const graph of graphs) {
    for (const item of collectFeedItems(graph)) {
      if (seen.has(item.iri)) continue;
      seen.add(item.iri);
      merged.push(item);
    }
  }
  merged.sort((a, b) => {
    if (a.issuedAt !== b.issuedAt) return a.issuedAt < b.issuedAt ? 1 : -1;
    return a.iri < b.iri ? -1 : 1;
  });
  return merged;
}
