import { describe, expect, it } from "vitest";

import { collectFeedItems, mergeFeeds } from "../src/feed.js";
import { parseTurtle } from "../src/turtle.js";
import { escapeHtml, renderFeed } from "../src/views.js";

const RECOMMENDATION = `@prefix oa: <http://www.w3.org/ns/oa#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
<https://bob.uthsc.edu/data/diabetes/1> oa:bodyValue "Fill half your plate with vegetables tonight, Bob." .
<https://bob.uthsc.edu/data/diabetes/1> <https://phl.example/ns#candidate> "c-plate" .
<https://bob.uthsc.edu/data/diabetes/1> <https://phl.example/ns#focus> "diet" .
<https://bob.uthsc.edu/data/diabetes/1> <https://phl.example/ns#frame> "motivational" .
<https://bob.uthsc.edu/data/diabetes/1> <https://phl.example/ns#issuedAt> "2026-08-25T12:00:00Z"^^xsd:dateTime .
`;

const NOTIFICATION = `@prefix oa: <http://www.w3.org/ns/oa#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
<https://bob.uthsc.edu/inbox/2> oa:bodyValue "Mary left a note on your notepad." .
<https://bob.uthsc.edu/inbox/2> oa:hasTarget <https://bob.uthsc.edu/data/shared-notepad> .
<https://bob.uthsc.edu/inbox/2> <https://phl.example/ns#issuedAt> "2026-08-26T09:00:00Z"^^xsd:dateTime .
`;

describe("feed items", () => {
  it("classifies recommendations by their candidate id", () => {
    const items = collectFeedItems(parseTurtle(RECOMMENDATION));
    expect(items.length).toBe(1);
    expect(items[0]).toMatchObject({
      iri: "https://bob.uthsc.edu/data/diabetes/1",
      candidate: "c-plate",
      focus: "diet",
      frame: "motivational",
      source: "recommendation",
    });
  });

  it("treats annotations without candidates as notifications", () => {
    const items = collectFeedItems(parseTurtle(NOTIFICATION));
    expect(items[0]).toMatchObject({
      source: "notification",
      target: "https://bob.uthsc.edu/data/shared-notepad",
    });
  });

  it("merges sources newest first without duplicates", () => {
    const a = parseTurtle(RECOMMENDATION);
    const b = parseTurtle(NOTIFICATION);
    const merged = mergeFeeds(a, b, a);
    expect(merged.map((item) => item.iri)).toEqual([
      "https://bob.uthsc.edu/inbox/2",
      "https://bob.uthsc.edu/data/diabetes/1",
    ]);
  });
});

describe("feed rendering", () => {
  it("escapes message text", () => {
    const items = collectFeedItems(
      parseTurtle(
        `<https://x.example/1> <http://www.w3.org/ns/oa#bodyValue> "<script>alert(1)</script>" .`,
      ),
    );
    const html = renderFeed(items);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("shows an empty state", () => {
    expect(renderFeed([])).toContain("No messages yet");
  });

  it("escapes every reserved character", () => {
    expect(escapeHtml(`&<>"'`)).toBe("&amp;&lt;&gt;&quot;&#39;");
  });
});
