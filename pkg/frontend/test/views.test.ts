import { describe, expect, it } from "vitest";

import { ownerRule } from "../src/acl.js";
import { ContainerListing } from "../src/api.js";
import { DEFAULT_PREFERENCES } from "../src/prefs.js";
import { Graph } from "../src/rdf.js";
import { renderAclEditor, renderAgents, renderError, renderListing, renderPreferences } from "../src/views.js";

describe("access rule editor", () => {
  it("shows one fieldset per rule with its modes pre-checked", () => {
    const rule = ownerRule("https://bob.uthsc.edu/friends", "https://bob.uthsc.edu/profile/card#me");
    const html = renderAclEditor("https://bob.uthsc.edu/friends", [rule], false);
    expect(html).toContain("https://bob.uthsc.edu/friends");
    expect(html).toContain("https://bob.uthsc.edu/profile/card#me");
    expect(html.match(/fieldset class="rule"/g)?.length).toBe(1);
    expect(html).toContain('value="Read" checked');
    expect(html).toContain('value="Control" checked');
  });

  it("leaves unchosen modes unchecked", () => {
    const html = renderAclEditor("https://bob.uthsc.edu/friends", [
      {
        id: "",
        accessTo: ["https://bob.uthsc.edu/friends"],
        agents: ["https://alice.uthsc.edu/profile/card#me"],
        groups: [],
        public: false,
        authenticated: false,
        modes: ["Read"],
      },
    ], false);
    expect(html).toContain('value="Read" checked');
    expect(html).not.toContain('value="Write" checked');
    expect(html).not.toContain('value="Append" checked');
  });

  it("notes when rules are inherited from an ancestor", () => {
    const html = renderAclEditor("https://bob.uthsc.edu/friends", [], true);
    expect(html).toContain("inherited");
  });

  it("escapes IRIs that carry markup", () => {
    const html = renderAclEditor(`https://x.example/<img>`, [], false);
    expect(html).not.toContain("<img>");
  });
});

describe("preferences form", () => {
  it("pre-selects the stored choices", () => {
    const html = renderPreferences({ ...DEFAULT_PREFERENCES, focus: ["diet"], frame: "educational" });
    expect(html).toContain('value="diet" checked');
    expect(html).not.toContain('value="exercise" checked');
    expect(html).toContain('value="educational" selected');
    expect(html).toContain('value="weekly" selected');
  });
});

describe("library listing", () => {
  it("separates containers from documents", () => {
    const listing: ContainerListing = {
      iri: "https://bob.uthsc.edu/data/",
      types: [],
      children: [
        { iri: "https://bob.uthsc.edu/data/diabetes", name: "diabetes", types: ["http://www.w3.org/ns/ldp#BasicContainer"] },
        { iri: "https://bob.uthsc.edu/data/shared-notepad", name: "shared-notepad", types: [] },
      ],
      graph: new Graph(),
    };
    const html = renderListing(listing);
    expect(html).toContain('data-kind="container"');
    expect(html).toContain('data-kind="document"');
    expect(html).toContain("shared-notepad");
  });
});

describe("smaller fragments", () => {
  it("lists known agents with names when present", () => {
    const html = renderAgents([
      { webid: "https://alice.uthsc.edu/profile/card#me", name: "Alice" },
      { webid: "https://mary.uthsc.edu/profile/card#me" },
    ]);
    expect(html).toContain("Alice");
    expect(html).toContain("https://mary.uthsc.edu/profile/card#me");
  });

  it("surfaces the missing mode when the pod refuses", () => {
    const html = renderError("access denied", "Write");
    expect(html).toContain("access denied");
    expect(html).toContain("needs Write");
  });
});
