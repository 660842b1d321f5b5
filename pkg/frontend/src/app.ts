/** Browser entry point. Wires the pure modules to the DOM; everything
 * interesting lives in the imported modules and is tested there. */

import { AclRule } from "./acl.js";
import { ApiError, PodApi } from "./api.js";
import { mergeFeeds } from "./feed.js";
import { DEFAULT_PREFERENCES, Preferences, validatePreferences } from "./prefs.js";
import { Graph } from "./rdf.js";
import { fetchTransport } from "./transport.js";
import {
  AgentEntry,
  renderAclEditor,
  renderAgents,
  renderError,
  renderFeed,
  renderListing,
  renderPreferences,
} from "./views.js";
import { ACCESS_MODES, AccessMode, FOAF_KNOWS, FOAF_NAME } from "./vocab.js";

const authority = location.host;
const origin = location.origin;

function $(selector: string): HTMLElement {
  const node = document.querySelector(selector);
  if (!node) throw new Error(`missing element: ${selector}`);
  return node as HTMLElement;
}

function api(): PodApi {
  const token = (document.querySelector("#token") as HTMLInputElement).value.trim();
  return new PodApi(fetchTransport(), token || undefined);
}

function showError(error: unknown): void {
  const message = error instanceof Error ? error.message : String(error);
  const needed = error instanceof ApiError ? error.neededMode : undefined;
  $("#content").innerHTML = renderError(message, needed);
}

async function showFeed(): Promise<void> {
  const client = api();
  const graphs: Graph[] = [];
  for (const source of [`${origin}/data/diabetes/`, `${origin}/inbox/`]) {
    try {
      graphs.push(await client.glob(source));
    } catch (error) {
      if (!(error instanceof ApiError && error.status === 404)) throw error;
    }
  }
  $("#content").innerHTML = renderFeed(mergeFeeds(...graphs));
}

async function showLibrary(target?: string): Promise<void> {
  const client = api();
  const listing = await client.listContainer(target ?? `${origin}/`);
  $("#content").innerHTML = renderListing(listing);
  for (const link of document.querySelectorAll<HTMLAnchorElement>("a.child")) {
    link.addEventListener("click", (event) => {
      event.preventDefault();
      const childIri = link.dataset["iri"] ?? "";
      if (link.dataset["kind"] === "container") {
        void showLibrary(childIri.endsWith("/") ? childIri : `${childIri}/`).catch(showError);
      } else {
        void showDocument(childIri).catch(showError);
      }
    });
  }
  for (const button of document.querySelectorAll<HTMLButtonElement>(".acl-btn")) {
    button.addEventListener("click", () => {
      void showAclEditor(button.dataset["iri"] ?? "").catch(showError);
    });
  }
}

async function showDocument(target: string): Promise<void> {
  const client = api();
  const body = await client.getRaw(target);
  $("#content").innerHTML = `<h3></h3><pre class="turtle"></pre>`;
  $("#content h3").textContent = target;
  $("#content pre").textContent = body;
}

function readRulesFromForm(resource: string): AclRule[] {
  const rules: AclRule[] = [];
  for (const fieldset of document.querySelectorAll<HTMLFieldSetElement>("fieldset.rule")) {
    const index = fieldset.dataset["index"] ?? "";
    const lines = (selector: string): string[] =>
      (fieldset.querySelector(selector) as HTMLTextAreaElement).value
        .split("\n")
        .map((line) => line.trim())
        .filter((line) => line.length > 0);
    const modes: AccessMode[] = [];
    for (const box of fieldset.querySelectorAll<HTMLInputElement>(`input.mode[data-index="${index}"]`)) {
      if (box.checked && (ACCESS_MODES as readonly string[]).includes(box.value)) {
        modes.push(box.value as AccessMode);
      }
    }
    rules.push({
      id: "",
      accessTo: [resource],
      agents: lines("textarea.agents"),
      groups: lines("textarea.groups"),
      public: (fieldset.querySelector("input.public") as HTMLInputElement).checked,
      authenticated: (fieldset.querySelector("input.authenticated") as HTMLInputElement).checked,
      modes,
    });
  }
  return rules.filter(
    (rule) =>
      rule.modes.length > 0 &&
      (rule.agents.length > 0 || rule.groups.length > 0 || rule.public || rule.authenticated),
  );
}

async function showAclEditor(resource: string): Promise<void> {
  const client = api();
  const state = await client.readAcl(resource);
  const render = (rules: AclRule[]) => {
    $("#content").innerHTML = renderAclEditor(resource, rules, !state.hasOwnDocument);
    $("#add-rule").addEventListener("click", () => {
      render([
        ...readRulesFromForm(resource),
        { id: "", accessTo: [resource], agents: [], groups: [], public: false, authenticated: false, modes: [] },
      ]);
    });
    for (const button of document.querySelectorAll<HTMLButtonElement>(".remove-rule")) {
      button.addEventListener("click", () => {
        const drop = Number(button.dataset["index"]);
        render(readRulesFromForm(resource).filter((_, i) => i !== drop));
      });
    }
    $("#save-acl").addEventListener("click", () => {
      void client
        .writeAcl(resource, readRulesFromForm(resource))
        .then(() => {
          $("#acl-status").textContent = "saved";
        })
        .catch(showError);
    });
  };
  render(state.rules);
}

async function showPreferences(): Promise<void> {
  const client = api();
  let prefs: Preferences;
  try {
    prefs = await client.getPreferences(authority);
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      prefs = DEFAULT_PREFERENCES;
    } else {
      throw error;
    }
  }
  $("#content").innerHTML = renderPreferences(prefs);
  $("#save-prefs").addEventListener("click", () => {
    const focus = [...document.querySelectorAll<HTMLInputElement>("input.focus")]
      .filter((box) => box.checked)
      .map((box) => box.value);
    const edited: Preferences = {
      focus,
      frame: (document.querySelector("#frame") as HTMLSelectElement).value,
      frequency: (document.querySelector("#frequency") as HTMLSelectElement).value,
      languages: (document.querySelector("#languages") as HTMLTextAreaElement).value
        .split("\n")
        .map((line) => line.trim())
        .filter((line) => line.length > 0),
    };
    const problems = validatePreferences(edited);
    if (problems.length > 0) {
      $("#prefs-status").textContent = problems.join("; ");
      return;
    }
    void client
      .savePreferences(authority, edited)
      .then(() => {
        $("#prefs-status").textContent = "saved";
      })
      .catch(showError);
  });
}

async function showAgents(): Promise<void> {
  const client = api();
  const card = await client.getTurtle(`${origin}/profile/card`);
  const entries: AgentEntry[] = [];
  for (const subject of card.subjects(FOAF_KNOWS)) {
    for (const friend of card.objects(subject, FOAF_KNOWS)) {
      if (friend.kind !== "iri") continue;
      const name = card.literalValue(friend, FOAF_NAME);
      entries.push({ webid: friend.value, name: name ?? undefined });
    }
  }
  entries.sort((a, b) => (a.webid < b.webid ? -1 : 1));
  $("#content").innerHTML = renderAgents(entries);
}

const routes: Record<string, () => Promise<void>> = {
  "#feed": showFeed,
  "#library": () => showLibrary(),
  "#agents": showAgents,
  "#preferences": showPreferences,
};

function navigate(): void {
  const hash = location.hash || "#feed";
  const handler = routes[hash] ?? showFeed;
  for (const tab of document.querySelectorAll<HTMLAnchorElement>("nav a")) {
    tab.classList.toggle("active", tab.getAttribute("href") === hash);
  }
  void handler().catch(showError);
}

window.addEventListener("hashchange", navigate);
window.addEventListener("DOMContentLoaded", () => {
  $("#pod-authority").textContent = authority;
  $("#reload").addEventListener("click", navigate);
  navigate();
});
