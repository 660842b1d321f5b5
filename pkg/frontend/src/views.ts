/** Pure string renderers for each screen. Kept DOM-free so they are
 * testable in Node; app.ts assigns the output to innerHTML and wires
 * events afterwards. */

import { AclRule } from "./acl.js";
import { ContainerListing } from "./api.js";
import { FeedItem } from "./feed.js";
import { Preferences } from "./prefs.js";
import { ACCESS_MODES, FOCUS_VALUES, FRAME_VALUES, FREQUENCY_VALUES } from "./vocab.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function attr(value: string): string {
  return `"${escapeHtml(value)}"`;
}

export function renderFeed(items: FeedItem[]): string {
  if (items.length === 0) {
    return `<p class="empty">No messages yet.</p>`;
  }
  const cards = items.map((item) => {
    const badges: string[] = [];
    if (item.focus) badges.push(`<span class="badge">${escapeHtml(item.focus)}</span>`);
    if (item.frame) badges.push(`<span class="badge">${escapeHtml(item.frame)}</span>`);
    badges.push(
      `<span class="badge badge-${item.source}">${item.source === "recommendation" ? "recommendation" : "notification"}</span>`,
    );
    const when = item.issuedAt ? `<time>${escapeHtml(item.issuedAt)}</time>` : "";
    return [
      `<article class="card" data-iri=${attr(item.iri)}>`,
      `<p class="message">${escapeHtml(item.message)}</p>`,
      `<footer>${badges.join(" ")} ${when}</footer>`,
      `</article>`,
    ].join("");
  });
  return cards.join("\n");
}

export function renderListing(listing: ContainerListing): string {
  const rows = listing.children.map((child) => {
    const isContainer = child.iri.endsWith("/") || child.types.some((t) => t.endsWith("Container"));
    const kind = isContainer ? "container" : "document";
    return [
      `<li class="entry entry-${kind}">`,
      `<a href="#" class="child" data-iri=${attr(child.iri)} data-kind=${attr(kind)}>${escapeHtml(child.name || child.iri)}</a>`,
      `<button class="acl-btn" data-iri=${attr(child.iri)}>sharing</button>`,
      `</li>`,
    ].join("");
  });
  const body = rows.length ? `<ul class="listing">${rows.join("")}</ul>` : `<p class="empty">Empty container.</p>`;
  return [
    `<div class="crumbs">${escapeHtml(listing.iri)}</div>`,
    body,
  ].join("\n");
}

export function renderAclEditor(resource: string, rules: AclRule[], inherited: boolean): string {
  const note = inherited
    ? `<p class="note">No sharing rules of its own; access is inherited. Saving creates rules for this resource.</p>`
    : "";
  const ruleRows = rules.map((rule, index) => renderAclRule(rule, index));
  return [
    `<h3>Sharing for ${escapeHtml(resource)}</h3>`,
    note,
    `<div class="rules">${ruleRows.join("")}</div>`,
    `<button id="add-rule">Add rule</button>`,
    `<button id="save-acl">Save</button>`,
    `<span id="acl-status"></span>`,
  ].join("\n");
}

function renderAclRule(rule: AclRule, index: number): string {
  const modeBoxes = ACCESS_MODES.map((mode) => {
    const checked = rule.modes.includes(mode) ? " checked" : "";
    return `<label><input type="checkbox" class="mode" data-index="${index}" value=${attr(mode)}${checked}> ${mode}</label>`;
  }).join(" ");
  const agents = rule.agents.join("\n");
  const groups = rule.groups.join("\n");
  return [
    `<fieldset class="rule" data-index="${index}">`,
    `<legend>Rule ${index + 1}</legend>`,
    `<label>Agents (one WebID per line)<textarea class="agents" data-index="${index}">${escapeHtml(agents)}</textarea></label>`,
    `<label>Groups (one IRI per line)<textarea class="groups" data-index="${index}">${escapeHtml(groups)}</textarea></label>`,
    `<label><input type="checkbox" class="public" data-index="${index}"${rule.public ? " checked" : ""}> Anyone</label>`,
    `<label><input type="checkbox" class="authenticated" data-index="${index}"${rule.authenticated ? " checked" : ""}> Any signed-in agent</label>`,
    `<div class="modes">${modeBoxes}</div>`,
    `<button class="remove-rule" data-index="${index}">Remove</button>`,
    `</fieldset>`,
  ].join("");
}

export function renderPreferences(prefs: Preferences): string {
  const focusBoxes = FOCUS_VALUES.map((value) => {
    const checked = prefs.focus.includes(value) ? " checked" : "";
    return `<label><input type="checkbox" class="focus" value=${attr(value)}${checked}> ${value}</label>`;
  }).join("\n");
  const frameOptions = FRAME_VALUES.map((value) => {
    const selected = prefs.frame === value ? " selected" : "";
    return `<option value=${attr(value)}${selected}>${value}</option>`;
  }).join("");
  const frequencyOptions = FREQUENCY_VALUES.map((value) => {
    const selected = prefs.frequency === value ? " selected" : "";
    return `<option value=${attr(value)}${selected}>${value}</option>`;
  }).join("");
  return [
    `<h3>Recommendation preferences</h3>`,
    `<fieldset><legend>Topics</legend>${focusBoxes}</fieldset>`,
    `<label>Style <select id="frame">${frameOptions}</select></label>`,
    `<label>Frequency <select id="frequency">${frequencyOptions}</select></label>`,
    `<label>Languages (one per line)<textarea id="languages">${escapeHtml(prefs.languages.join("\n"))}</textarea></label>`,
    `<button id="save-prefs">Save</button>`,
    `<span id="prefs-status"></span>`,
  ].join("\n");
}

export interface AgentEntry {
  webid: string;
  name?: string;
}

export function renderAgents(entries: AgentEntry[]): string {
  if (entries.length === 0) {
    return `<p class="empty">No known agents.</p>`;
  }
  const rows = entries.map((entry) => {
    const label = entry.name ? `${escapeHtml(entry.name)} — ` : "";
    return `<li>${label}<code>${escapeHtml(entry.webid)}</code></li>`;
  });
  return `<ul class="agents">${rows.join("")}</ul>`;
}

export function renderError(message: string, neededMode?: string): string {
  const hint = neededMode ? ` <span class="needed">(needs ${escapeHtml(neededMode)})</span>` : "";
  return `<p class="error">${escapeHtml(message)}${hint}</p>`;
}
