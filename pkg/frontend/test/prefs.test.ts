import { describe, expect, it } from "vitest";

import {
  DEFAULT_PREFERENCES,
  parsePreferences,
  preferencesIri,
  serializePreferences,
  validatePreferences,
} from "../src/prefs.js";

const AUTHORITY = "bob.uthsc.edu";
const DOC = preferencesIri(AUTHORITY);

describe("preferences document", () => {
  it("locates the document inside the settings container", () => {
    expect(DOC).toBe("https://bob.uthsc.edu/settings/preferences");
  });

  it("reads the statement shape the pod serves", () => {
    const body = [
      `<${DOC}> <https://phl.example/ns#focus> "diet" .`,
      `<${DOC}> <https://phl.example/ns#focus> "exercise" .`,
      `<${DOC}> <https://phl.example/ns#frame> "motivational" .`,
      `<${DOC}> <https://phl.example/ns#frequency> "weekly" .`,
      `<${DOC}> <https://phl.example/ns#languageService> "es" .`,
    ].join("\n");
    expect(parsePreferences(body, DOC)).toEqual({
      focus: ["diet", "exercise"],
      frame: "motivational",
      frequency: "weekly",
      languages: ["es"],
    });
  });

  it("falls back to defaults for statements that are absent", () => {
    const prefs = parsePreferences("", DOC);
    expect(prefs).toEqual(DEFAULT_PREFERENCES);
    expect(prefs.focus).toEqual(["diet", "exercise", "medication-adherence"]);
  });

  it("round-trips through its own serialization", () => {
    const prefs = {
      focus: ["medication-adherence", "diet"],
      frame: "educational",
      frequency: "daily",
      languages: ["es", "en"],
    };
    const text = serializePreferences(AUTHORITY, prefs);
    expect(parsePreferences(text, DOC)).toEqual({
      focus: ["diet", "medication-adherence"],
      frame: "educational",
      frequency: "daily",
      languages: ["en", "es"],
    });
  });

  it("flags values the recommender would not understand", () => {
    expect(validatePreferences({ focus: [], frame: "motivational", frequency: "weekly", languages: [] })).toEqual([
      "pick at least one focus area",
    ]);
    expect(
      validatePreferences({ focus: ["diet"], frame: "bossy", frequency: "hourly", languages: [] }).length,
    ).toBe(2);
    expect(() => serializePreferences(AUTHORITY, { focus: ["naps"], frame: "motivational", frequency: "weekly", languages: [] })).toThrow(/naps/);
  });
});
