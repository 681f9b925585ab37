import { describe, expect, it } from "vitest";

import { badge, diffDuties, dutyKey, dutyLine } from "../src/duties.js";
import type { DutyRow, EventDelta } from "../src/types.js";
import { fixture } from "./helpers.js";

const pending = fixture<{ duties: DutyRow[] }>("duties_pending.json").duties;
const fulfilled = fixture<{ duties: DutyRow[] }>("duties_fulfilled.json").duties;
const firstDelta = fixture<EventDelta>("event1_delta.json");
const secondDelta = fixture<EventDelta>("event2_delta.json");

describe("badges", () => {
  it("exposes one css class per status", () => {
    expect(badge("pending")).toEqual({ text: "pending", cls: "badge badge-pending" });
    expect(badge("fulfilled").cls).toBe("badge badge-fulfilled");
    expect(badge("violated").cls).toBe("badge badge-violated");
  });
});

describe("the walkthrough duty", () => {
  it("starts out pending after the first event", () => {
    expect(firstDelta.created).toHaveLength(1);
    expect(firstDelta.created[0].status).toBe("pending");
    expect(pending).toHaveLength(1);
    expect(pending[0].status).toBe("pending");
    expect(pending[0].fulfilling).toBeNull();
  });

  it("flips to fulfilled when the declaring event lands", () => {
    const { appeared, flipped } = diffDuties(pending, fulfilled);
    expect(appeared).toEqual([]);
    expect(flipped).toHaveLength(1);
    expect(flipped[0].from).toBe("pending");
    expect(flipped[0].to).toBe("fulfilled");
    expect(flipped[0].row.principal).toBe("C. Tuck");
    expect(flipped[0].row.fulfilling).toContain("time: 200");
  });

  it("reports the same flip through the event delta", () => {
    expect(secondDelta.created).toEqual([]);
    expect(secondDelta.duties).toHaveLength(1);
    expect(secondDelta.duties[0].status).toBe("fulfilled");
  });

  it("reads naturally in the table", () => {
    expect(dutyLine(pending[0])).toBe("C. Tuck must Declare Admin-log");
  });
});

describe("diffDuties", () => {
  it("treats a brand-new duty as appeared, not flipped", () => {
    const { appeared, flipped } = diffDuties([], pending);
    expect(flipped).toEqual([]);
    expect(appeared).toHaveLength(1);
  });

  it("keys duties by who, what, and which event started them", () => {
    const key = dutyKey(pending[0]);
    expect(key).toContain("C. Tuck");
    expect(key).toContain("Declare");
    expect(key).toContain("Admin-log");
    expect(key).toContain("time: 120");
    // Same duty, different status: the key must not move.
    expect(dutyKey(fulfilled[0])).toBe(key);
  });

  it("renders a standing duty's key with a bottom marker", () => {
    const standing: DutyRow = { ...pending[0], start: null };
    expect(dutyKey(standing)).toContain("⊥");
  });
});
