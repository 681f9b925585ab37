// Duty panel bookkeeping: badges, stable row keys, and status flips between
// two readings of the duty table.

import type { DutyRow, DutyStatus } from "./types.js";

export interface Badge {
  text: DutyStatus;
  cls: string;
}

export const badge = (status: DutyStatus): Badge => ({
  text: status,
  cls: `badge badge-${status}`,
});

type DutyIdentity = Pick<DutyRow, "principal" | "action" | "resource" | "start">;

// A duty is the same duty across refreshes when its obligation triple and
// starting event agree; status and fulfilment are the parts that move.
export const dutyKey = (row: DutyIdentity): string =>
  [row.principal, row.action, row.resource, row.start ?? "⊥"].join(" | ");

export interface StatusFlip {
  key: string;
  from: DutyStatus;
  to: DutyStatus;
  row: DutyRow;
}

export interface DutyDiff {
  appeared: DutyRow[];
  flipped: StatusFlip[];
}

export const diffDuties = (before: DutyRow[], after: DutyRow[]): DutyDiff => {
  const prev = new Map(before.map((r) => [dutyKey(r), r]));
  const appeared: DutyRow[] = [];
  const flipped: StatusFlip[] = [];
  for (const row of after) {
    const old = prev.get(dutyKey(row));
    if (!old) {
      appeared.push(row);
    } else if (old.status !== row.status) {
      flipped.push({ key: dutyKey(row), from: old.status, to: row.status, row });
    }
  }
  return { appeared, flipped };
};

export const dutyLine = (row: DutyRow): string =>
  `${row.principal} must ${row.action} ${row.resource}`;
