// Duty panel bookkeeping: badges, stable row keys, and status flips between
// two readings of the duty table.
export const badge = (status) => ({
    text: status,
    cls: `badge badge-${status}`,
});
// A duty is the same duty across refreshes when its obligation triple and
// starting event agree; status and fulfilment are the parts that move.
export const dutyKey = (row) => [row.principal, row.action, row.resource, row.start ?? "⊥"].join(" | ");
export const diffDuties = (before, after) => {
    const prev = new Map(before.map((r) => [dutyKey(r), r]));
    const appeared = [];
    const flipped = [];
    for (const row of after) {
        const old = prev.get(dutyKey(row));
        if (!old) {
            appeared.push(row);
        }
        else if (old.status !== row.status) {
            flipped.push({ key: dutyKey(row), from: old.status, to: row.status, row });
        }
    }
    return { appeared, flipped };
};
export const dutyLine = (row) => `${row.principal} must ${row.action} ${row.resource}`;
