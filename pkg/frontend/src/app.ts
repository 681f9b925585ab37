// Wires the panels together: session picker, canvas, decide form, event and
// strategy inputs, duty table, derivation outline. All policy semantics stay
// on the server; this file only fetches, renders, and reacts.

import { ApiError, Client } from "./api.js";
import { eventSummary, outline } from "./derivation.js";
import { badge, diffDuties, dutyLine } from "./duties.js";
import { decisionHighlight, type Highlight } from "./highlight.js";
import { computeScene, LEGEND, SHAPES } from "./scene.js";
import { escapeXml, sceneToSvg } from "./svg.js";
import type { DutyRow, GraphDoc, NodeType } from "./types.js";

const api = new Client("");

const NODE_TYPES: NodeType[] = ["P", "C", "A", "R", "Pr", "O", "D", "E", "G"];

const SAMPLE_POLICY = {
  principals: ["pat"],
  categories: ["ana", "low", "mid", "high"],
  actions: ["read"],
  resources: ["file"],
  pca: [["pat", "ana"]],
  arca: [["read", "file", "high"]],
  cc_auth: [["ana", "low"], ["low", "mid"], ["mid", "high"]],
};

interface ViewState {
  sid: string | null;
  at: number | null;
  view: "default" | "full";
  hidden: Set<NodeType>;
  highlight: Highlight | null;
  doc: GraphDoc | null;
  duties: DutyRow[];
}

const state: ViewState = {
  sid: null,
  at: null,
  view: "default",
  hidden: new Set(),
  highlight: null,
  doc: null,
  duties: [],
};

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const log = (message: string, isError = false): void => {
  const list = $("log");
  const item = document.createElement("li");
  item.textContent = message;
  if (isError) item.className = "error";
  list.prepend(item);
  while (list.children.length > 8) list.removeChild(list.lastChild as Node);
};

const guard =
  (fn: () => Promise<void>): (() => void) =>
  () => {
    fn().catch((err: unknown) => {
      if (err instanceof ApiError) log(`${err.status}: ${err.message}`, true);
      else log(String(err), true);
    });
  };

// ---------------------------------------------------------------- rendering

const renderCanvas = (): void => {
  const host = $("canvas");
  if (!state.doc) {
    host.innerHTML = '<p class="hint">No session selected.</p>';
    $("census").textContent = "";
    return;
  }
  const scene = computeScene(state.doc, {
    hide: state.hidden,
    highlightNodes: state.highlight?.nodes,
    highlightEdges: state.highlight?.edges,
  });
  host.innerHTML =
    scene.items.length === 0
      ? '<p class="hint">Empty policy — nothing to draw yet.</p>'
      : sceneToSvg(scene);
  $("census").textContent = SHAPES.filter((s) => scene.census[s] > 0)
    .map((s) => `${s} ${scene.census[s]}`)
    .join(" · ");
};

const renderVerdict = (): void => {
  const host = $("verdict");
  if (!state.highlight) {
    host.innerHTML = "";
    return;
  }
  const { verdict, note } = state.highlight;
  host.innerHTML = `<span class="verdict verdict-${verdict}">${verdict}</span>${
    note ? ` — ${escapeXml(note)}` : ""
  }`;
};

const renderDuties = (): void => {
  const body = $("duty-rows");
  if (state.duties.length === 0) {
    body.innerHTML = '<tr><td colspan="4" class="hint">no duties</td></tr>';
    return;
  }
  body.innerHTML = state.duties
    .map((row) => {
      const b = badge(row.status);
      return (
        `<tr><td><span class="${b.cls}">${b.text}</span></td>` +
        `<td>${escapeXml(dutyLine(row))}</td>` +
        `<td>${escapeXml(row.start ?? "standing")}</td>` +
        `<td>${escapeXml(row.fulfilling ?? "")}</td></tr>`
      );
    })
    .join("");
};

const renderOutline = (rows: ReturnType<typeof outline>): void => {
  const host = $("outline");
  host.innerHTML = rows
    .map((row) => {
      const classes = ["outline-row"];
      if (row.current) classes.push("current");
      if (state.at === row.node) classes.push("pinned");
      return (
        `<li class="${classes.join(" ")}" data-node="${row.node}" ` +
        `style="padding-left:${row.depth * 14 + 6}px">` +
        `<span class="kind kind-${row.kind}">${row.kind}</span> ` +
        `${escapeXml(row.label)} ` +
        `<span class="counts">${row.events}ev / ${row.duties}du</span></li>`
      );
    })
    .join("");
  const current = rows.find((r) => r.current)?.node;
  for (const li of Array.from(host.querySelectorAll("li"))) {
    li.addEventListener(
      "click",
      guard(async () => {
        const node = Number(li.getAttribute("data-node"));
        state.at = node === current ? null : node;
        await refresh();
      }),
    );
  }
};

const renderDecideForm = (): void => {
  if (!state.doc) return;
  const labels = (t: NodeType): string[] =>
    state.doc!.nodes.filter((n) => n.type === t)
      .map((n) => n.label)
      .sort();
  const fill = (id: string, values: string[]): void => {
    const select = $<HTMLSelectElement>(id);
    const previous = select.value;
    select.innerHTML = values
      .map((v) => `<option value="${escapeXml(v)}">${escapeXml(v)}</option>`)
      .join("");
    if (values.includes(previous)) select.value = previous;
  };
  fill("decide-p", labels("P"));
  fill("decide-a", labels("A"));
  fill("decide-r", labels("R"));
};

const renderSessions = async (): Promise<void> => {
  const { sessions } = await api.listSessions();
  const select = $<HTMLSelectElement>("session-list");
  select.innerHTML =
    '<option value="">— pick a session —</option>' +
    sessions
      .map(
        (s) =>
          `<option value="${s.id}">${s.id} (${s.mode}, ${s.steps} steps)</option>`,
      )
      .join("");
  if (state.sid) select.value = state.sid;
};

async function refresh(): Promise<void> {
  if (!state.sid) {
    state.doc = null;
    state.duties = [];
    renderCanvas();
    renderDuties();
    $("outline").innerHTML = "";
    renderVerdict();
    return;
  }
  const [doc, dutyResp, deriv] = await Promise.all([
    api.graph(state.sid, { view: state.view, at: state.at ?? undefined }),
    api.duties(state.sid),
    api.derivation(state.sid),
  ]);
  const flips = diffDuties(state.duties, dutyResp.duties).flipped;
  for (const flip of flips) log(`${flip.key}: ${flip.from} → ${flip.to}`);
  state.doc = doc;
  state.duties = dutyResp.duties;
  renderCanvas();
  renderVerdict();
  renderDuties();
  renderOutline(outline(deriv));
  renderDecideForm();
}

// ------------------------------------------------------------------ set-up

const renderLegend = (): void => {
  $("legend").innerHTML = LEGEND.map(
    (entry) =>
      `<li><span class="swatch swatch-${entry.shape.toLowerCase()}"></span>` +
      `${entry.shape} · ${entry.types} — ${entry.meaning}</li>`,
  ).join("");
};

const renderFilters = (): void => {
  const host = $("filters");
  host.innerHTML = NODE_TYPES.map(
    (t) =>
      `<label><input type="checkbox" data-type="${t}" checked> ${t}</label>`,
  ).join(" ");
  for (const box of Array.from(host.querySelectorAll("input"))) {
    box.addEventListener(
      "change",
      guard(async () => {
        const t = box.getAttribute("data-type") as NodeType;
        if (box.checked) state.hidden.delete(t);
        else state.hidden.add(t);
        renderCanvas();
      }),
    );
  }
};

const selectSession = async (sid: string | null): Promise<void> => {
  state.sid = sid;
  state.at = null;
  state.highlight = null;
  state.duties = [];
  await refresh();
  await renderSessions();
};

const wire = (): void => {
  $<HTMLTextAreaElement>("policy-input").value = JSON.stringify(SAMPLE_POLICY, null, 2);

  $("new-session").addEventListener(
    "click",
    guard(async () => {
      const raw = $<HTMLTextAreaElement>("policy-input").value;
      const fresh = $<HTMLInputElement>("fresh-history").checked;
      const doc: unknown = JSON.parse(raw);
      const created = await api.createSession(doc, fresh);
      log(`session ${created.id} created (${created.mode}, ${created.nodes} nodes)`);
      await selectSession(created.id);
    }),
  );

  $("session-list").addEventListener(
    "change",
    guard(async () => {
      const value = $<HTMLSelectElement>("session-list").value;
      await selectSession(value || null);
    }),
  );

  $("delete-session").addEventListener(
    "click",
    guard(async () => {
      if (!state.sid) return;
      await api.remove(state.sid);
      log(`session ${state.sid} deleted`);
      await selectSession(null);
    }),
  );

  $("fork-session").addEventListener(
    "click",
    guard(async () => {
      if (!state.sid) return;
      const created = await api.fork(state.sid, state.at ?? undefined);
      log(`forked into ${created.id}`);
      await selectSession(created.id);
    }),
  );

  $("follow").addEventListener(
    "click",
    guard(async () => {
      state.at = null;
      await refresh();
    }),
  );

  for (const radio of Array.from(document.querySelectorAll('input[name="view"]'))) {
    radio.addEventListener(
      "change",
      guard(async () => {
        state.view = (radio as HTMLInputElement).value === "full" ? "full" : "default";
        await refresh();
      }),
    );
  }

  $("decide").addEventListener(
    "click",
    guard(async () => {
      if (!state.sid || !state.doc) return;
      const p = $<HTMLSelectElement>("decide-p").value;
      const a = $<HTMLSelectElement>("decide-a").value;
      const r = $<HTMLSelectElement>("decide-r").value;
      const decision = await api.decide(state.sid, p, a, r);
      state.highlight = decisionHighlight(decision, state.doc);
      log(`decide(${p}, ${a}, ${r}) = ${decision.verdict}`);
      renderCanvas();
      renderVerdict();
    }),
  );

  $("clear-highlight").addEventListener(
    "click",
    guard(async () => {
      state.highlight = null;
      renderCanvas();
      renderVerdict();
    }),
  );

  $("inject").addEventListener(
    "click",
    guard(async () => {
      if (!state.sid) return;
      const lines = $<HTMLTextAreaElement>("event-input").value
        .split("\n")
        .map((l) => l.trim())
        .filter((l) => l.length > 0);
      const events = lines.map((l) => JSON.parse(l) as Record<string, unknown>);
      if (events.length === 0) return;
      const delta = await api.inject(state.sid, events);
      log(
        `${events.length} event(s) in: ${delta.created.length} duty(ies) created, ` +
        `${delta.closed.length} closed`,
      );
      for (const line of lines) log(`· ${eventSummary(line)}`);
      await refresh();
    }),
  );

  $("run-strategy").addEventListener(
    "click",
    guard(async () => {
      if (!state.sid) return;
      const script = $<HTMLTextAreaElement>("strategy-input").value;
      const seedRaw = $<HTMLInputElement>("strategy-seed").value.trim();
      const req: { script: string; seed?: number } = { script };
      if (seedRaw !== "") req.seed = Number(seedRaw);
      const report = await api.runStrategy(state.sid, req);
      log(
        `strategy applied ${report.steps.length} rule(s): ` +
          report.steps.map((s) => s.rule).join(", "),
      );
      await refresh();
    }),
  );
};

const boot = (): void => {
  renderLegend();
  renderFilters();
  wire();
  guard(async () => {
    await renderSessions();
    await refresh();
  })();
};

boot();
