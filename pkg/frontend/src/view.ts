// Pure HTML renderers for the review console; no client-side image work,
// gallery <img> tags point straight at the service PNG endpoints.

import { HistoryEntry, SessionView } from "./api.js";
import { StoreState } from "./store.js";

export function esc(text: unknown): string {
  return String(text)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

const STATE_LABELS: Record<string, string> = {
  learning: "Learning",
  optimizing: "Optimizing",
  awaiting_review: "Awaiting review",
  done: "Done",
  failed: "Failed",
};

function fmtGamma(gamma: number | null | undefined): string {
  return gamma === null || gamma === undefined ? "—" : gamma.toFixed(6);
}

function fmtPoint(p: number[] | null | undefined): string {
  if (!p) return "—";
  return "[" + p.map((v) => v.toFixed(2)).join(", ") + "]";
}

export function renderBanner(banner: string | null): string {
  if (!banner) return "";
  return `<div class="banner" role="alert">${esc(banner)}</div>`;
}

export function renderStatus(session: SessionView): string {
  const label = STATE_LABELS[session.state] ?? session.state;
  const spin = session.state === "learning" || session.state === "optimizing"
    ? '<span class="spinner"></span>'
    : "";
  return `
    <header class="status">
      <h1>Session <code>${esc(session.id)}</code></h1>
      <span class="badge badge-${esc(session.state)}">${esc(label)}</span>${spin}
      <span class="meta">iteration ${session.iteration}</span>
      <span class="meta">valuation ${esc(fmtGamma(session.gamma))}</span>
      <span class="meta">p* ${esc(fmtPoint(session.p))}</span>
      <span class="meta">negatives ${session.negatives}</span>
      ${session.capped ? '<span class="meta warn">iteration cap reached</span>' : ""}
      ${session.error ? `<span class="meta warn">${esc(session.error)}</span>` : ""}
    </header>`;
}

export function renderCandidates(session: SessionView): string {
  if (!session.candidates.length) {
    return '<p class="empty">No candidates yet.</p>';
  }
  const cards = session.candidates
    .map(
      (c) => `
      <figure class="card" data-candidate="${esc(c.id)}">
        <img src="${esc(c.png)}" alt="candidate ${esc(c.id)}" width="256" height="256">
        <figcaption>
          seed ${esc(c.seed ?? "?")}
          ${c.satisfied ? '<span class="ok">satisfies</span>' : '<span class="warn">violates</span>'}
          <a href="${esc(c.csv)}">csv</a>
        </figcaption>
      </figure>`,
    )
    .join("\n");
  return `<section class="gallery" aria-label="candidates">${cards}</section>`;
}

export function renderExemplars(state: StoreState): string {
  if (!state.exemplars.length) return "";
  const cards = state.exemplars
    .map(
      (e) => `
      <figure class="card small" data-exemplar="${esc(e.id)}">
        <img src="${esc(e.png)}" alt="positive exemplar ${esc(e.id)}" width="128" height="128">
      </figure>`,
    )
    .join("\n");
  return `
    <aside class="exemplars" aria-label="positive exemplars">
      <h2>Positive set</h2>
      ${cards}
    </aside>`;
}

export function renderControls(state: StoreState): string {
  const session = state.session;
  const enabled =
    !!session && session.state === "awaiting_review" && !state.decisionPending &&
    !session.capped;
  const dis = enabled ? "" : " disabled";
  return `
    <div class="controls">
      <button class="approve" data-decision="approve"${dis}>Approve</button>
      <button class="reject" data-decision="reject"${dis}>Reject &amp; retrain</button>
      ${state.decisionPending ? '<span class="meta">sending…</span>' : ""}
    </div>`;
}

export function renderHistory(history: HistoryEntry[]): string {
  if (!history.length) return "";
  const rows = history
    .map(
      (h) => `
      <tr>
        <td>${h.iteration}</td>
        <td>${esc(fmtGamma(h.gamma))}</td>
        <td>${esc(fmtPoint(h.p_star))}</td>
        <td>${esc(h.decision ?? "—")}</td>
      </tr>`,
    )
    .join("\n");
  return `
    <section class="history">
      <h2>Timeline</h2>
      <table>
        <thead><tr><th>iter</th><th>valuation</th><th>parameters</th><th>decision</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
    </section>`;
}

export function renderApp(state: StoreState): string {
  if (state.loading && !state.session) {
    return `${renderBanner(state.banner)}<p class="empty">Loading…</p>`;
  }
  if (!state.session) {
    return `${renderBanner(state.banner)}<p class="empty">Session not found.</p>`;
  }
  const s = state.session;
  const terminal =
    s.state === "done"
      ? `<p class="terminal ok">Approved: parameters ${esc(fmtPoint(s.p))} with valuation ${esc(fmtGamma(s.gamma))}.</p>`
      : s.state === "failed"
        ? `<p class="terminal warn">No solution: ${esc(s.error ?? "optimization failed")}</p>`
        : "";
  return `
    ${renderBanner(state.banner)}
    ${renderStatus(s)}
    ${terminal}
    <main class="layout">
      <div>
        ${renderCandidates(s)}
        ${renderControls(state)}
      </div>
      ${renderExemplars(state)}
    </main>
    ${renderHistory(s.history)}`;
}
