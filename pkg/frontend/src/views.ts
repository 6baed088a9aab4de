// HTML renderers for the three screens: login, team dashboard, and
// instructor console. Every renderer is a pure function from view state
// to an HTML string, so tests can assert on the exact markup without a
// DOM. Numbers are never reformatted here — what the service sent (or a
// fixed-point sum of it) is what appears on screen.

import { BlockView, CostRow, DeviceSpec, FinalitySample, RoundSummary, TeamReport } from "./api.js";
import { isFp, parseFp, sumFp } from "./fixedpoint.js";
import { InstructorSession, TeamSession } from "./session.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

// ----- login ----------------------------------------------------------------

export function loginView(message: string | null): string {
  return `
<section class="card login">
  <h1>chainclass</h1>
  <p>Enter your access token. Teams use their team token; the instructor
  uses the instructor token.</p>
  <form data-action="login">
    <input id="token" type="password" placeholder="token" autocomplete="off">
    <button type="submit">Sign in</button>
  </form>
  ${message ? `<p class="error">${escapeHtml(message)}</p>` : ""}
</section>`;
}

// ----- shared fragments -------------------------------------------------------

export function connectionBanner(connected: boolean, stale: boolean): string {
  if (connected) {
    return "";
  }
  const staleNote = stale ? " Showing the last data received — it may be stale." : "";
  return `<div class="banner offline">Connection lost — retrying every poll.${staleNote}</div>`;
}

export function roundHeader(current: number, total: number, complete: boolean): string {
  if (complete) {
    return `<h2>Simulation complete after ${total} rounds</h2>`;
  }
  return `<h2>Round ${current} of ${total}</h2>`;
}

// ----- charts -----------------------------------------------------------------

const CHART_W = 480;
const CHART_H = 140;
const BAR_GAP = 2;

function barRect(x: number, width: number, value: number, max: number, cls: string, title: string): string {
  const height = max <= 0 ? 0 : Math.round((value / max) * (CHART_H - 20));
  const y = CHART_H - height;
  return `<rect class="${cls}" x="${x}" y="${y}" width="${width}" height="${height}"><title>${escapeHtml(title)}</title></rect>`;
}

/** Bar chart of block-finality time per closed round (milliseconds). */
export function finalityChart(samples: FinalitySample[]): string {
  if (samples.length === 0) {
    return `<p class="placeholder">No rounds closed yet.</p>`;
  }
  const max = Math.max(...samples.map((s) => s.finality_ms), 1);
  const slot = CHART_W / samples.length;
  const bars = samples
    .map((s, i) =>
      barRect(i * slot + BAR_GAP, slot - 2 * BAR_GAP, s.finality_ms, max, "bar-finality", `round ${s.round}: ${s.finality_ms} ms`),
    )
    .join("");
  return `<svg class="chart" viewBox="0 0 ${CHART_W} ${CHART_H}" role="img" aria-label="finality per round">${bars}</svg>`;
}

/** Grouped bars of average normalized gas per round, one bar per network
 * profile. Bar heights are proportional to the exact fixed-point values,
 * so a profile quoted at a third of another renders at a third of the
 * height; the verbatim strings ride along as hover titles. */
export function costChart(rows: CostRow[]): string {
  if (rows.length === 0) {
    return `<p class="placeholder">No cost data yet.</p>`;
  }
  const rounds = [...new Set(rows.map((r) => r.round))].sort((a, b) => a - b);
  const profiles = [...new Set(rows.map((r) => r.profile))];
  const max = Math.max(...rows.map((r) => Number(parseFp(r.avg_normalized_gas))), 1);
  const slot = CHART_W / rounds.length;
  const barWidth = Math.max((slot - 2 * BAR_GAP) / profiles.length, 1);
  const bars: string[] = [];
  rows.forEach((row) => {
    const gi = rounds.indexOf(row.round);
    const pi = profiles.indexOf(row.profile);
    const x = gi * slot + BAR_GAP + pi * barWidth;
    bars.push(
      barRect(
        x,
        barWidth - 1,
        Number(parseFp(row.avg_normalized_gas)),
        max,
        `bar-${escapeHtml(row.profile)}`,
        `${row.profile} round ${row.round}: ${row.avg_normalized_gas} normalized gas, ${row.avg_fee_wei} wei`,
      ),
    );
  });
  const legend = profiles
    .map((p) => `<span class="legend-item"><span class="swatch bar-${escapeHtml(p)}"></span>${escapeHtml(p)}</span>`)
    .join(" ");
  return `<svg class="chart" viewBox="0 0 ${CHART_W} ${CHART_H}" role="img" aria-label="cost per profile per round">${bars.join("")}</svg>
<div class="legend">${legend}</div>`;
}

export function costTable(rows: CostRow[]): string {
  if (rows.length === 0) {
    return "";
  }
  const body = rows
    .map(
      (r) => `<tr><td>${r.round}</td><td>${escapeHtml(r.profile)}</td><td>${escapeHtml(r.basis)}</td>` +
        `<td>${escapeHtml(r.avg_normalized_gas)}</td><td>${escapeHtml(r.avg_fee_wei)}</td></tr>`,
    )
    .join("");
  return `
<table class="data">
  <thead><tr><th>round</th><th>profile</th><th>basis</th><th>avg normalized gas</th><th>avg fee (wei)</th></tr></thead>
  <tbody>${body}</tbody>
</table>`;
}

// ----- team dashboard -----------------------------------------------------------

function deviceOptions(devices: DeviceSpec[], selected: string | null): string {
  return devices
    .map((d) => {
      const label = `${d.device_id} — ${d.spec_tier}, ${d.target_market}`;
      const sel = d.device_id === selected ? " selected" : "";
      return `<option value="${escapeHtml(d.device_id)}"${sel}>${escapeHtml(label)}</option>`;
    })
    .join("");
}

export interface FormInputs {
  device: string | null;
  budgets: Record<string, string>;
  keywords: string;
}

/** Live budget total shown under the form: the exact fixed-point sum of
 * the entered amounts, or a dash while any amount is unparseable. */
export function budgetTotal(budgets: Record<string, string>, platforms: string[]): string {
  const values = platforms.map((p) => budgets[p] ?? "");
  if (!values.every(isFp)) {
    return "—";
  }
  return sumFp(values);
}

/** The decision form. Rendered separately from the dashboard so polling
 * never wipes half-typed inputs; locked after submission until the next
 * round opens. */
export function decisionForm(session: TeamSession, inputs: FormInputs): string {
  const state = session.state;
  if (state === null || !state.initialized) {
    return `<p class="placeholder">Waiting for the instructor to start the simulation…</p>`;
  }
  if (state.complete) {
    return `<p class="placeholder">The simulation has finished — no more decisions.</p>`;
  }
  const locked = session.submittedThisRound;
  const disabled = locked ? " disabled" : "";
  const budgetRows = state.platforms
    .map(
      (p) => `
    <label>${escapeHtml(p)} budget
      <input class="budget" data-platform="${escapeHtml(p)}" value="${escapeHtml(inputs.budgets[p] ?? "")}" inputmode="decimal"${disabled}>
    </label>`,
    )
    .join("");
  const total = budgetTotal(inputs.budgets, state.platforms);
  const matches = total === state.round_budget;
  return `
<form class="card decision" data-action="submit-decision">
  <h3>Round ${state.current_round} decision</h3>
  <label>device
    <select id="device"${disabled}>${deviceOptions(state.devices, inputs.device)}</select>
  </label>
  ${budgetRows}
  <label>keywords (comma-separated)
    <input id="keywords" value="${escapeHtml(inputs.keywords)}"${disabled}>
  </label>
  <p class="total ${matches ? "ok" : "off"}">Total: <strong>${escapeHtml(total)}</strong> of ${escapeHtml(state.round_budget)}</p>
  <button type="submit"${locked ? " disabled" : ""}>${locked ? "Submitted — waiting for round close" : "Submit decision"}</button>
  ${session.submitMessage ? `<p class="error">${escapeHtml(session.submitMessage)}</p>` : ""}
</form>`;
}

export function reportCard(report: TeamReport): string {
  const chainFacts =
    report.gas_used != null && report.fee_wei != null && report.block_height != null
      ? `<p class="chain-facts">gas <strong>${report.gas_used}</strong> · fee <strong>${escapeHtml(report.fee_wei)}</strong> wei · block ${report.block_height}</p>`
      : "";
  return `
<article class="card report">
  <h4>Round ${report.round}</h4>
  <dl>
    <dt>likes</dt><dd>${escapeHtml(report.likes)}</dd>
    <dt>post engagement</dt><dd>${escapeHtml(report.post_engagement)}</dd>
    <dt>page views</dt><dd>${escapeHtml(report.page_views)}</dd>
  </dl>
  ${chainFacts}
</article>`;
}

/** Everything on the team screen except the decision form. */
export function teamDashboard(session: TeamSession): string {
  const state = session.state;
  const banner = connectionBanner(session.connected, session.stale);
  if (state === null) {
    return `${banner}<p class="placeholder">Loading…</p>`;
  }
  const reports = [...session.reports].reverse().map(reportCard).join("");
  return `
${banner}
${roundHeader(state.current_round, state.total_rounds, state.complete)}
<section class="reports">
  <h3>Your activity reports</h3>
  ${reports || `<p class="placeholder">No rounds closed yet.</p>`}
</section>
<section class="metrics">
  <h3>Finality per round (ms)</h3>
  ${finalityChart(session.finality)}
  <h3>Average cost per network profile</h3>
  ${costChart(session.costs)}
</section>`;
}

// ----- instructor console ---------------------------------------------------------

function submissionGrid(teams: string[], submitted: Record<string, boolean>): string {
  const rows = teams
    .map(
      (t) =>
        `<tr><td>${escapeHtml(t)}</td><td class="${submitted[t] ? "yes" : "no"}">${submitted[t] ? "submitted" : "waiting"}</td></tr>`,
    )
    .join("");
  return `<table class="data grid"><thead><tr><th>team</th><th>status</th></tr></thead><tbody>${rows}</tbody></table>`;
}

function summaryRows(summaries: RoundSummary[]): string {
  return summaries
    .map((s) => {
      const teams = Object.keys(s.gas_by_team).sort();
      const gas = teams.map((t) => `${escapeHtml(t)}: ${s.gas_by_team[t]}`).join(", ");
      return `<tr><td>${s.round}</td><td>${s.block_height}</td><td>${s.finality_ms}</td><td>${gas}</td></tr>`;
    })
    .join("");
}

function explorerPanel(block: BlockView | null, message: string | null): string {
  const body = block
    ? `<pre class="block-dump">${escapeHtml(JSON.stringify(block, null, 2))}</pre>`
    : message
      ? `<p class="error">${escapeHtml(message)}</p>`
      : `<p class="placeholder">Load a block to inspect it.</p>`;
  return `
<section class="explorer">
  <h3>Chain explorer</h3>
  <form data-action="load-block">
    <label>height <input id="block-height" type="number" min="0" value="0"></label>
    <button type="submit">Load block</button>
  </form>
  ${body}
</section>`;
}

export function instructorView(session: InstructorSession): string {
  const state = session.state;
  const banner = connectionBanner(session.connected, session.stale);
  if (state === null) {
    return `${banner}<p class="placeholder">Loading…</p>`;
  }
  const action = !state.initialized
    ? `<button data-action="init">Start simulation</button>`
    : state.complete
      ? `<p class="placeholder">Simulation complete.</p>`
      : `<button data-action="close-round"${session.canClose ? "" : " disabled"}>Close round ${state.current_round}</button>
         ${session.canClose ? "" : `<span class="hint">enabled once every team has submitted</span>`}`;
  return `
${banner}
${roundHeader(state.current_round, state.total_rounds, state.complete)}
<p class="facts">consensus ${escapeHtml(state.consensus_mode)} · chain height ${state.chain_height} · closed rounds ${state.closed_rounds}</p>
<section class="controls card">
  ${action}
  ${session.actionMessage ? `<p class="error">${escapeHtml(session.actionMessage)}</p>` : ""}
</section>
<section class="status">
  <h3>Submissions for round ${state.current_round}</h3>
  ${submissionGrid(state.teams, state.submitted)}
</section>
<section class="rounds">
  <h3>Closed rounds</h3>
  ${
    session.summaries.length
      ? `<table class="data"><thead><tr><th>round</th><th>block</th><th>finality (ms)</th><th>gas by team</th></tr></thead><tbody>${summaryRows(session.summaries)}</tbody></table>`
      : `<p class="placeholder">No rounds closed yet.</p>`
  }
</section>
<section class="metrics">
  <h3>Finality per round (ms)</h3>
  ${finalityChart(session.finality)}
  <h3>Average cost per network profile</h3>
  ${costChart(session.costs)}
  ${costTable(session.costs)}
</section>
${explorerPanel(session.explorerBlock, session.explorerMessage)}`;
}
