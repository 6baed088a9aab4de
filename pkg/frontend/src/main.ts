// DOM entry point. All logic lives in session.ts and all markup in
// views.ts; this file only routes events to sessions and repaints the
// two page regions when their rendered state actually changes (so a
// 2-second poll never wipes a half-typed form).

import { ApiClient } from "./api.js";
import { InstructorSession, TeamSession } from "./session.js";
import {
  budgetTotal,
  decisionForm,
  escapeHtml,
  instructorView,
  loginView,
  teamDashboard,
  FormInputs,
} from "./views.js";

const POLL_MS = 2000;

const app = document.querySelector<HTMLElement>("#app");
if (app) {
  mountLogin(app, null);
}

function mountLogin(root: HTMLElement, message: string | null): void {
  root.innerHTML = loginView(message);
  const form = root.querySelector<HTMLFormElement>("form[data-action=login]");
  form?.addEventListener("submit", async (event) => {
    event.preventDefault();
    const token = root.querySelector<HTMLInputElement>("#token")?.value.trim() ?? "";
    const client = new ApiClient(token);
    try {
      const who = await client.whoami();
      if (who.role === "team" && who.team) {
        mountTeam(root, client, who.team);
      } else {
        mountInstructor(root, client);
      }
    } catch (error) {
      mountLogin(root, (error as Error).message);
    }
  });
}

// ----- team screen ------------------------------------------------------------

function mountTeam(root: HTMLElement, client: ApiClient, team: string): void {
  const session = new TeamSession(client, team);
  root.innerHTML = `
<header><h1>chainclass — ${escapeHtml(team)}</h1></header>
<section id="form-area"></section>
<section id="dashboard-area"></section>`;
  const formArea = root.querySelector<HTMLElement>("#form-area")!;
  const dashArea = root.querySelector<HTMLElement>("#dashboard-area")!;

  const inputs: FormInputs = { device: null, budgets: {}, keywords: "" };
  let formPrint = "";
  let dashPrint = "";

  const readForm = () => {
    inputs.device = formArea.querySelector<HTMLSelectElement>("#device")?.value ?? inputs.device;
    formArea.querySelectorAll<HTMLInputElement>("input.budget").forEach((el) => {
      inputs.budgets[el.dataset.platform ?? ""] = el.value;
    });
    inputs.keywords = formArea.querySelector<HTMLInputElement>("#keywords")?.value ?? inputs.keywords;
  };

  const paint = (force = false) => {
    const state = session.state;
    const nextForm = JSON.stringify([
      state?.current_round,
      state?.initialized,
      state?.complete,
      session.submittedThisRound,
      session.submitMessage,
    ]);
    if (force || nextForm !== formPrint) {
      formPrint = nextForm;
      formArea.innerHTML = decisionForm(session, inputs);
    }
    const nextDash = JSON.stringify([state, session.reports, session.finality, session.costs, session.connected]);
    if (force || nextDash !== dashPrint) {
      dashPrint = nextDash;
      dashArea.innerHTML = teamDashboard(session);
    }
  };

  // Live budget total: patch just the total line so typing keeps focus.
  formArea.addEventListener("input", () => {
    readForm();
    const totalEl = formArea.querySelector<HTMLElement>(".total");
    if (totalEl && session.state) {
      const total = budgetTotal(inputs.budgets, session.state.platforms);
      totalEl.innerHTML = `Total: <strong>${escapeHtml(total)}</strong> of ${escapeHtml(session.state.round_budget)}`;
      totalEl.className = `total ${total === session.state.round_budget ? "ok" : "off"}`;
    }
  });

  formArea.addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!session.state) {
      return;
    }
    readForm();
    const keywords = inputs.keywords
      .split(",")
      .map((k) => k.trim())
      .filter((k) => k.length > 0);
    const device = inputs.device ?? session.state.devices[0]?.device_id ?? "";
    await session.submit(device, inputs.budgets, keywords);
    paint(true);
  });

  const tick = async () => {
    await session.refresh();
    paint();
  };
  void tick();
  window.setInterval(() => void tick(), POLL_MS);
}

// ----- instructor screen ---------------------------------------------------------

function mountInstructor(root: HTMLElement, client: ApiClient): void {
  const session = new InstructorSession(client);
  root.innerHTML = `
<header><h1>chainclass — instructor</h1></header>
<section id="console-area"></section>`;
  const consoleArea = root.querySelector<HTMLElement>("#console-area")!;

  let consolePrint = "";
  let explorerHeight = "0";

  const paint = (force = false) => {
    const next = JSON.stringify([
      session.state,
      session.summaries,
      session.finality,
      session.costs,
      session.connected,
      session.actionMessage,
      session.explorerBlock,
      session.explorerMessage,
      explorerHeight,
    ]);
    if (force || next !== consolePrint) {
      consolePrint = next;
      consoleArea.innerHTML = instructorView(session);
      const heightInput = consoleArea.querySelector<HTMLInputElement>("#block-height");
      if (heightInput) {
        heightInput.value = explorerHeight;
      }
    }
  };

  consoleArea.addEventListener("input", (event) => {
    const target = event.target as HTMLInputElement;
    if (target.id === "block-height") {
      explorerHeight = target.value;
    }
  });

  consoleArea.addEventListener("click", async (event) => {
    const target = (event.target as HTMLElement).closest("[data-action]");
    if (!(target instanceof HTMLElement)) {
      return;
    }
    if (target.dataset.action === "init") {
      await session.init();
      await session.refresh();
      paint(true);
    } else if (target.dataset.action === "close-round") {
      await session.closeRound();
      await session.refresh();
      paint(true);
    }
  });

  consoleArea.addEventListener("submit", async (event) => {
    event.preventDefault();
    const form = event.target as HTMLFormElement;
    if (form.dataset.action === "load-block") {
      const height = Number(explorerHeight);
      if (Number.isInteger(height) && height >= 0) {
        await session.loadBlock(height);
        paint(true);
      }
    }
  });

  const tick = async () => {
    await session.refresh();
    paint();
  };
  void tick();
  window.setInterval(() => void tick(), POLL_MS);
}
