// View-state holders for the two dashboards. Sessions own all the
// client-side logic — polling, budget validation, mutation flow — and
// views render their state; nothing here touches the DOM.
//
// Concurrency: at most one mutation request is in flight at a time and
// polling is paused while one is pending (refresh() is a no-op when
// `busy` is set).

import {
  ActivityReport,
  ApiClient,
  ApiError,
  BlockView,
  CostRow,
  FinalitySample,
  NetworkProfile,
  RoundSummary,
  SimulationState,
  TeamReport,
} from "./api.js";
import { formatFp, parseFp, sumFp } from "./fixedpoint.js";

export interface SubmitResult {
  ok: boolean;
  /** Inline validation or service error message; null on success. */
  message: string | null;
  /** True when client-side validation failed and no request was sent. */
  blockedLocally: boolean;
}

/** Validate budgets client-side: every amount parses and the total equals
 * the round budget exactly (fixed-point arithmetic, no floats). Returns
 * an inline message, or null when the decision may be sent. */
export function budgetProblem(
  budgets: Record<string, string>,
  platforms: string[],
  roundBudget: string,
): string | null {
  for (const platform of platforms) {
    const raw = budgets[platform] ?? "";
    try {
      parseFp(raw);
    } catch (error) {
      return `BudgetMismatch: ${platform} amount ${JSON.stringify(raw)} is not a valid amount (${(error as Error).message})`;
    }
  }
  const total = sumFp(platforms.map((p) => budgets[p]));
  if (parseFp(total) !== parseFp(roundBudget)) {
    return `BudgetMismatch: budgets sum to ${total}, round budget is ${formatFp(parseFp(roundBudget))}`;
  }
  return null;
}

class BaseSession {
  state: SimulationState | null = null;
  finality: FinalitySample[] = [];
  costs: CostRow[] = [];
  profiles: NetworkProfile[] = [];
  /** False after a failed poll: the view shows a reconnect banner and
   * flags everything on screen as possibly stale. */
  connected = true;
  /** A mutation is in flight; polling pauses until it settles. */
  busy = false;

  constructor(protected readonly client: ApiClient) {}

  get stale(): boolean {
    return !this.connected && this.state !== null;
  }

  protected async pollCore(): Promise<void> {
    this.state = await this.client.state();
    const [finality, costs] = await Promise.all([this.client.finality(), this.client.costs()]);
    this.finality = finality.samples;
    this.costs = costs.rows;
    this.profiles = costs.profiles;
  }
}

export class TeamSession extends BaseSession {
  /** Committed reports fetched so far, ascending by round. */
  reports: TeamReport[] = [];
  /** Inline message from the last submission attempt (null when clear). */
  submitMessage: string | null = null;
  /** Optimistic lock set on 202; confirmed by the next poll. */
  submittedThisRound = false;

  constructor(client: ApiClient, readonly team: string) {
    super(client);
  }

  /** One poll tick: state, metrics, and any newly committed reports. */
  async refresh(): Promise<void> {
    if (this.busy) {
      return;
    }
    try {
      await this.pollCore();
      const closed = this.state!.closed_rounds;
      while (this.reports.length < closed) {
        this.reports.push(await this.client.teamReport(this.team, this.reports.length + 1));
      }
      this.submittedThisRound = this.state!.submitted[this.team] ?? false;
      this.connected = true;
    } catch {
      this.connected = false;
    }
  }

  /** Submit the decision form. Budget-sum validation runs first and
   * blocks the request entirely on failure; service rejections (409/422)
   * surface their error code and detail verbatim. */
  async submit(device: string, budgets: Record<string, string>, keywords: string[]): Promise<SubmitResult> {
    if (this.state === null || !this.state.initialized) {
      return { ok: false, message: "simulation is not running yet", blockedLocally: true };
    }
    const problem = budgetProblem(budgets, this.state.platforms, this.state.round_budget);
    if (problem !== null) {
      this.submitMessage = problem;
      return { ok: false, message: problem, blockedLocally: true };
    }
    const body = {
      round: this.state.current_round,
      device,
      budgets: Object.fromEntries(this.state.platforms.map((p) => [p, formatFp(parseFp(budgets[p]))])),
      keywords,
    };
    this.busy = true;
    try {
      await this.client.submitDecision(this.team, body);
      this.submittedThisRound = true;
      this.submitMessage = null;
      return { ok: true, message: null, blockedLocally: false };
    } catch (error) {
      const message = error instanceof ApiError ? `${error.code}: ${error.detail}` : `connection failed: ${(error as Error).message}`;
      this.submitMessage = message;
      return { ok: false, message, blockedLocally: false };
    } finally {
      this.busy = false;
    }
  }
}

export class InstructorSession extends BaseSession {
  summaries: RoundSummary[] = [];
  latest: Record<string, ActivityReport> = {};
  /** Message from the last init/close attempt (null when clear). */
  actionMessage: string | null = null;
  /** Block loaded in the explorer panel, if any. */
  explorerBlock: BlockView | null = null;
  explorerMessage: string | null = null;

  /** One poll tick: state, per-round summaries, and metric series. */
  async refresh(): Promise<void> {
    if (this.busy) {
      return;
    }
    try {
      await this.pollCore();
      const reports = await this.client.adminReports();
      this.summaries = reports.rounds;
      this.latest = reports.latest;
      this.connected = true;
    } catch {
      this.connected = false;
    }
  }

  /** Whether every team has submitted (enables the close-round button). */
  get canClose(): boolean {
    if (this.state === null || !this.state.initialized || this.state.complete) {
      return false;
    }
    return this.state.teams.every((team) => this.state!.submitted[team]);
  }

  async init(): Promise<boolean> {
    this.busy = true;
    try {
      await this.client.initSimulation();
      this.actionMessage = null;
      return true;
    } catch (error) {
      this.actionMessage =
        error instanceof ApiError ? `${error.code}: ${error.detail}` : `connection failed: ${(error as Error).message}`;
      return false;
    } finally {
      this.busy = false;
    }
  }

  async closeRound(): Promise<boolean> {
    this.busy = true;
    try {
      const summary = await this.client.closeRound();
      this.summaries = [...this.summaries, summary];
      this.actionMessage = null;
      return true;
    } catch (error) {
      this.actionMessage =
        error instanceof ApiError ? `${error.code}: ${error.detail}` : `connection failed: ${(error as Error).message}`;
      return false;
    } finally {
      this.busy = false;
    }
  }

  async loadBlock(height: number): Promise<void> {
    try {
      this.explorerBlock = await this.client.block(height);
      this.explorerMessage = null;
    } catch (error) {
      this.explorerBlock = null;
      this.explorerMessage =
        error instanceof ApiError ? `${error.code}: ${error.detail}` : `connection failed: ${(error as Error).message}`;
    }
  }
}
