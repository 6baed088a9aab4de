// Typed client for the service JSON API. The fetch implementation is
// injectable so tests can drive the client against an in-memory server
// and inspect every request it makes.
//
// Wire conventions (kept verbatim, never re-parsed into floats): wei
// amounts are decimal strings, fixed-point values are scale-10^4 strings
// like "2500.0000", byte fields are lowercase 0x-hex.

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface Whoami {
  role: "instructor" | "team";
  team?: string;
}

export interface DeviceSpec {
  device_id: string;
  spec_tier: string;
  target_market: string;
  target_keywords: string[];
}

export interface SimulationState {
  initialized: boolean;
  complete: boolean;
  current_round: number;
  total_rounds: number;
  play_rounds: number;
  teams: string[];
  submitted: Record<string, boolean>;
  round_budget: string;
  platforms: string[];
  metrics: string[];
  benchmarks: Record<string, string>;
  devices: DeviceSpec[];
  network_profile: string;
  contract_address: string | null;
  consensus_mode: string;
  chain_height: number;
  closed_rounds: number;
}

export interface ActivityReport {
  team: string;
  round: number;
  likes: string;
  post_engagement: string;
  page_views: string;
}

/** Report read-back; gas/fee/block appear once the round summary exists. */
export interface TeamReport extends ActivityReport {
  gas_used?: number | null;
  fee_wei?: string | null;
  block_height?: number | null;
}

export interface RoundSummary {
  round: number;
  block_height: number;
  block_hash: string;
  finality_ms: number;
  reports: ActivityReport[];
  gas_by_team: Record<string, number>;
  fee_by_team: Record<string, string>;
}

export interface AdminReports {
  rounds: RoundSummary[];
  latest: Record<string, ActivityReport>;
}

export interface FinalitySample {
  round: number;
  submitted_at: number;
  finalized_at: number;
  finality_ms: number;
}

export interface CostRow {
  round: number;
  profile: string;
  basis: string;
  avg_normalized_gas: string;
  avg_fee_wei: string;
}

export interface NetworkProfile {
  name: string;
  gas_price_gwei: string;
  fee_factor: string;
  basis: string;
}

export interface CostsResponse {
  rows: CostRow[];
  profiles: NetworkProfile[];
}

export interface FinalityResponse {
  samples: FinalitySample[];
}

export interface BlockView {
  height: number;
  parent_hash: string;
  timestamp: number;
  transactions: Array<Record<string, unknown>>;
  seal: Record<string, unknown>;
  state_digest: string;
  block_hash: string;
}

export interface DecisionBody {
  round: number;
  device: string;
  budgets: Record<string, string>;
  keywords: string[];
}

export interface DecisionAccepted {
  status: string;
  team: string;
  round: number;
}

export interface InitResult {
  deploy_block: number;
  [key: string]: unknown;
}

/** Error response from the service: status plus its {error, detail} body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly token: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
    private readonly base = "",
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { Authorization: `Bearer ${this.token}` };
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let code = "HttpError";
      let detail = `unexpected status ${response.status}`;
      try {
        const parsed = await response.json();
        if (parsed && typeof parsed.error === "string") {
          code = parsed.error;
          detail = typeof parsed.detail === "string" ? parsed.detail : "";
        }
      } catch {
        // non-JSON error body: keep the generic code/detail
      }
      throw new ApiError(response.status, code, detail);
    }
    return (await response.json()) as T;
  }

  whoami(): Promise<Whoami> {
    return this.request("GET", "/api/auth/whoami");
  }

  state(): Promise<SimulationState> {
    return this.request("GET", "/api/simulation/state");
  }

  submitDecision(team: string, body: DecisionBody): Promise<DecisionAccepted> {
    return this.request("POST", `/api/teams/${encodeURIComponent(team)}/decisions`, body);
  }

  teamReport(team: string, round: number): Promise<TeamReport> {
    return this.request("GET", `/api/teams/${encodeURIComponent(team)}/reports/${round}`);
  }

  initSimulation(): Promise<InitResult> {
    return this.request("POST", "/api/admin/simulation");
  }

  closeRound(): Promise<RoundSummary> {
    return this.request("POST", "/api/admin/rounds/close");
  }

  adminReports(): Promise<AdminReports> {
    return this.request("GET", "/api/admin/reports");
  }

  finality(): Promise<FinalityResponse> {
    return this.request("GET", "/api/metrics/finality");
  }

  costs(): Promise<CostsResponse> {
    return this.request("GET", "/api/metrics/costs");
  }

  block(height: number): Promise<BlockView> {
    return this.request("GET", `/api/chain/blocks/${height}`);
  }
}
