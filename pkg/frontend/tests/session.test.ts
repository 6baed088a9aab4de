import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { budgetProblem, InstructorSession, TeamSession } from "../src/session.js";
import { teamDashboard } from "../src/views.js";
import { FakeServer } from "./fakeserver.js";

const GOOD_BUDGETS = {
  search: "4000.0000",
  social: "3000.0000",
  display: "2000.0000",
  video: "1000.0000",
};

function teamSession(server: FakeServer, team: string): TeamSession {
  return new TeamSession(new ApiClient(`${team}-token`, server.fetch), team);
}

function instructorSession(server: FakeServer): InstructorSession {
  return new InstructorSession(new ApiClient("instructor-token", server.fetch));
}

describe("interactive round loop", () => {
  it("submits a decision, closes the round, and renders the report after one poll", async () => {
    const server = new FakeServer(["team-1", "team-2"]);
    const instructor = instructorSession(server);
    expect(await instructor.init()).toBe(true);

    const team1 = teamSession(server, "team-1");
    const team2 = teamSession(server, "team-2");
    await team1.refresh();
    await team2.refresh();
    expect(team1.state?.current_round).toBe(1);
    expect(team1.submittedThisRound).toBe(false);

    // Team 1 submits through the form path.
    const result = await team1.submit("dev-core", GOOD_BUDGETS, ["camera", "kw-1"]);
    expect(result).toEqual({ ok: true, message: null, blockedLocally: false });
    expect(team1.submittedThisRound).toBe(true);
    const posts = server.log.filter((r) => r.method === "POST" && r.path === "/api/teams/team-1/decisions");
    expect(posts).toHaveLength(1);
    expect((posts[0].body as { budgets: unknown }).budgets).toEqual(GOOD_BUDGETS);

    await team2.submit("dev-basic", GOOD_BUDGETS, ["price"]);

    // Instructor sees both submissions and the close button becomes usable.
    await instructor.refresh();
    expect(instructor.canClose).toBe(true);
    expect(await instructor.closeRound()).toBe(true);

    // One poll tick later the team's committed report is on screen,
    // byte-for-byte what the service returned.
    await team1.refresh();
    expect(team1.reports).toHaveLength(1);
    const committed = server.reports.get("team-1:1")!;
    expect(team1.reports[0].likes).toBe(committed.likes);
    expect(team1.reports[0].post_engagement).toBe(committed.post_engagement);
    expect(team1.reports[0].page_views).toBe(committed.page_views);
    expect(team1.reports[0].gas_used).toBe(36000);
    expect(team1.reports[0].fee_wei).toBe("568800000000000");

    const html = teamDashboard(team1);
    expect(html).toContain(committed.likes);
    expect(html).toContain(committed.post_engagement);
    expect(html).toContain(committed.page_views);
    expect(html).toContain("568800000000000");
    expect(team1.state?.current_round).toBe(2);
    expect(team1.submittedThisRound).toBe(false);
  });

  it("plays a full game to completion", async () => {
    const server = new FakeServer(["team-1"]);
    const instructor = instructorSession(server);
    await instructor.init();
    const team = teamSession(server, "team-1");
    for (let round = 1; round <= 3; round += 1) {
      await team.refresh();
      expect((await team.submit("dev-prime", GOOD_BUDGETS, ["display"])).ok).toBe(true);
      await instructor.refresh();
      expect(await instructor.closeRound()).toBe(true);
    }
    await team.refresh();
    expect(team.state?.complete).toBe(true);
    expect(team.reports).toHaveLength(3);
    await instructor.refresh();
    expect(instructor.canClose).toBe(false);
    expect(await instructor.closeRound()).toBe(false);
    expect(instructor.actionMessage).toBe("SimulationComplete: all rounds have been played");
  });
});

describe("client-side budget validation", () => {
  it("blocks a sum off by one fixed-point unit without sending a request", async () => {
    const server = new FakeServer();
    await instructorSession(server).init();
    const team = teamSession(server, "team-1");
    await team.refresh();

    const before = server.log.length;
    const result = await team.submit("dev-core", { ...GOOD_BUDGETS, video: "1000.0001" }, []);
    expect(result.ok).toBe(false);
    expect(result.blockedLocally).toBe(true);
    expect(result.message).toBe("BudgetMismatch: budgets sum to 10000.0001, round budget is 10000.0000");
    expect(team.submitMessage).toBe(result.message);
    expect(server.log.length).toBe(before);
  });

  it("blocks unparseable amounts locally too", async () => {
    const server = new FakeServer();
    await instructorSession(server).init();
    const team = teamSession(server, "team-1");
    await team.refresh();

    const before = server.log.length;
    const result = await team.submit("dev-core", { ...GOOD_BUDGETS, search: "4,000" }, []);
    expect(result.blockedLocally).toBe(true);
    expect(result.message).toContain("BudgetMismatch");
    expect(result.message).toContain("search");
    expect(server.log.length).toBe(before);
  });

  it("accepts uncanonical spellings that the service accepts, canonicalized", async () => {
    const server = new FakeServer();
    await instructorSession(server).init();
    const team = teamSession(server, "team-1");
    await team.refresh();

    const result = await team.submit(
      "dev-core",
      { search: "4000", social: "3000.00", display: " 2000.0000 ", video: "1000." },
      [],
    );
    expect(result.ok).toBe(true);
    const post = server.log.find((r) => r.method === "POST" && r.path.endsWith("/decisions"))!;
    expect((post.body as { budgets: Record<string, string> }).budgets).toEqual(GOOD_BUDGETS);
  });

  it("budgetProblem reports totals with exact fixed-point strings", () => {
    expect(budgetProblem(GOOD_BUDGETS, ["search", "social", "display", "video"], "10000.0000")).toBeNull();
    expect(budgetProblem({ search: "0.1000", social: "0.2000" }, ["search", "social"], "0.3000")).toBeNull();
    expect(budgetProblem({ search: "5000.0000", social: "5000.0001" }, ["search", "social"], "10000.0000")).toBe(
      "BudgetMismatch: budgets sum to 10000.0001, round budget is 10000.0000",
    );
  });
});

describe("service rejections surface verbatim", () => {
  it("shows DuplicateDecision from a resubmission", async () => {
    const server = new FakeServer();
    await instructorSession(server).init();
    const team = teamSession(server, "team-1");
    await team.refresh();
    expect((await team.submit("dev-core", GOOD_BUDGETS, [])).ok).toBe(true);

    team.submittedThisRound = false; // simulate a stale view resubmitting
    const result = await team.submit("dev-core", GOOD_BUDGETS, []);
    expect(result.ok).toBe(false);
    expect(result.blockedLocally).toBe(false);
    expect(result.message).toBe("DuplicateDecision: team-1 already submitted for round 1");
  });

  it("shows WrongRound when the form is stale after a close", async () => {
    const server = new FakeServer();
    const instructor = instructorSession(server);
    await instructor.init();
    const team1 = teamSession(server, "team-1");
    const team2 = teamSession(server, "team-2");
    await team1.refresh();
    await team2.refresh();
    await team1.submit("dev-core", GOOD_BUDGETS, []);
    await team2.submit("dev-core", GOOD_BUDGETS, []);
    await instructor.refresh();
    await instructor.closeRound();

    // team-2 still shows round 1 (no refresh yet) and tries again.
    team2.submittedThisRound = false;
    const result = await team2.submit("dev-core", GOOD_BUDGETS, []);
    expect(result.message).toBe("WrongRound: decision names round 1 but round 2 is open");
  });

  it("shows MissingDecisions with the waiting teams when closing early", async () => {
    const server = new FakeServer(["team-1", "team-2"]);
    const instructor = instructorSession(server);
    await instructor.init();
    const team = teamSession(server, "team-1");
    await team.refresh();
    await team.submit("dev-core", GOOD_BUDGETS, []);

    await instructor.refresh();
    expect(instructor.canClose).toBe(false);
    expect(await instructor.closeRound()).toBe(false);
    expect(instructor.actionMessage).toBe("MissingDecisions: waiting for decisions from team-2");
  });
});

describe("role isolation", () => {
  it("the team session never issues admin requests", async () => {
    const server = new FakeServer();
    await instructorSession(server).init();
    const team = teamSession(server, "team-1");
    await team.refresh();
    await team.submit("dev-core", GOOD_BUDGETS, ["camera"]);
    await instructorSession(server).refresh();
    await instructorSession(server).closeRound().catch(() => undefined);
    await team.refresh();

    const teamRequests = server.log.filter((r) => r.auth === "Bearer team-1-token");
    expect(teamRequests.length).toBeGreaterThan(0);
    for (const request of teamRequests) {
      expect(request.path.startsWith("/api/admin/")).toBe(false);
    }
  });
});

describe("connection handling", () => {
  it("flags a lost connection, keeps stale data, and recovers", async () => {
    const server = new FakeServer();
    await instructorSession(server).init();
    const team = teamSession(server, "team-1");
    await team.refresh();
    expect(team.connected).toBe(true);
    expect(team.stale).toBe(false);

    server.offline = true;
    await team.refresh();
    expect(team.connected).toBe(false);
    expect(team.state).not.toBeNull(); // last data kept
    expect(team.stale).toBe(true);
    const html = teamDashboard(team);
    expect(html).toContain("Connection lost");
    expect(html).toContain("stale");

    server.offline = false;
    await team.refresh();
    expect(team.connected).toBe(true);
    expect(team.stale).toBe(false);
  });

  it("pauses polling while a mutation is in flight", async () => {
    const server = new FakeServer();
    await instructorSession(server).init();
    const team = teamSession(server, "team-1");
    await team.refresh();

    let release!: () => void;
    server.gate = new Promise((resolve) => {
      release = resolve;
    });
    const pending = team.submit("dev-core", GOOD_BUDGETS, []);
    expect(team.busy).toBe(true);

    const before = server.log.length;
    await team.refresh(); // must no-op: one mutation in flight
    expect(server.log.length).toBe(before);

    server.gate = null;
    release();
    expect((await pending).ok).toBe(true);
    expect(team.busy).toBe(false);

    await team.refresh();
    expect(server.log.length).toBeGreaterThan(before);
  });
});
