import { describe, expect, it, vi } from "vitest";

import { Api, SessionView } from "../src/api.js";
import { SessionStore } from "../src/store.js";

function view(partial: Partial<SessionView> = {}): SessionView {
  return {
    id: "s1",
    state: "awaiting_review",
    iteration: 1,
    capped: false,
    error: null,
    gamma: 0.5,
    p: [0.4],
    gamma_iteration: 1,
    negatives: 8,
    candidates: [],
    history: [],
    ...partial,
  };
}

function apiWith(fetchFn: (input: string, init?: RequestInit) => Promise<Response>): Api {
  return new Api("", fetchFn);
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), { status });
}

describe("SessionStore.refresh", () => {
  it("coalesces concurrent polls into one request", async () => {
    let resolve!: (r: Response) => void;
    const gate = new Promise<Response>((r) => (resolve = r));
    const fetchFn = vi.fn(() => gate);
    const store = new SessionStore(apiWith(fetchFn), "s1");
    const a = store.refresh();
    const b = store.refresh();
    expect(a).toBe(b);
    resolve(jsonResponse(view()));
    await a;
    expect(fetchFn).toHaveBeenCalledTimes(1);
    expect(store.getState().session?.id).toBe("s1");
    // a later poll issues a fresh request
    await store.refresh();
    expect(fetchFn).toHaveBeenCalledTimes(2);
  });

  it("keeps the last view and raises a banner on errors", async () => {
    let fail = false;
    const fetchFn = vi.fn(async () =>
      fail ? jsonResponse({ error: "x", detail: "boom" }, 500) : jsonResponse(view()),
    );
    const store = new SessionStore(apiWith(fetchFn), "s1");
    await store.refresh();
    fail = true;
    await store.refresh();
    const state = store.getState();
    expect(state.session?.id).toBe("s1"); // stale view retained
    expect(state.banner).toContain("boom");
  });
});

describe("SessionStore.decide", () => {
  it("sends exactly one POST per press even when double-clicked", async () => {
    let resolve!: (r: Response) => void;
    const gate = new Promise<Response>((r) => (resolve = r));
    const posts: string[] = [];
    const fetchFn = vi.fn((url: string, init?: RequestInit) => {
      if (init?.method === "POST") {
        posts.push(url);
        return gate;
      }
      return Promise.resolve(jsonResponse(view()));
    });
    const store = new SessionStore(apiWith(fetchFn), "s1");
    const first = store.decide("approve");
    const second = store.decide("approve"); // double-click while pending
    resolve(jsonResponse(view({ state: "done" })));
    expect(await second).toBe(false);
    expect(await first).toBe(true);
    expect(posts).toHaveLength(1);
    expect(store.getState().session?.state).toBe("done");
    expect(store.getState().decisionPending).toBe(false);
  });

  it("surfaces conflicts as a banner and re-syncs", async () => {
    const fetchFn = vi.fn(async (url: string, init?: RequestInit) => {
      if (init?.method === "POST") {
        return jsonResponse({ error: "conflict", detail: "decision in state done" }, 409);
      }
      return jsonResponse(view({ state: "done" }));
    });
    const store = new SessionStore(apiWith(fetchFn), "s1");
    const posted = await store.decide("reject");
    expect(posted).toBe(false);
    expect(store.getState().banner).toContain("decision in state done");
    expect(store.getState().session?.state).toBe("done"); // refreshed
  });
});

describe("SessionStore polling cadence", () => {
  it("polls fast while the backend works and relaxes afterwards", async () => {
    const states = ["learning", "optimizing", "awaiting_review", "done"];
    let i = 0;
    const fetchFn = vi.fn(async () => jsonResponse(view({ state: states[i++] })));
    const store = new SessionStore(apiWith(fetchFn), "s1");
    await store.refresh();
    expect(store.pollDelay()).toBe(1000);
    await store.refresh();
    expect(store.pollDelay()).toBe(1000);
    await store.refresh();
    expect(store.pollDelay()).toBe(3000);
  });

  it("startPolling keeps refreshing until stopped", async () => {
    vi.useFakeTimers();
    try {
      const fetchFn = vi.fn(async () => jsonResponse(view({ state: "learning" })));
      const store = new SessionStore(apiWith(fetchFn), "s1");
      store.startPolling();
      await vi.advanceTimersByTimeAsync(3500);
      expect(fetchFn.mock.calls.length).toBeGreaterThanOrEqual(3);
      store.stopPolling();
      const count = fetchFn.mock.calls.length;
      await vi.advanceTimersByTimeAsync(5000);
      expect(fetchFn.mock.calls.length).toBe(count);
    } finally {
      vi.useRealTimers();
    }
  });
});

describe("SessionStore.subscribe", () => {
  it("notifies immediately and on every update", async () => {
    const fetchFn = vi.fn(async () => jsonResponse(view()));
    const store = new SessionStore(apiWith(fetchFn), "s1");
    const seen: (string | undefined)[] = [];
    const unsubscribe = store.subscribe((s) => seen.push(s.session?.state));
    await store.refresh();
    expect(seen[0]).toBeUndefined();
    expect(seen.at(-1)).toBe("awaiting_review");
    unsubscribe();
    await store.refresh();
    expect(seen.length).toBe(2);
  });
});
