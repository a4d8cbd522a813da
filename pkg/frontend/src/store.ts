// Session state container: coalesced polling, decision guard, error banners.

import { Api, ApiError, ExemplarView, SessionView } from "./api.js";

export interface StoreState {
  session: SessionView | null;
  exemplars: ExemplarView[];
  banner: string | null;
  decisionPending: boolean;
  loading: boolean;
}

export type Listener = (state: StoreState) => void;

const ACTIVE_STATES = new Set(["learning", "optimizing"]);

export class SessionStore {
  private state: StoreState = {
    session: null,
    exemplars: [],
    banner: null,
    decisionPending: false,
    loading: true,
  };
  private listeners: Listener[] = [];
  private refreshInFlight: Promise<void> | null = null;
  private pollTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;

  constructor(
    private readonly api: Api,
    readonly sessionId: string,
  ) {}

  getState(): StoreState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.state);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<StoreState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Fetch the session view; concurrent calls share one request. */
  refresh(): Promise<void> {
    if (this.refreshInFlight) return this.refreshInFlight;
    this.refreshInFlight = this.api
      .getSession(this.sessionId)
      .then((session) => {
        this.update({ session, banner: null, loading: false });
      })
      .catch((err) => {
        this.update({ banner: describe(err), loading: false });
      })
      .finally(() => {
        this.refreshInFlight = null;
      });
    return this.refreshInFlight;
  }

  async loadExemplars(): Promise<void> {
    try {
      const body = await this.api.getExemplars(this.sessionId);
      this.update({ exemplars: body.exemplars });
    } catch (err) {
      this.update({ banner: describe(err) });
    }
  }

  /**
   * Post one decision. Returns false (and posts nothing) while an earlier
   * press is still unacknowledged, so double-clicks cause exactly one POST.
   * API conflicts surface as a banner and the view re-syncs.
   */
  async decide(decision: "approve" | "reject"): Promise<boolean> {
    if (this.state.decisionPending) return false;
    this.update({ decisionPending: true });
    let posted = true;
    try {
      const session = await this.api.postDecision(this.sessionId, decision);
      this.update({ session });
    } catch (err) {
      posted = false;
      await this.refresh(); // stale view: re-sync with the service first,
      this.update({ banner: describe(err) }); // then surface the conflict
    } finally {
      this.update({ decisionPending: false });
    }
    return posted;
  }

  /** 1 s while the backend works, relaxed otherwise. */
  pollDelay(): number {
    const state = this.state.session?.state;
    return state && ACTIVE_STATES.has(state) ? 1000 : 3000;
  }

  startPolling(): void {
    this.stopped = false;
    const tick = async () => {
      if (this.stopped) return;
      await this.refresh();
      if (this.stopped) return;
      this.pollTimer = setTimeout(tick, this.pollDelay());
    };
    void tick();
  }

  stopPolling(): void {
    this.stopped = true;
    if (this.pollTimer !== null) {
      clearTimeout(this.pollTimer);
      this.pollTimer = null;
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return err instanceof Error ? err.message : String(err);
}
