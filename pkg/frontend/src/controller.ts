import { ApiError } from "./api.js";
import type { ApiClient } from "./api.js";
import type {
  Preference,
  QueryPayload,
  RulePayload,
  SessionRequest,
  SessionView,
  StatsRecord,
} from "./types.js";

export type Phase = "setup" | "creating" | "active" | "finished" | "failed";

export interface ControllerState {
  phase: Phase;
  session: SessionView | null;
  /** Ranking exactly as the service returned it — never re-sorted client-side. */
  ranking: RulePayload[];
  stats: StatsRecord[];
  topK: number;
  /** True while an answer is in flight; the UI disables all three buttons. */
  busy: boolean;
  banner: string | null;
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `service error ${err.status}: ${err.message}`;
  if (err instanceof Error) return `request failed: ${err.message} — retry when ready`;
  return "request failed — retry when ready";
}

/**
 * Session state machine behind the page. Guarantees, regardless of render
 * layer: at most one answer in flight per pending query; a stale-iteration
 * rejection (409) triggers exactly one session refetch and never a resubmit;
 * a network failure keeps the pending query so the user can retry manually.
 */
export class SessionController {
  readonly state: ControllerState = {
    phase: "setup",
    session: null,
    ranking: [],
    stats: [],
    topK: 10,
    busy: false,
    banner: null,
  };

  private listeners: Array<() => void> = [];
  private pollTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly pollIntervalMs = 400,
  ) {}

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((fn) => fn !== listener);
    };
  }

  private emit(): void {
    for (const fn of [...this.listeners]) fn();
  }

  get pendingQuery(): QueryPayload | null {
    return this.state.session?.query ?? null;
  }

  async start(cfg: SessionRequest): Promise<void> {
    if (this.state.phase === "creating") return;
    this.state.phase = "creating";
    this.state.banner = null;
    this.emit();
    try {
      this.applyView(await this.api.createSession(cfg));
      await this.refreshPanels();
    } catch (err) {
      this.state.phase = "setup";
      this.state.banner = describe(err);
    }
    this.emit();
  }

  async submit(preference: Preference): Promise<void> {
    const session = this.state.session;
    const query = session?.query;
    if (!session || !query || this.state.busy) return;
    this.state.busy = true;
    this.state.banner = null;
    this.emit();
    try {
      this.applyView(await this.api.answer(session.id, query.iteration, preference));
      await this.refreshPanels();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Someone (or a previous retry) already answered this iteration:
        // resync once and show whatever the session looks like now.
        this.state.banner = "the query moved on; showing the current one";
        try {
          this.applyView(await this.api.getSession(session.id));
          await this.refreshPanels();
        } catch (inner) {
          this.state.banner = describe(inner);
        }
      } else {
        this.state.banner = describe(err); // pending query kept; manual retry
      }
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  /** One manual resync (also used by the selecting-state poll loop). */
  async poll(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    try {
      this.applyView(await this.api.getSession(session.id));
      await this.refreshPanels();
    } catch (err) {
      this.state.banner = describe(err);
    }
    this.emit();
  }

  async setTopK(k: number): Promise<void> {
    this.state.topK = k;
    const session = this.state.session;
    if (session) {
      try {
        this.state.ranking = await this.api.ranking(session.id, k);
      } catch (err) {
        this.state.banner = describe(err);
      }
    }
    this.emit();
  }

  private applyView(view: SessionView): void {
    this.state.session = view;
    if (view.state === "finished") this.state.phase = "finished";
    else if (view.state === "failed") this.state.phase = "failed";
    else this.state.phase = "active";
    if (view.state === "selecting") this.schedulePoll();
  }

  private async refreshPanels(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    try {
      const [ranking, stats] = await Promise.all([
        this.api.ranking(session.id, this.state.topK),
        this.api.stats(session.id),
      ]);
      this.state.ranking = ranking;
      this.state.stats = stats;
    } catch (err) {
      this.state.banner = describe(err); // panels are best-effort
    }
  }

  private schedulePoll(): void {
    if (this.pollTimer !== null) return;
    this.pollTimer = setTimeout(() => {
      this.pollTimer = null;
      void this.poll();
    }, this.pollIntervalMs);
  }
}
