import { ApiError, type Api } from "./api";
import type { CandidateRow, CreateSessionRequest, Metrics, SessionSummary } from "./types";

// One active request per session view:
//   idle                -> candidate on screen, buttons live
//   awaiting-candidate  -> refreshing view state from the server
//   awaiting-ack        -> a label submission is in flight
//   complete            -> budget exhausted, controls disabled
export type Phase = "idle" | "awaiting-candidate" | "awaiting-ack" | "complete";

export interface SessionView {
  summary: SessionSummary;
  candidate: CandidateRow | null;
  topK: CandidateRow[];
  metrics: Metrics;
}

export type ControllerEvent =
  | { kind: "view"; phase: Phase; view: SessionView | null }
  | { kind: "toast"; message: string };

export type Listener = (ev: ControllerEvent) => void;

export class SessionController {
  phase: Phase = "idle";
  view: SessionView | null = null;
  private sid: string | null = null;

  constructor(
    private readonly api: Api,
    private readonly listener: Listener = () => {},
    private readonly topK = 10,
  ) {}

  get sessionId(): string | null {
    return this.sid;
  }

  private emitView(): void {
    this.listener({ kind: "view", phase: this.phase, view: this.view });
  }

  private toast(message: string): void {
    this.listener({ kind: "toast", message });
  }

  async start(req: CreateSessionRequest): Promise<void> {
    if (this.sid !== null) {
      throw new Error("controller already owns a session");
    }
    const res = await this.api.createSession(req);
    await this.attach(res.session);
  }

  // Also the restart-recovery path: everything on screen is rebuilt from
  // server responses, so attaching to a replayed session looks identical
  // to never having disconnected.
  async attach(sid: string): Promise<void> {
    this.sid = sid;
    await this.refresh();
  }

  async label(y: 0 | 1): Promise<void> {
    if (this.phase !== "idle" || this.view?.candidate == null || this.sid === null) {
      return; // turn-based: ignore clicks while a request is live or done
    }
    const index = this.view.candidate.index;
    this.phase = "awaiting-ack";
    this.emitView();
    try {
      await this.api.submitLabel(this.sid, index, y);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone else moved the session; drop our stale view entirely
        this.toast(`label rejected (${err.code}); refreshing`);
        await this.refresh();
        return;
      }
      if (err instanceof ApiError && err.status === 410) {
        await this.refresh();
        return;
      }
      this.phase = "idle";
      this.emitView();
      throw err;
    }
    // no optimistic state: the new candidate, recall point, and charts
    // are whatever the server says they are
    await this.refresh();
  }

  private async refresh(): Promise<void> {
    if (this.sid === null) {
      return;
    }
    this.phase = "awaiting-candidate";
    this.emitView();
    const summary = await this.api.getSession(this.sid);
    const metrics = await this.api.getMetrics(this.sid);
    if (metrics.exhausted) {
      this.view = { summary, metrics, candidate: null, topK: [] };
      this.phase = "complete";
      this.emitView();
      return;
    }
    try {
      const cand = await this.api.getCandidate(this.sid, this.topK);
      this.view = { summary, metrics, candidate: cand.candidate, topK: cand.top_k };
      this.phase = "idle";
    } catch (err) {
      if (err instanceof ApiError && err.status === 410) {
        this.view = { summary, metrics, candidate: null, topK: [] };
        this.phase = "complete";
      } else {
        throw err;
      }
    }
    this.emitView();
  }
}
