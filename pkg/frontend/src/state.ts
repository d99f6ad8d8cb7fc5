/** Session state: the append-only exchange log plus view selections.
 *
 * One QA request may be in flight at a time; detail and scatter
 * fetches are not serialized here. Replay re-submits the recorded
 * question list in order, which against an unchanged snapshot must
 * reproduce the recorded tables exactly.
 */

import type { MskgApi, QaResponse } from "./api.js";
import { ApiError } from "./api.js";

export interface Exchange {
  readonly question: string;
  readonly answer?: QaResponse;
  readonly error?: { status: number; message: string };
}

export interface Viewport {
  readonly centerX: number;
  readonly centerY: number;
  readonly scale: number;
}

export const HOME_VIEWPORT: Viewport = { centerX: 0, centerY: 0, scale: 1 };

type Listener = () => void;

export class SessionStore {
  private exchanges: Exchange[] = [];
  private inFlight = false;
  private listeners: Listener[] = [];
  selectedManufacturer: string | null = null;
  viewport: Viewport = HOME_VIEWPORT;
  lastFilters: Record<string, string> = {};

  constructor(private readonly api: MskgApi) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  get log(): readonly Exchange[] {
    return this.exchanges;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  /** Questions that produced an answer, in submission order. */
  get transcript(): string[] {
    return this.exchanges.filter((e) => e.answer).map((e) => e.question);
  }

  select(id: string | null): void {
    this.selectedManufacturer = id;
    this.notify();
  }

  setViewport(viewport: Viewport): void {
    this.viewport = viewport;
    this.notify();
  }

  async submit(question: string): Promise<Exchange> {
    if (question.trim().length === 0) {
      throw new Error("question is empty");
    }
    if (this.inFlight) {
      throw new Error("a question is already in flight");
    }
    this.inFlight = true;
    this.notify();
    try {
      const answer = await this.api.qa(question);
      const exchange: Exchange = { question, answer };
      this.exchanges = [...this.exchanges, exchange];
      return exchange;
    } catch (cause) {
      const error =
        cause instanceof ApiError
          ? { status: cause.status, message: cause.message }
          : { status: 0, message: String(cause) };
      const exchange: Exchange = { question, error };
      this.exchanges = [...this.exchanges, exchange];
      return exchange;
    } finally {
      this.inFlight = false;
      this.notify();
    }
  }

  /** Re-ask a failed question in place: the original exchange stays in
   * the log, the retry appends. */
  retry(exchange: Exchange): Promise<Exchange> {
    return this.submit(exchange.question);
  }

  /** Re-submit every answered question, in order, against the live
   * service. Returns the fresh responses without touching the log so
   * callers can diff them against the recorded ones. */
  async replay(): Promise<QaResponse[]> {
    if (this.inFlight) {
      throw new Error("a question is already in flight");
    }
    const answers: QaResponse[] = [];
    for (const question of this.transcript) {
      this.inFlight = true;
      this.notify();
      try {
        answers.push(await this.api.qa(question));
      } finally {
        this.inFlight = false;
        this.notify();
      }
    }
    return answers;
  }
}
