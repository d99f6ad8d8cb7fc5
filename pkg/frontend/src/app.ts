/** Wires the QA pane, detail panel, and scatter explorer together.
 *
 * Everything rendered comes straight off the wire: summaries, tables,
 * weights, similarities, and label chips are server values passed
 * through `cellText` with no arithmetic on the way.
 */

import { ApiError, MskgApi } from "./api.js";
import type { QaResponse } from "./api.js";
import { fetchDetail, renderDetail } from "./detail.js";
import { drawScatter, parseCoords, pickPoint } from "./scatter.js";
import type { Point } from "./scatter.js";
import { SessionStore } from "./state.js";
import type { Exchange } from "./state.js";
import { renderTable } from "./table.js";

export interface AppElements {
  form: HTMLFormElement;
  input: HTMLInputElement;
  submit: HTMLButtonElement;
  log: HTMLElement;
  detail: HTMLElement;
  status: HTMLElement;
  canvas: HTMLCanvasElement | null;
}

export class App {
  readonly store: SessionStore;
  private points: Point[] = [];
  private neighborIds = new Set<string>();

  constructor(
    private readonly api: MskgApi,
    private readonly el: AppElements,
    private readonly doc: Document,
  ) {
    this.store = new SessionStore(api);
    this.store.subscribe(() => this.syncControls());
    this.el.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.ask();
    });
    this.el.input.addEventListener("input", () => this.syncControls());
    this.el.canvas?.addEventListener("click", (event) => {
      const rect = (event.target as HTMLCanvasElement).getBoundingClientRect();
      const hit = pickPoint(
        this.points,
        this.store.viewport,
        { width: rect.width, height: rect.height },
        event.clientX - rect.left,
        event.clientY - rect.top,
      );
      if (hit) void this.explore(hit.id);
    });
    this.syncControls();
  }

  private syncControls(): void {
    const empty = this.el.input.value.trim().length === 0;
    this.el.submit.disabled = empty || this.store.busy;
    this.el.status.textContent = this.store.busy ? "thinking..." : "";
  }

  async start(): Promise<void> {
    try {
      const health = await this.api.health();
      this.el.status.textContent = `connected (${health.status})`;
    } catch (cause) {
      this.el.status.textContent =
        cause instanceof ApiError && cause.status === 503
          ? "service is up but has no snapshot loaded"
          : `service unreachable: ${String(cause)}`;
    }
  }

  async loadCoords(url: string): Promise<number> {
    const response = await fetch(url);
    if (!response.ok) return 0;
    this.points = parseCoords(await response.text());
    this.repaintScatter();
    return this.points.length;
  }

  private repaintScatter(): void {
    if (!this.el.canvas || this.points.length === 0) return;
    drawScatter(this.el.canvas, this.points, this.store.viewport, {
      highlight: this.store.selectedManufacturer ?? undefined,
      neighbors: this.neighborIds,
    });
  }

  async ask(): Promise<Exchange | null> {
    const question = this.el.input.value;
    if (question.trim().length === 0 || this.store.busy) return null;
    const exchange = await this.store.submit(question);
    this.el.input.value = "";
    this.appendExchange(exchange);
    this.syncControls();
    return exchange;
  }

  appendExchange(exchange: Exchange): HTMLElement {
    const entry = this.doc.createElement("article");
    entry.className = "exchange";

    const question = this.doc.createElement("p");
    question.className = "question";
    question.textContent = exchange.question;
    entry.appendChild(question);

    if (exchange.error) {
      const error = this.doc.createElement("p");
      error.className = "error";
      error.textContent =
        exchange.error.status === 422
          ? exchange.error.message
          : `request failed (${exchange.error.status || "network"}): ${exchange.error.message}`;
      entry.appendChild(error);
      const retry = this.doc.createElement("button");
      retry.textContent = "retry";
      retry.addEventListener("click", () => {
        void this.store.retry(exchange).then((again) => this.appendExchange(again));
      });
      entry.appendChild(retry);
    } else if (exchange.answer) {
      entry.appendChild(this.renderAnswer(exchange.answer));
    }

    this.el.log.appendChild(entry);
    return entry;
  }

  renderAnswer(answer: QaResponse): HTMLElement {
    const wrap = this.doc.createElement("div");
    wrap.className = "answer";

    const summary = this.doc.createElement("p");
    summary.className = "summary";
    summary.textContent = answer.summary;
    wrap.appendChild(summary);

    if (answer.query) {
      const details = this.doc.createElement("details");
      const label = this.doc.createElement("summary");
      label.textContent = "generated query";
      details.appendChild(label);
      const pre = this.doc.createElement("pre");
      pre.textContent = answer.query;
      details.appendChild(pre);
      wrap.appendChild(details);
    }

    if (answer.columns.length > 0) {
      const handle = renderTable(answer.columns, answer.rows, this.doc, (value, column) => {
        // manufacturer ids live in string cells; treat a click on one
        // as a request to explore it
        if (answer.columns[column] === "manufacturer" || answer.columns[column] === "m.name") {
          void this.explore(value);
        }
      });
      wrap.appendChild(handle.element);
    }

    const provenance = this.doc.createElement("p");
    provenance.className = "provenance";
    provenance.textContent = answer.provenance;
    wrap.appendChild(provenance);
    return wrap;
  }

  async explore(id: string): Promise<void> {
    this.store.select(id);
    const result = await fetchDetail(this.api, id);
    this.neighborIds = new Set((result.neighbors ?? []).map((n) => n.id));
    renderDetail(this.el.detail, result, this.doc, (next) => void this.explore(next));
    this.repaintScatter();
  }

  /** Re-submit the transcript and render the fresh tables next to
   * nothing: callers compare them against the recorded log. */
  replay(): Promise<QaResponse[]> {
    return this.store.replay();
  }
}
