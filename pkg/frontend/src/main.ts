import { ReviewApiClient } from "./api.js";
import { parseCurveCsv } from "./csv.js";
import { actionFor, isEditingTarget } from "./keyboard.js";
import { ReviewQueue } from "./queue.js";
import type { QueueName } from "./types.js";
import { toReviewItem } from "./types.js";
import { renderDetail, renderMessage, renderQueueList, renderStats } from "./views.js";

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "";
}

class App {
  private api = new ReviewApiClient(apiBase());
  private queue: ReviewQueue;
  private queueName: QueueName = "consolidations";

  private queueEl = document.getElementById("queue")!;
  private detailEl = document.getElementById("detail")!;
  private statsEl = document.getElementById("stats")!;
  private messageEl = document.getElementById("message")!;

  constructor() {
    this.queue = new ReviewQueue(this.api, this.queueName);
  }

  async start(): Promise<void> {
    document.querySelectorAll<HTMLButtonElement>("[data-queue]").forEach((button) => {
      button.addEventListener("click", () => {
        this.switchQueue(button.dataset.queue as QueueName);
      });
    });
    window.addEventListener("keydown", (event) => this.onKey(event));
    this.queueEl.addEventListener("click", (event) => {
      const row = (event.target as HTMLElement).closest<HTMLElement>("[data-index]");
      if (row) {
        this.queue.index = Number(row.dataset.index);
        void this.refresh();
      }
    });
    await this.refresh();
    await this.refreshStats();
  }

  private async switchQueue(name: QueueName): Promise<void> {
    this.queueName = name;
    this.queue = new ReviewQueue(this.api, name);
    await this.refresh();
  }

  private async refresh(): Promise<void> {
    await this.queue.load(this.queue.page);
    const items = this.queue.items.map((record) => toReviewItem(record));
    renderQueueList(this.queueEl, items, this.queue.index, this.queue.total);
    const current = this.queue.current();
    if (current) {
      const detail = await this.api.getRecord(current.id);
      renderDetail(this.detailEl, detail);
      this.bindDetailActions();
    } else {
      this.detailEl.innerHTML = "<p>queue is empty 🎉</p>";
    }
  }

  private bindDetailActions(): void {
    document.getElementById("approve-button")?.addEventListener("click", () => void this.approve());
    document.getElementById("amend-button")?.addEventListener("click", () => void this.amend());
  }

  private amendText(): string {
    const box = document.getElementById("amend-text") as HTMLTextAreaElement | null;
    return box?.value ?? "";
  }

  private async approve(): Promise<void> {
    const outcome = await this.queue.approveCurrent();
    renderMessage(
      this.messageEl,
      outcome.kind === "conflict" ? outcome.message : `approved ${outcome.record.id}`,
      outcome.kind === "conflict" ? "conflict" : "info",
    );
    await this.refresh();
    await this.refreshStats();
  }

  private async amend(): Promise<void> {
    const outcome = await this.queue.amendCurrent(this.amendText());
    const text =
      outcome.kind === "conflict"
        ? outcome.message
        : outcome.kind === "approved-instead"
          ? `text matched the prediction — approved ${outcome.record.id} instead`
          : `${outcome.kind} ${outcome.record.id}`;
    renderMessage(this.messageEl, text, outcome.kind === "conflict" ? "conflict" : "info");
    await this.refresh();
    await this.refreshStats();
  }

  private async refreshStats(): Promise<void> {
    const stats = await this.api.stats();
    const curve = parseCurveCsv(await this.api.curveCsv());
    renderStats(this.statsEl, stats, curve);
  }

  private onKey(event: KeyboardEvent): void {
    const action = actionFor({
      key: event.key,
      ctrlKey: event.ctrlKey,
      metaKey: event.metaKey,
      altKey: event.altKey,
      inEditor: isEditingTarget(event.target),
    });
    if (!action) return;
    event.preventDefault();
    switch (action) {
      case "approve":
        void this.approve();
        break;
      case "amend":
        (document.getElementById("amend-text") as HTMLTextAreaElement | null)?.focus();
        break;
      case "submit-amend":
        void this.amend();
        break;
      case "next":
        this.queue.next();
        void this.refresh();
        break;
      case "previous":
        this.queue.previous();
        void this.refresh();
        break;
      case "cancel":
        (event.target as HTMLElement | null)?.blur?.();
        break;
    }
  }
}

new App().start().catch((error) => {
  const message = document.getElementById("message");
  if (message) message.textContent = `failed to start: ${error}`;
});
