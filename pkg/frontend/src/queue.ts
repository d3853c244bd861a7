import { ConflictError, ReviewApiClient } from "./api.js";
import type { ApiRecord, QueueName } from "./types.js";

export type FinalizeOutcome =
  | { kind: "approved"; record: ApiRecord }
  | { kind: "amended"; record: ApiRecord }
  | { kind: "approved-instead"; record: ApiRecord } // amend text matched the prediction
  | { kind: "conflict"; message: string };

/** Paged pending queue with optimistic finalization.
 *
 * A finalized record leaves the queue immediately; on a 409 conflict the
 * item is restored and the conflict surfaced as "already reviewed".
 */
export class ReviewQueue {
  items: ApiRecord[] = [];
  total = 0;
  index = 0;
  page = 1;

  constructor(
    private api: ReviewApiClient,
    public queue: QueueName,
    private pageSize = 20,
  ) {}

  async load(page = 1): Promise<void> {
    const result = await this.api.listRecords(this.queue, page, this.pageSize);
    this.items = result.items;
    this.total = result.total;
    this.page = result.page;
    this.index = Math.min(this.index, Math.max(this.items.length - 1, 0));
  }

  current(): ApiRecord | null {
    return this.items[this.index] ?? null;
  }

  next(): void {
    if (this.index < this.items.length - 1) this.index += 1;
  }

  previous(): void {
    if (this.index > 0) this.index -= 1;
  }

  private removeCurrent(): ApiRecord | null {
    const record = this.current();
    if (!record) return null;
    this.items.splice(this.index, 1);
    this.total -= 1;
    if (this.index >= this.items.length) this.index = Math.max(this.items.length - 1, 0);
    return record;
  }

  private restore(record: ApiRecord, at: number): void {
    this.items.splice(at, 0, record);
    this.total += 1;
    this.index = at;
  }

  async approveCurrent(): Promise<FinalizeOutcome> {
    const at = this.index;
    const record = this.removeCurrent();
    if (!record) return { kind: "conflict", message: "nothing to review" };
    try {
      const updated = await this.api.approve(record.id);
      return { kind: "approved", record: updated };
    } catch (error) {
      if (error instanceof ConflictError) {
        this.restore(record, at);
        return { kind: "conflict", message: "already reviewed" };
      }
      this.restore(record, at);
      throw error;
    }
  }

  /** Amend with the edited text; text identical to the prediction is flagged
   * and submitted as an approval instead (never an identical amendment). */
  async amendCurrent(goldText: string): Promise<FinalizeOutcome> {
    const record = this.current();
    if (!record) return { kind: "conflict", message: "nothing to review" };
    if (record.prediction !== null && goldText === record.prediction) {
      const outcome = await this.approveCurrent();
      return outcome.kind === "approved"
        ? { kind: "approved-instead", record: outcome.record }
        : outcome;
    }
    const at = this.index;
    this.removeCurrent();
    try {
      const updated = await this.api.amend(record.id, goldText);
      return { kind: "amended", record: updated };
    } catch (error) {
      this.restore(record, at);
      if (error instanceof ConflictError) {
        return { kind: "conflict", message: "already reviewed" };
      }
      throw error;
    }
  }
}
