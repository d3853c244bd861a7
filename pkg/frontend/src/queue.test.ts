import { describe, expect, it } from "vitest";

import { ReviewApiClient } from "./api.js";
import { ReviewQueue } from "./queue.js";
import { fakeFetch, makeRecord } from "./testdata.js";

function queueWith(routes: Parameters<typeof fakeFetch>[0]) {
  const { impl, calls } = fakeFetch(routes);
  const queue = new ReviewQueue(new ReviewApiClient("", impl), "consolidations", 10);
  return { queue, calls };
}

const twoPending = () => ({
  status: 200,
  body: {
    items: [makeRecord({ id: "r1" }), makeRecord({ id: "r2", prediction: "Other text." })],
    total: 2,
    page: 1,
    page_size: 10,
  },
});

describe("ReviewQueue", () => {
  it("loads a page and navigates without running off the ends", async () => {
    const { queue } = queueWith({ "GET /records": twoPending });
    await queue.load();
    expect(queue.total).toBe(2);
    expect(queue.current()?.id).toBe("r1");
    queue.previous();
    expect(queue.current()?.id).toBe("r1");
    queue.next();
    expect(queue.current()?.id).toBe("r2");
    queue.next();
    expect(queue.current()?.id).toBe("r2");
  });

  it("approve removes exactly one item from the queue", async () => {
    const { queue } = queueWith({
      "GET /records": twoPending,
      "POST /records/r1/approve": () => ({
        status: 200,
        body: makeRecord({ id: "r1", review_status: { state: "approved", gold_text: null } }),
      }),
    });
    await queue.load();
    const before = queue.total;
    const outcome = await queue.approveCurrent();
    expect(outcome.kind).toBe("approved");
    expect(queue.total).toBe(before - 1);
    expect(queue.items.map((r) => r.id)).toEqual(["r2"]);
  });

  it("amend sends the edited text and removes the item", async () => {
    const { queue, calls } = queueWith({
      "GET /records": twoPending,
      "POST /records/r1/amend": () => ({
        status: 200,
        body: makeRecord({ id: "r1", review_status: { state: "amended", gold_text: "Fixed." } }),
      }),
    });
    await queue.load();
    const outcome = await queue.amendCurrent("Fixed.");
    expect(outcome.kind).toBe("amended");
    expect(queue.total).toBe(1);
    const amendCall = calls.find((c) => c.url.includes("/amend"));
    expect(JSON.parse(String(amendCall?.init?.body))).toEqual({ gold_text: "Fixed." });
  });

  it("never submits an amendment identical to the prediction: approves instead", async () => {
    const { queue, calls } = queueWith({
      "GET /records": twoPending,
      "POST /records/r1/approve": () => ({
        status: 200,
        body: makeRecord({ id: "r1", review_status: { state: "approved", gold_text: null } }),
      }),
    });
    await queue.load();
    const prediction = queue.current()!.prediction!;
    const outcome = await queue.amendCurrent(prediction);
    expect(outcome.kind).toBe("approved-instead");
    expect(calls.some((c) => c.url.includes("/amend"))).toBe(false);
    expect(calls.some((c) => c.url.includes("/approve"))).toBe(true);
  });

  it("rolls back the optimistic removal on a 409 conflict", async () => {
    const { queue } = queueWith({
      "GET /records": twoPending,
      "POST /records/r1/approve": () => ({ status: 409, body: { detail: "record already finalized" } }),
    });
    await queue.load();
    const outcome = await queue.approveCurrent();
    expect(outcome.kind).toBe("conflict");
    expect(outcome.kind === "conflict" && outcome.message).toBe("already reviewed");
    expect(queue.total).toBe(2);
    expect(queue.items.map((r) => r.id)).toEqual(["r1", "r2"]);
    expect(queue.current()?.id).toBe("r1");
  });

  it("rolls back an amendment on conflict too", async () => {
    const { queue } = queueWith({
      "GET /records": twoPending,
      "POST /records/r1/amend": () => ({ status: 409, body: { detail: "record already finalized" } }),
    });
    await queue.load();
    const outcome = await queue.amendCurrent("Different text.");
    expect(outcome.kind).toBe("conflict");
    expect(queue.items).toHaveLength(2);
  });
});
