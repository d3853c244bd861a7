// End-to-end check against the real review service: the UI's client and queue
// drive a live consolaw server, exercising the amend/approve/conflict loop and
// the stats delta the dashboard displays.
import { type ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ConflictError, ReviewApiClient } from "./api.js";
import { ReviewQueue } from "./queue.js";

const PORT = 8470 + Math.floor(Math.random() * 400);
const BASE = `http://127.0.0.1:${PORT}`;

const FIXTURE_SCRIPT = `
import json, sys
from consolaw.datastore import save_records
from consolaw.model import Backend, ConsolidationRecord, ConsolidationTriplet, GateOutcome

out_dir = sys.argv[1]

def record(rid, prediction, tokens):
    return ConsolidationRecord(
        id=rid,
        triplet=ConsolidationTriplet(
            instruction=f"Instruction for {rid}.", input=f"Input for {rid}."
        ),
        backend=Backend.rule(),
        gate=GateOutcome.possible(),
        prediction=prediction,
        prompt_tokens=tokens,
    )

records = [
    record("r1", "P one.", 100),
    record("r2", "P two.", 200),
    record("r3", "P three.", 300),
]
save_records(records, out_dir + "/records.jsonl")
with open(out_dir + "/gold.json", "w", encoding="utf-8") as fh:
    json.dump({"r1": "P one."}, fh)
`;

const SERVER_SCRIPT = `
import json, sys
import uvicorn
from consolaw.review import RecordStore, create_app

records_path, gold_path, port = sys.argv[1], sys.argv[2], int(sys.argv[3])
with open(gold_path, encoding="utf-8") as fh:
    gold = json.load(fh)
store = RecordStore.open(records_path, gold=gold)
uvicorn.run(create_app(store), host="127.0.0.1", port=port, log_level="warning")
`;

let server: ChildProcess | null = null;

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 20000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/stats`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("review service did not come up in time");
}

describe("review loop against a live service", () => {
  let workDir: string;

  beforeAll(async () => {
    workDir = mkdtempSync(join(tmpdir(), "consolaw-ui-"));
    const fixtureScript = join(workDir, "fixture.py");
    const serverScript = join(workDir, "server.py");
    writeFileSync(fixtureScript, FIXTURE_SCRIPT);
    writeFileSync(serverScript, SERVER_SCRIPT);
    execFileSync("python3", [fixtureScript, workDir]);
    server = spawn(
      "python3",
      [serverScript, join(workDir, "records.jsonl"), join(workDir, "gold.json"), String(PORT)],
      { stdio: "ignore" },
    );
    await waitForServer();
  });

  afterAll(() => {
    server?.kill();
  });

  it("runs the full verification loop with exact stats deltas", async () => {
    const api = new ReviewApiClient(BASE);

    // only r1 has gold initially: correctness among scored possibles is 1.0
    const initial = await api.stats();
    expect(initial.n_records).toBe(3);
    expect(initial.correctness_rate_among_possible).toBe(1.0);

    const queue = new ReviewQueue(api, "consolidations", 10);
    await queue.load();
    expect(queue.total).toBe(3);

    // a stale copy of the queue, as a second concurrent reviewer would hold
    const staleQueue = new ReviewQueue(api, "consolidations", 10);
    await staleQueue.load();

    // amend r2 with a different gold: it becomes scored and incorrect,
    // so correctness moves from 1/1 to exactly 1/2 on the next fetch
    queue.next();
    expect(queue.current()?.id).toBe("r2");
    const amended = await queue.amendCurrent("Entirely different text.");
    expect(amended.kind).toBe("amended");
    const afterAmend = await api.stats();
    expect(afterAmend.correctness_rate_among_possible).toBe(0.5);
    expect(initial.correctness_rate_among_possible! - afterAmend.correctness_rate_among_possible!).toBeCloseTo(
      0.5,
      12,
    );

    // approving r3 adopts its prediction as gold: 2 correct of 3 scored
    await queue.load();
    const r3Index = queue.items.findIndex((r) => r.id === "r3");
    queue.index = r3Index;
    const approved = await queue.approveCurrent();
    expect(approved.kind).toBe("approved");
    if (approved.kind === "approved") {
      expect(approved.record.review_status.state).toBe("approved");
    }
    const afterApprove = await api.stats();
    expect(afterApprove.correctness_rate_among_possible).toBeCloseTo(2 / 3, 12);
    const detail = await api.getRecord("r3");
    expect(detail.gold).toBe("P three.");
    expect(detail.diff).toEqual([{ op: "equal", text: "P three." }]);

    // a second finalization attempt surfaces the 409 conflict and rolls back
    const staleIndex = staleQueue.items.findIndex((r) => r.id === "r2");
    staleQueue.index = staleIndex;
    const conflict = await staleQueue.amendCurrent("Late to the party.");
    expect(conflict.kind).toBe("conflict");
    if (conflict.kind === "conflict") {
      expect(conflict.message).toBe("already reviewed");
    }
    expect(staleQueue.items.some((r) => r.id === "r2")).toBe(true);
    await expect(api.approve("r2")).rejects.toBeInstanceOf(ConflictError);

    // the pending queue shrank by exactly the two finalized records
    await queue.load();
    expect(queue.total).toBe(1);
    expect(queue.items[0].id).toBe("r1");

    // the dashboard curve reflects the scored samples
    const csv = await api.curveCsv();
    expect(csv.split("\n")[0].trim()).toBe("length_threshold,correctness_rate,n_samples");
    expect(csv).toContain("1024");
  });
});
