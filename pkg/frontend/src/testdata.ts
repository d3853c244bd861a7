import type { ApiRecord, ApiRecordDetail } from "./types.js";

export function makeRecord(overrides: Partial<ApiRecord> & { id: string }): ApiRecord {
  return {
    instruction: "Article 10 is amended as follows:\n1° The words « a » are deleted.",
    input: "Existing a text.",
    response: null,
    backend: { kind: "rule", model: null },
    prediction: "Existing text.",
    gate: { verdict: "possible", token_count: null },
    review_status: { state: "pending", gold_text: null },
    references: [{ article_id: "10", act: "Order of 4 May 2007", act_date: null, raw_span: [0, 10] }],
    error: null,
    prompt_tokens: 60,
    ...overrides,
  };
}

export function makeDetail(overrides: Partial<ApiRecordDetail> & { id: string }): ApiRecordDetail {
  return {
    ...makeRecord(overrides),
    gold: overrides.gold ?? null,
    diff: overrides.diff ?? null,
  };
}

export type RouteHandler = (init?: RequestInit) => { status: number; body: unknown };

/** fetch stub keyed by "METHOD path" with a call log. */
export function fakeFetch(routes: Record<string, RouteHandler>) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const method = init?.method ?? "GET";
    const path = url.split("?")[0];
    const handler = routes[`${method} ${path}`];
    if (!handler) {
      return new Response(JSON.stringify({ detail: `no route for ${method} ${path}` }), {
        status: 404,
        headers: { "content-type": "application/json" },
      });
    }
    const { status, body } = handler(init);
    const payload = typeof body === "string" ? body : JSON.stringify(body);
    const contentType = typeof body === "string" ? "text/plain" : "application/json";
    return new Response(payload, { status, headers: { "content-type": contentType } });
  };
  return { impl, calls };
}
