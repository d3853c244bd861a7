import type { DiffHunk } from "./types.js";

/** The prediction side: equal + delete runs. */
export function reassembleLeft(hunks: DiffHunk[]): string {
  return hunks
    .filter((h) => h.op === "equal" || h.op === "delete")
    .map((h) => h.text)
    .join("");
}

/** The gold side: equal + insert runs. */
export function reassembleRight(hunks: DiffHunk[]): string {
  return hunks
    .filter((h) => h.op === "equal" || h.op === "insert")
    .map((h) => h.text)
    .join("");
}

/** Hunks must reassemble to both texts; anything else means the server and
 * the client disagree about tokenization. */
export function hunksConsistent(hunks: DiffHunk[], prediction: string, gold: string): boolean {
  return reassembleLeft(hunks) === prediction && reassembleRight(hunks) === gold;
}

const escapeHtml = (text: string): string =>
  text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");

/** Inline rendering: <del>/<ins> wrapped runs, whitespace preserved. */
export function renderDiffHtml(hunks: DiffHunk[]): string {
  return hunks
    .map((h) => {
      const text = escapeHtml(h.text);
      if (h.op === "delete") return `<del>${text}</del>`;
      if (h.op === "insert") return `<ins>${text}</ins>`;
      return text;
    })
    .join("");
}
