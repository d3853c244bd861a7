// Keyboard-first review: reviewers process hundreds of records without the
// mouse. Plain keys act on the current record; typing targets are exempt.

export type ReviewAction =
  | "approve"
  | "amend"
  | "next"
  | "previous"
  | "submit-amend"
  | "cancel";

export interface KeyStroke {
  key: string;
  ctrlKey?: boolean;
  metaKey?: boolean;
  altKey?: boolean;
  inEditor?: boolean; // focus is in the amendment textarea or another input
}

const PLAIN_BINDINGS: Record<string, ReviewAction> = {
  a: "approve",
  e: "amend",
  j: "next",
  n: "next",
  k: "previous",
  p: "previous",
  escape: "cancel",
};

export function actionFor(stroke: KeyStroke): ReviewAction | null {
  const key = stroke.key.toLowerCase();
  if (stroke.inEditor) {
    if (key === "enter" && (stroke.ctrlKey || stroke.metaKey)) return "submit-amend";
    if (key === "escape") return "cancel";
    return null;
  }
  if (stroke.ctrlKey || stroke.metaKey || stroke.altKey) return null;
  return PLAIN_BINDINGS[key] ?? null;
}

export function isEditingTarget(target: EventTarget | null): boolean {
  if (!target || typeof (target as HTMLElement).tagName !== "string") return false;
  const tag = (target as HTMLElement).tagName;
  return tag === "INPUT" || tag === "TEXTAREA" || tag === "SELECT";
}
