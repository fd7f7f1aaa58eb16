/** Ranked-hit rendering: per-space tabs, service order preserved.
 *
 * Fidelity invariant: the DOM shows hits in exactly the order the service
 * returned them, with scores formatted from the raw response values. There
 * is deliberately no sort call anywhere in this module.
 */

import type { Hit, QueryResult, Space } from "./types.js";

export const SCORE_DECIMALS = 4;

export function formatScore(score: number): string {
  return score.toFixed(SCORE_DECIMALS);
}

export function spacesInResult(result: QueryResult): Space[] {
  const seen: Space[] = [];
  for (const h of result.hits) {
    if (!seen.includes(h.space)) seen.push(h.space);
  }
  return seen;
}

export function hitsForSpace(result: QueryResult, space: Space): Hit[] {
  return result.hits.filter((h) => h.space === space);
}

export interface ResultsCallbacks {
  onSelect(hit: Hit): void;
}

export function renderResults(
  container: HTMLElement,
  result: QueryResult,
  callbacks: ResultsCallbacks,
  activeSpace?: Space,
): void {
  container.textContent = "";
  const spaces = spacesInResult(result);
  if (spaces.length === 0) {
    const empty = document.createElement("p");
    empty.className = "no-results";
    empty.textContent = "No results.";
    container.appendChild(empty);
    return;
  }
  const current = activeSpace && spaces.includes(activeSpace) ? activeSpace : spaces[0]!;

  const tabs = document.createElement("div");
  tabs.className = "space-tabs";
  tabs.setAttribute("role", "tablist");
  for (const space of spaces) {
    const tab = document.createElement("button");
    tab.className = space === current ? "tab active" : "tab";
    tab.dataset.space = space;
    tab.textContent = `${space} (${hitsForSpace(result, space).length})`;
    tab.addEventListener("click", () =>
      renderResults(container, result, callbacks, space),
    );
    tabs.appendChild(tab);
  }
  container.appendChild(tabs);

  for (const flag of result.flags) {
    const note = document.createElement("p");
    note.className = "result-flag";
    note.textContent = flag;
    container.appendChild(note);
  }

  const list = document.createElement("ol");
  list.className = "hit-list";
  for (const hit of hitsForSpace(result, current)) {
    const item = document.createElement("li");
    item.className = "hit";
    item.dataset.hitId = hit.id;

    const score = document.createElement("span");
    score.className = "hit-score";
    score.textContent = formatScore(hit.score);

    const id = document.createElement("span");
    id.className = "hit-id";
    id.textContent = hit.id;

    const space = document.createElement("span");
    space.className = "hit-space";
    space.textContent = hit.space;

    const narrative = result.narratives[hit.id];
    item.append(score, id, space);
    if (narrative) {
      const summary = document.createElement("span");
      summary.className = "hit-summary";
      const firstLine = narrative.text.split("\n")[0] ?? "";
      summary.textContent = firstLine;
      item.appendChild(summary);
    }
    item.addEventListener("click", () => callbacks.onSelect(hit));
    list.appendChild(item);
  }
  container.appendChild(list);
}
