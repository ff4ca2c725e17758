/**
 * DOM wiring for the workbench: token-chip selection (click, drag, and
 * zero-width insertion points between tokens), hint entry, suggestion list,
 * undo and document import/export. State changes only through session.ts.
 */

import {
  SessionState,
  applySuggestion,
  activePair,
  canUndo,
  clearSelection,
  exportTranslations,
  loadTsRecords,
  loadTwinText,
  newSession,
  selectSpan,
  setActivePair,
  setError,
  setHint,
  setSuggestions,
  undo,
} from "./session.js";
import { ApiError, SuggestClient, buildPayload } from "./api.js";

const client = new SuggestClient("");

let state: SessionState = newSession([
  {
    source: "1 2 3 4".split(" "),
    translation: "one two three four".split(" "),
  },
]);

let dragAnchor: number | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function update(next: SessionState): void {
  state = next;
  render();
}

function renderTokens(): void {
  const container = el<HTMLDivElement>("translation");
  container.replaceChildren();
  const tokens = activePair(state).translation;
  const [selStart, selEnd] = state.selection ?? [-1, -1];

  const addGap = (index: number) => {
    const gap = document.createElement("span");
    gap.className = "gap";
    if (selStart === selEnd && selStart === index) gap.classList.add("selected");
    gap.title = "click for an insertion point";
    gap.addEventListener("click", () => update(selectSpan(state, index, index)));
    container.appendChild(gap);
  };

  tokens.forEach((token, index) => {
    addGap(index);
    const chip = document.createElement("span");
    chip.className = "token";
    if (selStart <= index && index < selEnd) chip.classList.add("selected");
    chip.textContent = token;
    chip.addEventListener("mousedown", (event) => {
      event.preventDefault();
      dragAnchor = index;
      update(selectSpan(state, index, index + 1));
    });
    chip.addEventListener("mouseenter", () => {
      if (dragAnchor === null) return;
      const lo = Math.min(dragAnchor, index);
      const hi = Math.max(dragAnchor, index) + 1;
      update(selectSpan(state, lo, hi));
    });
    container.appendChild(chip);
  });
  addGap(tokens.length);
}

function renderSuggestions(): void {
  const list = el<HTMLOListElement>("suggestions");
  list.replaceChildren();
  for (const [index, suggestion] of (state.suggestions ?? []).entries()) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.textContent =
      suggestion.tokens.length > 0 ? suggestion.text : "(delete span)";
    button.addEventListener("click", () => update(applySuggestion(state, index)));
    const score = document.createElement("span");
    score.className = "score";
    score.textContent = suggestion.score.toFixed(3);
    item.append(button, score);
    list.appendChild(item);
  }
}

function render(): void {
  el<HTMLDivElement>("source").textContent = activePair(state).source.join(" ");
  renderTokens();
  renderSuggestions();
  el<HTMLButtonElement>("request").disabled = state.selection === null;
  el<HTMLButtonElement>("undo-btn").disabled = !canUndo(state);
  const banner = el<HTMLDivElement>("error");
  banner.textContent = state.error ?? "";
  banner.hidden = state.error === null;
  const picker = el<HTMLSelectElement>("pair-picker");
  picker.replaceChildren();
  state.document.forEach((pair, index) => {
    const option = document.createElement("option");
    option.value = String(index);
    option.textContent = `${index + 1}: ${pair.source.slice(0, 6).join(" ")}`;
    option.selected = index === state.activeIndex;
    picker.appendChild(option);
  });
}

async function onRequest(): Promise<void> {
  try {
    const response = await client.requestSuggestions(buildPayload(state));
    update(setSuggestions(state, response.suggestions));
  } catch (error) {
    if (error instanceof DOMException && error.name === "AbortError") return;
    const message =
      error instanceof ApiError ? error.message : `request failed: ${String(error)}`;
    update(setError(state, message));
  }
}

async function readFile(input: HTMLInputElement): Promise<string | null> {
  const file = input.files?.[0];
  return file ? file.text() : null;
}

function wire(): void {
  el<HTMLButtonElement>("request").addEventListener("click", () => void onRequest());
  el<HTMLButtonElement>("undo-btn").addEventListener("click", () => update(undo(state)));
  el<HTMLButtonElement>("clear").addEventListener("click", () =>
    update(clearSelection(state))
  );
  el<HTMLInputElement>("hint").addEventListener("input", (event) => {
    state = setHint(state, (event.target as HTMLInputElement).value);
  });
  el<HTMLSelectElement>("pair-picker").addEventListener("change", (event) => {
    update(setActivePair(state, Number((event.target as HTMLSelectElement).value)));
  });
  document.addEventListener("mouseup", () => {
    dragAnchor = null;
  });

  el<HTMLInputElement>("file-records").addEventListener("change", async (event) => {
    const text = await readFile(event.target as HTMLInputElement);
    if (text === null) return;
    try {
      update(newSession(loadTsRecords(text)));
    } catch (error) {
      update(setError(state, String(error)));
    }
  });

  let pendingSource: string | null = null;
  el<HTMLInputElement>("file-source").addEventListener("change", async (event) => {
    pendingSource = await readFile(event.target as HTMLInputElement);
  });
  el<HTMLInputElement>("file-translation").addEventListener("change", async (event) => {
    const translationText = await readFile(event.target as HTMLInputElement);
    if (pendingSource === null || translationText === null) {
      update(setError(state, "load the source file first, then the translation file"));
      return;
    }
    try {
      update(newSession(loadTwinText(pendingSource, translationText)));
    } catch (error) {
      update(setError(state, String(error)));
    }
  });

  el<HTMLButtonElement>("download").addEventListener("click", () => {
    const blob = new Blob([exportTranslations(state)], { type: "text/plain" });
    const anchor = document.createElement("a");
    anchor.href = URL.createObjectURL(blob);
    anchor.download = "translations.txt";
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  });

  render();
}

if (typeof document !== "undefined") {
  wire();
}
