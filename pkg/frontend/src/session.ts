/**
 * Pure session state for the post-editing workbench.
 *
 * All operations return a new state; nothing here touches the DOM or the
 * network. The edit history is an append-only log: applying a suggestion
 * appends an "apply" entry, undoing appends an "undo" entry that reverses
 * the most recent still-active apply, so the full audit trail survives.
 */

export interface Suggestion {
  tokens: string[];
  text: string;
  score: number;
}

export interface SentencePair {
  source: string[];
  translation: string[];
}

export interface ApplyEntry {
  kind: "apply";
  pairIndex: number;
  /** token span [start, end) that was replaced */
  span: [number, number];
  removed: string[];
  inserted: string[];
}

export interface UndoEntry {
  kind: "undo";
  /** index into history of the apply entry being reversed */
  of: number;
}

export type HistoryEntry = ApplyEntry | UndoEntry;

export interface SessionState {
  document: SentencePair[];
  activeIndex: number;
  /** current selection [i, j) in the active translation; i === j is an insertion point */
  selection: [number, number] | null;
  hint: string;
  suggestions: Suggestion[] | null;
  history: HistoryEntry[];
  error: string | null;
}

export class SelectionError extends RangeError {}

export function newSession(document: SentencePair[]): SessionState {
  if (document.length === 0) {
    throw new Error("document is empty");
  }
  return {
    document,
    activeIndex: 0,
    selection: null,
    hint: "",
    suggestions: null,
    history: [],
    error: null,
  };
}

export function activePair(state: SessionState): SentencePair {
  const pair = state.document[state.activeIndex];
  if (!pair) throw new Error(`no pair at index ${state.activeIndex}`);
  return pair;
}

export function setActivePair(state: SessionState, index: number): SessionState {
  if (index < 0 || index >= state.document.length) {
    throw new RangeError(`pair index ${index} out of range`);
  }
  return { ...state, activeIndex: index, selection: null, suggestions: null, error: null };
}

export function selectSpan(state: SessionState, i: number, j: number): SessionState {
  const bound = activePair(state).translation.length;
  if (!(Number.isInteger(i) && Number.isInteger(j) && 0 <= i && i <= j && j <= bound)) {
    throw new SelectionError(`span [${i}, ${j}) out of bounds for ${bound} tokens`);
  }
  return { ...state, selection: [i, j], suggestions: null, error: null };
}

export function clearSelection(state: SessionState): SessionState {
  return { ...state, selection: null, suggestions: null };
}

export function setHint(state: SessionState, hint: string): SessionState {
  return { ...state, hint };
}

export function setSuggestions(state: SessionState, suggestions: Suggestion[]): SessionState {
  return { ...state, suggestions, error: null };
}

export function setError(state: SessionState, message: string): SessionState {
  // errors are surfaced inline; selection, hint and history all survive
  return { ...state, error: message };
}

function splice(tokens: string[], span: [number, number], replacement: string[]): string[] {
  return [...tokens.slice(0, span[0]), ...replacement, ...tokens.slice(span[1])];
}

function replacePair(state: SessionState, index: number, translation: string[]): SentencePair[] {
  return state.document.map((pair, k) =>
    k === index ? { source: pair.source, translation } : pair
  );
}

export function applySuggestion(state: SessionState, index: number): SessionState {
  if (state.selection === null) {
    throw new Error("no span selected");
  }
  if (state.suggestions === null || !state.suggestions[index]) {
    throw new RangeError(`no suggestion at index ${index}`);
  }
  const pair = activePair(state);
  const [i, j] = state.selection;
  const inserted = [...state.suggestions[index].tokens];
  const entry: ApplyEntry = {
    kind: "apply",
    pairIndex: state.activeIndex,
    span: [i, j],
    removed: pair.translation.slice(i, j),
    inserted,
  };
  return {
    ...state,
    document: replacePair(state, state.activeIndex, splice(pair.translation, [i, j], inserted)),
    selection: null,
    suggestions: null,
    history: [...state.history, entry],
    error: null,
  };
}

/** Index into history of the most recent apply that has not been undone. */
export function lastActiveApply(history: HistoryEntry[]): number | null {
  const undone = new Set<number>();
  for (const entry of history) {
    if (entry.kind === "undo") undone.add(entry.of);
  }
  for (let k = history.length - 1; k >= 0; k--) {
    if (history[k]!.kind === "apply" && !undone.has(k)) return k;
  }
  return null;
}

export function canUndo(state: SessionState): boolean {
  return lastActiveApply(state.history) !== null;
}

export function undo(state: SessionState): SessionState {
  const at = lastActiveApply(state.history);
  if (at === null) {
    throw new Error("nothing to undo");
  }
  const apply = state.history[at] as ApplyEntry;
  const pair = state.document[apply.pairIndex];
  if (!pair) throw new Error(`history refers to missing pair ${apply.pairIndex}`);
  const reverseSpan: [number, number] = [
    apply.span[0],
    apply.span[0] + apply.inserted.length,
  ];
  const entry: UndoEntry = { kind: "undo", of: at };
  return {
    ...state,
    document: replacePair(
      state,
      apply.pairIndex,
      splice(pair.translation, reverseSpan, apply.removed)
    ),
    selection: null,
    suggestions: null,
    history: [...state.history, entry],
    error: null,
  };
}

// -- document loading --------------------------------------------------------

/** Twin plain-text files: one sentence per line, whitespace tokenized. */
export function loadTwinText(sourceText: string, translationText: string): SentencePair[] {
  const src = sourceText.split("\n").filter((l) => l.trim() !== "");
  const tgt = translationText.split("\n").filter((l) => l.trim() !== "");
  if (src.length !== tgt.length) {
    throw new Error(`line count mismatch: ${src.length} source vs ${tgt.length} translation`);
  }
  return src.map((line, k) => ({
    source: line.trim().split(/\s+/),
    translation: tgt[k]!.trim().split(/\s+/),
  }));
}

/** JSONL of TS records ({source, translation, ...}); extra fields ignored. */
export function loadTsRecords(jsonl: string): SentencePair[] {
  const pairs: SentencePair[] = [];
  const lines = jsonl.split("\n").filter((l) => l.trim() !== "");
  lines.forEach((line, k) => {
    let record: unknown;
    try {
      record = JSON.parse(line);
    } catch {
      throw new Error(`line ${k + 1}: not valid JSON`);
    }
    const { source, translation } = record as { source?: unknown; translation?: unknown };
    if (!Array.isArray(source) || !Array.isArray(translation)) {
      throw new Error(`line ${k + 1}: missing source/translation arrays`);
    }
    pairs.push({ source: source.map(String), translation: translation.map(String) });
  });
  return pairs;
}

export function exportTranslations(state: SessionState): string {
  return state.document.map((pair) => pair.translation.join(" ")).join("\n") + "\n";
}
