import { describe, expect, it } from "vitest";

import {
  SelectionError,
  SentencePair,
  applySuggestion,
  canUndo,
  exportTranslations,
  lastActiveApply,
  loadTsRecords,
  loadTwinText,
  newSession,
  selectSpan,
  setActivePair,
  setError,
  setHint,
  setSuggestions,
  undo,
} from "../src/session.js";

const doc: SentencePair[] = [
  { source: ["1", "2", "3"], translation: ["one", "two", "three"] },
  { source: ["4"], translation: ["four"] },
];

function suggestion(tokens: string[], score = -0.5) {
  return { tokens, text: tokens.join(" "), score };
}

describe("selection", () => {
  it("accepts spans within bounds including zero-width", () => {
    let state = newSession(doc);
    state = selectSpan(state, 1, 2);
    expect(state.selection).toEqual([1, 2]);
    state = selectSpan(state, 3, 3);
    expect(state.selection).toEqual([3, 3]);
    state = selectSpan(state, 0, 3);
    expect(state.selection).toEqual([0, 3]);
  });

  it("rejects out-of-bounds or inverted spans", () => {
    const state = newSession(doc);
    expect(() => selectSpan(state, -1, 0)).toThrow(SelectionError);
    expect(() => selectSpan(state, 0, 4)).toThrow(SelectionError);
    expect(() => selectSpan(state, 2, 1)).toThrow(SelectionError);
    expect(() => selectSpan(state, 0.5, 1)).toThrow(SelectionError);
  });

  it("selection bounds follow the active pair", () => {
    let state = setActivePair(newSession(doc), 1);
    expect(() => selectSpan(state, 0, 2)).toThrow(SelectionError);
    expect(selectSpan(state, 0, 1).selection).toEqual([0, 1]);
  });
});

describe("apply and undo", () => {
  it("apply splices, records history and clears selection", () => {
    let state = selectSpan(newSession(doc), 1, 2);
    state = setSuggestions(state, [suggestion(["2nd"])]);
    state = applySuggestion(state, 0);
    expect(state.document[0]!.translation).toEqual(["one", "2nd", "three"]);
    expect(state.selection).toBeNull();
    expect(state.suggestions).toBeNull();
    expect(state.history).toHaveLength(1);
  });

  it("apply then undo restores the translation exactly", () => {
    const cases: Array<[number, number, string[]]> = [
      [0, 1, ["x"]],
      [1, 3, []],
      [2, 2, ["ins", "erted"]],
      [0, 3, ["a", "b", "c", "d"]],
    ];
    for (const [i, j, tokens] of cases) {
      let state = selectSpan(newSession(doc), i, j);
      state = setSuggestions(state, [suggestion(tokens)]);
      state = applySuggestion(state, 0);
      state = undo(state);
      expect(state.document[0]!.translation).toEqual(["one", "two", "three"]);
    }
  });

  it("history is append-only: undo appends instead of popping", () => {
    let state = selectSpan(newSession(doc), 0, 1);
    state = setSuggestions(state, [suggestion(["uno"])]);
    state = applySuggestion(state, 0);
    state = undo(state);
    expect(state.history).toHaveLength(2);
    expect(state.history[0]!.kind).toBe("apply");
    expect(state.history[1]).toEqual({ kind: "undo", of: 0 });
    expect(canUndo(state)).toBe(false);
  });

  it("nested applies undo in reverse order", () => {
    let state = selectSpan(newSession(doc), 0, 1);
    state = setSuggestions(state, [suggestion(["first"])]);
    state = applySuggestion(state, 0);
    state = selectSpan(state, 2, 3);
    state = setSuggestions(state, [suggestion(["second"])]);
    state = applySuggestion(state, 0);
    expect(state.document[0]!.translation).toEqual(["first", "two", "second"]);
    state = undo(state);
    expect(state.document[0]!.translation).toEqual(["first", "two", "three"]);
    state = undo(state);
    expect(state.document[0]!.translation).toEqual(["one", "two", "three"]);
    expect(state.history.map((h) => h.kind)).toEqual(["apply", "apply", "undo", "undo"]);
  });

  it("undo with no active apply throws", () => {
    expect(() => undo(newSession(doc))).toThrow("nothing to undo");
  });

  it("apply requires a selection and a valid index", () => {
    const state = setSuggestions(newSession(doc), [suggestion(["x"])]);
    expect(() => applySuggestion(state, 0)).toThrow("no span selected");
    const selected = selectSpan(newSession(doc), 0, 1);
    expect(() => applySuggestion(selected, 0)).toThrow(RangeError);
  });

  it("lastActiveApply skips undone entries", () => {
    expect(lastActiveApply([])).toBeNull();
    const apply = {
      kind: "apply" as const,
      pairIndex: 0,
      span: [0, 1] as [number, number],
      removed: ["one"],
      inserted: ["x"],
    };
    expect(lastActiveApply([apply])).toBe(0);
    expect(lastActiveApply([apply, { kind: "undo", of: 0 }])).toBeNull();
    expect(lastActiveApply([apply, { kind: "undo", of: 0 }, { ...apply }])).toBe(2);
  });
});

describe("errors keep session state", () => {
  it("setError preserves selection, hint and history", () => {
    let state = selectSpan(newSession(doc), 1, 2);
    state = setHint(state, "t");
    state = setError(state, "server returned 503: model-not-loaded");
    expect(state.selection).toEqual([1, 2]);
    expect(state.hint).toBe("t");
    expect(state.error).toContain("503");
  });
});

describe("document loading", () => {
  it("twin text splits on whitespace per line", () => {
    const pairs = loadTwinText("1 2\n3\n", "one two\nthree\n");
    expect(pairs).toEqual([
      { source: ["1", "2"], translation: ["one", "two"] },
      { source: ["3"], translation: ["three"] },
    ]);
  });

  it("twin text rejects mismatched line counts", () => {
    expect(() => loadTwinText("1\n2\n", "one\n")).toThrow("mismatch");
  });

  it("record lines keep source/translation and ignore extras", () => {
    const jsonl =
      JSON.stringify({ source: ["1"], translation: ["one"], span: [0, 1], alternatives: [["x"]] }) +
      "\n";
    expect(loadTsRecords(jsonl)).toEqual([{ source: ["1"], translation: ["one"] }]);
  });

  it("record parse errors carry the line number", () => {
    expect(() => loadTsRecords('{"source": ["1"], "translation": ["one"]}\n{oops\n')).toThrow(
      "line 2"
    );
  });

  it("export joins edited translations", () => {
    expect(exportTranslations(newSession(doc))).toBe("one two three\nfour\n");
  });
});
