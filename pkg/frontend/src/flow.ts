/**
 * Scripted workbench flow against a live suggestion server, used by the
 * end-to-end gate: select a span, request suggestions, apply the top one,
 * undo, and verify the translation is restored exactly. Also checks that a
 * zero-width (insertion) request succeeds and that a typed hint lands in
 * the request payload verbatim.
 *
 * Usage: node dist/flow.js <base-url> <source> <translation> <i> <j> [hint]
 * Prints a JSON summary to stdout and exits non-zero on any failure.
 */

import {
  applySuggestion,
  newSession,
  selectSpan,
  setHint,
  setSuggestions,
  undo,
} from "./session.js";
import { SuggestClient, buildPayload } from "./api.js";

// minimal process surface so the build does not depend on @types/node
declare const process: {
  argv: string[];
  exit(code?: number): never;
};

function fail(message: string): never {
  console.error(message);
  process.exit(1);
}

async function main(): Promise<void> {
  const [baseUrl, sourceText, translationText, iArg, jArg, hint] = process.argv.slice(2);
  if (!baseUrl || !sourceText || !translationText || !iArg || !jArg) {
    fail("usage: flow.js <base-url> <source> <translation> <i> <j> [hint]");
  }
  const i = Number(iArg);
  const j = Number(jArg);
  const client = new SuggestClient(baseUrl);

  let state = newSession([
    { source: sourceText.split(" "), translation: translationText.split(" ") },
  ]);
  const original = [...state.document[0]!.translation];

  // select -> request -> apply top suggestion -> undo
  state = selectSpan(state, i, j);
  const response = await client.requestSuggestions(buildPayload(state));
  if (response.suggestions.length === 0) fail("no suggestions returned");
  state = setSuggestions(state, response.suggestions);
  state = applySuggestion(state, 0);
  const afterApply = [...state.document[0]!.translation];
  state = undo(state);
  const restored =
    JSON.stringify(state.document[0]!.translation) === JSON.stringify(original);

  // zero-width insertion request must succeed
  state = selectSpan(state, 0, 0);
  const insertion = await client.requestSuggestions(buildPayload(state));

  // a typed hint must appear in the payload verbatim
  let hintInPayload: string | null = null;
  let hintStatusOk = true;
  if (hint) {
    state = selectSpan(state, i, j);
    state = setHint(state, hint);
    const payload = buildPayload(state);
    hintInPayload = payload.hint;
    const hinted = await client.requestSuggestions(payload);
    hintStatusOk = hinted.suggestions.length > 0;
  }

  console.log(
    JSON.stringify({
      restored,
      applied: afterApply,
      insertion_ok: insertion.suggestions.length >= 0,
      hint_in_payload: hintInPayload,
      hint_request_ok: hintStatusOk,
    })
  );
  if (!restored || !hintStatusOk) process.exit(1);
}

main().catch((error) => fail(String(error)));
