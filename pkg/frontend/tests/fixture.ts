/** In-memory stand-in for the investigation service.
 *
 * Implements the documented endpoints as a FetchLike so tests exercise the
 * real client/render path. Feedback with corrected_text mutates the stored
 * narrative, like the live service, so round-trip tests are end-to-end on
 * the UI side.
 */

import type { FetchLike } from "../src/client.js";
import type {
  FeedbackRequest,
  NarrativeView,
  QueryResult,
  SubgraphExport,
} from "../src/types.js";

const A = "0x" + "a".repeat(40);
const B = "0x" + "b".repeat(40);
const C = "0x" + "c".repeat(40);
const D = "0x" + "d".repeat(40);
const TX1 = "0x" + "1".repeat(64);
const TX2 = "0x" + "2".repeat(64);
const TX3 = "0x" + "3".repeat(64);

export const STAR: SubgraphExport = {
  center: A,
  radius: 2,
  nodes: [
    { addr: A, hop: 0, features: [0, 0, 0, 0, 0, 0, 0] },
    { addr: B, hop: 1, features: [0, 0, 0, 0, 0, 0, 1] },
    { addr: C, hop: 1, features: [0, 0, 0, 0, 0, 0, 1] },
    { addr: D, hop: 1, features: [0, 0, 0, 0, 0, 0, 1] },
  ],
  edges: [
    { from: A, to: B, tx_id: TX1, value: "5", timestamp: 100 },
    { from: A, to: C, tx_id: TX2, value: "7", timestamp: 200 },
    { from: D, to: A, tx_id: TX3, value: "9", timestamp: 300 },
  ],
};

function narrative(txId: string, text: string): NarrativeView {
  return {
    tx_id: txId,
    text,
    rounds: [
      ["draft one", "needs work on accuracy", "revise"],
      ["draft two", "ok", "accept"],
      [text, "ok", "accept"],
    ],
    backend_id: "fixture",
    flags: [],
    versions: [],
  };
}

export interface FixtureState {
  narratives: Map<string, NarrativeView>;
  feedback: FeedbackRequest[];
  queryResult: QueryResult;
  failNextFeedback: boolean;
  offline: boolean;
}

export function makeFixture(): { fetchImpl: FetchLike; state: FixtureState } {
  const state: FixtureState = {
    narratives: new Map([
      [TX1, narrative(TX1, "- On 2023-10-06, 5 wei moved.\n- Quiet day.\n- No notes.")],
      [TX2, narrative(TX2, "- On 2023-10-07, 7 wei moved.\n- Quiet day.\n- No notes.")],
    ]),
    feedback: [],
    // Scores intentionally NOT in id order and not round numbers, so any
    // client-side re-sorting or reformatting would be caught.
    queryResult: {
      hits: [
        { id: TX2, score: 0.91237, space: "narrative" },
        { id: TX1, score: 0.90001, space: "narrative" },
        { id: TX1, score: 0.64329, space: "fused" },
        { id: TX2, score: 0.61111, space: "fused" },
      ],
      subgraphs: [STAR],
      narratives: {},
      flags: ["fused_seq_block_zero_padded"],
      elapsed_ms: 3,
    },
    failNextFeedback: false,
    offline: false,
  };
  state.queryResult.narratives = {
    [TX1]: { text: state.narratives.get(TX1)!.text, flags: [] },
    [TX2]: { text: state.narratives.get(TX2)!.text, flags: [] },
  };

  const json = (body: unknown, status = 200) =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });

  const fetchImpl: FetchLike = async (url, init) => {
    if (state.offline) throw new TypeError("fetch failed");
    const { pathname } = new URL(url);
    if (pathname === "/v1/query" && init?.method === "POST") {
      return json(state.queryResult);
    }
    if (pathname.startsWith("/v1/narrative/")) {
      const txId = decodeURIComponent(pathname.split("/").pop()!);
      const view = state.narratives.get(txId);
      if (view === undefined) return json({ detail: `unknown tx ${txId}` }, 404);
      return json(view);
    }
    if (pathname.startsWith("/v1/subgraph/")) {
      return json(STAR);
    }
    if (pathname === "/v1/feedback" && init?.method === "POST") {
      if (state.failNextFeedback) {
        state.failNextFeedback = false;
        return json({ detail: "boom" }, 503);
      }
      const fb = JSON.parse(String(init.body)) as FeedbackRequest;
      state.feedback.push(fb);
      const view = state.narratives.get(fb.tx_id);
      if (view === undefined) return json({ detail: "unknown tx" }, 404);
      if (fb.corrected_text !== undefined && fb.corrected_text !== null) {
        view.versions = [...view.versions, view.text];
        view.text = fb.corrected_text;
      }
      return json({ status: "stored", feedback_id: fb.feedback_id });
    }
    if (pathname === "/v1/health") {
      return json({
        status: "ok",
        transactions: 3,
        accounts: 4,
        indexes: { seq: 3, narrative: 3, fused: 3, graph: 4 },
        feedback_entries: state.feedback.length,
      });
    }
    return json({ detail: "not found" }, 404);
  };

  return { fetchImpl, state };
}

export const IDS = { A, B, C, D, TX1, TX2, TX3 };
