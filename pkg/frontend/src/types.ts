/** Wire types mirroring the investigation service's HTTP API. */

export type QueryMode = "text" | "tx_example" | "account_example";
export type Space = "fused" | "seq" | "narrative" | "graph";

export interface QueryRequest {
  mode: QueryMode;
  text?: string;
  tx_id?: string;
  addr?: string;
  k?: number;
  spaces?: Space[];
}

export interface Hit {
  id: string;
  score: number;
  space: Space;
}

export interface SubgraphNode {
  addr: string;
  hop: number;
  features: number[];
}

export interface SubgraphEdge {
  from: string;
  to: string;
  tx_id: string;
  value: string;
  timestamp: number;
}

export interface SubgraphExport {
  center: string;
  radius: number;
  nodes: SubgraphNode[];
  edges: SubgraphEdge[];
}

export interface NarrativeAttachment {
  text: string;
  flags: string[];
}

export interface QueryResult {
  hits: Hit[];
  subgraphs: SubgraphExport[];
  narratives: Record<string, NarrativeAttachment>;
  flags: string[];
  elapsed_ms: number;
}

export interface TxView {
  tx_id: string;
  from: string;
  to: string;
  value: string;
  timestamp: number;
  block: number;
  gas_used: number;
  tags: string[];
}

/** One critic round: [draft, critique, verdict]. */
export type NarrativeRound = [string, string, string];

export interface NarrativeView {
  tx_id: string;
  text: string;
  rounds: NarrativeRound[];
  backend_id: string;
  flags: string[];
  versions: string[];
}

export interface FeedbackRequest {
  feedback_id: string;
  tx_id: string;
  narrative_ok: boolean;
  corrected_text?: string;
  note: string;
  created_ts: number;
}

export interface HealthView {
  status: string;
  transactions: number;
  accounts: number;
  indexes: Record<Space, number>;
  feedback_entries: number;
}
