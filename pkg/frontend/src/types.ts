/** Document shapes exactly as the HTTP API serves them. */

export interface SessionSummary {
  session_id: string;
  game_title: string;
  duration_ms: number;
  event_count: number;
}

export interface UnitDoc {
  id: string;
  display_name: string;
  team_id: string | null;
  is_player: boolean;
}

export interface VocabularyDoc {
  game_title: string;
  entries: { name: string; description: string }[];
}

export interface SessionDetail {
  session_id: string;
  game_title: string;
  duration_ms: number;
  map_bounds: [number, number, number, number];
  roster: UnitDoc[];
  round_marks: [number, number][];
  vocabulary?: VocabularyDoc;
  summary: {
    session_id: string;
    event_count: number;
    by_type: Record<string, number>;
    by_unit: Record<string, number>;
    by_round?: Record<string, number>;
  };
}

/** Flat wire record; payload attributes arrive as "payload.<key>" fields. */
export interface EventDoc {
  session_id: string;
  event_id: string;
  timestamp_ms: number;
  unit_id: string;
  event_type: string;
  x?: number;
  y?: number;
  [payloadKey: string]: unknown;
}

export interface LabelDoc {
  label_id: string;
  session_id: string;
  name: string;
  start_ms: number;
  end_ms: number;
  unit_ids: string[];
  event_ids: string[];
  author: string;
  created_at: number;
  revision: number;
}

export interface SequenceElementDoc {
  state: string;
  constituents: string[];
  count: number;
  start_ms: number;
  end_ms: number;
}

export interface SequenceDoc {
  owner: { kind: string; id: string };
  rater: string;
  elements: SequenceElementDoc[];
}

export interface SequencesResponse {
  scope: string;
  rater: string;
  sequences: SequenceDoc[];
}

export interface StateGraphDoc {
  nodes: { state: string; visits: number; starts: number }[];
  edges: { from: string; to: string; count: number }[];
}

export interface ScatterNodeDoc {
  owner: { kind: string; id: string };
  x: number;
  y: number;
  cluster: number;
}

export interface ScatterDoc {
  scope: string;
  nodes: ScatterNodeDoc[];
  excluded: { kind: string; id: string }[];
  matrix: { owners: { kind: string; id: string }[]; values: number[][] };
  params: { metric: string; k: number; mode: string };
  final_stress: number;
  seed: number;
}

export interface IrrDoc {
  kappa: number | null;
  degenerate: boolean;
  percent_agreement: number;
  expected_agreement: number;
  confusion: number[][];
  categories: string[];
  bin_ms: number;
  cell_count: number;
  raterA: string;
  raterB: string;
}

export interface ApiErrorDoc {
  error: { code: string; message: string; details: Record<string, unknown> };
}
