// Wire types mirrored from the curation HTTP API.

export interface StageState {
  status: 'pending' | 'running' | 'done' | 'failed';
  detail: string;
}

export interface ProgressEvent {
  project: string;
  stage: string;
  status: string;
  at: string;
  detail: string;
}

export interface ProjectState {
  name: string;
  mode: string;
  goal: string;
  iteration: number;
  busy: boolean;
  stages: Record<string, StageState>;
  events: ProgressEvent[];
}

export type Verdict = 'accept' | 'reject' | 'rename' | 'retype';

export interface CandidateRow {
  rank: number;
  lemma: string;
  surface: string;
  freq: number;
  doc_freq: number;
  scores: Record<string, number>;
  verdict: Verdict | null;
  new_label: string | null;
  snippets: string[];
}

export interface CandidatesResponse {
  iteration: number;
  candidates: CandidateRow[];
}

export interface DecisionInput {
  target: string;
  target_kind?: 'term' | 'relation';
  verdict: Verdict;
  new_label?: string;
  new_kind?: string;
  author?: string;
}

export interface GraphNode {
  id: string;
  label: string;
  kind: string;
  interpretations: { gloss: string; source: string }[];
  provenance: { doc: string; start: number; end: number }[];
}

export interface GraphLink {
  source: string;
  target: string;
  rel_type: string;
  confidence: number;
}

export interface GraphPayload {
  name: string;
  kind: string;
  iteration?: number;
  nodes: GraphNode[];
  links: GraphLink[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
