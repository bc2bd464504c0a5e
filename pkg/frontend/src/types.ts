// Wire types for the lextree HTTP API (format_version 1).

export type Answer = boolean | string;

export interface PredicateDto {
  id: string;
  prompt: string;
  domain: { type: 'bool' } | { type: 'options'; values: string[] };
  gate: boolean;
  rank: number;
}

export interface ConsequenceDto {
  id: string;
  text: string;
  priority: number;
}

export type BinNodeDto =
  | { type: 'test'; predicate: string; value: Answer; yes: number; no: number }
  | { type: 'leaf'; consequence: string; winning_norm: string | null };

export interface CompiledTreeDto {
  format_version: number;
  kind: 'compiled_tree';
  source_title: string;
  predicates: PredicateDto[];
  consequences: ConsequenceDto[];
  root: number;
  nodes: BinNodeDto[];
}

export interface TreeStatsDto {
  internal: number;
  leaves: number;
  depth: number;
}

export interface TreeResponse {
  format_version: number;
  tree: CompiledTreeDto;
  stats: TreeStatsDto;
}

export interface TraceStepDto {
  prompt: string;
  predicate: string;
  value: Answer;
  answer: 'yes' | 'no';
}

export interface TraceDto {
  steps: TraceStepDto[];
  outcome: { consequence: string; text: string };
  winning_norm: string | null;
}

export type SessionStatusDto =
  | {
      state: 'awaiting_answer';
      prompt: string;
      predicate: string;
      value: Answer;
      depth: number;
    }
  | {
      state: 'done';
      outcome: { consequence: string; text: string };
      trace: TraceDto;
    };

export interface AnsweredStepDto {
  predicate: string;
  value: Answer;
  reply: 'yes' | 'no';
  node: number;
}

export interface SessionCreated {
  session_id: string;
  version: number;
  status: SessionStatusDto;
}

export interface SessionSnapshot {
  version: number;
  status: SessionStatusDto;
  answered: AnsweredStepDto[];
}

export interface SessionAdvanced {
  version: number;
  status: SessionStatusDto;
}

export type PreviewDto =
  | { kind: 'question'; prompt: string }
  | { kind: 'outcome'; consequence: string; text: string };

export interface ConflictFindingDto {
  norms: string[];
  witness: Record<string, Answer>;
}

export interface AnalysisReportDto {
  format_version: number;
  conflicts: ConflictFindingDto[];
  shadowed: string[];
  unregulated_regions: Record<string, Answer>[];
  stats: TreeStatsDto;
  assignments_checked: number;
}

export interface ReplayStep {
  predicate: string;
  value: Answer;
  reply: 'yes' | 'no';
}

export interface ErrorEnvelope {
  error_code: string;
  message: string;
}
