// Wire types mirroring the session service's JSON views.  Expressions are
// ASCII-grammar strings plus display-only latex; the client never computes
// any math of its own.

export interface ExprCell {
  ascii: string;
  latex: string;
  with_constant?: string;
}

export interface SuggestedSplit {
  index: number;
  u: ExprCell;
  dv: ExprCell;
  lipet_class: string;
}

export interface TableRowView {
  sign: '+' | '-';
  u: ExprCell;
  dv: ExprCell;
}

export interface TableView {
  rows: TableRowView[];
  rendered: string;
}

export interface Hint {
  tag: 'zero_row' | 'direct' | 'self_similar' | 'harder' | 'simpler';
  text: string;
  can_stop: boolean;
  stop_mode?: 'direct' | 'self_similar';
  c?: string;
  residual_score?: number;
  original_score?: number;
  antiderivative?: ExprCell;
}

export interface SessionView {
  id: string;
  status: 'open' | 'finalized' | 'abandoned';
  problem: { integrand: string; latex: string; var: string };
  undo_depth: number;
  suggested_splits: SuggestedSplit[];
  table: TableView | null;
  residual: { sign: number; integrand: ExprCell } | null;
  hints: Hint[];
  difficulty: { original: number; residual: number } | null;
  antiderivative: ExprCell | null;
  verified: boolean | null;
}

export interface ProtocolError {
  code: string;
  message: string;
  span?: { start: number; end: number };
}

export type Action =
  | { type: 'choose_split'; index: number }
  | { type: 'choose_split'; u: string; dv?: string }
  | { type: 'step' }
  | { type: 'stop'; mode: 'auto' | 'direct' | 'self_similar' }
  | { type: 'undo' }
  | { type: 'abandon' };

export interface LogEntry {
  seq: number;
  action: { type: string; [key: string]: unknown };
}

export interface TaylorTablePayload {
  center: string;
  order: number;
  polynomial: string;
  polynomial_latex: string;
  remainder_integrand: string;
  remainder_integrand_latex: string;
  table: {
    rows: Array<{ sign: string; u: string; u_latex: string; dv: string; dv_latex: string }>;
  } | null;
}
