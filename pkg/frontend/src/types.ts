// Wire types for the /v1 game service. Field names and card codes match
// the server's JSON schema exactly.

export interface MoveRepr {
  pass?: boolean;
  category?: string;
  cards?: string[];
}

export interface LegalEntry {
  pass?: boolean;
  category?: string;
  key_rank?: number;
  ranks?: number[];
  ten_suits?: number;
  // concrete codes for tens, "R?" placeholders for other ranks
  cards?: string[];
}

export interface TerminalRepr {
  winners: number[];
  team: "Landlord" | "Peasant";
}

export interface GameView {
  game_id: string;
  revision: number;
  turn: number;
  human_seat: number | null;
  pattern_public: null;
  hand_counts: number[];
  history: { seat: number; move: MoveRepr }[];
  current_lead: MoveRepr | null;
  lead_seat: number | null;
  terminal: TerminalRepr | null;
  hand?: string[];
  legal_moves?: LegalEntry[];
}

export interface StreamFrame {
  revision: number;
  seat: number;
  move: MoveRepr;
  terminal: TerminalRepr | null;
}

export interface InsightRow {
  turn: number;
  seat: number;
  c_up: number;
  c_front: number;
  c_down: number;
  d: number;
  mask: string;
  move: string;
  event: string;
}
