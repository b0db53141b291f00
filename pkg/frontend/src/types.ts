/** Payload shapes served by the review server's JSON API. */

export interface QueueItem {
  case_id: string;
  landmark_id: string;
  flagged: boolean;
  flag_kind: "global" | "local" | null;
  done: boolean;
}

export interface LandmarkRecord {
  id: string;
  fixed: [number, number, number];
  moving: [number, number, number];
}

export interface CloudPoint {
  i: number;
  j: number;
  h: number;
  eps: number;
}

export interface FlagRecord {
  landmark_id: string;
  kind: "global" | "local";
  score: number | null;
}

export interface CasePayload {
  case_id: string;
  landmarks: LandmarkRecord[];
  cloud: CloudPoint[];
  flags: FlagRecord[];
  findings: unknown[];
  svg: Record<string, string>;
}

export type Category = "certain" | "unsure" | "normal";

export interface VerdictBody {
  case_id: string;
  landmark_id: string;
  category: Category;
  score: 1 | 2 | 3 | 4;
}
