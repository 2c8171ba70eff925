// Shapes mirror the engine's JSON payloads; every field here is produced by
// the service, never synthesized in the browser.

export type MechanismKind = "laplace" | "gaussian" | "uniform-sampling" | "dp-bound";

export interface MechanismDraft {
  kind: MechanismKind;
  mu: number;
  sensitivity?: number;
  n?: number;
  epsilon?: number;
  delta?: number;
}

export type Point = [number, number];

export interface CurveResponse {
  engine_version: string;
  inputs_echo: unknown;
  f_at_zero: number;
  convex: boolean;
  risk_bounded: { kind: string; rho?: number };
  points: Point[];
}

export type RhoValue = number | "unbounded" | "unprotected";

export interface RiskResponse {
  engine_version: string;
  inputs_echo: unknown;
  failure_class: "none" | "graceful" | "catastrophic";
  rho: RhoValue;
  rho_at: Point[];
  attack_power_at: Point[];
}

export interface PosteriorResponse {
  engine_version: string;
  inputs_echo: unknown;
  points: Point[];
}

export interface PowerResponse {
  engine_version: string;
  inputs_echo: unknown;
  points: Point[];
}

export interface RiskTargetDraft {
  max_relative_risk?: number;
  max_power?: number;
  at_alpha0?: number;
}

export interface AnswersDraft {
  allow_blatant: boolean | null;
  allow_arbitrary_confidence: boolean | null;
  risk_target: RiskTargetDraft;
  prefer_kind?: MechanismKind;
}

export interface Recommendation {
  engine_version: string;
  inputs_echo: unknown;
  inputs: unknown;
  admissible: string[];
  chosen: MechanismDraft;
  risk_profile: {
    failure_class: string;
    rho: RhoValue;
    rho_at: Point[];
    attack_power_at: Point[];
  };
  rationale: string[];
  warnings: string[];
}

export interface UtilityModelDraft {
  n: number;
  sigma: number;
  delta_q: number;
  m0: number;
  m: number;
  alpha0: number;
  mu: number | "unprotected";
}

export interface ApiError {
  error: string;
  detail: string;
}
