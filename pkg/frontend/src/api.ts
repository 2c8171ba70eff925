import type {
  CurveResponse,
  MechanismDraft,
  PosteriorResponse,
  PowerResponse,
  Recommendation,
  RiskResponse,
  UtilityModelDraft,
} from "./types.js";

export class ApiRequestError extends Error {
  readonly code: string;
  readonly status: number;
  constructor(code: string, detail: string, status: number) {
    super(detail);
    this.code = code;
    this.status = status;
  }
}

let base = "";

/** Point the client somewhere other than the page origin (tests, dev). */
export function setApiBase(url: string): void {
  base = url.replace(/\/$/, "");
}

async function throwApiError(res: Response): Promise<never> {
  let code = "http";
  let detail = `${res.status} ${res.statusText}`;
  try {
    const body = await res.json();
    if (body && typeof body.error === "string") {
      code = body.error;
      detail = String(body.detail);
    }
  } catch {
    // non-JSON error body: keep the status line
  }
  throw new ApiRequestError(code, detail, res.status);
}

async function getJson<T>(path: string, params: Record<string, string>): Promise<T> {
  const query = new URLSearchParams(params).toString();
  const res = await fetch(`${base}${path}?${query}`);
  if (!res.ok) await throwApiError(res);
  return (await res.json()) as T;
}

function mechParams(mech: MechanismDraft): Record<string, string> {
  const params: Record<string, string> = { kind: mech.kind };
  if (mech.kind === "dp-bound") {
    params.epsilon = String(mech.epsilon);
    if (mech.delta !== undefined) params.delta = String(mech.delta);
  } else {
    params.mu = String(mech.mu);
  }
  if (mech.sensitivity !== undefined) params.sensitivity = String(mech.sensitivity);
  if (mech.n !== undefined) params.n = String(mech.n);
  return params;
}

export function getTradeoff(mech: MechanismDraft, grid: string): Promise<CurveResponse> {
  return getJson("/api/tradeoff", { ...mechParams(mech), grid });
}

export function getRisk(mech: MechanismDraft, alpha0Grid?: string): Promise<RiskResponse> {
  const params = mechParams(mech);
  if (alpha0Grid !== undefined) params.alpha0_grid = alpha0Grid;
  return getJson("/api/risk", params);
}

export function getPosterior(
  mech: MechanismDraft,
  pPrior: number,
  grid: string,
): Promise<PosteriorResponse> {
  return getJson("/api/posterior", { ...mechParams(mech), p_prior: String(pPrior), grid });
}

export function getPower(
  model: UtilityModelDraft,
  view: "function" | "roc",
  grid: string,
): Promise<PowerResponse> {
  return getJson("/api/utility/power", {
    n: String(model.n),
    sigma: String(model.sigma),
    delta_q: String(model.delta_q),
    m0: String(model.m0),
    m: String(model.m),
    alpha0: String(model.alpha0),
    mu: String(model.mu),
    view,
    grid,
  });
}

/**
 * POST the wizard answers. The raw body text is kept verbatim so an exported
 * report is byte-identical to what the service sent (and to the CLI, which
 * shares the encoder).
 */
export interface AdviseResult {
  raw: string;
  data: Recommendation;
}

export async function advisePrivacyFirst(body: unknown): Promise<AdviseResult> {
  const res = await fetch(`${base}/api/advise/privacy-first`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!res.ok) await throwApiError(res);
  const raw = await res.text();
  return { raw, data: JSON.parse(raw) as Recommendation };
}

export async function adviseUtilityFirst(body: unknown): Promise<AdviseResult> {
  const res = await fetch(`${base}/api/advise/utility-first`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!res.ok) await throwApiError(res);
  const raw = await res.text();
  return { raw, data: JSON.parse(raw) as Recommendation };
}

// Concurrent edits race their fetches; each chart keeps only the newest
// response. Older responses resolve to null and are dropped by the caller.
const latest = new Map<string, number>();

export async function latestWins<T>(key: string, work: () => Promise<T>): Promise<T | null> {
  const ticket = (latest.get(key) ?? 0) + 1;
  latest.set(key, ticket);
  const result = await work();
  return latest.get(key) === ticket ? result : null;
}
