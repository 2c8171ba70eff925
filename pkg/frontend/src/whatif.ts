import {
  ApiRequestError,
  getPosterior,
  getPower,
  getRisk,
  getTradeoff,
  latestWins,
} from "./api.js";
import { renderChart, type Series } from "./charts.js";
import { createStore, type Store } from "./state.js";
import type { MechanismDraft, MechanismKind, Point, RhoValue, UtilityModelDraft } from "./types.js";

// query grids sent to the service; all displayed values come back from it
const ALPHA_GRID = "0.005:1:0.005";
const RHO_LEVELS = "0.001,0.002,0.005,0.01,0.02,0.05,0.1,0.2,0.5";
const MU_SWEEP = [0.1, 0.25, 0.5, 0.75, 1, 1.5, 2, 2.5, 3, 4, 5, 6, 8, 10];
const M_GRID = "0:1:0.02";

export interface WhatifControls {
  kind: MechanismKind;
  mu: number;
  n: number;
  pPrior: number;
  alpha0: number;
  sigma: number;
  m: number;
  deltaQ: number;
}

export interface WhatifCharts {
  tradeoff: Point[] | null;
  posterior: Point[] | null;
  rho: Point[] | null;
  powerVsMu: Point[] | null;
  utility: Point[] | null;
  utilityUnprotected: Point[] | null;
}

export interface PinnedView {
  label: string;
  charts: WhatifCharts;
}

export interface WhatifState {
  controls: WhatifControls;
  fieldErrors: Partial<Record<keyof WhatifControls, string>>;
  charts: WhatifCharts;
  pinned: PinnedView | null;
  logRho: boolean;
  posteriorReadout: string | null;
  rhoReadout: RhoValue | null;
  failureClass: string | null;
  apiError: string | null;
}

const EMPTY_CHARTS: WhatifCharts = {
  tradeoff: null,
  posterior: null,
  rho: null,
  powerVsMu: null,
  utility: null,
  utilityUnprotected: null,
};

export function createWhatifStore(): Store<WhatifState> {
  return createStore<WhatifState>({
    controls: {
      kind: "gaussian",
      mu: 1,
      n: 100,
      pPrior: 0.5,
      alpha0: 0.05,
      sigma: 0.25,
      m: 0.2,
      deltaQ: 0.01,
    },
    fieldErrors: {},
    charts: { ...EMPTY_CHARTS },
    pinned: null,
    logRho: false,
    posteriorReadout: null,
    rhoReadout: null,
    failureClass: null,
    apiError: null,
  });
}

/** Inline validation; while any edit is invalid no request leaves the page. */
export function validateControls(c: WhatifControls): Partial<Record<keyof WhatifControls, string>> {
  const errors: Partial<Record<keyof WhatifControls, string>> = {};
  if (!(c.mu >= 0) || !Number.isFinite(c.mu)) errors.mu = "mu must be a number >= 0";
  if (!Number.isInteger(c.n) || c.n < 2) errors.n = "n must be an integer >= 2";
  if (!(c.pPrior > 0 && c.pPrior < 1)) errors.pPrior = "prior must be inside (0, 1)";
  if (!(c.alpha0 > 0 && c.alpha0 < 1)) errors.alpha0 = "alpha0 must be inside (0, 1)";
  if (!(c.sigma > 0)) errors.sigma = "sigma must be > 0";
  if (!(c.m >= 0)) errors.m = "m must be >= 0";
  if (!(c.deltaQ > 0)) errors.deltaQ = "sensitivity must be > 0";
  return errors;
}

function mechOf(c: WhatifControls): MechanismDraft {
  const mech: MechanismDraft = { kind: c.kind, mu: c.mu };
  if (c.kind === "uniform-sampling") mech.n = c.n;
  if (c.kind === "dp-bound") {
    // the dp-bound family is parameterized by epsilon; reuse the mu slider
    mech.epsilon = c.mu;
    mech.mu = 0;
  }
  return mech;
}

function modelOf(c: WhatifControls): UtilityModelDraft {
  return {
    n: c.n,
    sigma: c.sigma,
    delta_q: c.deltaQ,
    m0: 0,
    m: c.m,
    alpha0: c.alpha0,
    mu: c.mu,
  };
}

function describeError(err: unknown): string {
  if (err instanceof ApiRequestError) return `${err.code}: ${err.message}`;
  return String(err);
}

/**
 * Refetch every chart and readout for the current controls. Stale responses
 * are dropped per chart (latest edit wins); the returned promise settles when
 * this edit's requests have been either applied or superseded.
 */
export async function refresh(store: Store<WhatifState>): Promise<void> {
  const state = store.get();
  const errors = validateControls(state.controls);
  store.set({ fieldErrors: errors });
  if (Object.keys(errors).length > 0) return;

  const c = { ...state.controls };
  const mech = mechOf(c);
  store.set({ apiError: null });

  const tasks: Array<Promise<void>> = [
    latestWins("tradeoff", () => getTradeoff(mech, ALPHA_GRID)).then((res) => {
      if (res) store.set({ charts: { ...store.get().charts, tradeoff: res.points } });
    }),

    latestWins("posterior", () => getPosterior(mech, c.pPrior, ALPHA_GRID)).then((res) => {
      if (res) store.set({ charts: { ...store.get().charts, posterior: res.points } });
    }),

    latestWins("risk", () => getRisk(mech, RHO_LEVELS)).then((res) => {
      if (res) {
        store.set({
          charts: { ...store.get().charts, rho: res.rho_at },
          rhoReadout: res.rho,
          failureClass: res.failure_class,
        });
      }
    }),

    // readout for the posterior at exactly alpha0, displayed to 4 decimals
    latestWins("posterior-readout", () =>
      getPosterior(mech, c.pPrior, String(c.alpha0)),
    ).then((res) => {
      if (res) store.set({ posteriorReadout: res.points[0][1].toFixed(4) });
    }),
  ];

  if (c.kind !== "dp-bound") {
    tasks.push(
      latestWins("power-vs-mu", async () => {
        const points: Point[] = [];
        for (const mu of MU_SWEEP) {
          const res = await getRisk({ ...mech, mu }, String(c.alpha0));
          points.push([mu, res.attack_power_at[0][1]]);
        }
        return points;
      }).then((points) => {
        if (points) store.set({ charts: { ...store.get().charts, powerVsMu: points } });
      }),
    );
  } else {
    store.set({ charts: { ...store.get().charts, powerVsMu: null } });
  }

  if (c.mu > 0) {
    const model = modelOf(c);
    tasks.push(
      latestWins("utility", () => getPower(model, "function", M_GRID)).then((res) => {
        if (res) store.set({ charts: { ...store.get().charts, utility: res.points } });
      }),
      latestWins("utility-unprotected", () =>
        getPower({ ...model, mu: "unprotected" }, "function", M_GRID),
      ).then((res) => {
        if (res) {
          store.set({ charts: { ...store.get().charts, utilityUnprotected: res.points } });
        }
      }),
    );
  } else {
    store.set({ charts: { ...store.get().charts, utility: null } });
  }

  const results = await Promise.allSettled(tasks);
  const failure = results.find((r): r is PromiseRejectedResult => r.status === "rejected");
  if (failure) store.set({ apiError: describeError(failure.reason) });
}

export function pinCurrent(store: Store<WhatifState>): void {
  const state = store.get();
  const c = state.controls;
  store.set({
    pinned: {
      label: `${c.kind} mu=${c.mu}`,
      charts: { ...state.charts },
    },
  });
}

function controlRow(
  label: string,
  input: HTMLInputElement | HTMLSelectElement,
  error: string | undefined,
): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "field";
  const span = document.createElement("span");
  span.textContent = label;
  wrap.appendChild(span);
  wrap.appendChild(input);
  if (error) {
    wrap.classList.add("invalid");
    const msg = document.createElement("em");
    msg.className = "field-error";
    msg.textContent = error;
    wrap.appendChild(msg);
  }
  return wrap;
}

function slider(
  value: number,
  min: number,
  max: number,
  step: number,
  onInput: (v: number) => void,
): HTMLInputElement {
  const input = document.createElement("input");
  input.type = "range";
  input.min = String(min);
  input.max = String(max);
  input.step = String(step);
  input.value = String(value);
  input.addEventListener("input", () => onInput(Number(input.value)));
  return input;
}

function numberBox(value: number, onInput: (v: number) => void): HTMLInputElement {
  const input = document.createElement("input");
  input.type = "number";
  input.step = "any";
  input.value = String(value);
  input.addEventListener("input", () => onInput(Number(input.value)));
  return input;
}

export function renderWhatif(root: HTMLElement, store: Store<WhatifState>): void {
  const layout = document.createElement("div");
  layout.className = "whatif";
  const controlsBox = document.createElement("div");
  controlsBox.className = "controls";
  const chartsBox = document.createElement("div");
  chartsBox.className = "charts";
  layout.appendChild(controlsBox);
  layout.appendChild(chartsBox);
  root.appendChild(layout);

  const chartTargets = {
    tradeoff: document.createElement("div"),
    posterior: document.createElement("div"),
    rho: document.createElement("div"),
    powerVsMu: document.createElement("div"),
    utility: document.createElement("div"),
  };
  Object.values(chartTargets).forEach((el) => chartsBox.appendChild(el));

  const scheduleRefresh = () => void refresh(store);

  function patch(patchValues: Partial<WhatifControls>): void {
    store.set({ controls: { ...store.get().controls, ...patchValues } });
    scheduleRefresh();
  }

  function syncControls(): void {
    const state = store.get();
    const c = state.controls;
    const errors = state.fieldErrors;
    controlsBox.innerHTML = "";

    const kindSelect = document.createElement("select");
    for (const kind of ["laplace", "gaussian", "uniform-sampling", "dp-bound"]) {
      const opt = document.createElement("option");
      opt.value = kind;
      opt.textContent = kind;
      if (c.kind === kind) opt.selected = true;
      kindSelect.appendChild(opt);
    }
    kindSelect.addEventListener("change", () =>
      patch({ kind: kindSelect.value as MechanismKind }),
    );
    controlsBox.appendChild(controlRow("mechanism", kindSelect, undefined));

    controlsBox.appendChild(
      controlRow(
        c.kind === "dp-bound" ? `epsilon = ${c.mu}` : `mu = ${c.mu}`,
        slider(c.mu, 0, 10, 0.01, (v) => patch({ mu: v })),
        errors.mu,
      ),
    );
    controlsBox.appendChild(
      controlRow(`attack level alpha0 = ${c.alpha0}`, slider(c.alpha0, 0.001, 0.5, 0.001, (v) => patch({ alpha0: v })), errors.alpha0),
    );
    controlsBox.appendChild(
      controlRow(`prior p = ${c.pPrior}`, slider(c.pPrior, 0.01, 0.99, 0.01, (v) => patch({ pPrior: v })), errors.pPrior),
    );
    controlsBox.appendChild(
      controlRow(`n = ${c.n}`, slider(c.n, 2, 1000, 1, (v) => patch({ n: v })), errors.n),
    );
    controlsBox.appendChild(
      controlRow(`sigma = ${c.sigma}`, slider(c.sigma, 0.01, 2, 0.01, (v) => patch({ sigma: v })), errors.sigma),
    );
    controlsBox.appendChild(
      controlRow(`alternative mean m = ${c.m}`, slider(c.m, 0, 1.5, 0.01, (v) => patch({ m: v })), errors.m),
    );
    controlsBox.appendChild(
      controlRow("query sensitivity (e.g. data range / n)", numberBox(c.deltaQ, (v) => patch({ deltaQ: v })), errors.deltaQ),
    );

    const badges = document.createElement("div");
    badges.className = "badges";
    if (state.failureClass === "catastrophic") {
      const badge = document.createElement("span");
      badge.className = "badge badge-danger";
      badge.textContent = "catastrophic failure class";
      badges.appendChild(badge);
    } else if (state.failureClass) {
      const badge = document.createElement("span");
      badge.className = "badge";
      badge.textContent = `failure class: ${state.failureClass}`;
      badges.appendChild(badge);
    }
    if (state.rhoReadout !== null) {
      const badge = document.createElement("span");
      badge.className = "badge";
      badge.textContent = `overall odds gain rho: ${state.rhoReadout}`;
      badges.appendChild(badge);
    }
    controlsBox.appendChild(badges);

    const readout = document.createElement("p");
    readout.className = "posterior-readout";
    readout.textContent =
      state.posteriorReadout === null
        ? "posterior at alpha0: ..."
        : `posterior at alpha0: ${state.posteriorReadout}`;
    controlsBox.appendChild(readout);

    if (state.apiError) {
      const banner = document.createElement("div");
      banner.className = "banner banner-danger";
      banner.textContent = state.apiError;
      controlsBox.appendChild(banner);
    }

    const pinBtn = document.createElement("button");
    pinBtn.type = "button";
    pinBtn.textContent = state.pinned ? `pinned: ${state.pinned.label} (replace)` : "Pin for comparison";
    pinBtn.addEventListener("click", () => pinCurrent(store));
    controlsBox.appendChild(pinBtn);

    if (state.pinned) {
      const clearBtn = document.createElement("button");
      clearBtn.type = "button";
      clearBtn.textContent = "Clear pin";
      clearBtn.addEventListener("click", () => store.set({ pinned: null }));
      controlsBox.appendChild(clearBtn);
    }

    const logToggle = document.createElement("button");
    logToggle.type = "button";
    logToggle.textContent = state.logRho ? "rho axis: log (switch to linear)" : "rho axis: linear (switch to log)";
    logToggle.addEventListener("click", () => store.set({ logRho: !store.get().logRho }));
    controlsBox.appendChild(logToggle);
  }

  function syncCharts(): void {
    const state = store.get();
    const pinned = state.pinned;

    const withPin = (own: Point[] | null, key: keyof WhatifCharts, label: string): Series[] => {
      const series: Series[] = [];
      if (own) series.push({ label, points: own });
      const pinnedPoints = pinned?.charts[key];
      if (pinnedPoints) series.push({ label: `pinned: ${pinned!.label}`, points: pinnedPoints, dashed: true });
      return series;
    };

    renderChart(chartTargets.tradeoff, withPin(state.charts.tradeoff, "tradeoff", "current"), {
      title: "Trade-off curve (attack ROC bound)",
      xLabel: "alpha",
      yLabel: "beta",
      yRange: [0, 1],
    });
    renderChart(chartTargets.posterior, withPin(state.charts.posterior, "posterior", `prior ${state.controls.pPrior}`), {
      title: "Posterior after a positive test",
      xLabel: "alpha",
      yLabel: "posterior",
      yRange: [0, 1],
    });
    renderChart(chartTargets.rho, withPin(state.charts.rho, "rho", "current"), {
      title: "Pointwise odds gain rho(alpha0)",
      xLabel: "alpha0",
      yLabel: "rho",
      logY: state.logRho,
    });
    renderChart(chartTargets.powerVsMu, withPin(state.charts.powerVsMu, "powerVsMu", `alpha0 ${state.controls.alpha0}`), {
      title: "Best attack power vs mu",
      xLabel: "mu",
      yLabel: "power",
      yRange: [0, 1],
    });

    const utilitySeries: Series[] = [];
    if (state.charts.utility) utilitySeries.push({ label: "protected", points: state.charts.utility });
    if (state.charts.utilityUnprotected) {
      utilitySeries.push({ label: "unprotected", points: state.charts.utilityUnprotected, dashed: true });
    }
    const pinnedUtility = pinned?.charts.utility;
    if (pinnedUtility) {
      utilitySeries.push({ label: `pinned: ${pinned!.label}`, points: pinnedUtility, dashed: true });
    }
    renderChart(chartTargets.utility, utilitySeries, {
      title: "Z-test power vs alternative mean",
      xLabel: "m",
      yLabel: "power",
      yRange: [0, 1],
    });
  }

  function sync(): void {
    syncControls();
    syncCharts();
  }

  sync();
  store.subscribe(sync);
  scheduleRefresh();
}
