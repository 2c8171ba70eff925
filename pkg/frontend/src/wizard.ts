import { ApiRequestError, advisePrivacyFirst, type AdviseResult } from "./api.js";
import { createStore, type Store } from "./state.js";
import type { AnswersDraft, MechanismKind } from "./types.js";

export interface WizardState {
  step: number;
  answers: AnswersDraft;
  targetMode: "rho" | "power";
  sensitivity: number | null;
  n: number | null;
  pending: boolean;
  result: AdviseResult | null;
  error: ApiRequestError | null;
}

const FRESH: WizardState = {
  step: 0,
  answers: {
    allow_blatant: null,
    allow_arbitrary_confidence: null,
    risk_target: {},
  },
  targetMode: "rho",
  sensitivity: null,
  n: null,
  pending: false,
  result: null,
  error: null,
};

export function createWizardStore(): Store<WizardState> {
  return createStore({ ...FRESH, answers: { ...FRESH.answers, risk_target: {} } });
}

/** A question is answered when it constrains the advisor. */
export function questionAnswered(state: WizardState, step: number): boolean {
  const { answers } = state;
  if (step === 0) return answers.allow_blatant !== null;
  if (step === 1) return answers.allow_arbitrary_confidence !== null;
  const target = answers.risk_target;
  const hasRisk = target.max_relative_risk !== undefined;
  const hasPower = target.max_power !== undefined && target.at_alpha0 !== undefined;
  return hasRisk || hasPower;
}

/** The JSON body POSTed to /api/advise/privacy-first. */
export function requestBody(state: WizardState): Record<string, unknown> {
  const body: Record<string, unknown> = {
    answers: {
      allow_blatant: state.answers.allow_blatant,
      allow_arbitrary_confidence: state.answers.allow_arbitrary_confidence,
      risk_target: state.answers.risk_target,
      ...(state.answers.prefer_kind ? { prefer_kind: state.answers.prefer_kind } : {}),
    },
  };
  if (state.sensitivity !== null) body.sensitivity = state.sensitivity;
  if (state.n !== null) body.n = state.n;
  return body;
}

export async function submitWizard(store: Store<WizardState>): Promise<void> {
  store.set({ pending: true, error: null });
  try {
    const result = await advisePrivacyFirst(requestBody(store.get()));
    store.set({ pending: false, result, step: 3 });
  } catch (err) {
    const error =
      err instanceof ApiRequestError
        ? err
        : new ApiRequestError("network", String(err), 0);
    store.set({ pending: false, error });
  }
}

const QUESTIONS = [
  {
    title: "1. Are blatant disclosures acceptable?",
    copy:
      "A release mechanism can fail by occasionally publishing a record " +
      "exactly as it appears in the data. That may be tolerable when the " +
      "recipients are trusted (say, an internal analytics team under NDA) " +
      "and fatal when the data is sensitive or the release is public.",
  },
  {
    title: "2. May an attacker's confidence grow without bound?",
    copy:
      "Some mechanisms cap how certain an attacker can ever become about " +
      "one person's membership, no matter how extreme the released value " +
      "looks. Others leak unbounded confidence in their tails: rare outputs " +
      "become near-proof. Say no to restrict advice to the capped families.",
  },
  {
    title: "3. How much disclosure risk can you accept?",
    copy:
      "Pick a cap, interpreted as an order of magnitude. Either bound the " +
      "attacker's overall odds gain (a factor rho), or bound the power of " +
      "the best membership attack run at a chosen false-positive level.",
  },
];

function yesNoRow(
  current: boolean | null,
  onPick: (value: boolean) => void,
): HTMLElement {
  const row = document.createElement("div");
  row.className = "yesno";
  for (const value of [true, false]) {
    const btn = document.createElement("button");
    btn.type = "button";
    btn.textContent = value ? "Yes" : "No";
    if (current === value) btn.classList.add("picked");
    btn.addEventListener("click", () => onPick(value));
    row.appendChild(btn);
  }
  return row;
}

function numberField(
  label: string,
  value: number | undefined | null,
  onChange: (value: number | undefined) => void,
  step = "any",
): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "field";
  const span = document.createElement("span");
  span.textContent = label;
  const input = document.createElement("input");
  input.type = "number";
  input.step = step;
  if (value !== undefined && value !== null) input.value = String(value);
  input.addEventListener("input", () => {
    const parsed = input.value === "" ? undefined : Number(input.value);
    onChange(parsed !== undefined && Number.isFinite(parsed) ? parsed : undefined);
  });
  wrap.appendChild(span);
  wrap.appendChild(input);
  return wrap;
}

function renderTargetStep(store: Store<WizardState>): HTMLElement {
  const box = document.createElement("div");
  const state = store.get();
  const target = state.answers.risk_target;
  const mode = state.targetMode;

  const modeRow = document.createElement("div");
  modeRow.className = "yesno";
  const options: Array<["rho" | "power", string]> = [
    ["rho", "Cap the odds gain"],
    ["power", "Cap attack power at a level"],
  ];
  for (const [value, label] of options) {
    const btn = document.createElement("button");
    btn.type = "button";
    btn.textContent = label;
    if (mode === value) btn.classList.add("picked");
    btn.addEventListener("click", () => {
      store.set({
        targetMode: value,
        answers: { ...store.get().answers, risk_target: {} },
      });
    });
    modeRow.appendChild(btn);
  }
  box.appendChild(modeRow);

  const patchTarget = (patch: Partial<typeof target>) => {
    store.set({
      answers: { ...store.get().answers, risk_target: { ...store.get().answers.risk_target, ...patch } },
    });
  };

  if (mode === "rho") {
    box.appendChild(
      numberField("max odds gain rho", target.max_relative_risk, (v) =>
        patchTarget({ max_relative_risk: v }),
      ),
    );
    box.appendChild(
      numberField("at level alpha0 (optional for capped families)", target.at_alpha0, (v) =>
        patchTarget({ at_alpha0: v }),
      ),
    );
  } else {
    box.appendChild(
      numberField("max attack power", target.max_power, (v) => patchTarget({ max_power: v })),
    );
    box.appendChild(
      numberField("at level alpha0", target.at_alpha0, (v) => patchTarget({ at_alpha0: v })),
    );
  }

  const prefer = document.createElement("label");
  prefer.className = "field";
  const preferSpan = document.createElement("span");
  preferSpan.textContent = "preferred family (optional)";
  const select = document.createElement("select");
  for (const kind of ["", "laplace", "gaussian", "uniform-sampling", "dp-bound"]) {
    const opt = document.createElement("option");
    opt.value = kind;
    opt.textContent = kind === "" ? "engine default" : kind;
    if ((state.answers.prefer_kind ?? "") === kind) opt.selected = true;
    select.appendChild(opt);
  }
  select.addEventListener("change", () => {
    store.set({
      answers: {
        ...store.get().answers,
        prefer_kind: select.value === "" ? undefined : (select.value as MechanismKind),
      },
    });
  });
  prefer.appendChild(preferSpan);
  prefer.appendChild(select);
  box.appendChild(prefer);

  box.appendChild(
    numberField("query sensitivity (optional, default 1)", state.sensitivity, (v) =>
      store.set({ sensitivity: v ?? null }),
    ),
  );
  box.appendChild(
    numberField("dataset size n (needed for uniform sampling)", state.n, (v) =>
      store.set({ n: v ?? null }),
    "1"),
  );
  return box;
}

function fmtMu(mu: number): string {
  return mu >= 100 || (mu > 0 && mu < 0.01) ? mu.toExponential(3) : mu.toFixed(3);
}

function kindLabel(kind: string): string {
  const names: Record<string, string> = {
    laplace: "Laplace",
    gaussian: "Gaussian",
    "uniform-sampling": "Uniform random sampling",
    "dp-bound": "DP bound",
  };
  return names[kind] ?? kind;
}

function renderReport(store: Store<WizardState>, result: AdviseResult): HTMLElement {
  const { data } = result;
  const box = document.createElement("div");
  box.className = "report";

  const headline = document.createElement("h3");
  headline.className = "report-headline";
  headline.textContent = `${kindLabel(data.chosen.kind)}, μ ≈ ${fmtMu(data.chosen.mu)}`;
  box.appendChild(headline);

  if (data.admissible.includes("uniform-sampling")) {
    const warn = document.createElement("div");
    warn.className = "banner banner-danger";
    warn.textContent =
      "Catastrophic-risk families are in play: uniform random sampling can " +
      "blatantly disclose a record. Only acceptable for trusted recipients.";
    box.appendChild(warn);
  }
  for (const message of data.warnings) {
    const warn = document.createElement("div");
    warn.className = "banner banner-warn";
    warn.textContent = message;
    box.appendChild(warn);
  }

  const admissible = document.createElement("p");
  admissible.className = "report-admissible";
  admissible.textContent = `Admissible families: ${data.admissible.join(", ")}`;
  box.appendChild(admissible);

  const trailTitle = document.createElement("h4");
  trailTitle.textContent = "Audit trail";
  box.appendChild(trailTitle);
  const trail = document.createElement("ol");
  trail.className = "rationale";
  for (const line of data.rationale) {
    const item = document.createElement("li");
    item.textContent = line;
    trail.appendChild(item);
  }
  box.appendChild(trail);

  const exportBtn = document.createElement("button");
  exportBtn.type = "button";
  exportBtn.className = "export";
  exportBtn.textContent = "Export report JSON";
  exportBtn.addEventListener("click", () => {
    // raw response bytes, never re-serialized
    const blob = new Blob([result.raw], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "recommendation.json";
    link.click();
    URL.revokeObjectURL(link.href);
  });
  box.appendChild(exportBtn);

  const rawView = document.createElement("pre");
  rawView.className = "raw-json";
  rawView.textContent = result.raw;
  box.appendChild(rawView);

  const restart = document.createElement("button");
  restart.type = "button";
  restart.textContent = "Start over";
  restart.addEventListener("click", () =>
    store.set({ ...FRESH, answers: { ...FRESH.answers, risk_target: {} } }),
  );
  box.appendChild(restart);
  return box;
}

export function renderWizard(root: HTMLElement, store: Store<WizardState>): void {
  const container = document.createElement("div");
  container.className = "wizard";
  root.appendChild(container);

  function sync(): void {
    const state = store.get();
    container.innerHTML = "";

    if (state.step === 3 && state.result) {
      container.appendChild(renderReport(store, state.result));
      return;
    }

    const nav = document.createElement("nav");
    nav.className = "wizard-nav";
    QUESTIONS.forEach((q, idx) => {
      const crumb = document.createElement("button");
      crumb.type = "button";
      crumb.textContent = q.title.slice(0, 1);
      crumb.disabled = idx > state.step;
      if (idx === state.step) crumb.classList.add("active");
      crumb.addEventListener("click", () => {
        if (idx <= state.step) store.set({ step: idx });
      });
      nav.appendChild(crumb);
    });
    container.appendChild(nav);

    const question = QUESTIONS[state.step];
    const title = document.createElement("h3");
    title.textContent = question.title;
    container.appendChild(title);
    const copy = document.createElement("p");
    copy.className = "question-copy";
    copy.textContent = question.copy;
    container.appendChild(copy);

    if (state.step === 0) {
      container.appendChild(
        yesNoRow(state.answers.allow_blatant, (value) =>
          store.set({ answers: { ...state.answers, allow_blatant: value } }),
        ),
      );
    } else if (state.step === 1) {
      container.appendChild(
        yesNoRow(state.answers.allow_arbitrary_confidence, (value) =>
          store.set({ answers: { ...state.answers, allow_arbitrary_confidence: value } }),
        ),
      );
    } else {
      container.appendChild(renderTargetStep(store));
    }

    if (state.error) {
      const banner = document.createElement("div");
      banner.className = "banner banner-danger";
      banner.textContent = `${state.error.code}: ${state.error.message}`;
      const retry = document.createElement("button");
      retry.type = "button";
      retry.textContent = "Retry";
      retry.addEventListener("click", () => void submitWizard(store));
      banner.appendChild(retry);
      container.appendChild(banner);
    }

    const actions = document.createElement("div");
    actions.className = "wizard-actions";
    if (state.step > 0) {
      const back = document.createElement("button");
      back.type = "button";
      back.textContent = "Back";
      back.addEventListener("click", () => store.set({ step: state.step - 1 }));
      actions.appendChild(back);
    }
    const next = document.createElement("button");
    next.type = "button";
    next.className = "primary";
    next.textContent = state.step < 2 ? "Next" : state.pending ? "Asking engine..." : "Get recommendation";
    next.disabled = !questionAnswered(state, state.step) || state.pending;
    next.addEventListener("click", () => {
      if (state.step < 2) store.set({ step: state.step + 1 });
      else void submitWizard(store);
    });
    actions.appendChild(next);
    container.appendChild(actions);
  }

  sync();
  store.subscribe(sync);
}
