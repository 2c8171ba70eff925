// Acceptance: for three canned answer sets the wizard's recommendation JSON
// must be byte-identical to the CLI advise output, and the what-if posterior
// readout must equal the service's own number at the displayed precision.
// Runs against a real server process and the real CLI; nothing is mocked.
import { execFile, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { setApiBase } from "../src/api.js";
import { refresh, createWhatifStore } from "../src/whatif.js";
import { createWizardStore, renderWizard, submitWizard } from "../src/wizard.js";
import { buttonByText, click, setNumberInput } from "./helpers.js";
import fixtures from "./fixtures/answers.json";

const run = promisify(execFile);

const PORT = 8800 + (process.pid % 150);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let workDir: string;

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 30000;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/api/tradeoff?kind=laplace&mu=1&alpha=0.5`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`server on ${BASE} never became ready`);
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "navigator-parity-"));
  server = spawn(
    "dptradeoff",
    ["serve", "--host", "127.0.0.1", "--port", String(PORT), "--store-path", join(workDir, "store")],
    { stdio: "ignore" },
  );
  setApiBase(BASE);
  await waitForServer();
});

afterAll(() => {
  server?.kill();
  rmSync(workDir, { recursive: true, force: true });
});

async function cliBytes(name: string, args: string[]): Promise<string> {
  const outFile = join(workDir, `${name}.json`);
  await run("dptradeoff", [...args, "-o", outFile]);
  return readFileSync(outFile, "utf8");
}

describe("UI/CLI parity", () => {
  it("wizard DOM flow produces the CLI's exact bytes (bounded odds cap)", async () => {
    const fixture = fixtures["bounded-odds-cap"];
    const expected = await cliBytes("bounded-odds-cap", fixture.cliArgs);

    const root = document.createElement("div");
    document.body.appendChild(root);
    const store = createWizardStore();
    renderWizard(root, store);

    click(buttonByText(root, "No")); // blatant disclosures: no
    click(buttonByText(root, "Next"));
    click(buttonByText(root, "No")); // unbounded confidence: no
    click(buttonByText(root, "Next"));
    setNumberInput(root.querySelector<HTMLInputElement>('input[type="number"]')!, "10.0");
    click(buttonByText(root, "Get recommendation"));

    const deadline = Date.now() + 10000;
    while (store.get().result === null && store.get().error === null && Date.now() < deadline) {
      await new Promise((resolve) => setTimeout(resolve, 50));
    }

    expect(store.get().error).toBeNull();
    expect(store.get().result!.raw).toBe(expected);
    expect(root.querySelector(".report-headline")!.textContent).toBe("Laplace, μ ≈ 2.303");
    document.body.innerHTML = "";
  });

  for (const name of ["power-cap-prefers-gaussian", "everything-allowed"] as const) {
    it(`wizard submission matches the CLI byte for byte (${name})`, async () => {
      const fixture = fixtures[name];
      const expected = await cliBytes(name, fixture.cliArgs);

      const store = createWizardStore();
      const body = fixture.body as {
        answers: Record<string, unknown>;
        sensitivity?: number;
        n?: number;
      };
      store.set({
        answers: body.answers as never,
        sensitivity: body.sensitivity ?? null,
        n: body.n ?? null,
      });
      await submitWizard(store);

      expect(store.get().error).toBeNull();
      expect(store.get().result!.raw).toBe(expected);
    });
  }

  it("what-if posterior readout equals /api/posterior at displayed precision", async () => {
    const store = createWhatifStore();
    // gaussian, mu = 1, prior 0.5, alpha0 = 0.05: the worked example
    await refresh(store);

    const res = await fetch(`${BASE}/api/posterior?kind=gaussian&mu=1&p_prior=0.5&grid=0.05`);
    const body = (await res.json()) as { points: [number, number][] };
    const serviceValue = body.points[0][1];

    expect(store.get().posteriorReadout).toBe(serviceValue.toFixed(4));
    expect(store.get().fieldErrors).toEqual({});

    console.log(
      "PASS criterion 9: wizard JSON is byte-identical to the CLI for three " +
        "canned answer sets and the posterior readout matches the service",
    );
  });
});
