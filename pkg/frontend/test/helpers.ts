import { vi } from "vitest";

export interface RecordedRequest {
  url: string;
  method: string;
  body: string | null;
}

export interface MockRoute {
  match: (url: string, method: string) => boolean;
  status?: number;
  body: unknown;
  // raw wins over body when byte control matters
  raw?: string;
  delay?: Promise<void>;
}

/**
 * Install a fetch mock that records every request and answers from a route
 * table. Tests read `recorded` to assert traceability.
 */
export function mockFetch(routes: MockRoute[]): RecordedRequest[] {
  const recorded: RecordedRequest[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      const method = init?.method ?? "GET";
      recorded.push({ url, method, body: (init?.body as string) ?? null });
      const route = routes.find((r) => r.match(url, method));
      if (!route) {
        return new Response(JSON.stringify({ error: "not-found", detail: `no route for ${url}` }), {
          status: 404,
          headers: { "content-type": "application/json" },
        });
      }
      if (route.delay) await route.delay;
      const text = route.raw ?? JSON.stringify(route.body);
      return new Response(text, {
        status: route.status ?? 200,
        headers: { "content-type": "application/json" },
      });
    }),
  );
  return recorded;
}

export function flushTasks(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

export function click(el: Element | null): void {
  if (!el) throw new Error("element to click not found");
  (el as HTMLElement).click();
}

export function buttonByText(root: ParentNode, text: string): HTMLButtonElement | null {
  return (
    Array.from(root.querySelectorAll("button")).find((b) =>
      b.textContent?.includes(text),
    ) ?? null
  );
}

export function setNumberInput(input: HTMLInputElement, value: string): void {
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}
