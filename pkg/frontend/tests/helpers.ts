// Fetch stubbing: the UI computes no metric itself, so tests drive it
// entirely from recorded API payloads.

export interface StubRoute {
  method: string;
  path: string | RegExp;
  status?: number;
  body: unknown | ((init: RequestInit | undefined, url: string) => unknown);
}

export interface FetchCall {
  method: string;
  url: string;
  body: unknown;
}

export function installFetch(routes: StubRoute[]): { calls: FetchCall[] } {
  const calls: FetchCall[] = [];
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = (init?.method ?? "GET").toUpperCase();
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ method, url, body });
    const pathOnly = url.split("?")[0];
    for (const route of routes) {
      if (route.method.toUpperCase() !== method) continue;
      const hit = typeof route.path === "string" ? route.path === pathOnly : route.path.test(url);
      if (!hit) continue;
      const payload = typeof route.body === "function" ? route.body(init, url) : route.body;
      return new Response(JSON.stringify(payload), {
        status: route.status ?? 200,
        headers: { "content-type": "application/json" },
      });
    }
    throw new Error(`no stub for ${method} ${url}`);
  }) as typeof fetch;
  return { calls };
}

export async function flush(times = 4): Promise<void> {
  for (let i = 0; i < times; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

export function host(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById("app")!;
}
