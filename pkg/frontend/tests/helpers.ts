// Shared test plumbing: a route-table fetch stub.

export interface RecordedCall {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: string | null;
}

export type RouteTable = Record<string, (call: RecordedCall) => Response | object>;

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export function makeFetch(routes: RouteTable): {
  fetchFn: typeof fetch;
  calls: RecordedCall[];
} {
  const calls: RecordedCall[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const headers: Record<string, string> = {};
    new Headers(init?.headers).forEach((value, key) => {
      headers[key.toLowerCase()] = value;
    });
    const call: RecordedCall = {
      url,
      method: init?.method ?? 'GET',
      headers,
      body: typeof init?.body === 'string' ? init.body : null,
    };
    calls.push(call);
    const path = url.replace(/^https?:\/\/[^/]+/, '');
    for (const [route, handler] of Object.entries(routes)) {
      const [method, prefix] = route.split(' ', 2);
      if (call.method === method && path.startsWith(prefix)) {
        const out = handler(call);
        return out instanceof Response ? out : jsonResponse(out);
      }
    }
    return jsonResponse({ error: 'NotFound', detail: `no stub for ${call.method} ${path}` }, 404);
  }) as typeof fetch;
  return { fetchFn, calls };
}
