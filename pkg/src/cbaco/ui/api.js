// Minimal typed client for the policy service. One request helper, one
// method per endpoint, errors surfaced with the server's detail payload.
export class ApiError extends Error {
    constructor(status, detail) {
        super(typeof detail === "string" ? detail : JSON.stringify(detail));
        this.status = status;
        this.detail = detail;
        this.name = "ApiError";
    }
}
export class Client {
    constructor(base = "", fetcher = (input, init) => fetch(input, init)) {
        this.base = base;
        this.fetcher = fetcher;
    }
    async request(method, path, body, query) {
        const params = new URLSearchParams();
        for (const [key, value] of Object.entries(query ?? {})) {
            if (value !== undefined)
                params.set(key, String(value));
        }
        const qs = params.toString();
        const resp = await this.fetcher(`${this.base}${path}${qs ? `?${qs}` : ""}`, {
            method,
            headers: body === undefined ? undefined : { "content-type": "application/json" },
            body: body === undefined ? undefined : JSON.stringify(body),
        });
        if (resp.status === 204)
            return undefined;
        const data = await resp.json().catch(() => null);
        if (!resp.ok) {
            const detail = data !== null && typeof data === "object" && "detail" in data
                ? data.detail
                : data;
            throw new ApiError(resp.status, detail ?? resp.statusText);
        }
        return data;
    }
    createSession(policy, freshHistory = false) {
        const body = freshHistory ? { policy, fresh_history: true } : policy;
        return this.request("POST", "/sessions", body);
    }
    listSessions() {
        return this.request("GET", "/sessions");
    }
    graph(sid, q = {}) {
        return this.request("GET", `/sessions/${sid}/graph`, undefined, {
            view: q.view,
            at: q.at,
        });
    }
    relations(sid, at) {
        return this.request("GET", `/sessions/${sid}/relations`, undefined, { at });
    }
    derivation(sid) {
        return this.request("GET", `/sessions/${sid}/derivation`);
    }
    inject(sid, events) {
        return this.request("POST", `/sessions/${sid}/events`, { events });
    }
    runStrategy(sid, req) {
        return this.request("POST", `/sessions/${sid}/strategy`, req);
    }
    decide(sid, p, a, r) {
        return this.request("GET", `/sessions/${sid}/decide`, undefined, { p, a, r });
    }
    duties(sid, filter = {}) {
        return this.request("GET", `/sessions/${sid}/duties`, undefined, {
            principal: filter.principal,
            state: filter.state,
        });
    }
    fork(sid, at) {
        return this.request("POST", `/sessions/${sid}/fork`, at === undefined ? {} : { at });
    }
    remove(sid) {
        return this.request("DELETE", `/sessions/${sid}`);
    }
}
