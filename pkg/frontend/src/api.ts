/** Thin typed client over the server's JSON and WebSocket endpoints.
 *
 * Every mutation the UI performs goes through this module, so a test can
 * substitute the transport and observe exactly which requests were made.
 */
import type {
  ChooseResponse,
  DefineResponse,
  RuleJson,
  StepFrame,
  UtteranceResponse,
  WorldJson,
} from "./types.js";

export interface TransportResponse {
  status: number;
  body: unknown;
}

export interface Transport {
  request(
    method: string,
    path: string,
    body?: unknown,
    headers?: Record<string, string>,
  ): Promise<TransportResponse>;
  /** Opens a step-frame socket; returns a close function. */
  openSocket(path: string, onFrame: (frame: StepFrame) => void): () => void;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: Record<string, unknown>,
  ) {
    super(typeof body.error === "string" ? body.error : `HTTP ${status}`);
  }
}

export function httpTransport(base = ""): Transport {
  return {
    async request(method, path, body, headers) {
      const resp = await fetch(base + path, {
        method,
        headers: { "Content-Type": "application/json", ...headers },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
      return { status: resp.status, body: await resp.json() };
    },
    openSocket(path, onFrame) {
      const wsBase = (base || window.location.origin).replace(/^http/, "ws");
      const socket = new WebSocket(wsBase + path);
      socket.onmessage = (event) => onFrame(JSON.parse(event.data));
      return () => socket.close();
    },
  };
}

export class Client {
  constructor(private transport: Transport) {}

  private async call<T>(
    method: string,
    path: string,
    body?: unknown,
    headers?: Record<string, string>,
  ): Promise<T> {
    const resp = await this.transport.request(method, path, body, headers);
    if (resp.status >= 400) {
      throw new ApiError(resp.status, resp.body as Record<string, unknown>);
    }
    return resp.body as T;
  }

  createSession(worldId: string, user: string) {
    return this.call<{ session_id: string; world: WorldJson }>(
      "POST",
      "/api/session",
      { world_id: worldId, user },
    );
  }

  utterance(session: string, text: string) {
    return this.call<UtteranceResponse>("POST", "/api/utterance", {
      session,
      text,
    });
  }

  choose(session: string, candidateId: string, idempotencyKey?: string) {
    const body: Record<string, unknown> = {
      session,
      candidate_id: candidateId,
    };
    if (idempotencyKey !== undefined) body.idempotency_key = idempotencyKey;
    return this.call<ChooseResponse>("POST", "/api/choose", body);
  }

  define(session: string, utterance: string, definition: string) {
    return this.call<DefineResponse>("POST", "/api/define", {
      session,
      utterance,
      definition,
    });
  }

  async rules(): Promise<RuleJson[]> {
    const resp = await this.call<{ rules: RuleJson[] }>("GET", "/api/rules");
    return resp.rules;
  }

  deleteRule(ruleId: string, user: string) {
    return this.call<{ ok: boolean }>("DELETE", `/api/rules/${ruleId}`,
      undefined, { "X-User": user });
  }

  async world(session: string): Promise<WorldJson> {
    const resp = await this.call<{ world: WorldJson }>(
      "GET",
      `/api/session/${session}/world`,
    );
    return resp.world;
  }

  subscribe(session: string, onFrame: (frame: StepFrame) => void) {
    return this.transport.openSocket(`/api/ws/${session}`, onFrame);
  }
}
