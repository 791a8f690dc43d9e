// Thin HTTP client for the game service. One transport retry on network
// failure; HTTP error bodies surface as ApiError for inline display.

import type {
  BubblePayload,
  EventRecord,
  HeatmapPayload,
  SessionSnapshot,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, detail);
}

export class ApiClient {
  constructor(public baseUrl: string = "") {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path, init);
    } catch (err) {
      // transport failure: retry once before giving up
      resp = await fetch(this.baseUrl + path, init);
    }
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }

  async listScenarios(): Promise<string[]> {
    const body = (await this.request("/api/scenarios")) as { scenarios: string[] };
    return body.scenarios;
  }

  async startSession(
    scenario: string,
    mode = "ar_bubbles",
    seed = 0,
    timeScale?: number,
  ): Promise<SessionSnapshot> {
    const payload: Record<string, unknown> = { scenario, mode, seed };
    if (timeScale !== undefined) payload.time_scale = timeScale;
    return (await this.request("/api/session", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    })) as SessionSnapshot;
  }

  async getSession(sessionId: string): Promise<SessionSnapshot> {
    return (await this.request(`/api/session/${sessionId}`)) as SessionSnapshot;
  }

  async getBubbles(sessionId: string): Promise<BubblePayload[]> {
    const body = (await this.request(`/api/bubbles/${sessionId}`)) as {
      bubbles: BubblePayload[];
    };
    return body.bubbles;
  }

  async getEvents(
    sessionId: string,
    since: number,
    waitS = 0,
  ): Promise<{ events: EventRecord[]; ended: boolean }> {
    return (await this.request(
      `/api/events/${sessionId}?since=${since}&wait=${waitS}`,
    )) as { events: EventRecord[]; ended: boolean };
  }

  async getHeatmap(sessionId: string, height: string): Promise<HeatmapPayload> {
    return (await this.request(
      `/api/heatmap/${sessionId}?height=${height}`,
    )) as HeatmapPayload;
  }

  async sendAction(
    sessionId: string,
    target: string,
    verb: string,
    args: Record<string, unknown> = {},
  ): Promise<Record<string, unknown>> {
    return (await this.request("/api/action", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session_id: sessionId, target, verb, args }),
    })) as Record<string, unknown>;
  }
}
