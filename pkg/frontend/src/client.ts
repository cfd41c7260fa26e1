// REST + WebSocket client for the reasonshield live service.

import {
  SessionInfo,
  StepRecord,
  StreamMessage,
  TheoryView,
  VerdictResponse,
} from "./types.js";

export interface CreateSessionOptions {
  mode?: "live-human" | "batch-oracle";
  constellation?: string;
  seed?: number;
  theory?: unknown;
  verdict_timeout?: number;
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function expectOk(response: Response): Promise<any> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail = typeof body.detail === "string" ? body.detail : response.statusText;
    throw new ServiceError(response.status, detail);
  }
  return body;
}

export class SessionClient {
  private socket: WebSocket | null = null;

  constructor(
    private baseUrl: string,
    private fetchImpl: typeof fetch = fetch,
    private socketFactory: (url: string) => WebSocket = (url) => new WebSocket(url),
  ) {}

  async createSession(options: CreateSessionOptions = {}): Promise<SessionInfo> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(options),
    });
    return expectOk(response);
  }

  async step(sessionId: string): Promise<StepRecord> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/step`, {
      method: "POST",
    });
    return expectOk(response);
  }

  async submitAccusation(
    sessionId: string,
    obligation: string,
    reason: string,
  ): Promise<VerdictResponse> {
    return this.submitVerdict(sessionId, { obligation, reason });
  }

  async submitNoAccusation(sessionId: string): Promise<VerdictResponse> {
    return this.submitVerdict(sessionId, null);
  }

  private async submitVerdict(
    sessionId: string,
    accusation: { obligation: string; reason: string } | null,
  ): Promise<VerdictResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/verdict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ accusation }),
    });
    return expectOk(response);
  }

  async theory(sessionId: string): Promise<{ revision: number; theory: TheoryView }> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/theory`);
    return expectOk(response);
  }

  openStream(sessionId: string, onMessage: (message: StreamMessage) => void): () => void {
    const wsBase = this.baseUrl.replace(/^http/, "ws");
    const socket = this.socketFactory(`${wsBase}/sessions/${sessionId}/stream`);
    socket.onmessage = (event) => {
      try {
        onMessage(JSON.parse(event.data as string) as StreamMessage);
      } catch {
        // Non-JSON frames are dropped; the REST responses still carry
        // everything the view needs.
      }
    };
    this.socket = socket;
    return () => socket.close();
  }

  closeStream(): void {
    this.socket?.close();
    this.socket = null;
  }
}
