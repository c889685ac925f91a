// Typed client for the QA service's /v1 JSON API.

export interface AnswerHit {
  id: string;
  text: string;
  figure_refs: string[];
  score: number;
  rank: number;
}

export interface AskReply {
  lang_detected: string;
  answered: boolean;
  answers: AnswerHit[];
  message: string | null;
  interaction_id: string;
}

export interface AskOptions {
  k?: number;
  lang?: "en" | "fr";
  lesson?: number;
}

export type Vote = "up" | "down";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function toApiError(response: Response): Promise<ApiError> {
  let code = "unknown_error";
  let message = `service returned ${response.status}`;
  try {
    const body = await response.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body: keep the status-based message
  }
  return new ApiError(response.status, code, message);
}

export class ServiceClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async ask(question: string, options: AskOptions = {}): Promise<AskReply> {
    const body: Record<string, unknown> = { question };
    if (options.k !== undefined) body.top_k = options.k;
    if (options.lang !== undefined) body.lang = options.lang;
    if (options.lesson !== undefined) body.lesson = options.lesson;
    const response = await this.fetchFn(`${this.baseUrl}/v1/ask`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await toApiError(response);
    return (await response.json()) as AskReply;
  }

  async feedback(interactionId: string, vote: Vote): Promise<void> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/feedback`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ interaction_id: interactionId, vote }),
    });
    if (!response.ok) throw await toApiError(response);
  }
}
