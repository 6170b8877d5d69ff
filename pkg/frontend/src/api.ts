// Typed client for the project service. Every mutation is one POST; the
// UI never holds authoritative state.

import type {
  Card, HeatmapGrid, NoteEvent, Project, Scarfs, Segment, Series, Utterance,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface MutationAck {
  ok: boolean;
  version: number;
}

async function parseError(resp: Response): Promise<ApiError> {
  try {
    const body = await resp.json();
    return new ApiError(resp.status, body.code ?? "io", body.message ?? resp.statusText);
  } catch {
    return new ApiError(resp.status, "io", resp.statusText);
  }
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  private async post(path: string, body: Record<string, unknown>): Promise<MutationAck> {
    const resp = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as MutationAck;
  }

  getProject(): Promise<Project> {
    return this.get("/project");
  }

  getSegments(): Promise<Segment[]> {
    return this.get("/segments");
  }

  getCard(segmentId: string): Promise<Card> {
    return this.get(`/cards/${segmentId}`);
  }

  getSeries(kind: "attention" | "activity"): Promise<Series> {
    return this.get(`/series?kind=${kind}`);
  }

  getScarf(): Promise<Scarfs> {
    return this.get("/scarf");
  }

  getUtterances(from?: number, to?: number): Promise<Utterance[]> {
    const params = new URLSearchParams();
    if (from !== undefined) params.set("from", String(from));
    if (to !== undefined) params.set("to", String(to));
    const qs = params.toString();
    return this.get(`/utterances${qs ? "?" + qs : ""}`);
  }

  getNotes(): Promise<NoteEvent[]> {
    return this.get("/notes");
  }

  getHeatmap(segmentId: string, kind: "attention" | "activity"): Promise<HeatmapGrid> {
    return this.get(`/heatmap?segment=${encodeURIComponent(segmentId)}&kind=${kind}`);
  }

  search(keywords: string[]): Promise<string[]> {
    const q = encodeURIComponent(keywords.join(" "));
    return this.get<{ ids: string[] }>(`/search?q=${q}`).then((r) => r.ids);
  }

  setTitle(segmentId: string, title: string, baseVersion?: number): Promise<MutationAck> {
    return this.post(`/segments/${segmentId}/title`, withVersion({ title }, baseVersion));
  }

  addQuote(segmentId: string, utteranceId: string, baseVersion?: number): Promise<MutationAck> {
    return this.post(`/cards/${segmentId}/quotes`,
      withVersion({ utterance_id: utteranceId }, baseVersion));
  }

  addNote(segmentId: string, text: string, baseVersion?: number): Promise<MutationAck> {
    return this.post(`/cards/${segmentId}/notes`, withVersion({ text }, baseVersion));
  }

  setMark(segmentId: string, marked: boolean, baseVersion?: number): Promise<MutationAck> {
    return this.post(`/cards/${segmentId}/mark`, withVersion({ marked }, baseVersion));
  }

  addScreenshot(
    segmentId: string,
    imagePath: string,
    crop: [number, number, number, number],
    overlay: { kind: string; start: number; end: number } | null,
    baseVersion?: number,
  ): Promise<MutationAck> {
    return this.post(`/cards/${segmentId}/screenshots`, withVersion({
      image_path: imagePath,
      crop,
      heatmap_overlay: overlay,
    }, baseVersion));
  }
}

function withVersion(
  body: Record<string, unknown>,
  baseVersion: number | undefined,
): Record<string, unknown> {
  return baseVersion === undefined ? body : { ...body, base_version: baseVersion };
}
