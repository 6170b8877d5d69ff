// Bootstrap: fetch everything, render, and route interactions through the
// API followed by a full refetch, so the view always reflects server state.

import { ApiClient, ApiError } from "./api.js";
import {
  initialViewState, selectCard, setCompressed, setKeywords, toggleSmoothing,
  toggleViewMode, type ViewState,
} from "./state.js";
import { render, renderErrorBanner, renderInlineError, type Handlers } from "./render.js";
import type { ServerState } from "./types.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8765";
const api = new ApiClient(baseUrl);
(window as unknown as { recapitApi: ApiClient }).recapitApi = api;

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

let viewState: ViewState | null = null;

export async function fetchAll(keywords: string[]): Promise<ServerState> {
  const [project, segments, series, scarfs, utterances, notes] =
    await Promise.all([
      api.getProject(), api.getSegments(), api.getSeries("attention"),
      api.getScarf(), api.getUtterances(), api.getNotes(),
    ]);
  const cards = await Promise.all(segments.map((s) => api.getCard(s.id)));
  const searchIds = keywords.length > 0 ? await api.search(keywords) : null;
  return { project, segments, cards, series, scarfs, utterances, notes, searchIds };
}

async function refresh(): Promise<void> {
  if (!root) return;
  try {
    const state = await fetchAll(viewState?.keywords ?? []);
    if (!viewState) viewState = initialViewState(state.project.duration);
    render(root, state, viewState, makeHandlers());
  } catch (err) {
    renderErrorBanner(root, err instanceof Error ? err.message : String(err));
  }
}

function mutate(fn: () => Promise<unknown>): void {
  fn()
    .then(() => refresh())
    .catch((err) => {
      // rejected mutation: inline message, state rolled back by refetching
      const message = err instanceof ApiError
        ? `${err.code}: ${err.message}`
        : String(err);
      if (root) renderInlineError(root, message);
      void refresh();
    });
}

function makeHandlers(): Handlers {
  return {
    toggleViewMode(segmentId) {
      if (viewState) viewState = toggleViewMode(viewState, segmentId);
      void refresh();
    },
    selectCard(segmentId) {
      if (viewState) viewState = selectCard(viewState, segmentId);
      void refresh();
    },
    setKeywords(raw) {
      if (viewState) viewState = setKeywords(viewState, raw.split(/[\s,]+/));
      void refresh();
    },
    setCompressed(on) {
      if (viewState) viewState = setCompressed(viewState, on);
      void refresh();
    },
    toggleSmoothing() {
      if (viewState) viewState = toggleSmoothing(viewState);
      void refresh();
    },
    editTitle(segmentId, title) {
      mutate(() => api.setTitle(segmentId, title));
    },
    addQuote(segmentId, utteranceId) {
      mutate(() => api.addQuote(segmentId, utteranceId));
    },
    addNote(segmentId, text) {
      mutate(() => api.addNote(segmentId, text));
    },
    setMark(segmentId, marked) {
      mutate(() => api.setMark(segmentId, marked));
    },
    addScreenshot(segmentId, imagePath, crop, overlay) {
      mutate(() => api.addScreenshot(segmentId, imagePath, crop, overlay));
    },
  };
}

void refresh();
