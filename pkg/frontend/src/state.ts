// View state and its pure reducers. The rendered view is a function of
// (server state, view state) and nothing else, so reloading reproduces it.

export type SegmentViewMode = "utterances" | "scarf";

export interface ViewState {
  visibleSpan: [number, number];
  viewModes: Record<string, SegmentViewMode>; // default is "utterances"
  keywords: string[];
  compressed: boolean;
  selectedCardId: string | null;
  smoothing: boolean;
}

export function initialViewState(duration: number): ViewState {
  return {
    visibleSpan: [0, duration],
    viewModes: {},
    keywords: [],
    compressed: false,
    selectedCardId: null,
    smoothing: true,
  };
}

export function segmentViewMode(vs: ViewState, segmentId: string): SegmentViewMode {
  return vs.viewModes[segmentId] ?? "utterances";
}

export function toggleViewMode(vs: ViewState, segmentId: string): ViewState {
  const next: SegmentViewMode =
    segmentViewMode(vs, segmentId) === "utterances" ? "scarf" : "utterances";
  return { ...vs, viewModes: { ...vs.viewModes, [segmentId]: next } };
}

export function setKeywords(vs: ViewState, keywords: string[]): ViewState {
  return { ...vs, keywords: keywords.filter((k) => k.trim().length > 0) };
}

export function setCompressed(vs: ViewState, compressed: boolean): ViewState {
  return { ...vs, compressed };
}

export function selectCard(vs: ViewState, segmentId: string | null): ViewState {
  return { ...vs, selectedCardId: segmentId };
}

export function setVisibleSpan(vs: ViewState, span: [number, number]): ViewState {
  const [lo, hi] = span;
  if (!(lo < hi)) return vs;
  return { ...vs, visibleSpan: [lo, hi] };
}

export function toggleSmoothing(vs: ViewState): ViewState {
  return { ...vs, smoothing: !vs.smoothing };
}
