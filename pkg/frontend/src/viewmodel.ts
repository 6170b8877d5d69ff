// Pure view-model builders: everything here maps (server state, view state)
// to plain renderable structures, with no DOM and no fetches.

import type {
  Card, NoteEvent, Project, RGB, ScarfPiece, Scarfs, Segment, Series,
  Utterance,
} from "./types.js";
import { segmentViewMode, type ViewState } from "./state.js";

export const SMOOTHING_WINDOW = 5;

// -- streamgraph ------------------------------------------------------------

export interface StreamLayer {
  aoiId: string;
  color: RGB;
  lower: number[];
  upper: number[];
}

export function movingAverage(column: number[], window: number): number[] {
  const half = Math.floor(window / 2);
  const out = new Array<number>(column.length);
  for (let i = 0; i < column.length; i++) {
    const lo = Math.max(0, i - half);
    const hi = Math.min(column.length - 1, i + half);
    let sum = 0;
    for (let j = lo; j <= hi; j++) sum += column[j];
    out[i] = sum / (hi - lo + 1);
  }
  return out;
}

/** Stacked zero-baseline layers, one per AOI, optionally smoothed
 * render-side with a moving average over SMOOTHING_WINDOW bins. */
export function streamgraphLayers(
  series: Series,
  aoiColors: Record<string, RGB>,
  smoothing: boolean,
): StreamLayer[] {
  const bins = series.values.length;
  const columns = series.aoi_ids.map((_, j) => {
    const col = series.values.map((row) => row[j]);
    return smoothing ? movingAverage(col, SMOOTHING_WINDOW) : col;
  });
  const layers: StreamLayer[] = [];
  let base = new Array<number>(bins).fill(0);
  series.aoi_ids.forEach((aoiId, j) => {
    const upper = base.map((b, i) => b + columns[j][i]);
    layers.push({
      aoiId,
      color: aoiColors[aoiId] ?? [128, 128, 128],
      lower: base,
      upper,
    });
    base = upper;
  });
  return layers;
}

// -- timeline ---------------------------------------------------------------

export interface TimelineBlock {
  start: number;
  end: number;
  color: RGB;
  label: string | null;
}

export interface TimelineRow {
  participantId: string;
  blocks: TimelineBlock[];
}

export interface SegmentView {
  segment: Segment;
  mode: "utterances" | "scarf";
  rows: TimelineRow[];
}

function clipPiece(start: number, end: number, seg: Segment): [number, number] | null {
  const lo = Math.max(start, seg.start);
  const hi = Math.min(end, seg.end);
  return lo < hi ? [lo, hi] : null;
}

/** Utterance Gantt rows, one per participant, blocks colored by the
 * speaker's role. */
export function utteranceRows(
  project: Project,
  segment: Segment,
  utterances: Utterance[],
): TimelineRow[] {
  const roleColor: Record<string, RGB> = {};
  for (const role of project.roles) roleColor[role.id] = role.color;
  const roleOf: Record<string, string> = {};
  for (const p of project.participants) roleOf[p.id] = p.role_id;

  return project.participants.map((p) => {
    const blocks: TimelineBlock[] = [];
    for (const u of utterances) {
      if (u.speaker !== p.id) continue;
      const clipped = clipPiece(u.start, u.end, segment);
      if (!clipped) continue;
      blocks.push({
        start: clipped[0],
        end: clipped[1],
        color: roleColor[roleOf[p.id]] ?? [120, 120, 120],
        label: u.text,
      });
    }
    return { participantId: p.id, blocks };
  });
}

/** Scarf rows, one per participant, pieces colored by the fixated AOI
 * (off-AOI gaps are transparent and omitted). */
export function scarfRows(
  project: Project,
  segment: Segment,
  scarfs: Scarfs,
): TimelineRow[] {
  const aoiColor: Record<string, RGB> = {};
  for (const aoi of project.aois) aoiColor[aoi.id] = aoi.color;

  return project.participants.map((p) => {
    const pieces: ScarfPiece[] = scarfs[p.id] ?? [];
    const blocks: TimelineBlock[] = [];
    for (const piece of pieces) {
      if (piece.aoi === null) continue;
      const clipped = clipPiece(piece.start, piece.end, segment);
      if (!clipped) continue;
      blocks.push({
        start: clipped[0],
        end: clipped[1],
        color: aoiColor[piece.aoi] ?? [120, 120, 120],
        label: piece.aoi,
      });
    }
    return { participantId: p.id, blocks };
  });
}

export function segmentViews(
  project: Project,
  segments: Segment[],
  utterances: Utterance[],
  scarfs: Scarfs,
  vs: ViewState,
): SegmentView[] {
  return segments.map((segment) => {
    const mode = segmentViewMode(vs, segment.id);
    const rows = mode === "scarf"
      ? scarfRows(project, segment, scarfs)
      : utteranceRows(project, segment, utterances);
    return { segment, mode, rows };
  });
}

// -- note icons ---------------------------------------------------------------

export function noteIcon(kind: NoteEvent["kind"]): string {
  switch (kind) {
    case "added":
      return "+";
    case "removed":
      return "−";
    case "mixed":
      return "±";
  }
}

// -- card rail ------------------------------------------------------------------

/** Cards visible in the rail: keyword filter first (ids from GET /search),
 * then compression (marked only), always in temporal order. */
export function visibleCards(
  segments: Segment[],
  cards: Card[],
  searchIds: string[] | null,
  compressed: boolean,
): Card[] {
  const bySegment: Record<string, Card> = {};
  for (const c of cards) bySegment[c.segment_id] = c;
  const ordered = [...segments].sort((a, b) => a.start - b.start);
  const out: Card[] = [];
  for (const seg of ordered) {
    if (searchIds !== null && !searchIds.includes(seg.id)) continue;
    if (compressed && !seg.marked) continue;
    const card = bySegment[seg.id];
    if (card) out.push(card);
  }
  return out;
}

// -- scales ------------------------------------------------------------------------

export function timeToX(
  t: number,
  visible: [number, number],
  width: number,
): number {
  const [lo, hi] = visible;
  return ((t - lo) / (hi - lo)) * width;
}
