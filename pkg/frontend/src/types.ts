// Wire types mirroring the HTTP API payloads.

export type RGB = [number, number, number];

export interface Participant {
  id: string;
  display_name: string;
  role_id: string;
  color: RGB;
}

export interface Role {
  id: string;
  label: string;
  color: RGB;
}

export interface Aoi {
  id: string;
  label: string;
  polygon: [number, number][];
  color: RGB;
}

export interface Project {
  id: string;
  title: string;
  session_start: string;
  duration: number;
  participants: Participant[];
  roles: Role[];
  aois: Aoi[];
  authoring: { version: number };
}

export interface Segment {
  id: string;
  start: number;
  end: number;
  title: string;
  origin: "initial" | "refined";
  marked: boolean;
}

export interface Quote {
  utterance_id: string;
  rendered: string;
}

export interface ScreenshotRef {
  image_path: string;
  crop: [number, number, number, number];
  heatmap_overlay: { kind: string; start: number; end: number } | null;
}

export interface Card {
  segment_id: string;
  title: string;
  marked: boolean;
  quotes: Quote[];
  notes: string[];
  screenshots: ScreenshotRef[];
}

export interface Series {
  bin_width: number;
  start: number;
  aoi_ids: string[];
  values: number[][];
}

export interface ScarfPiece {
  start: number;
  end: number;
  aoi: string | null;
}

export type Scarfs = Record<string, ScarfPiece[]>;

export interface Utterance {
  id: string;
  speaker: string;
  start: number;
  end: number;
  text: string;
}

export interface NoteEvent {
  author: string;
  t: number;
  kind: "added" | "removed" | "mixed";
  added: string[];
  removed: string[];
}

export interface HeatmapGrid {
  width: number;
  height: number;
  span: { start: number; end: number };
  values: number[];
}

export interface ServerState {
  project: Project;
  segments: Segment[];
  cards: Card[];
  series: Series;
  scarfs: Scarfs;
  utterances: Utterance[];
  notes: NoteEvent[];
  searchIds: string[] | null; // null = no active keyword filter
}
