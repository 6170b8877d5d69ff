// DOM rendering. The view is rebuilt from scratch on every change from
// (server state, view state); all mutations go through the handlers, which
// wrap the API client.

import type { Card, NoteEvent, Segment, ServerState } from "./types.js";
import { segmentViewMode, type ViewState } from "./state.js";
import {
  noteIcon, segmentViews, streamgraphLayers, timeToX, visibleCards,
} from "./viewmodel.js";
import { areaPath, rgbCss } from "./svg.js";
import { compositeHeatmap } from "./heatmap.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const CHART_W = 960;
const STREAM_H = 120;
const ROW_H = 16;
const BAND_TITLE_H = 18;

export interface Handlers {
  toggleViewMode(segmentId: string): void;
  selectCard(segmentId: string | null): void;
  setKeywords(raw: string): void;
  setCompressed(on: boolean): void;
  toggleSmoothing(): void;
  editTitle(segmentId: string, title: string): void;
  addQuote(segmentId: string, utteranceId: string): void;
  addNote(segmentId: string, text: string): void;
  setMark(segmentId: string, marked: boolean): void;
  addScreenshot(
    segmentId: string,
    imagePath: string,
    crop: [number, number, number, number],
    overlay: { kind: "attention" | "activity"; start: number; end: number } | null,
  ): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

export function renderErrorBanner(root: HTMLElement, message: string): void {
  root.replaceChildren(
    el("div", { class: "error-banner" },
      `Service unreachable or failing: ${message}`));
}

// -- streamgraph ---------------------------------------------------------------

function renderStreamgraph(state: ServerState, vs: ViewState): SVGElement {
  const svg = svgEl("svg", {
    width: String(CHART_W), height: String(STREAM_H),
    viewBox: `0 0 ${CHART_W} ${STREAM_H}`, class: "streamgraph",
  });
  const aoiColors: Record<string, [number, number, number]> = {};
  for (const aoi of state.project.aois) aoiColors[aoi.id] = aoi.color;
  const layers = streamgraphLayers(state.series, aoiColors, vs.smoothing);
  const bins = state.series.values.length;
  const xs: number[] = [];
  for (let i = 0; i < bins; i++) {
    const t = state.series.start + (i + 0.5) * state.series.bin_width;
    xs.push(timeToX(t, vs.visibleSpan, CHART_W));
  }
  for (const layer of layers) {
    const lower = layer.lower.map((v) => STREAM_H - v * STREAM_H);
    const upper = layer.upper.map((v) => STREAM_H - v * STREAM_H);
    const path = svgEl("path", {
      d: areaPath(xs, lower, upper),
      fill: rgbCss(layer.color, 0.8),
      stroke: "none",
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = layer.aoiId;
    path.append(title);
    svg.append(path);
  }
  return svg;
}

// -- timeline -------------------------------------------------------------------

function renderTimeline(
  state: ServerState, vs: ViewState, handlers: Handlers,
): SVGElement {
  const nRows = state.project.participants.length;
  const height = BAND_TITLE_H + nRows * ROW_H + 22;
  const svg = svgEl("svg", {
    width: String(CHART_W), height: String(height),
    viewBox: `0 0 ${CHART_W} ${height}`, class: "timeline",
  });

  const views = segmentViews(
    state.project, state.segments, state.utterances, state.scarfs, vs);
  for (const view of views) {
    const x0 = timeToX(view.segment.start, vs.visibleSpan, CHART_W);
    const x1 = timeToX(view.segment.end, vs.visibleSpan, CHART_W);
    const band = svgEl("rect", {
      x: x0.toFixed(1), y: "0", width: (x1 - x0).toFixed(1),
      height: String(height - 22),
      class: view.segment.marked ? "band marked" : "band",
    });
    band.addEventListener("click", () => handlers.selectCard(view.segment.id));
    svg.append(band);

    const title = svgEl("text", {
      x: (x0 + 4).toFixed(1), y: "13", class: "band-title",
    });
    title.textContent = `${view.segment.title || "(untitled)"} · ${view.mode}`;
    title.addEventListener("click", (ev) => {
      ev.stopPropagation();
      handlers.toggleViewMode(view.segment.id);
    });
    svg.append(title);

    view.rows.forEach((row, r) => {
      for (const block of row.blocks) {
        const bx0 = timeToX(block.start, vs.visibleSpan, CHART_W);
        const bx1 = timeToX(block.end, vs.visibleSpan, CHART_W);
        const rect = svgEl("rect", {
          x: bx0.toFixed(1), y: String(BAND_TITLE_H + r * ROW_H + 2),
          width: Math.max(0.5, bx1 - bx0).toFixed(1), height: String(ROW_H - 4),
          fill: rgbCss(block.color, 0.9),
        });
        if (block.label) {
          const tip = document.createElementNS(SVG_NS, "title");
          tip.textContent = block.label;
          rect.append(tip);
        }
        svg.append(rect);
      }
    });
  }

  // note-event icons under the rows, color per author, glyph per kind
  const authors = [...new Set(state.notes.map((n) => n.author))];
  for (const note of state.notes) {
    const x = timeToX(note.t, vs.visibleSpan, CHART_W);
    const icon = svgEl("text", {
      x: x.toFixed(1), y: String(height - 7),
      class: `note-icon author-${authors.indexOf(note.author) % 4}`,
    });
    icon.textContent = noteIcon(note.kind);
    const tip = document.createElementNS(SVG_NS, "title");
    tip.textContent = `${note.author}: +${note.added.length} −${note.removed.length}`;
    icon.append(tip);
    svg.append(icon);
  }
  return svg;
}

// -- card rail --------------------------------------------------------------------

function renderCardRail(
  state: ServerState, vs: ViewState, handlers: Handlers,
): HTMLElement {
  const rail = el("div", { class: "card-rail" });
  const cards = visibleCards(state.segments, state.cards, state.searchIds,
    vs.compressed);
  for (const card of cards) {
    const node = el("div", {
      class: card.segment_id === vs.selectedCardId ? "card selected" : "card",
    });
    node.append(
      el("h3", {}, card.title || "(untitled)"),
      el("span", { class: "mark" }, card.marked ? "★" : "☆"),
    );
    const quotes = el("ul", { class: "quotes" });
    for (const q of card.quotes) quotes.append(el("li", {}, q.rendered));
    node.append(quotes);
    const notes = el("ul", { class: "notes" });
    for (const n of card.notes) notes.append(el("li", {}, n));
    node.append(notes);
    if (card.screenshots.length > 0) {
      node.append(el("p", { class: "shots" },
        `${card.screenshots.length} screenshot(s)`));
    }
    node.addEventListener("click", () => handlers.selectCard(card.segment_id));
    rail.append(node);
  }
  if (cards.length === 0) {
    rail.append(el("p", { class: "empty" }, "No cards match the current view."));
  }
  return rail;
}

// -- authoring panel -----------------------------------------------------------------

function renderAuthoringPanel(
  state: ServerState, vs: ViewState, handlers: Handlers,
): HTMLElement {
  const panel = el("div", { class: "authoring" });
  const segment = state.segments.find((s) => s.id === vs.selectedCardId);
  if (!segment) {
    panel.append(el("p", { class: "empty" }, "Select a topic card to author it."));
    return panel;
  }
  const card = state.cards.find((c) => c.segment_id === segment.id);

  panel.append(el("h2", {}, `Card ${segment.id}`));

  // title edit: one POST on commit
  const titleInput = el("input", { value: segment.title, class: "title-edit" });
  const titleBtn = el("button", {}, "Rename");
  titleBtn.addEventListener("click", () =>
    handlers.editTitle(segment.id, (titleInput as HTMLInputElement).value));
  panel.append(el("div", { class: "row" }, titleInput, titleBtn));

  // mark toggle
  const markBtn = el("button", {}, segment.marked ? "Unmark" : "Mark");
  markBtn.addEventListener("click", () =>
    handlers.setMark(segment.id, !segment.marked));
  panel.append(el("div", { class: "row" }, markBtn));

  // quote picker: utterances whose start lies in the segment
  const picker = el("select", { class: "quote-picker" });
  const inSegment = state.utterances.filter(
    (u) => u.start >= segment.start && u.start < segment.end);
  for (const u of inSegment) {
    picker.append(el("option", { value: u.id },
      `${u.id} [${u.start.toFixed(1)}s] ${u.text.slice(0, 60)}`));
  }
  const quoteBtn = el("button", {}, "Add quote");
  quoteBtn.addEventListener("click", () => {
    const value = (picker as HTMLSelectElement).value;
    if (value) handlers.addQuote(segment.id, value);
  });
  panel.append(el("div", { class: "row" }, picker, quoteBtn));

  // note entry
  const noteInput = el("input", { placeholder: "observation…", class: "note-entry" });
  const noteBtn = el("button", {}, "Add note");
  noteBtn.addEventListener("click", () => {
    const text = (noteInput as HTMLInputElement).value.trim();
    if (text) handlers.addNote(segment.id, text);
  });
  panel.append(el("div", { class: "row" }, noteInput, noteBtn));

  // screenshot crop over the working area (heatmap proxy), overlay toggle
  panel.append(renderCropTool(state, segment, handlers));

  if (card) {
    const log = el("ul", { class: "card-log" });
    for (const q of card.quotes) log.append(el("li", {}, q.rendered));
    for (const n of card.notes) log.append(el("li", {}, `note: ${n}`));
    panel.append(log);
  }
  return panel;
}

function renderCropTool(
  state: ServerState, segment: Segment, handlers: Handlers,
): HTMLElement {
  const box = el("div", { class: "crop-tool" });
  const canvas = el("canvas", { width: "256", height: "192" });
  const overlayToggle = el("input", { type: "checkbox", checked: "checked" });
  const pathInput = el("input", {
    value: "frames/frame_0000.pgm", class: "image-path",
  });
  const status = el("span", { class: "crop-status" }, "drag to crop");

  let rect: [number, number, number, number] | null = null;
  let dragStart: [number, number] | null = null;
  const ctx = (canvas as HTMLCanvasElement).getContext("2d");

  function paint(): void {
    if (!ctx) return;
    ctx.fillStyle = "#222";
    ctx.fillRect(0, 0, 256, 192);
    if (rect) {
      ctx.strokeStyle = "#fff";
      ctx.strokeRect(rect[0], rect[1], rect[2], rect[3]);
    }
  }
  paint();

  canvas.addEventListener("mousedown", (ev) => {
    const me = ev as MouseEvent;
    dragStart = [me.offsetX, me.offsetY];
  });
  canvas.addEventListener("mouseup", (ev) => {
    const me = ev as MouseEvent;
    if (!dragStart) return;
    const x = Math.min(dragStart[0], me.offsetX);
    const y = Math.min(dragStart[1], me.offsetY);
    const w = Math.abs(me.offsetX - dragStart[0]);
    const h = Math.abs(me.offsetY - dragStart[1]);
    rect = [x, y, Math.max(1, w), Math.max(1, h)];
    dragStart = null;
    status.textContent = `crop ${rect.join(",")}`;
    paint();
  });

  const sendBtn = el("button", {}, "Insert screenshot");
  sendBtn.addEventListener("click", () => {
    if (!rect) return;
    // canvas (256×192) maps onto the 64×48 fixture frames: scale by 1/4
    const crop: [number, number, number, number] = [
      Math.floor(rect[0] / 4), Math.floor(rect[1] / 4),
      Math.max(1, Math.floor(rect[2] / 4)), Math.max(1, Math.floor(rect[3] / 4)),
    ];
    const overlay = (overlayToggle as HTMLInputElement).checked
      ? { kind: "attention" as const, start: segment.start, end: segment.end }
      : null;
    handlers.addScreenshot(
      segment.id, (pathInput as HTMLInputElement).value, crop, overlay);
  });

  box.append(
    el("div", { class: "row" }, pathInput),
    canvas,
    el("div", { class: "row" },
      el("label", {}, overlayToggle, " heatmap overlay"), sendBtn, status),
  );

  // paint the segment's attention heatmap as the crop background
  void paintHeatmap(state, segment, ctx);
  return box;
}

async function paintHeatmap(
  state: ServerState, segment: Segment, ctx: CanvasRenderingContext2D | null,
): Promise<void> {
  if (!ctx) return;
  try {
    const api = (window as unknown as { recapitApi?: import("./api.js").ApiClient }).recapitApi;
    if (!api) return;
    const grid = await api.getHeatmap(segment.id, "attention");
    const pixels = compositeHeatmap(grid, [255, 96, 32]);
    const image = new ImageData(
      new Uint8ClampedArray(pixels), grid.width, grid.height);
    const off = document.createElement("canvas");
    off.width = grid.width;
    off.height = grid.height;
    off.getContext("2d")?.putImageData(image, 0, 0);
    ctx.drawImage(off, 0, 0, 256, 192);
  } catch {
    // heatmap is a nice-to-have in the crop tool; ignore failures
  }
}

// -- top bar -----------------------------------------------------------------------

function renderControls(vs: ViewState, handlers: Handlers): HTMLElement {
  const bar = el("div", { class: "controls" });
  const search = el("input", {
    placeholder: "keywords…", value: vs.keywords.join(" "), class: "search",
  });
  search.addEventListener("change", () =>
    handlers.setKeywords((search as HTMLInputElement).value));

  const compress = el("input", { type: "checkbox" });
  if (vs.compressed) compress.setAttribute("checked", "checked");
  compress.addEventListener("change", () =>
    handlers.setCompressed((compress as HTMLInputElement).checked));

  const smooth = el("input", { type: "checkbox" });
  if (vs.smoothing) smooth.setAttribute("checked", "checked");
  smooth.addEventListener("change", () => handlers.toggleSmoothing());

  bar.append(
    search,
    el("label", {}, compress, " compress to marked"),
    el("label", {}, smooth, " smooth streamgraph"),
  );
  return bar;
}

// -- entry ---------------------------------------------------------------------------

export function render(
  root: HTMLElement, state: ServerState, vs: ViewState, handlers: Handlers,
): void {
  root.replaceChildren(
    el("h1", {}, state.project.title),
    renderControls(vs, handlers),
    renderStreamgraph(state, vs),
    renderTimeline(state, vs, handlers),
    el("div", { class: "main" },
      renderCardRail(state, vs, handlers),
      renderAuthoringPanel(state, vs, handlers)),
  );
}

export function renderInlineError(root: HTMLElement, message: string): void {
  const existing = root.querySelector(".inline-error");
  existing?.remove();
  const note = el("div", { class: "inline-error" }, message);
  root.prepend(note);
  setTimeout(() => note.remove(), 6000);
}
