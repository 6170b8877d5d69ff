import assert from "node:assert/strict";
import { test } from "node:test";

import {
  movingAverage, noteIcon, scarfRows, streamgraphLayers, timeToX,
  utteranceRows, visibleCards,
} from "../src/viewmodel.js";
import { initialViewState, segmentViewMode, toggleViewMode } from "../src/state.js";
import { areaPath, rgbCss } from "../src/svg.js";
import { compositeHeatmap } from "../src/heatmap.js";
import type { Card, Project, Segment, Series } from "../src/types.js";

const project: Project = {
  id: "w", title: "W", session_start: "2025-03-14T09:00:00+00:00", duration: 100,
  participants: [
    { id: "p1", display_name: "A", role_id: "r1", color: [10, 20, 30] },
    { id: "p2", display_name: "B", role_id: "r2", color: [40, 50, 60] },
  ],
  roles: [
    { id: "r1", label: "Domain", color: [200, 0, 0] },
    { id: "r2", label: "Vis", color: [0, 0, 200] },
  ],
  aois: [
    { id: "a1", label: "L", polygon: [[0, 0], [1, 0], [1, 1]], color: [1, 2, 3] },
    { id: "a2", label: "R", polygon: [[0, 0], [1, 0], [0, 1]], color: [4, 5, 6] },
  ],
  authoring: { version: 0 },
};

function seg(id: string, start: number, end: number, marked = false): Segment {
  return { id, start, end, title: id, origin: "initial", marked };
}

function card(segmentId: string, marked = false): Card {
  return { segment_id: segmentId, title: segmentId, marked, quotes: [], notes: [], screenshots: [] };
}

test("movingAverage shrinks the window at edges", () => {
  const out = movingAverage([0, 0, 5, 0, 0], 5);
  assert.equal(out[2], 1); // full window
  assert.equal(out[0], 5 / 3); // boundary window of 3
  const identity = movingAverage([1, 2, 3], 1);
  assert.deepEqual(identity, [1, 2, 3]);
});

test("streamgraph layers stack from a zero baseline", () => {
  const series: Series = {
    bin_width: 1, start: 0, aoi_ids: ["a1", "a2"],
    values: [[0.2, 0.3], [0.5, 0.25]],
  };
  const layers = streamgraphLayers(series, { a1: [1, 2, 3], a2: [4, 5, 6] }, false);
  assert.equal(layers.length, 2);
  assert.deepEqual(layers[0].lower, [0, 0]);
  assert.deepEqual(layers[0].upper, [0.2, 0.5]);
  assert.deepEqual(layers[1].lower, [0.2, 0.5]);
  assert.deepEqual(layers[1].upper, [0.5, 0.75]);
});

test("smoothing is render-side only and toggleable", () => {
  const series: Series = {
    bin_width: 1, start: 0, aoi_ids: ["a1"],
    values: [[0], [0], [1], [0], [0]],
  };
  const raw = streamgraphLayers(series, {}, false);
  const smooth = streamgraphLayers(series, {}, true);
  assert.equal(raw[0].upper[2], 1);
  assert.ok(smooth[0].upper[2] < 1);
  assert.deepEqual(series.values[2], [1]); // source data untouched
});

test("utterance rows are per participant, colored by role", () => {
  const rows = utteranceRows(project, seg("s1", 0, 50), [
    { id: "u1", speaker: "p1", start: 5, end: 10, text: "hi" },
    { id: "u2", speaker: "p2", start: 20, end: 60, text: "yo" },
  ]);
  assert.equal(rows.length, 2);
  assert.equal(rows[0].blocks.length, 1);
  assert.deepEqual(rows[0].blocks[0].color, [200, 0, 0]);
  // clipped to the segment
  assert.equal(rows[1].blocks[0].end, 50);
});

test("scarf rows color by AOI and drop off-AOI gaps", () => {
  const rows = scarfRows(project, seg("s1", 0, 50), {
    p1: [{ start: 0, end: 10, aoi: "a1" }, { start: 10, end: 20, aoi: null },
         { start: 20, end: 30, aoi: "a2" }],
    p2: [{ start: 0, end: 50, aoi: null }],
  });
  assert.equal(rows[0].blocks.length, 2);
  assert.deepEqual(rows[0].blocks[0].color, [1, 2, 3]);
  assert.equal(rows[1].blocks.length, 0);
});

test("view mode toggles per segment", () => {
  let vs = initialViewState(100);
  assert.equal(segmentViewMode(vs, "s1"), "utterances");
  vs = toggleViewMode(vs, "s1");
  assert.equal(segmentViewMode(vs, "s1"), "scarf");
  assert.equal(segmentViewMode(vs, "s2"), "utterances");
  vs = toggleViewMode(vs, "s1");
  assert.equal(segmentViewMode(vs, "s1"), "utterances");
});

test("note icons distinguish kinds", () => {
  assert.equal(noteIcon("added"), "+");
  assert.equal(noteIcon("removed"), "−");
  assert.equal(noteIcon("mixed"), "±");
});

test("visibleCards honors search filter, compression, and temporal order", () => {
  const segments = [seg("s2", 50, 100, true), seg("s1", 0, 50, false)];
  const cards = [card("s1"), card("s2", true)];
  const all = visibleCards(segments, cards, null, false);
  assert.deepEqual(all.map((c) => c.segment_id), ["s1", "s2"]);
  const compressed = visibleCards(segments, cards, null, true);
  assert.deepEqual(compressed.map((c) => c.segment_id), ["s2"]);
  const searched = visibleCards(segments, cards, ["s1"], false);
  assert.deepEqual(searched.map((c) => c.segment_id), ["s1"]);
  const both = visibleCards(segments, cards, ["s1"], true);
  assert.deepEqual(both, []);
});

test("timeToX maps the visible span onto pixels", () => {
  assert.equal(timeToX(0, [0, 100], 960), 0);
  assert.equal(timeToX(50, [0, 100], 960), 480);
  assert.equal(timeToX(75, [50, 100], 960), 480);
});

test("areaPath closes the band", () => {
  const d = areaPath([0, 10], [5, 5], [1, 2]);
  assert.ok(d.startsWith("M0.00,1.00"));
  assert.ok(d.endsWith("Z"));
  assert.ok(d.includes("L10.00,2.00"));
});

test("rgbCss formats with and without alpha", () => {
  assert.equal(rgbCss([1, 2, 3]), "rgb(1,2,3)");
  assert.equal(rgbCss([1, 2, 3], 0.5), "rgba(1,2,3,0.5)");
});

test("compositeHeatmap tints and maps value to alpha", () => {
  const pixels = compositeHeatmap(
    { width: 2, height: 1, span: { start: 0, end: 1 }, values: [0, 1] },
    [255, 96, 32]);
  assert.equal(pixels.length, 8);
  assert.equal(pixels[3], 0);      // zero heat -> transparent
  assert.equal(pixels[4], 255);    // tint color
  assert.equal(pixels[7], 200);    // full heat -> max alpha
});
