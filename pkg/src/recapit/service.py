"""HTTP service exposing project data and authoring mutations.

Plain-HTTP JSON endpoints over the standard library server. Reads serve the
in-memory snapshot; writes are serialized through one lock, applied as
cards-module mutations, and acknowledged only after the project file has
been atomically persisted, so a kill-and-restart loses no acknowledged
mutation.

Read endpoints
    GET /project /segments /scarf /notes
    GET /series?kind=attention|activity
    GET /utterances?from=&to=
    GET /heatmap?segment=<id>&kind=attention|activity
    GET /search?q=<keywords>
Write endpoints (JSON bodies; optional base_version enables conflict checks)
    POST /segments/{id}/title        {"title": ...}
    POST /cards/{id}/quotes          {"utterance_id": ...}
    POST /cards/{id}/notes           {"text": ...}
    POST /cards/{id}/mark            {"marked": true|false}
    POST /cards/{id}/screenshots     {"image_path", "crop", "heatmap_overlay"?}
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, urlparse

from . import cards as cards_mod
from . import pipeline
from .errors import (ConflictError, NotFoundError, RecapitError,
                     ValidationError)
from .model import (HeatmapOverlay, Screenshot, TimeSpan, load_project,
                    project_to_dict, save_project)


class ProjectService:
    """Single-project application state shared by all request threads."""

    def __init__(self, project_path):
        self.project_path = project_path
        self.project = load_project(project_path)
        self.data = pipeline.load_session(self.project)
        self._series_cache: dict[str, object] = {}
        self._write_lock = threading.Lock()

    # -- reads -----------------------------------------------------------

    def series(self, kind: str):
        if kind not in ("attention", "activity"):
            raise ValidationError("kind", "must be 'attention' or 'activity'")
        if kind not in self._series_cache:
            self._series_cache[kind] = pipeline.series_for(self.data, kind)
        return self._series_cache[kind]

    def utterances(self, t_from: Optional[float], t_to: Optional[float]):
        lo = t_from if t_from is not None else 0.0
        hi = t_to if t_to is not None else self.project.duration
        return [u for u in self.data.utterances
                if u.span.end > lo and u.span.start < hi]

    def heatmap(self, segment_id: str, kind: str):
        segment = self.project.authoring.segment(segment_id)
        if kind == "attention":
            all_fix = [f for fx in self.data.fixations.values() for f in fx]
            return pipeline.attention_mod.attention_heatmap(
                all_fix, segment.span, 64, 64, kernel_sigma=2.0)
        if kind == "activity":
            masks = pipeline.activity_mod.foreground_masks(self.data.frames)
            return pipeline.activity_mod.activity_heatmap(masks, segment.span, 64, 64)
        raise ValidationError("kind", "must be 'attention' or 'activity'")

    def search(self, query: str) -> list[str]:
        keywords = [k for k in query.replace(",", " ").split() if k]
        return cards_mod.keyword_filter(self.project.authoring.segments,
                                        self.data.utterances, keywords)

    # -- writes ----------------------------------------------------------

    def mutate(self, fn, base_version: Optional[int]):
        with self._write_lock:
            if base_version is not None and base_version != self.project.authoring.version:
                raise ConflictError(
                    f"write based on version {base_version}, "
                    f"current is {self.project.authoring.version}")
            updated = fn(self.project)
            save_project(updated, self.project_path)  # durable before ack
            self.project = updated
            self.data.project = updated
            return updated.authoring.version


def _segment_dict(s):
    return {"id": s.id, "start": s.span.start, "end": s.span.end,
            "title": s.title, "origin": s.origin, "marked": s.marked}


def _card_dict(service: ProjectService, segment_id: str):
    card = cards_mod.build_card(service.project, segment_id)
    return {
        "segment_id": card.segment_id,
        "title": card.title,
        "marked": card.marked,
        "quotes": [{"utterance_id": q.utterance_id, "rendered": q.rendered}
                   for q in card.quotes],
        "notes": list(card.notes),
        "screenshots": [
            {"image_path": s.image_path, "crop": list(s.crop),
             "heatmap_overlay": None if s.heatmap_overlay is None else {
                 "kind": s.heatmap_overlay.kind,
                 "start": s.heatmap_overlay.span.start,
                 "end": s.heatmap_overlay.span.end}}
            for s in card.screenshots
        ],
    }


class _Handler(BaseHTTPRequestHandler):
    service: ProjectService  # assigned by make_server

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):  # tests need quiet output
        pass

    def _send(self, status: int, payload):
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, code: str, message: str, detail: Optional[str] = None):
        payload = {"code": code, "message": message}
        if detail:
            payload["detail"] = detail
        self._send(status, payload)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            body = json.loads(raw.decode("utf-8"))
        except json.JSONDecodeError as e:
            raise ValidationError("body", f"invalid JSON: {e}")
        if not isinstance(body, dict):
            raise ValidationError("body", "expected a JSON object")
        return body

    # -- GET ---------------------------------------------------------------

    def do_GET(self):
        url = urlparse(self.path)
        query = {k: v[0] for k, v in parse_qs(url.query).items()}
        try:
            payload = self._route_get(url.path, query)
        except NotFoundError as e:
            return self._error(404, "not_found", str(e))
        except (ValidationError, ValueError) as e:
            return self._error(400, "invalid_input", str(e))
        except RecapitError as e:
            return self._error(500, "io", str(e))
        if payload is None:
            return self._error(404, "not_found", f"no route {url.path}")
        self._send(200, payload)

    def _route_get(self, path: str, query: dict):
        svc = self.service
        if path == "/project":
            doc = project_to_dict(svc.project)
            doc["authoring"]["version"] = svc.project.authoring.version
            return doc
        if path == "/segments":
            return [_segment_dict(s) for s in svc.project.authoring.segments]
        if path.startswith("/cards/") and path.count("/") == 2:
            segment_id = path.split("/")[2]
            svc.project.authoring.segment(segment_id)
            return _card_dict(svc, segment_id)
        if path == "/series":
            series = svc.series(query.get("kind", "attention"))
            return {"bin_width": series.bin_width, "start": series.start,
                    "aoi_ids": list(series.aoi_ids),
                    "values": [list(map(float, row)) for row in series.values]}
        if path == "/scarf":
            return {
                pid: [{"start": iv.span.start, "end": iv.span.end, "aoi": iv.aoi_id}
                      for iv in rows]
                for pid, rows in svc.data.scarfs.items()
            }
        if path == "/utterances":
            t_from = float(query["from"]) if "from" in query else None
            t_to = float(query["to"]) if "to" in query else None
            return [{"id": u.id, "speaker": u.speaker_id, "start": u.span.start,
                     "end": u.span.end, "text": u.text}
                    for u in svc.utterances(t_from, t_to)]
        if path == "/notes":
            return [{"author": e.author, "t": e.t, "kind": e.kind,
                     "added": list(e.added_lines), "removed": list(e.removed_lines)}
                    for e in svc.data.note_events]
        if path == "/heatmap":
            if "segment" not in query:
                raise ValidationError("segment", "query parameter required")
            grid = svc.heatmap(query["segment"], query.get("kind", "attention"))
            return {"width": grid.width, "height": grid.height,
                    "span": {"start": grid.span.start, "end": grid.span.end},
                    "values": [float(v) for v in grid.values.reshape(-1)]}
        if path == "/search":
            if "q" not in query:
                raise ValidationError("q", "query parameter required")
            return {"ids": svc.search(query["q"])}
        return None

    # -- POST ----------------------------------------------------------------

    def do_POST(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            body = self._read_body()
            base_version = body.get("base_version")
            if base_version is not None and not isinstance(base_version, int):
                raise ValidationError("base_version", "must be an integer")
            version = self._route_post(parts, body, base_version)
        except NotFoundError as e:
            return self._error(404, "not_found", str(e))
        except ConflictError as e:
            return self._error(409, "conflict", str(e))
        except (ValidationError, ValueError, KeyError) as e:
            return self._error(400, "invalid_input", str(e))
        except RecapitError as e:
            return self._error(500, "io", str(e))
        if version is None:
            return self._error(404, "not_found", f"no route {url.path}")
        self._send(200, {"ok": True, "version": version})

    def _route_post(self, parts: list[str], body: dict, base_version):
        svc = self.service
        if len(parts) == 3 and parts[0] == "segments" and parts[2] == "title":
            title = body.get("title")
            if not isinstance(title, str):
                raise ValidationError("title", "must be a string")
            return svc.mutate(
                lambda p: cards_mod.set_title(p, parts[1], title), base_version)
        if len(parts) == 3 and parts[0] == "cards":
            segment_id, action = parts[1], parts[2]
            if action == "quotes":
                uid = body.get("utterance_id")
                if not isinstance(uid, str):
                    raise ValidationError("utterance_id", "must be a string")
                matches = [u for u in svc.data.utterances if u.id == uid]
                if not matches:
                    raise NotFoundError(f"unknown utterance id: {uid}")
                return svc.mutate(
                    lambda p: cards_mod.add_quote(p, segment_id, matches[0]),
                    base_version)
            if action == "notes":
                text = body.get("text")
                if not isinstance(text, str):
                    raise ValidationError("text", "must be a string")
                return svc.mutate(
                    lambda p: cards_mod.add_note(p, segment_id, text), base_version)
            if action == "mark":
                marked = body.get("marked")
                if not isinstance(marked, bool):
                    raise ValidationError("marked", "must be a boolean")
                return svc.mutate(
                    lambda p: cards_mod.set_mark(p, segment_id, marked), base_version)
            if action == "screenshots":
                crop = body.get("crop")
                if (not isinstance(crop, list) or len(crop) != 4
                        or not all(isinstance(c, int) for c in crop)):
                    raise ValidationError("crop", "must be [x, y, w, h] integers")
                overlay = None
                if body.get("heatmap_overlay"):
                    o = body["heatmap_overlay"]
                    overlay = HeatmapOverlay(
                        kind=o["kind"], span=TimeSpan(float(o["start"]), float(o["end"])))
                shot = Screenshot(image_path=str(body.get("image_path", "")),
                                  crop=tuple(crop), heatmap_overlay=overlay)
                return svc.mutate(
                    lambda p: cards_mod.add_screenshot(p, segment_id, shot),
                    base_version)
        return None

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()


def make_server(project_path, host: str = "127.0.0.1", port: int = 8765) -> ThreadingHTTPServer:
    service = ProjectService(project_path)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    server.service = service  # type: ignore[attr-defined]
    return server


def serve(project_path, host: str = "127.0.0.1", port: int = 8765) -> None:
    server = make_server(project_path, host, port)
    print(f"serving project {project_path} on http://{host}:{port}")
    try:
        server.serve_forever()
    finally:
        server.server_close()
