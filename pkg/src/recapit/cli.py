"""Batch pipeline CLI.

Commands: validate, ingest, segment, stats, serve, export.
Exit codes: 0 success, 1 validation error, 2 I/O error, 64 usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline
from .cards import export_report
from .errors import (MissingSourceError, ParseError, ProviderError,
                     RecapitError, ValidationError)
from .exports import write_heatmap_pgm, write_series_csv
from .model import load_project, save_project
from .providers import embedding_provider_from_env, title_provider_from_env

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n",
                    encoding="utf-8")


def _utterance_dicts(utterances):
    return [{"id": u.id, "speaker": u.speaker_id, "start": u.span.start,
             "end": u.span.end, "text": u.text} for u in utterances]


def _scarf_dicts(data):
    return {
        pid: [{"start": iv.span.start, "end": iv.span.end, "aoi": iv.aoi_id}
              for iv in rows]
        for pid, rows in data.scarfs.items()
    }


def cmd_validate(args) -> int:
    load_project(args.project)
    print(f"valid: {args.project}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    project = load_project(args.project)
    data = pipeline.load_session(project)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(_utterance_dicts(data.utterances), out / "utterances.json")
    _dump_json({
        pid: [{"start": f.span.start, "end": f.span.end,
               "x": f.centroid[0], "y": f.centroid[1], "dispersion": f.dispersion}
              for f in fx]
        for pid, fx in data.fixations.items()
    }, out / "fixations.json")
    _dump_json(_scarf_dicts(data), out / "scarf.json")
    _dump_json([
        {"author": e.author, "t": e.t, "kind": e.kind,
         "added": list(e.added_lines), "removed": list(e.removed_lines)}
        for e in data.note_events
    ], out / "note_events.json")
    print(f"ingested {len(data.utterances)} utterances, "
          f"{sum(len(f) for f in data.fixations.values())} fixations, "
          f"{len(data.note_events)} note events -> {out}")
    return EXIT_OK


def cmd_segment(args) -> int:
    project = load_project(args.project)
    data = pipeline.load_session(project)
    updated = pipeline.run_segmentation(
        data, embedding_provider_from_env(), title_provider_from_env(),
        signal_kind=args.signal, beta=args.beta)
    save_project(updated, args.project)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series = pipeline.series_for(data, updated.segmentation_config.signal_kind)
    write_series_csv(series, out / f"series_{updated.segmentation_config.signal_kind}.csv")
    _dump_json([
        {"id": s.id, "start": s.span.start, "end": s.span.end,
         "title": s.title, "origin": s.origin, "marked": s.marked}
        for s in updated.authoring.segments
    ], out / "segments.json")
    print(f"{len(updated.authoring.segments)} topic segments -> {out / 'segments.json'}")
    return EXIT_OK


def cmd_stats(args) -> int:
    project = load_project(args.project)
    data = pipeline.load_session(project)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    att = pipeline.attention_series(data)
    if att is not None:
        write_series_csv(att, out / "series_attention.csv")
    act = pipeline.activity_series(data)
    if act is not None:
        write_series_csv(act, out / "series_activity.csv")

    masks = None
    if data.frames:
        masks = pipeline.activity_mod.foreground_masks(data.frames)
    all_fix = [f for fx in data.fixations.values() for f in fx]
    for seg in project.authoring.segments:
        if all_fix:
            grid = pipeline.attention_mod.attention_heatmap(
                all_fix, seg.span, args.grid, args.grid, kernel_sigma=2.0)
            write_heatmap_pgm(grid, out / f"heatmap_{seg.id}_attention.pgm")
        if masks:
            in_span = [m for t, m in masks if seg.span.contains(t)]
            if in_span:
                grid = pipeline.activity_mod.activity_heatmap(
                    masks, seg.span, args.grid, args.grid)
                write_heatmap_pgm(grid, out / f"heatmap_{seg.id}_activity.pgm")

    stats = pipeline.all_card_stats(data)
    _dump_json({
        sid: {"speaking_by_role": cs.speaking_by_role,
              "attention_by_aoi": cs.attention_by_aoi,
              "activity_by_aoi": cs.activity_by_aoi}
        for sid, cs in stats.items()
    }, out / "card_stats.json")
    print(f"stats for {len(stats)} segments -> {out}")
    return EXIT_OK


def cmd_export(args) -> int:
    project = load_project(args.project)
    data = pipeline.load_session(project)
    stats = pipeline.all_card_stats(data)

    masks = pipeline.activity_mod.foreground_masks(data.frames) if data.frames else []
    all_fix = [f for fx in data.fixations.values() for f in fx]

    def heatmap_fn(kind, span):
        if kind == "attention" and all_fix:
            return pipeline.attention_mod.attention_heatmap(
                all_fix, span, 64, 64, kernel_sigma=2.0)
        if kind == "activity" and masks:
            in_span = [m for t, m in masks if span.contains(t)]
            if in_span:
                return pipeline.activity_mod.activity_heatmap(masks, span, 64, 64)
        return None

    dest = export_report(project, args.out, stats=stats, heatmap_fn=heatmap_fn)
    print(f"report -> {dest}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.project, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="recapit",
                     description="Multimodal workshop analytics pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a project manifest")
    p.add_argument("project")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("ingest", help="parse all sources and write derived streams")
    p.add_argument("project")
    p.add_argument("--out", default="derived")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("segment", help="run two-step topic segmentation")
    p.add_argument("project")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--signal", choices=["attention", "activity"], default=None)
    p.add_argument("--out", default="derived")
    p.set_defaults(fn=cmd_segment)

    p = sub.add_parser("stats", help="write series, heatmaps, and card statistics")
    p.add_argument("project")
    p.add_argument("--out", default="derived")
    p.add_argument("--grid", type=int, default=64)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("project")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("export", help="write the HTML report of marked cards")
    p.add_argument("project")
    p.add_argument("--out", default="report.html")
    p.set_defaults(fn=cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_USAGE
    try:
        return args.fn(args)
    except (ValidationError, ParseError, ProviderError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except MissingSourceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except RecapitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
