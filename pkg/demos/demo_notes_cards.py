"""Note events, topic cards, keyword filtering, and the HTML report.

Run from the repository root:

    python demos/demo_notes_cards.py
"""

import pathlib
import shutil
import sys
import tempfile

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from recapit.cards import (add_note, add_quote, build_card, card_statistics,
                           compress_view, donut_shares, export_report,
                           keyword_filter, set_mark, set_title)
from recapit.model import load_project, save_project
from recapit.pipeline import (activity_series, all_card_stats, load_session,
                              run_segmentation)
from recapit.providers import HashedBagOfWordsEmbedder, TfidfTitleProvider
from recapit.synthetic import make_workshop

FIXTURE = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "workshop"
if not FIXTURE.exists():
    make_workshop(FIXTURE)

# work on a scratch copy: this demo mutates authoring state
workdir = pathlib.Path(tempfile.mkdtemp()) / "workshop"
shutil.copytree(FIXTURE, workdir)

project = load_project(workdir)
data = load_session(project)
project = run_segmentation(data, HashedBagOfWordsEmbedder(), TfidfTitleProvider())

# note events derived from the snapshot diffs land on the timeline
print("note events:")
for e in data.note_events:
    print(f"  t={e.t:6.1f} {e.author}: {e.kind:7s} "
          f"+{len(e.added_lines)} -{len(e.removed_lines)}")

# find the discussion about segmentation by keyword (substring, case-blind)
hits = keyword_filter(project.authoring.segments, data.utterances, ["segment"])
print(f"\nsegments matching 'segment': {hits}")

# author a card on the first hit: quote, note, rename, mark
sid = hits[0]
in_seg = [u for u in data.utterances
          if project.authoring.segment(sid).span.contains(u.span.start)]
project = add_quote(project, sid, in_seg[0])
project = add_note(project, sid, "Splitting sessions came up here first.")
project = set_title(project, sid, "From Annotation to Segmentation")
project = set_mark(project, sid, True)

stats = card_statistics(project.authoring.segment(sid), data.utterances,
                        data.scarf_rows(), activity_series(data), project)
card = build_card(project, sid, stats)
print(f"\ncard {card.segment_id}: {card.title!r}")
print(f"  quote: {card.quotes[0].rendered[:60]}")
print(f"  speaking shares (donut): "
      f"{ {k: round(v, 2) for k, v in donut_shares(stats.speaking_by_role).items()} }")
print(f"  attention shares: "
      f"{ {k: round(v, 2) for k, v in stats.attention_by_aoi.items()} }")

# compression shows only marked segments, in temporal order
marked = compress_view(project.authoring.segments)
print(f"\ncompressed view: {[s.id for s in marked]}")

# persist and export the shareable report
save_project(project, workdir / "project.json")
report = export_report(project, workdir / "report.html",
                       stats=all_card_stats(data))
print(f"report -> {report}")
