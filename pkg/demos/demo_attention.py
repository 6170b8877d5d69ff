"""From raw gaze to fixations, scarf rows, shared attention, and a heatmap.

Run from the repository root:

    python demos/demo_attention.py
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from recapit import (attention_heatmap, detect_fixations, load_project,
                     scarf_sequence, shared_attention_intervals)
from recapit.exports import write_heatmap_pgm
from recapit.model import TimeSpan
from recapit.pipeline import load_session
from recapit.synthetic import make_workshop

FIXTURE = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "workshop"
if not FIXTURE.exists():
    make_workshop(FIXTURE)

project = load_project(FIXTURE)
data = load_session(project)

# fixation filtering is dispersion-based (I-DT): tight spatial window held
# for at least 0.1 s
for pid, samples in data.gaze.items():
    fixations = detect_fixations(samples, dispersion_threshold=0.05,
                                 min_duration=0.1)
    total = sum(f.span.duration for f in fixations)
    print(f"{pid}: {len(samples)} samples -> {len(fixations)} fixations "
          f"({total:.0f} s fixating of {project.duration:.0f} s)")

# scarf rows label each fixation with the AOI its centroid hits
rows = data.scarf_rows()
for pid, row in zip((p.id for p in project.participants), rows):
    labels = [iv.aoi_id or "-" for iv in row[:8]]
    print(f"{pid} scarf starts: {' '.join(labels)} ...")

# shared attention: spans where both participants fixate the same AOI
shared = shared_attention_intervals(rows, k=2)
print(f"\n{len(shared)} shared-attention intervals (k=2); longest:")
for span, aoi in sorted(shared, key=lambda r: -r[0].duration)[:3]:
    print(f"  [{span.start:6.1f} - {span.end:6.1f}] both on {aoi}")

# spatially aggregate the sketch phase into a heatmap and export it
all_fix = [f for fx in data.fixations.values() for f in fx]
grid = attention_heatmap(all_fix, TimeSpan(0.0, 60.0), 64, 64, kernel_sigma=2.0)
out = pathlib.Path(__file__).parent / "attention_sketch_phase.pgm"
write_heatmap_pgm(grid, out)
pj, pi = np.unravel_index(np.argmax(grid.values), grid.values.shape)
print(f"\nheatmap of the first phase -> {out.name}; "
      f"peak cell ({int(pi)}, {int(pj)}) (sketch area sits top-left)")
