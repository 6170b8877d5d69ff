import json
import random

import pytest

import recapit.model as model
from recapit.errors import MissingSourceError, ValidationError
from recapit.model import (Aoi, AuthoringState, CardContent, Participant,
                           Quote, Role, SegmentationConfig, TimeSpan,
                           TopicSegment, WorkshopProject, load_project,
                           project_from_dict, project_to_dict, save_project)


def manifest_dict(tmp_path=None, **overrides):
    doc = {
        "version": 1,
        "id": "w1",
        "title": "Test workshop",
        "session_start": "2025-03-14T09:00:00+00:00",
        "duration": 100.0,
        "participants": [
            {"id": "p1", "display_name": "A", "role_id": "r1", "color": [1, 2, 3]},
            {"id": "p2", "display_name": "B", "role_id": "r2", "color": [4, 5, 6]},
        ],
        "roles": [
            {"id": "r1", "label": "Domain", "color": [10, 10, 10]},
            {"id": "r2", "label": "Vis", "color": [20, 20, 20]},
        ],
        "aois": [
            {"id": "a1", "label": "Left", "color": [1, 1, 1],
             "polygon": [[0.0, 0.0], [0.4, 0.0], [0.4, 0.4], [0.0, 0.4]]},
            {"id": "a2", "label": "Right", "color": [2, 2, 2],
             "polygon": [[0.6, 0.0], [1.0, 0.0], [1.0, 0.4]]},
            {"id": "a3", "label": "Bottom", "color": [3, 3, 3],
             "polygon": [[0.2, 0.6], [0.8, 0.6], [0.8, 1.0], [0.2, 1.0]]},
        ],
        "sources": [],
        "segmentation_config": {
            "penalty_beta": 10.0, "bin_width": 1.0, "gap_threshold": 1.5,
            "similarity_threshold": 0.5, "min_segment_bins": 2,
            "signal_kind": "attention",
        },
        "authoring": {"segments": [], "cards": [], "mutation_log": [], "version": 0},
    }
    doc.update(overrides)
    return doc


def test_identity_load():
    project = project_from_dict(manifest_dict())
    assert len(project.participants) == 2
    assert len(project.aois) == 3
    assert project.duration == 100.0
    assert project.segmentation_config.penalty_beta == 10.0


def test_out_of_range_aoi_vertex_names_the_aoi():
    doc = manifest_dict()
    doc["aois"][1]["polygon"] = [[1.2, 0.5], [0.6, 0.0], [1.0, 0.4]]
    with pytest.raises(ValidationError) as err:
        project_from_dict(doc)
    assert "a2" in str(err.value)
    assert "1.2" in str(err.value)


def test_missing_gaze_file_reports_path(tmp_path):
    doc = manifest_dict()
    doc["sources"] = [{"kind": "gaze", "path": "gaze/p1.csv", "time_offset": 0.0}]
    path = tmp_path / "project.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(MissingSourceError) as err:
        load_project(path)
    assert "gaze/p1.csv" in str(err.value)


def test_unknown_field_rejected():
    doc = manifest_dict()
    doc["surprise"] = True
    with pytest.raises(ValidationError) as err:
        project_from_dict(doc)
    assert "surprise" in str(err.value)


def test_version_rejected():
    with pytest.raises(ValidationError) as err:
        project_from_dict(manifest_dict(version=2))
    assert "version" in str(err.value)


def test_duplicate_participant_ids():
    doc = manifest_dict()
    doc["participants"][1]["id"] = "p1"
    with pytest.raises(ValidationError):
        project_from_dict(doc)


def test_unresolved_role():
    doc = manifest_dict()
    doc["participants"][0]["role_id"] = "ghost"
    with pytest.raises(ValidationError) as err:
        project_from_dict(doc)
    assert "ghost" in str(err.value)


def test_self_intersecting_polygon_rejected():
    doc = manifest_dict()
    doc["aois"][0]["polygon"] = [[0.0, 0.0], [0.4, 0.4], [0.4, 0.0], [0.0, 0.4]]
    with pytest.raises(ValidationError) as err:
        project_from_dict(doc)
    assert "self-intersect" in str(err.value)


def test_round_trip_marked_card(tmp_path):
    doc = manifest_dict()
    doc["authoring"] = {
        "segments": [{"id": "s1", "start": 0.0, "end": 50.0, "title": "First",
                      "origin": "initial", "marked": True}],
        "cards": [{"segment_id": "s1",
                   "quotes": [{"utterance_id": "u1", "rendered": "u1: _hi_"}],
                   "notes": ["observation"], "screenshots": [],
                   "title_source": "user"}],
        "mutation_log": [{"seq": 1, "op": "set_mark", "segment_id": "s1",
                          "payload": {"marked": True}}],
        "version": 1,
    }
    project = project_from_dict(doc)
    save_project(project, tmp_path / "project.json")
    loaded = load_project(tmp_path / "project.json")
    assert loaded.authoring == project.authoring
    assert loaded.authoring.segments[0].marked is True
    assert loaded.authoring.cards[0].quotes[0].rendered == "u1: _hi_"


def test_interrupted_save_leaves_original(tmp_path, monkeypatch):
    path = tmp_path / "project.json"
    project = project_from_dict(manifest_dict())
    save_project(project, path)
    original = path.read_bytes()

    def boom(src, dst):
        raise OSError("disk detached")

    monkeypatch.setattr(model.os, "replace", boom)
    with pytest.raises(OSError):
        save_project(project.with_authoring(
            AuthoringState(segments=(), cards=(), mutation_log=(), version=7)), path)
    assert path.read_bytes() == original
    assert list(tmp_path.glob(".project-*.tmp")) == []


def test_unwritable_destination(tmp_path):
    project = project_from_dict(manifest_dict())
    with pytest.raises(OSError):
        save_project(project, tmp_path / "nope" / "project.json")


def random_project(rng: random.Random) -> WorkshopProject:
    duration = rng.uniform(60.0, 600.0)
    n_roles = rng.randint(1, 3)
    roles = tuple(Role(id=f"r{i}", label=f"Role {i}",
                       color=(rng.randint(0, 255),) * 3) for i in range(n_roles))
    participants = tuple(
        Participant(id=f"p{i}", display_name=f"P{i}",
                    role_id=f"r{rng.randrange(n_roles)}",
                    color=(rng.randint(0, 255), 0, 0))
        for i in range(rng.randint(1, 4)))
    aois = tuple(
        Aoi(id=f"a{i}", label=f"Area {i}",
            polygon=((0.1 * i, 0.1), (0.1 * i + 0.05, 0.1), (0.1 * i + 0.05, 0.2)),
            color=(0, rng.randint(0, 255), 0))
        for i in range(rng.randint(1, 5)))

    n_segments = rng.randint(0, 5)
    cuts = sorted(rng.sample(range(1, int(duration)), n_segments)) if n_segments else []
    bounds = [0.0] + [float(c) for c in cuts] + [duration]
    segments = tuple(
        TopicSegment(id=f"s{i}", span=TimeSpan(bounds[i], bounds[i + 1]),
                     title=f"Topic {i}", origin=rng.choice(["initial", "refined"]),
                     marked=rng.random() < 0.5)
        for i in range(len(bounds) - 1))
    cards = tuple(
        CardContent(segment_id=s.id,
                    quotes=tuple(Quote(utterance_id=f"u{j}", rendered=f"u{j}: _q_")
                                 for j in range(rng.randint(0, 3))),
                    notes=tuple(f"note {j}" for j in range(rng.randint(0, 2))),
                    screenshots=(),
                    title_source=rng.choice(["default", "user", "fallback"]))
        for s in segments)
    authoring = AuthoringState(segments=segments, cards=cards,
                               mutation_log=(), version=rng.randint(0, 10))
    return project_from_dict(project_to_dict(WorkshopProject(
        id="rand", title="Random", session_start=__import__("datetime").datetime(
            2025, 3, 14, 9, 0, 0, tzinfo=__import__("datetime").timezone.utc),
        duration=duration, participants=participants, roles=roles, aois=aois,
        sources=(), segmentation_config=SegmentationConfig(),
        authoring=authoring)), check_sources=False)


def test_round_trip_randomized_projects(tmp_path):
    rng = random.Random(7)
    for trial in range(25):
        project = random_project(rng)
        path = tmp_path / f"p{trial}.json"
        save_project(project, path)
        loaded = load_project(path)
        assert loaded.id == project.id
        assert loaded.duration == project.duration
        assert loaded.participants == project.participants
        assert loaded.roles == project.roles
        assert loaded.aois == project.aois
        assert loaded.segmentation_config == project.segmentation_config
        assert loaded.authoring == project.authoring


def test_save_load_preserves_segment_titles(tmp_path):
    rng = random.Random(11)
    project = random_project(rng)
    while len(project.authoring.segments) < 5:
        project = random_project(rng)
    save_project(project, tmp_path / "p.json")
    loaded = load_project(tmp_path / "p.json")
    assert len(loaded.authoring.segments) == len(project.authoring.segments)
    assert [s.title for s in loaded.authoring.segments] == \
           [s.title for s in project.authoring.segments]
