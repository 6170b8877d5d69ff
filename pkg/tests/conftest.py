import shutil

import pytest

from recapit.synthetic import make_workshop


@pytest.fixture(scope="session")
def workshop_dir(tmp_path_factory):
    """Read-only synthetic workshop shared by the whole session."""
    dest = tmp_path_factory.mktemp("fixture") / "workshop"
    make_workshop(dest)
    return dest


@pytest.fixture
def workshop_copy(workshop_dir, tmp_path):
    """Private mutable copy for tests that write to the project."""
    dest = tmp_path / "workshop"
    shutil.copytree(workshop_dir, dest)
    return dest
