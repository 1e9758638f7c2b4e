from pathlib import Path

import pytest

from adapter_helpers import VOCAB, make_fixture_images, write_manifest


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Path:
    """10 seeded images plus their manifest and a categories file."""
    root = tmp_path_factory.mktemp("images")
    entries = make_fixture_images(root, n=10, seed=0)
    write_manifest(root / "manifest.csv", entries)
    (root / "categories.txt").write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    return root
