import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CATALOGS: dict = {}


@pytest.fixture(scope="session", autouse=True)
def _cache_dir(tmp_path_factory):
    # reuse an externally provided cache; otherwise keep it per session
    if "TORELLI_GRAPHS_CACHE" not in os.environ:
        os.environ["TORELLI_GRAPHS_CACHE"] = str(
            tmp_path_factory.mktemp("catalog-cache")
        )
    yield os.environ["TORELLI_GRAPHS_CACHE"]


@pytest.fixture(scope="session")
def catalog():
    """Memoized catalog loader shared by the whole session."""
    from torelli_graphs.cli import load_or_enumerate

    def get(genus, markings):
        key = (genus, markings)
        if key not in _CATALOGS:
            _CATALOGS[key] = load_or_enumerate(genus, markings)
        return _CATALOGS[key]

    return get
