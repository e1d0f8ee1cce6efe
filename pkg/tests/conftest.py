import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from selfint.census import enumerate_census, load_census, save_census  # noqa: E402
from selfint.surface import build_genus2  # noqa: E402

BIG_CENSUS_LENGTH = 12.0


@pytest.fixture(scope="session")
def S():
    return build_genus2()


@pytest.fixture(scope="session")
def census8(S):
    return enumerate_census(S, 8.0)


@pytest.fixture(scope="session")
def census12(S, request):
    """The L = 12 census, cached between runs (it takes about 20 s to build)."""
    d = request.config.cache.mkdir("selfint")
    path = d / f"census_{S.hash}_{BIG_CENSUS_LENGTH:g}.csv"
    if path.exists():
        try:
            return load_census(path, S)
        except ValueError:
            pass
    sl = enumerate_census(S, BIG_CENSUS_LENGTH)
    save_census(sl, path)
    return sl


@pytest.fixture(scope="session")
def calibrated(S, census12):
    from selfint.calibration import calibrate

    return calibrate(S, census12, seed=0)


@pytest.fixture(scope="session")
def gb(calibrated):
    return calibrated[0]
