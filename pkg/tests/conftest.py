import pathlib

import numpy as np
import pytest

from cafbp.frames import parse_y4m

DATA_DIR = pathlib.Path(__file__).parent / "data"


def load_fixture(name):
    return parse_y4m((DATA_DIR / name).read_bytes())


@pytest.fixture(scope="session")
def clean_seq():
    return load_fixture("fixture_clean.y4m")


@pytest.fixture(scope="session")
def noisy_seq():
    return load_fixture("fixture_noisy.y4m")


@pytest.fixture(scope="session")
def rd_seq():
    return load_fixture("fixture_rd.y4m")


@pytest.fixture(scope="session")
def denoised_frame1(noisy_seq):
    """Both filter passes on fixture frame 1, shared by slow tests."""
    from cafbp.denoise import FilterParams, pass1_basic_estimate, pass2_final_estimate

    params = FilterParams(sigma=25.0)
    window = [f.astype(np.float64) for f in noisy_seq.frames[0:3]]
    basic = pass1_basic_estimate(window, params, center=1)
    final = pass2_final_estimate(window, basic, params, center=1)
    return basic, final
