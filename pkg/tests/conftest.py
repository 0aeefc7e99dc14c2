import pytest

from SFW.Groups import named_group
from SFW.Ordinal import parse_ord
from SFW.PairsApp import build_fs_model, build_pairs_model


@pytest.fixture
def s3():
    return named_group("symmetric", 3)


@pytest.fixture
def z2():
    return named_group("cyclic", 2)


@pytest.fixture(scope="module")
def pairs_state():
    return build_pairs_model(parse_ord("w1"), depth=1, prefix=2)


@pytest.fixture(scope="module")
def fs_state():
    return build_fs_model(depth=1, prefix=2)
