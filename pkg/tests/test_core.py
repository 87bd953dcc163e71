from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dofalign.core import (
    CaseLabel,
    ConfigurationError,
    Result,
    Side,
    SystemConfig,
    classify,
    reduce_min_antennas,
)
from dofalign.regions import scenario

counts = st.integers(min_value=1, max_value=64)
configs = st.builds(SystemConfig, counts, counts, counts, counts)


@pytest.mark.parametrize(
    "system, scn, expected",
    [
        ((1, 2, 3, 3), ("zic", "absent", 2), CaseLabel(Result.THM2_C1, Side.TX1)),
        ((1, 2, 3, 3), ("zic", "present", None), CaseLabel(Result.THM1_ZIC_CSIT, Side.NONE)),
        ((3, 4, 1, 2), ("fic", "absent", 2), CaseLabel(Result.THM3_C2, Side.TX2)),
        ((1, 2, 3, 3), ("fic", "present", None), CaseLabel(Result.FIC_CSIT, Side.NONE)),
        ((1, 2, 3, 3), ("fic", "absent", 5), CaseLabel(Result.THM3_C1, Side.TX1)),
        ((1, 2, 3, 3), ("zic", "absent", 1), CaseLabel(Result.IID_NO_SWITCHING, Side.TX1)),
        ((1, 2, 3, 3), ("zic", "absent", None), CaseLabel(Result.IID_NO_SWITCHING, Side.TX1)),
        ((1, 3, 4, 4), ("zic", "absent", 2), CaseLabel(Result.THM4_LIMITED_MODES, Side.TX1)),
        ((1, 3, 4, 4), ("fic", "absent", 2), CaseLabel(Result.THM4_LIMITED_MODES, Side.TX1)),
        ((4, 4, 1, 3), ("fic", "absent", 2), CaseLabel(Result.THM4_LIMITED_MODES, Side.TX2)),
        ((3, 4, 1, 2), ("zic", "absent", 3), CaseLabel(Result.THM2_C2, Side.NONE)),
        ((2, 2, 2, 2), ("fic", "absent", 2), CaseLabel(Result.THM3_C3, Side.NONE)),
    ],
)
def test_classify_examples(system, scn, expected):
    assert classify(SystemConfig(*system), scenario(*scn)) == expected


def test_classify_rejects_too_few_modes():
    with pytest.raises(ConfigurationError):
        classify(SystemConfig(2, 3, 4, 4), scenario("zic", "absent", 1))
    # the Tx2 side of the mirrored shape is checked against M2
    with pytest.raises(ConfigurationError):
        classify(SystemConfig(4, 4, 2, 3), scenario("fic", "absent", 1))
    with pytest.raises(ConfigurationError):
        scenario("zic", "absent", 0)


def test_classify_total_and_deterministic_on_grid():
    seen = set()
    for t in product(range(1, 7), repeat=4):
        c = SystemConfig(*t)
        for ch in ("zic", "fic"):
            label = classify(c, scenario(ch, "present"))
            assert label == classify(c, scenario(ch, "present"))
            seen.add(label.result)
            for k in [None, *range(1, 8)]:
                try:
                    label = classify(c, scenario(ch, "absent", k))
                except ConfigurationError:
                    assert k is not None and k < max(c.m1, c.m2)
                    continue
                assert label == classify(c, scenario(ch, "absent", k))
                seen.add(label.result)
    assert seen == set(Result)


@pytest.mark.parametrize(
    "before, after",
    [((1, 2, 3, 4), (1, 2, 3, 3)), ((1, 2, 3, 3), (1, 2, 3, 3)), ((2, 5, 7, 4), (2, 5, 4, 4))],
)
def test_reduce_min_antennas_examples(before, after):
    assert reduce_min_antennas(SystemConfig(*before)) == SystemConfig(*after)


@given(configs)
def test_reduce_is_idempotent(c):
    once = reduce_min_antennas(c)
    assert reduce_min_antennas(once) == once
    assert once.m2 == once.n2 == min(c.m2, c.n2)


@pytest.mark.parametrize("bad", [(0, 1, 1, 1), (1, 65, 1, 1), (1, 1, -2, 1)])
def test_config_bounds(bad):
    with pytest.raises(ConfigurationError):
        SystemConfig(*bad)


def test_config_parse():
    assert SystemConfig.parse("1, 2,3,3") == SystemConfig(1, 2, 3, 3)
    for text in ("1,2,3", "a,b,c,d", "1,2,3,3,3"):
        with pytest.raises(ConfigurationError):
            SystemConfig.parse(text)
