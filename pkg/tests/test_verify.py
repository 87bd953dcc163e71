import json

import pytest

from dofalign.verify import (
    SUITES,
    SuiteReport,
    corrupt_outer_coefficient,
    missing_operations,
    run_suites,
    suite_region_identities,
    suite_scheme_structure,
    traced_operations,
)


def test_region_suite_small_grid():
    rep = suite_region_identities(4)
    assert rep.passed and rep.cases >= 256


def test_region_suite_rejects_large_grid():
    with pytest.raises(ValueError):
        suite_region_identities(7)


def test_mutation_hook_is_caught():
    rep = suite_region_identities(4, build=corrupt_outer_coefficient)
    assert not rep.passed
    first = rep.failures[0]
    assert first["config"].startswith("(") and first["check"]


def test_scheme_suite_passes_with_seed_42():
    rep = suite_scheme_structure(trials=100, seed=42)
    assert rep.passed, rep.failures


def test_report_json_has_no_timing_by_default():
    rep = SuiteReport("x", 3)
    rep.wall_time = 1.25
    assert "wall_time" not in json.loads(rep.to_json())
    assert json.loads(rep.to_json(timing=True))["wall_time"] == 1.25
    rep.fail("c", None, "s", 1, 2)
    assert not rep.passed


def test_suites_touch_every_operation():
    reports, seen = traced_operations(run_suites, SUITES, 3, 0, 5)
    assert all(r.passed for r in reports)
    assert missing_operations(seen) == []


def test_tracing_restores_functions():
    import dofalign.regions as rg
    import dofalign.sim as sim

    before = (rg.build_region, sim.build_space_freq_scheme)
    traced_operations(lambda: None)
    assert (rg.build_region, sim.build_space_freq_scheme) == before
    assert missing_operations(set())
