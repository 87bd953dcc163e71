"""Runnable audits tying regions, schemes and simulations together."""

from __future__ import annotations

import functools
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable

import numpy as np

from . import regions as rg
from .core import Scenario, SystemConfig, needs_switching, reduce_min_antennas
from .regions import DofRegion, scenario
from .schemes import (
    build_beta_scheme,
    build_space_freq_scheme,
    constant_pattern,
    dft_nulling_pair,
    direct_channel_from_slots,
    r_matrix_check,
    time_expand_pair,
    vandermonde,
    vandermonde_nodes,
    vandermonde_slot_channels,
    verify_conditions,
    with_pattern,
)
from .sim import draw_block, estimate_slopes, snr_sweep

RegionBuilder = Callable[[SystemConfig, Scenario], DofRegion]


@dataclass
class SuiteReport:
    name: str
    cases: int = 0
    failures: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, check: str, config=None, scenario=None, expected=None, observed=None) -> None:
        self.failures.append(
            {
                "check": check,
                "config": None if config is None else str(config),
                "scenario": scenario,
                "expected": expected,
                "observed": observed,
            }
        )

    def to_dict(self, timing: bool = False) -> dict:
        d = {"suite": self.name, "passed": self.passed, "cases": self.cases, "failures": self.failures}
        if timing:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True)


def _verts(r: DofRegion) -> list[str]:
    return [str(v) for v in rg.enumerate_vertices(r)]


def suite_region_identities(max_antennas: int = 6, build: RegionBuilder | None = None) -> SuiteReport:
    """Exhaustive exact region identities over ``[1..max_antennas]^4``.

    ``build`` replaces :func:`dofalign.regions.build_region`; it exists so the
    harness can be fed a corrupted builder and shown to catch it.
    """
    if not 1 <= max_antennas <= 6:
        raise ValueError("max_antennas must be in 1..6")
    build = build or rg.build_region
    rep = SuiteReport("regions")
    start = time.perf_counter()

    for t in product(range(1, max_antennas + 1), repeat=4):
        c = SystemConfig(*t)
        rep.cases += 1
        k_full = max(c.m1, c.n1)
        zic = build(c, scenario("zic", "absent", k_full))

        red = build(reduce_min_antennas(c), scenario("zic", "absent", k_full))
        if not rg.region_equal(zic, red):
            rep.fail("min-antenna reduction", c, "zic/absent", _verts(red), _verts(zic))

        if c.n1 <= c.n2:
            fic = build(c, scenario("fic", "absent", k_full))
            if not rg.region_equal(zic, fic):
                rep.fail("zic equals fic when N1<=N2", c, "absent", _verts(zic), _verts(fic))

        csit = build(c, scenario("zic", "present"))
        same = rg.region_equal(zic, csit)
        predicted = c.m2 <= c.n1 or c.n1 >= c.n2 + c.m1
        if same != predicted:
            rep.fail("csit-loss classification", c, "zic", predicted, same)

        if not needs_switching(c):
            continue

        if not rg.region_equal(rg.limited_modes_region(c, c.n1), zic):
            rep.fail("K=N1 endpoint", c, "zic/absent", _verts(zic), _verts(rg.limited_modes_region(c, c.n1)))
        iid = build(c, scenario("zic", "absent", c.m1))
        if not rg.region_equal(rg.limited_modes_region(c, c.m1), iid):
            rep.fail("K=M1 endpoint", c, "zic/absent", _verts(iid), _verts(rg.limited_modes_region(c, c.m1)))

        for k in range(c.m1 + 1, c.n1 + 1):
            lo = build(c, scenario("zic", "absent", k - 1))
            hi = build(c, scenario("zic", "absent", k))
            if not rg.region_strict_subset(lo, hi):
                rep.fail("strict growth in K", c, f"K={k - 1}->{k}", "strict subset", [_verts(lo), _verts(hi)])
            if not rg.region_equal(hi, build(c, scenario("fic", "absent", k))):
                rep.fail("limited-modes zic equals fic", c, f"K={k}", True, False)

        corner = rg.unknown_corner(c)
        if corner not in rg.enumerate_vertices(zic):
            rep.fail("unknown corner is a vertex", c, "zic/absent", str(corner), _verts(zic))
        fic_outer = build(c, scenario("fic", "absent", c.n1))
        fic_iid = build(c, scenario("fic", "absent", c.m1))
        if not rg.region_strict_subset(fic_iid, fic_outer):
            rep.fail("i.i.d. region strictly inside outer bound", c, "fic/absent", True, False)

        for k in range(c.m1, c.n1 + 1):
            p = rg.limited_modes_corner(c, k)
            hp = rg.limited_modes_halfplanes(c, k)[-1]
            if hp.lhs(p) != hp.b:
                rep.fail("corner on the K-mode boundary", c, f"K={k}", str(hp.b), str(hp.lhs(p)))

    for t in product(range(1, max_antennas + 1), repeat=4):
        c = SystemConfig(*t)
        region = build(c, scenario("zic", "present"))
        for d1 in range(min(c.m1, c.n1) + 1):
            d2 = rg.zic_csit_zf_allocation(c, d1)
            if not rg.contains(region, rg.DofPoint(d1, d2)):
                rep.fail("zero-forcing pair inside csit region", c, "zic/present", _verts(region), [d1, d2])

    rep.wall_time = time.perf_counter() - start
    return rep


SCHEME_ROSTER: tuple[tuple[tuple[int, int, int, int], int], ...] = (
    ((1, 2, 3, 3), 1),
    ((1, 2, 3, 3), 2),
    ((2, 3, 4, 4), 2),
    ((2, 3, 4, 4), 3),
    ((1, 3, 4, 4), 2),
    ((2, 4, 5, 5), 2),
    ((2, 4, 5, 5), 3),
    ((2, 4, 5, 5), 4),
    ((2, 5, 6, 6), 4),
)
BETA_ROSTER: tuple[tuple[int, int, int, int], ...] = ((2, 4, 5, 5),)
MIN_PASS_FRACTION = 0.99


def _required(trials: int) -> int:
    return int(np.ceil(MIN_PASS_FRACTION * trials))


def suite_scheme_structure(trials: int = 100, seed: int = 0) -> SuiteReport:
    """Nulling/rank conditions on random blocks plus deterministic checks.

    Includes two negative controls: a non-switching pattern must lose rank,
    and a channel-specific scheme must stop nulling on a different ``h12``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rep = SuiteReport("schemes")
    start = time.perf_counter()

    for idx, (t, k) in enumerate(SCHEME_ROSTER):
        c = SystemConfig(*t)
        rep.cases += 1
        passes = 0
        control_fail = 0
        mismatch_fail = 0
        for i in range(trials):
            rng = np.random.default_rng([seed, idx, i])
            block = draw_block(c, k, rng)
            scheme = build_space_freq_scheme(c, k, block.h12)
            report = verify_conditions(scheme, block.bank, block.h12)
            passes += report.passed and report.whitening_error < 1e-10
            if not verify_conditions(with_pattern(scheme, constant_pattern(k, c.m1, k)), block.bank, block.h12).direct_rank_ok:
                control_fail += 1
            if not scheme.blind:
                other = draw_block(c, k, rng).h12
                if not verify_conditions(scheme, block.bank, other).nulling_ok:
                    mismatch_fail += 1
        if passes < _required(trials):
            rep.fail("scheme conditions", c, f"K={k}", f">={_required(trials)}/{trials}", f"{passes}/{trials}")
        # with a single mode per antenna there is nothing to switch and the control is vacuous
        if k > c.m1 and control_fail < _required(trials):
            rep.fail("non-switching control loses rank", c, f"K={k}", f">={_required(trials)}/{trials}", f"{control_fail}/{trials}")
        if k < c.n1 and mismatch_fail < _required(trials):
            rep.fail("mismatched h12 breaks nulling", c, f"K={k}", f">={_required(trials)}/{trials}", f"{mismatch_fail}/{trials}")

    for idx, t in enumerate(BETA_ROSTER):
        c = SystemConfig(*t)
        rep.cases += 1
        passes = 0
        for i in range(trials):
            rng = np.random.default_rng([seed, 1000 + idx, i])
            block = draw_block(c, c.n1, rng)
            scheme = build_beta_scheme(c)
            passes += verify_conditions(scheme, block.bank, block.h12).passed
        if passes < _required(trials):
            rep.fail("beta scheme conditions", c, f"K={c.n1}", f">={_required(trials)}/{trials}", f"{passes}/{trials}")

    rng = np.random.default_rng([seed, 2000])
    for n1 in range(2, 9):
        for m1 in range(1, n1):
            rep.cases += 1
            if not r_matrix_check(n1, m1):
                rep.fail("R full rank", f"n1={n1},m1={m1}", None, True, False)
            q, p = dft_nulling_pair(n1, m1)
            if np.max(np.abs(q @ p)) >= 1e-12:
                rep.fail("DFT orthogonality", f"n1={n1},m1={m1}", None, "<1e-12", float(np.max(np.abs(q @ p))))
            tq, tp = time_expand_pair(q, p, 2, n1)
            h = (rng.standard_normal((n1, 2)) + 1j * rng.standard_normal((n1, 2))) / np.sqrt(2)
            kron_err = np.linalg.norm(tq @ np.kron(np.eye(n1), h) @ tp - np.kron(q @ p, h))
            if kron_err >= 1e-12:
                rep.fail("Kronecker factorization", f"n1={n1},m1={m1}", None, "<1e-12", float(kron_err))
            if n1 <= 6:
                a = direct_channel_from_slots(vandermonde_slot_channels(n1, m1), tq)
                v = vandermonde(m1 * n1, vandermonde_nodes(n1, m1))
                err = float(np.max(np.abs(a - v)))
                if err > 1e-9:
                    rep.fail("permuted-DFT channel is Vandermonde", f"n1={n1},m1={m1}", None, "<=1e-9", err)

    rep.wall_time = time.perf_counter() - start
    return rep


SLOPE_CASES: tuple[tuple[tuple[int, int, int, int], int, float], ...] = (
    ((1, 2, 3, 3), 2, 0.1),
    ((1, 2, 3, 3), 1, 0.1),
    ((1, 3, 4, 4), 2, 0.15),
    ((1, 3, 4, 4), 3, 0.15),
)
SLOPE_GRID_DB = (30.0, 40.0, 50.0)
SLOPE_TRIALS = 200


def suite_montecarlo_slopes(seed: int = 0, trials: int = SLOPE_TRIALS, threads: int | None = 1) -> SuiteReport:
    """High-SNR slopes of the switching schemes against their DoF corners."""
    rep = SuiteReport("slopes")
    start = time.perf_counter()
    for t, k, tol in SLOPE_CASES:
        c = SystemConfig(*t)
        rep.cases += 1
        corner = rg.limited_modes_corner(c, k)
        curve = snr_sweep(c, scenario("zic", "absent", k), SLOPE_GRID_DB, trials, seed, threads=threads)
        est = estimate_slopes(curve, SLOPE_GRID_DB[0])
        target = (float(corner.d1), float(corner.d2))
        got = (round(est.d1_hat, 6), round(est.d2_hat, 6))
        if abs(est.d1_hat - target[0]) > tol or abs(est.d2_hat - target[1]) > tol:
            rep.fail(f"slopes within {tol}", c, f"K={k}", [str(corner.d1), str(corner.d2)], list(got))
    rep.wall_time = time.perf_counter() - start
    return rep


SUITES = ("regions", "schemes", "slopes")


def run_suites(names, max_antennas: int = 6, seed: int = 0, trials: int = 100, threads: int | None = 1) -> list[SuiteReport]:
    out = []
    for name in names:
        if name == "regions":
            out.append(suite_region_identities(max_antennas))
        elif name == "schemes":
            out.append(suite_scheme_structure(trials, seed))
        elif name == "slopes":
            out.append(suite_montecarlo_slopes(seed, threads=threads))
        else:
            raise ValueError(f"unknown suite {name!r}")
    return out


def corrupt_outer_coefficient(config: SystemConfig, scn: Scenario) -> DofRegion:
    """Region builder with a wrong sum-bound coefficient, for harness self-tests."""
    region = rg.build_region(config, scn)
    hp = list(region.inequalities)
    last = hp[-1]
    hp[-1] = rg.HalfPlane(last.a1, last.a2 + Fraction(1, 7), last.b)
    return DofRegion.from_halfplanes(hp)


OPERATIONS: dict[str, tuple[str, ...]] = {
    "dofalign.regions": (
        "build_region",
        "enumerate_vertices",
        "contains",
        "region_equal",
        "region_subset",
        "zic_csit_zf_allocation",
        "limited_modes_corner",
    ),
    "dofalign.schemes": (
        "dft_nulling_pair",
        "time_expand_pair",
        "cyclic_pattern",
        "effective_direct_channel",
        "r_matrix_check",
        "beta_nulling",
        "successive_beamformer",
        "build_space_freq_scheme",
        "verify_conditions",
    ),
    "dofalign.sim": ("draw_block", "block_rates", "snr_sweep", "estimate_slopes"),
}


def traced_operations(fn: Callable, *args, **kwargs) -> tuple[object, set[str]]:
    """Call ``fn`` and return its result with the public operations it reached.

    Each listed operation is temporarily wrapped wherever a ``dofalign``
    module binds it, so calls through ``from ... import`` names count too.
    """
    seen: set[str] = set()
    targets = {}
    for mod_name, names in OPERATIONS.items():
        mod = sys.modules[mod_name]
        for name in names:
            targets[id(getattr(mod, name))] = (getattr(mod, name), f"{mod_name}.{name}")

    def wrap(func, label):
        @functools.wraps(func)
        def inner(*a, **kw):
            seen.add(label)
            return func(*a, **kw)
        return inner

    patched = []
    for mod_name, mod in list(sys.modules.items()):
        if mod is None or not (mod_name == "dofalign" or mod_name.startswith("dofalign.")):
            continue
        for attr, value in list(vars(mod).items()):
            hit = targets.get(id(value))
            if hit is not None and hit[0] is value:
                patched.append((mod, attr, value))
                setattr(mod, attr, wrap(*hit))
    try:
        result = fn(*args, **kwargs)
    finally:
        for mod, attr, value in patched:
            setattr(mod, attr, value)
    return result, seen


def missing_operations(seen: set[str]) -> list[str]:
    return [f"{m}.{n}" for m, names in OPERATIONS.items() for n in names if f"{m}.{n}" not in seen]
