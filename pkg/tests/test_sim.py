import numpy as np
import pytest

from dofalign.core import DomainError, SystemConfig
from dofalign.regions import scenario
from dofalign.schemes import build_full_mode_scheme, build_space_freq_scheme, constant_pattern, with_pattern
from dofalign.sim import (
    RateCurve,
    block_rates,
    draw_block,
    estimate_slopes,
    parse_grid,
    plan_simulation,
    snr_sweep,
)

C = SystemConfig(1, 2, 3, 3)
ZIC2 = scenario("zic", "absent", 2)


def test_draw_block_deterministic_and_shaped():
    a = draw_block(C, 2, 42)
    b = draw_block(C, 2, 42)
    np.testing.assert_array_equal(a.bank, b.bank)
    assert a.bank.shape == (2, 2) and a.h12.shape == (2, 3) and a.h22.shape == (3, 3)
    assert a.h21 is None
    assert draw_block(C, 2, 42, fic=True).h21.shape == (3, 1)


def test_draw_block_unit_variance():
    rng = np.random.default_rng(0)
    x = np.concatenate([draw_block(C, 2, rng).bank.ravel() for _ in range(2500)])
    assert x.size == 10_000
    assert 0.97 <= np.mean(np.abs(x) ** 2) <= 1.03


def test_rates_vanish_at_low_power():
    s = build_full_mode_scheme(C)
    r1, r2 = block_rates(draw_block(C, 2, 1), s, 1e-12)
    assert 0 <= r1 < 1e-9 and 0 <= r2 < 1e-9


def test_rate_growth_per_decade():
    # one decade adds about log2(10) * d bits at high SNR
    s = build_full_mode_scheme(C)
    rng = np.random.default_rng(9)
    d1, d2 = [], []
    for _ in range(200):
        blk = draw_block(C, 2, rng)
        lo = block_rates(blk, s, 1e4)
        hi = block_rates(blk, s, 1e5)
        d1.append(hi[0] - lo[0])
        d2.append(hi[1] - lo[1])
    assert np.mean(d1) == pytest.approx(1.0 * np.log2(10), abs=0.3)
    assert np.mean(d2) == pytest.approx(1.5 * np.log2(10), abs=0.4)


def test_rates_monotone_in_power():
    s = build_full_mode_scheme(C)
    blk = draw_block(C, 2, 3)
    rates = [block_rates(blk, s, p) for p in (1.0, 10.0, 100.0, 1000.0)]
    for lo, hi in zip(rates, rates[1:]):
        assert hi[0] > lo[0] and hi[1] > lo[1]


def test_block_rates_rejects_bad_inputs():
    s = build_full_mode_scheme(C)
    with pytest.raises(DomainError):
        block_rates(draw_block(C, 2, 0), s, 0.0)
    with pytest.raises(DomainError):
        block_rates(draw_block(SystemConfig(1, 3, 4, 4), 3, 0), s, 1.0)


def test_sweep_reproducible_and_thread_independent():
    grid = [10.0, 20.0, 30.0]
    a = snr_sweep(C, ZIC2, grid, 8, seed=5, threads=1)
    b = snr_sweep(C, ZIC2, grid, 8, seed=5, threads=1)
    c = snr_sweep(C, ZIC2, grid, 8, seed=5, threads=3)
    assert a == b == c
    assert snr_sweep(C, ZIC2, grid, 8, seed=6, threads=1) != a


def test_sweep_variance_halves_with_double_trials():
    grid = [30.0]
    lo = [snr_sweep(C, ZIC2, grid, 10, seed=s, threads=1).r2[0] for s in range(300)]
    hi = [snr_sweep(C, ZIC2, grid, 20, seed=1000 + s, threads=1).r2[0] for s in range(300)]
    ratio = np.var(lo, ddof=1) / np.var(hi, ddof=1)
    assert 2 / 1.5 <= ratio <= 2 * 1.5


def test_sweep_rejects_bad_grids():
    with pytest.raises(DomainError):
        snr_sweep(C, ZIC2, [20.0, 10.0], 2, 0)
    with pytest.raises(DomainError):
        snr_sweep(C, ZIC2, [], 2, 0)
    with pytest.raises(DomainError):
        snr_sweep(C, scenario("zic", "present"), [10.0], 2, 0)


def test_swapped_plan_returns_users_in_order():
    plan = plan_simulation(SystemConfig(3, 4, 1, 2), scenario("fic", "absent", 1))
    assert plan.swap_users and plan.config == SystemConfig(1, 2, 3, 4)


def test_slope_fit_on_synthetic_curve():
    snr = (30.0, 40.0, 50.0, 60.0)
    x = np.array(snr) / 10 * np.log2(10)
    curve = RateCurve(snr, tuple(1.0 * x + 2), tuple(1.5 * x - 1), 1, 0)
    est = estimate_slopes(curve)
    assert est.d1_hat == pytest.approx(1.0, abs=1e-12)
    assert est.d2_hat == pytest.approx(1.5, abs=1e-12)
    assert est.window == snr
    assert estimate_slopes(RateCurve(snr[:2], (1.0, 2.0), (1.0, 2.0), 1, 0)).stderr[0] != est.stderr[0]


def test_slope_fit_needs_two_points():
    with pytest.raises(DomainError):
        estimate_slopes(RateCurve((10.0, 40.0), (1.0, 2.0), (1.0, 2.0), 1, 0))


def test_csv_round_trip():
    curve = snr_sweep(C, ZIC2, [0.0, 10.0], 3, seed=2, threads=1)
    text = curve.to_csv()
    assert text.splitlines()[0] == "snr_db,r1_bits,r2_bits,trials,seed"
    back = RateCurve.from_csv(text)
    assert back.snr_db == curve.snr_db and back.trials == 3 and back.seed == 2
    np.testing.assert_allclose(back.r1, curve.r1, rtol=1e-11)


def test_parse_grid():
    assert parse_grid("0:10:50") == [0.0, 10.0, 20.0, 30.0, 40.0, 50.0]
    assert parse_grid("30:5:40") == [30.0, 35.0, 40.0]
    for bad in ("0:10", "a:1:2", "0:-1:5", "5:1:0"):
        with pytest.raises(DomainError):
            parse_grid(bad)


def test_non_switching_pattern_caps_user2():
    # without switching, zero forcing leaves user 2 only N1 - M1 = 1 DoF
    c = SystemConfig(1, 2, 3, 3)
    rng = np.random.default_rng(12)
    snr = np.array([30.0, 40.0, 50.0])
    r2 = np.zeros(3)
    for _ in range(200):
        blk = draw_block(c, 1, rng)
        s = build_space_freq_scheme(c, 1, blk.h12)
        r2 += [block_rates(blk, s, 10 ** (x / 10))[1] for x in snr]
    r2 /= 200
    slope = np.polyfit(snr / 10 * np.log2(10), r2, 1)[0]
    assert slope == pytest.approx(1.0, abs=0.1)


def test_constant_pattern_loses_user1_dof():
    s = build_full_mode_scheme(C)
    bad = with_pattern(s, constant_pattern(2, 1, 2))
    rng = np.random.default_rng(13)
    gain = []
    for _ in range(100):
        blk = draw_block(C, 2, rng)
        gain.append(block_rates(blk, bad, 1e5)[0] - block_rates(blk, bad, 1e4)[0])
    # rank one over two slots: half a DoF per slot
    assert np.mean(gain) == pytest.approx(0.5 * np.log2(10), abs=0.3)
