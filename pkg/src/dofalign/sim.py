"""Monte Carlo rate simulation and DoF slope estimation."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    DomainError,
    Result,
    Scenario,
    Side,
    SystemConfig,
    classify,
    effective_modes,
)
from .schemes import Scheme, build_space_freq_scheme, effective_direct_channel

LOG2_10 = float(np.log2(10.0))


@dataclass(frozen=True)
class ChannelBlock:
    """Channels that stay fixed over one coherence block.

    ``bank`` holds one column per antenna mode of transmitter 1 as seen by
    receiver 1.  ``h21`` is ``None`` for the Z channel.
    """

    bank: np.ndarray
    h12: np.ndarray
    h22: np.ndarray
    h21: np.ndarray | None
    coherence: int


def _cn(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def draw_block(config: SystemConfig, k: int, seed, fic: bool = False, coherence: int | None = None) -> ChannelBlock:
    """Draw i.i.d. CN(0, 1) channels for one block.

    ``seed`` may be anything :func:`numpy.random.default_rng` accepts, or a
    generator that is consumed in place.
    """
    if k < config.m1:
        raise DomainError(f"k={k} modes is fewer than M1={config.m1}")
    rng = _rng(seed)
    m1, n1, m2, n2 = config.as_tuple()
    bank = _cn(rng, n1, k)
    h12 = _cn(rng, n1, m2)
    h22 = _cn(rng, n2, m2)
    h21 = _cn(rng, n2, m1) if fic else None
    return ChannelBlock(bank, h12, h22, h21, k if coherence is None else coherence)


def _logdet2(a: np.ndarray) -> float:
    _, logdet = np.linalg.slogdet(a)
    return float(logdet / np.log(2.0))


def block_rates(block: ChannelBlock, scheme: Scheme, p_linear: float) -> tuple[float, float]:
    """Per-slot Gaussian-input rates of both users (bits per channel use).

    User 1 spreads ``p/M1`` per stream over its ``M1`` antennas in every
    slot; receiver 1 observes ``tilde_q`` applied to the block, whose noise
    covariance is ``tilde_q tilde_q^H``.  User 2 puts ``p T / s2`` on each
    unit-norm column of ``tilde_p`` so the per-slot power is ``p`` and sees no
    interference.
    """
    if p_linear <= 0:
        raise DomainError("power must be positive")
    m1 = scheme.config.m1
    t = scheme.expansion
    s2 = scheme.streams[1]
    if block.h12.shape != (scheme.config.n1, scheme.config.m2):
        raise DomainError(f"block h12 {block.h12.shape} does not match scheme system {scheme.config}")
    if block.coherence < t:
        raise DomainError(f"coherence {block.coherence} shorter than expansion {t}")

    a = effective_direct_channel(block.bank, scheme.pattern, scheme.tilde_q)
    sigma = scheme.tilde_q @ scheme.tilde_q.conj().T
    s1 = a.shape[0]
    m = np.eye(s1) + (p_linear / m1) * np.linalg.solve(sigma, a @ a.conj().T)
    r1 = _logdet2(m) / t

    if s2 == 0:
        return r1, 0.0
    g = np.kron(np.eye(t), block.h22) @ scheme.tilde_p
    r2 = _logdet2(np.eye(g.shape[0]) + (p_linear * t / s2) * (g @ g.conj().T)) / t
    return r1, r2


@dataclass(frozen=True)
class RateCurve:
    snr_db: tuple[float, ...]
    r1: tuple[float, ...]
    r2: tuple[float, ...]
    trials: int
    seed: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["snr_db", "r1_bits", "r2_bits", "trials", "seed"])
        for s, a, b in zip(self.snr_db, self.r1, self.r2):
            w.writerow([f"{s:.12g}", f"{a:.12g}", f"{b:.12g}", self.trials, self.seed])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RateCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise DomainError("empty rate curve")
        return cls(
            snr_db=tuple(float(r["snr_db"]) for r in rows),
            r1=tuple(float(r["r1_bits"]) for r in rows),
            r2=tuple(float(r["r2_bits"]) for r in rows),
            trials=int(rows[0]["trials"]),
            seed=int(rows[0]["seed"]),
        )


@dataclass(frozen=True)
class SimulationPlan:
    """How a scenario is simulated: which system, mode count and user order."""

    config: SystemConfig
    k: int
    swap_users: bool


def plan_simulation(config: SystemConfig, scenario: Scenario) -> SimulationPlan:
    """Map a no-CSIT scenario onto the Z-channel scheme that achieves its corner.

    The full channel is simulated through its equivalent Z channel.  When
    transmitter 2 is the reconfigurable one, the user indices are swapped.
    """
    label = classify(config, scenario)
    switching = (
        Result.THM2_C1,
        Result.THM3_C1,
        Result.THM3_C2,
        Result.THM4_LIMITED_MODES,
        Result.IID_NO_SWITCHING,
    )
    if label.result not in switching:
        raise DomainError(
            f"{label.result.value}: no blind switching scheme applies to {config}; "
            "zero forcing reaches this region and is not simulated"
        )
    k = effective_modes(config, scenario)
    swap = label.side is Side.TX2
    inner = config.swapped() if swap else config
    return SimulationPlan(inner, min(k, inner.n1), swap)


def scheme_for_block(plan: SimulationPlan, block: ChannelBlock) -> Scheme:
    return build_space_freq_scheme(plan.config, plan.k, block.h12)


def _trial_rng(seed: int, grid_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, grid_index, trial])


def _point(plan: SimulationPlan, snr_db: float, grid_index: int, trials: int, seed: int):
    p = 10.0 ** (snr_db / 10.0)
    r1 = np.empty(trials)
    r2 = np.empty(trials)
    for i in range(trials):
        block = draw_block(plan.config, plan.k, _trial_rng(seed, grid_index, i))
        r1[i], r2[i] = block_rates(block, scheme_for_block(plan, block), p)
    return float(r1.mean()), float(r2.mean())


def default_threads() -> int:
    env = os.environ.get("DOF_ALIGN_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def snr_sweep(
    config: SystemConfig,
    scenario: Scenario,
    grid_db,
    trials: int,
    seed: int,
    threads: int | None = None,
) -> RateCurve:
    """Average per-slot rates over ``trials`` independent blocks at each SNR.

    Every trial draws from its own stream keyed by ``(seed, grid index,
    trial)``, so the result does not depend on ``threads``.
    """
    grid = [float(g) for g in grid_db]
    if not grid:
        raise DomainError("empty SNR grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("SNR grid must be strictly ascending")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    plan = plan_simulation(config, scenario)
    threads = default_threads() if threads is None else max(1, threads)

    args = [(plan, s, i, trials, seed) for i, s in enumerate(grid)]
    if threads == 1 or len(grid) == 1:
        results = [_point(*a) for a in args]
    else:
        with ThreadPoolExecutor(max_workers=min(threads, len(grid))) as pool:
            results = list(pool.map(lambda a: _point(*a), args))
    r1 = tuple(r[0] for r in results)
    r2 = tuple(r[1] for r in results)
    if plan.swap_users:
        r1, r2 = r2, r1
    return RateCurve(tuple(grid), r1, r2, trials, seed)


@dataclass(frozen=True)
class SlopeEstimate:
    d1_hat: float
    d2_hat: float
    window: tuple[float, ...]
    stderr: tuple[float, float]


def _fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xm = x - x.mean()
    sxx = float(xm @ xm)
    slope = float(xm @ (y - y.mean())) / sxx
    n = len(x)
    if n < 3:
        return slope, float("nan")
    resid = y - y.mean() - slope * xm
    return slope, float(np.sqrt((resid @ resid) / (n - 2) / sxx))


def estimate_slopes(curve: RateCurve, min_snr_db: float = 30.0) -> SlopeEstimate:
    """Least-squares slopes of ``r1`` and ``r2`` against ``log2(P)``."""
    snr = np.asarray(curve.snr_db)
    mask = snr >= min_snr_db
    if mask.sum() < 2:
        raise DomainError(f"need at least 2 SNR points at or above {min_snr_db} dB")
    x = snr[mask] / 10.0 * LOG2_10
    d1, e1 = _fit(x, np.asarray(curve.r1)[mask])
    d2, e2 = _fit(x, np.asarray(curve.r2)[mask])
    return SlopeEstimate(d1, d2, tuple(float(s) for s in snr[mask]), (e1, e2))


def parse_grid(text: str) -> list[float]:
    """Inclusive ``A:STEP:B`` dB grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"SNR grid must be A:STEP:B, got {text!r}")
    try:
        a, step, b = (float(p) for p in parts)
    except ValueError as exc:
        raise DomainError(f"SNR grid must be numeric, got {text!r}") from exc
    if step <= 0 or b < a:
        raise DomainError(f"SNR grid needs STEP > 0 and B >= A, got {text!r}")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return [a + i * step for i in range(n)]
