"""Blind beamforming/nulling schemes over time-expanded channels.

Transmitter 2 has no CSIT, so receiver 1 separates the two users in a
"frequency" domain created by cycling transmitter 1 through its antenna
modes.  The constructions here build the nulling matrix ``tilde_q`` used by
receiver 1 and the beamformer ``tilde_p`` used by transmitter 2 for a block
of ``T`` slots, and check the algebraic conditions that make the claimed
stream counts decodable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import DomainError, SystemConfig, needs_switching, reduce_min_antennas

RESIDUAL_TOL = 1e-10
RANK_TOL = 1e-8


class DegenerateChannelError(ValueError):
    """The channel realization does not leave the expected null space."""


def unit_root(n: int) -> complex:
    return np.exp(-2j * np.pi / n)


def vandermonde(n: int, nodes) -> np.ndarray:
    """``n x len(nodes)`` matrix whose columns are ``[1, a, ..., a^(n-1)]``."""
    nodes = np.asarray(nodes, dtype=complex)
    return nodes[np.newaxis, :] ** np.arange(n)[:, np.newaxis]


def dft_rows(n: int, m: int) -> np.ndarray:
    """First ``m`` rows of the ``n``-point DFT matrix, ``Q[i, t] = w^(i t)``."""
    w = unit_root(n)
    return vandermonde(n, w ** np.arange(m)).T


def dft_nulling_pair(n1: int, m1: int) -> tuple[np.ndarray, np.ndarray]:
    """Nulling matrix ``Q`` (m1 x n1) and beamformer ``P`` (n1 x (n1-m1)) with ``QP = 0``.

    ``Q`` holds the first ``m1`` DFT rows and ``P`` the conjugates of the
    remaining ones, so ``[Q^H, P]`` is an inverse DFT matrix.
    """
    if not 1 <= m1 < n1:
        raise DomainError(f"need 1 <= m1 < n1, got m1={m1}, n1={n1}")
    w = unit_root(n1)
    q = dft_rows(n1, m1)
    p = vandermonde(n1, w ** -np.arange(m1, n1))
    return q, p


def time_expand_pair(q: np.ndarray, p: np.ndarray, m2: int, n1: int) -> tuple[np.ndarray, np.ndarray]:
    """Lift per-slot ``(Q, P)`` to ``(Q kron I_n1, P kron I_m2)``."""
    q = np.atleast_2d(q)
    p = np.atleast_2d(p)
    if q.shape[1] != p.shape[0]:
        raise DomainError(f"Q is {q.shape} but P is {p.shape}")
    if m2 < 1 or n1 < 1:
        raise DomainError("antenna counts must be positive")
    return np.kron(q, np.eye(n1)), np.kron(p, np.eye(m2))


@dataclass(frozen=True)
class ModeSwitchPattern:
    """Modes used by transmitter 1 in each slot of a block (1-based indices)."""

    slots: tuple[tuple[int, ...], ...]
    k: int

    def __post_init__(self) -> None:
        slots = tuple(tuple(int(i) for i in s) for s in self.slots)
        object.__setattr__(self, "slots", slots)
        if not slots:
            raise DomainError("pattern needs at least one slot")
        width = len(slots[0])
        for s in slots:
            if len(s) != width or len(set(s)) != width:
                raise DomainError(f"slot {s} must list {width} distinct modes")
            if min(s) < 1 or max(s) > self.k:
                raise DomainError(f"slot {s} uses a mode outside 1..{self.k}")

    @property
    def length(self) -> int:
        return len(self.slots)

    @property
    def antennas(self) -> int:
        return len(self.slots[0])


def cyclic_pattern(k: int, m1: int, t_slots: int) -> ModeSwitchPattern:
    """Slot ``t`` uses modes ``t, t+1, ..., t+m1-1`` (mod ``k``)."""
    if m1 > k:
        raise DomainError(f"m1={m1} antennas cannot use {k} modes")
    if t_slots < 1 or m1 < 1:
        raise DomainError("need t_slots >= 1 and m1 >= 1")
    slots = [tuple((t + i) % k + 1 for i in range(m1)) for t in range(t_slots)]
    return ModeSwitchPattern(tuple(slots), k)


def constant_pattern(k: int, m1: int, t_slots: int) -> ModeSwitchPattern:
    """Negative control: the first ``m1`` modes in every slot."""
    return ModeSwitchPattern(tuple(tuple(range(1, m1 + 1)) for _ in range(t_slots)), k)


def block_diag(blocks) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def slot_channels(bank: np.ndarray, pattern: ModeSwitchPattern) -> list[np.ndarray]:
    if pattern.k > bank.shape[1] or max(max(s) for s in pattern.slots) > bank.shape[1]:
        raise DomainError(f"pattern uses modes beyond the {bank.shape[1]} bank columns")
    return [bank[:, [i - 1 for i in s]] for s in pattern.slots]


def direct_channel_from_slots(slots: list[np.ndarray], tilde_q: np.ndarray) -> np.ndarray:
    h11 = block_diag(slots)
    if tilde_q.shape[1] != h11.shape[0]:
        raise DomainError(f"tildeQ has {tilde_q.shape[1]} columns, block channel has {h11.shape[0]} rows")
    return tilde_q @ h11


def effective_direct_channel(bank: np.ndarray, pattern: ModeSwitchPattern, tilde_q: np.ndarray) -> np.ndarray:
    """User-1 channel after nulling, ``tilde_q @ blockdiag(H11(1), ..., H11(T))``."""
    return direct_channel_from_slots(slot_channels(bank, pattern), tilde_q)


def vandermonde_slot_channels(n1: int, m1: int) -> list[np.ndarray]:
    """Deterministic per-slot channels that make the DFT-nulled channel Vandermonde.

    ``H11(t)`` has columns ``g(w^(c n1 + t))`` for ``c < m1`` with
    ``w = exp(-2j pi / n1^2)``.
    """
    w = unit_root(n1 * n1)
    return [vandermonde(n1, w ** (np.arange(m1) * n1 + t)) for t in range(n1)]


def vandermonde_nodes(n1: int, m1: int) -> np.ndarray:
    w = unit_root(n1 * n1)
    return np.array([w ** (c * n1 + t) for t in range(n1) for c in range(m1)])


def r_matrix(n1: int, m1: int) -> np.ndarray:
    """Block matrix ``[(w^-s G)^i]`` for ``i, s < m1`` with ``G = diag(w^u)``.

    Cyclic switching over ``n1`` modes gives ``A' = (I_m1 kron H_hat) R``
    after grouping the columns of the nulled channel by mode.
    """
    w = unit_root(n1)
    g = np.diag(w ** np.arange(n1))
    out = np.zeros((m1 * n1, m1 * n1), dtype=complex)
    for i in range(m1):
        for s in range(m1):
            out[i * n1:(i + 1) * n1, s * n1:(s + 1) * n1] = np.linalg.matrix_power(w ** -s * g, i)
    return out


def r_matrix_blocks(n1: int, m1: int) -> list[np.ndarray]:
    """Diagonal blocks of ``R`` after grouping rows and columns by mode ``u``."""
    r = r_matrix(n1, m1)
    blocks = []
    for u in range(n1):
        idx = [i * n1 + u for i in range(m1)]
        blocks.append(r[np.ix_(idx, idx)])
    return blocks


def r_matrix_check(n1: int, m1: int) -> bool:
    if not 1 <= m1 < n1:
        raise DomainError(f"need 1 <= m1 < n1, got m1={m1}, n1={n1}")
    sv = np.linalg.svd(r_matrix(n1, m1), compute_uv=False)
    return bool(sv[-1] > 1e-9 * sv[0])


def beta_nulling(n1: int, m1: int) -> np.ndarray:
    """``I_m1 kron 1_beta^T`` for ``beta = n1 / m1``."""
    if m1 < 1 or n1 % m1:
        raise DomainError(f"n1={n1} is not a multiple of m1={m1}")
    beta = n1 // m1
    return np.kron(np.eye(m1), np.ones((1, beta)))


def successive_beamformer(beta: int) -> np.ndarray:
    """``[I_(beta-1); -1^T]``: lower-triangular beamformer nulled by ``1_beta^T``."""
    if beta < 2:
        raise DomainError(f"beta must be at least 2, got {beta}")
    return np.vstack([np.eye(beta - 1), -np.ones((1, beta - 1))])


def left_null_rows(a: np.ndarray, dim: int) -> np.ndarray:
    """``dim`` orthonormal rows spanning the left null space of ``a``."""
    n = a.shape[0]
    if a.shape[1] == 0:
        if dim != n:
            raise DegenerateChannelError(f"expected {n} null directions, asked for {dim}")
        return np.eye(n, dtype=complex)
    u, s, _ = np.linalg.svd(a)
    tol = max(a.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    if n - rank != dim:
        raise DegenerateChannelError(f"left null space has dimension {n - rank}, expected {dim}")
    return u[:, rank:].conj().T


@dataclass(frozen=True)
class Scheme:
    """A block scheme for receiver 1 / transmitter 2.

    ``tilde_q`` maps the ``n1*T`` received samples of a block to ``s1``
    interference-free observations and ``tilde_p`` maps ``s2`` user-2 streams
    onto the ``m2*T`` transmit samples.  ``factors`` keeps the constituent
    per-slot matrices for auditing.
    """

    config: SystemConfig
    expansion: int
    tilde_q: np.ndarray
    tilde_p: np.ndarray
    pattern: ModeSwitchPattern
    streams: tuple[int, int]
    factors: dict = field(default_factory=dict)
    blind: bool = True

    def __post_init__(self) -> None:
        s1, s2 = self.streams
        if self.tilde_q.shape[0] != s1:
            raise DomainError(f"tildeQ has {self.tilde_q.shape[0]} rows for {s1} streams")
        if self.tilde_p.shape[1] != s2:
            raise DomainError(f"tildeP has {self.tilde_p.shape[1]} columns for {s2} streams")

    def to_dict(self) -> dict:
        return {
            "system": list(self.config.as_tuple()),
            "expansion": self.expansion,
            "modes": self.pattern.k,
            "pattern": [list(s) for s in self.pattern.slots],
            "streams": list(self.streams),
            "blind": self.blind,
            "tildeQ": matrix_to_json(self.tilde_q),
            "tildeP": matrix_to_json(self.tilde_p),
            "factors": {k: matrix_to_json(v) for k, v in self.factors.items()},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "Scheme":
        return cls(
            config=SystemConfig(*data["system"]),
            expansion=int(data["expansion"]),
            tilde_q=matrix_from_json(data["tildeQ"]),
            tilde_p=matrix_from_json(data["tildeP"]),
            pattern=ModeSwitchPattern(tuple(tuple(s) for s in data["pattern"]), int(data["modes"])),
            streams=tuple(data["streams"]),
            factors={k: matrix_from_json(v) for k, v in data["factors"].items()},
            blind=bool(data["blind"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "Scheme":
        return cls.from_dict(json.loads(text))


def matrix_to_json(a: np.ndarray) -> list:
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(rows: list) -> np.ndarray:
    if not rows:
        return np.zeros((0, 0), dtype=complex)
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex).reshape(
        len(rows), len(rows[0])
    )


def _normalize_columns(a: np.ndarray) -> np.ndarray:
    if a.shape[1] == 0:
        return a
    return a / np.linalg.norm(a, axis=0, keepdims=True)


def build_space_freq_scheme(config: SystemConfig, k: int, h12: np.ndarray | None = None) -> Scheme:
    """Joint space-frequency nulling/beamforming with ``k`` modes at transmitter 1.

    Receiver 1 keeps the first ``M1`` of ``k`` DFT bins and, spatially,
    the ``k`` directions orthogonal to ``h12 @ P_b^S``.  Transmitter 2 sends
    ``m (k - M1)`` streams on the other bins from ``m = min(M2, N2)``
    antennas, plus ``M1 (N1 - k)`` streams on the kept bins from its first
    ``N1 - k`` antennas.

    With ``k = N1`` the spatial part is the identity and the scheme does not
    depend on ``h12`` at all; with ``k = M1`` it is pure spatial zero forcing.

    Parameters
    ----------
    config : SystemConfig
        Must satisfy ``M1 < N1 < min(M2, N2)``.
    k : int
        Modes (and slots per block), ``M1 <= k <= N1``.
    h12 : ndarray, optional
        ``N1 x M2`` cross channel; required when ``k < N1``.

    Raises
    ------
    DegenerateChannelError
        If ``h12`` leaves a left null space of the wrong dimension.
    """
    m1, n1, m2, _ = config.as_tuple()
    if not needs_switching(reduce_min_antennas(config)):
        raise DomainError(f"space-frequency scheme needs M1 < N1 < min(M2, N2), got {config}")
    if not m1 <= k <= n1:
        raise DomainError(f"k={k} outside [{m1}, {n1}]")
    m = min(config.m2, config.n2)

    w = unit_root(k)
    q_f = dft_rows(k, m1)
    p_a_f = vandermonde(k, w ** -np.arange(m1, k))
    p_b_f = q_f.conj().T
    p_a_s = np.eye(m2, m)
    p_b_s = np.eye(m2, n1 - k)

    blind = k == n1
    if blind:
        q_s = np.eye(n1, dtype=complex)
    else:
        if h12 is None:
            raise DomainError("h12 is required when k < N1")
        h12 = np.asarray(h12, dtype=complex)
        if h12.shape != (n1, m2):
            raise DomainError(f"h12 must be {n1}x{m2}, got {h12.shape}")
        q_s = left_null_rows(h12 @ p_b_s, k)

    tilde_q = np.kron(q_f, q_s)
    tilde_p = _normalize_columns(np.hstack([np.kron(p_a_f, p_a_s), np.kron(p_b_f, p_b_s)]))
    s2 = m * (k - m1) + m1 * (n1 - k)
    factors = {"QF": q_f, "QS": q_s, "PaF": p_a_f, "PaS": p_a_s, "PbF": p_b_f, "PbS": p_b_s}
    return Scheme(
        config=config,
        expansion=k,
        tilde_q=tilde_q,
        tilde_p=tilde_p,
        pattern=cyclic_pattern(k, m1, k),
        streams=(k * m1, s2),
        factors=factors,
        blind=blind,
    )


def build_full_mode_scheme(config: SystemConfig) -> Scheme:
    """DFT nulling over ``N1`` slots with ``N1`` cyclically switched modes."""
    return build_space_freq_scheme(config, config.n1)


def build_beta_scheme(config: SystemConfig) -> Scheme:
    """Zero/one nulling ``I_M1 kron 1_beta^T`` when ``beta = N1/M1`` is an integer.

    Slot ``g*beta + b`` uses the ``b``-th group of ``M1`` modes, so only
    ``N1`` modes are needed and every group of ``beta`` slots decouples.
    User 2 uses the successive-decoding beamformer in each group.
    """
    m1, n1, m2, n2 = config.as_tuple()
    if not needs_switching(reduce_min_antennas(config)):
        raise DomainError(f"beta scheme needs M1 < N1 < min(M2, N2), got {config}")
    q = beta_nulling(n1, m1)
    beta = n1 // m1
    p = np.kron(np.eye(m1), successive_beamformer(beta))
    m = min(m2, n2)
    tilde_q = np.kron(q, np.eye(n1))
    tilde_p = _normalize_columns(np.kron(p, np.eye(m2, m)))
    slots = tuple(
        tuple(b * m1 + i + 1 for i in range(m1)) for _ in range(m1) for b in range(beta)
    )
    return Scheme(
        config=config,
        expansion=n1,
        tilde_q=tilde_q,
        tilde_p=tilde_p,
        pattern=ModeSwitchPattern(slots, n1),
        streams=(m1 * n1, m * (n1 - m1)),
        factors={"Q": q, "P": p},
        blind=True,
    )


def with_pattern(scheme: Scheme, pattern: ModeSwitchPattern) -> Scheme:
    """Copy of ``scheme`` driven by a different switching pattern."""
    if pattern.length != scheme.pattern.length:
        raise DomainError("pattern length must match the scheme expansion")
    return Scheme(
        scheme.config, scheme.expansion, scheme.tilde_q, scheme.tilde_p, pattern,
        scheme.streams, scheme.factors, scheme.blind,
    )


@dataclass(frozen=True)
class ConditionReport:
    nulling_residual: float
    residual_tol: float
    direct_margin: float
    beamformer_margin: float
    whitening_error: float
    nulling_ok: bool
    direct_rank_ok: bool
    beamformer_rank_ok: bool

    @property
    def passed(self) -> bool:
        return self.nulling_ok and self.direct_rank_ok and self.beamformer_rank_ok

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def _margin(a: np.ndarray) -> float:
    if a.size == 0:
        return 1.0
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0:
        return 0.0
    if a.shape[0] < a.shape[1]:
        return 0.0
    return float(sv[-1] / sv[0])


def whitening_error(tilde_q: np.ndarray) -> float:
    """Relative distance of ``tilde_q tilde_q^H`` from its best scalar multiple of I."""
    sigma = tilde_q @ tilde_q.conj().T
    scale = np.trace(sigma).real / sigma.shape[0]
    return float(np.linalg.norm(sigma - scale * np.eye(sigma.shape[0])) / np.linalg.norm(sigma))


def verify_conditions(scheme: Scheme, bank: np.ndarray, h12: np.ndarray) -> ConditionReport:
    """Evaluate the nulling and rank conditions of ``scheme`` on one block."""
    t = scheme.expansion
    h12 = np.asarray(h12, dtype=complex)
    cross = scheme.tilde_q @ np.kron(np.eye(t), h12) @ scheme.tilde_p
    residual = float(np.max(np.abs(cross))) if cross.size else 0.0
    tol = RESIDUAL_TOL * float(np.linalg.norm(h12, 2))
    a = effective_direct_channel(bank, scheme.pattern, scheme.tilde_q)
    direct = _margin(a)
    beam = _margin(scheme.tilde_p)
    return ConditionReport(
        nulling_residual=residual,
        residual_tol=tol,
        direct_margin=direct,
        beamformer_margin=beam,
        whitening_error=whitening_error(scheme.tilde_q),
        nulling_ok=residual < tol,
        direct_rank_ok=direct > RANK_TOL,
        beamformer_rank_ok=beam > RANK_TOL,
    )
