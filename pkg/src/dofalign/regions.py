"""Exact two-user DoF regions.

Every region is a bounded polytope in the nonnegative quadrant, stored as a
list of half-planes ``a1*d1 + a2*d2 <= b`` with :class:`fractions.Fraction`
coefficients.  Nothing in this module touches floating point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from .core import (
    CSIT,
    Channel,
    DomainError,
    Result,
    Scenario,
    Side,
    SystemConfig,
    classify,
    effective_modes,
    needs_switching,
)

def _q(x) -> Fraction:
    if type(x) is Fraction:
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted in exact region arithmetic")
    return Fraction(x)


@dataclass(frozen=True, order=True)
class DofPoint:
    d1: Fraction
    d2: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "d1", _q(self.d1))
        object.__setattr__(self, "d2", _q(self.d2))
        if self.d1 < 0 or self.d2 < 0:
            raise DomainError(f"DoF point must be nonnegative, got ({self.d1}, {self.d2})")

    def __str__(self) -> str:
        return f"({self.d1},{self.d2})"


@dataclass(frozen=True)
class HalfPlane:
    """``a1*d1 + a2*d2 <= b`` with nonnegative rational coefficients."""

    a1: Fraction
    a2: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        for name in ("a1", "a2", "b"):
            object.__setattr__(self, name, _q(getattr(self, name)))
        if self.a1 == 0 and self.a2 == 0:
            raise DomainError("half-plane needs a nonzero normal")
        if self.a1 < 0 or self.a2 < 0 or self.b < 0:
            raise DomainError(f"negative coefficient in {self}")

    def lhs(self, p: DofPoint) -> Fraction:
        return self.a1 * p.d1 + self.a2 * p.d2

    def satisfied(self, p: DofPoint) -> bool:
        return self.lhs(p) <= self.b

    def swapped(self) -> "HalfPlane":
        return HalfPlane(self.a2, self.a1, self.b)

    def __str__(self) -> str:
        terms = []
        if self.a1:
            terms.append("d1" if self.a1 == 1 else f"({self.a1})d1")
        if self.a2:
            terms.append("d2" if self.a2 == 1 else f"({self.a2})d2")
        return " + ".join(terms) + f" <= {self.b}"


@dataclass(frozen=True)
class DofRegion:
    inequalities: tuple[HalfPlane, ...]
    vertices: tuple[DofPoint, ...] = field(default=(), compare=False)

    @classmethod
    def from_halfplanes(cls, halfplanes: Iterable[HalfPlane]) -> "DofRegion":
        hp = tuple(halfplanes)
        return cls(hp, tuple(_enumerate(hp)))

    def swapped(self) -> "DofRegion":
        """The region with the roles of ``d1`` and ``d2`` exchanged."""
        return DofRegion.from_halfplanes(h.swapped() for h in self.inequalities)

    def to_dict(self) -> dict:
        return {
            "inequalities": [
                {"a1": str(h.a1), "a2": str(h.a2), "b": str(h.b)} for h in self.inequalities
            ],
            "vertices": [[str(v.d1), str(v.d2)] for v in self.vertices],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "DofRegion":
        hp = tuple(
            HalfPlane(Fraction(h["a1"]), Fraction(h["a2"]), Fraction(h["b"]))
            for h in data["inequalities"]
        )
        verts = tuple(DofPoint(Fraction(a), Fraction(b)) for a, b in data["vertices"])
        return cls(hp, verts)

    @classmethod
    def from_json(cls, text: str) -> "DofRegion":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# vertex enumeration


def _cross(o: DofPoint, a: DofPoint, b: DofPoint) -> Fraction:
    return (a.d1 - o.d1) * (b.d2 - o.d2) - (a.d2 - o.d2) * (b.d1 - o.d1)


def _enumerate(halfplanes: tuple[HalfPlane, ...]) -> list[DofPoint]:
    if not any(h.a1 > 0 for h in halfplanes) or not any(h.a2 > 0 for h in halfplanes):
        raise DomainError("region is unbounded")

    # the axes d1 = 0 and d2 = 0 join the constraint lines
    lines = [(Fraction(1), Fraction(0), Fraction(0)), (Fraction(0), Fraction(1), Fraction(0))]
    lines += [(h.a1, h.a2, h.b) for h in halfplanes]

    found: set[DofPoint] = set()
    for (a1, a2, b), (c1, c2, e) in combinations(lines, 2):
        det = a1 * c2 - a2 * c1
        if det == 0:
            continue
        x = (b * c2 - a2 * e) / det
        y = (a1 * e - b * c1) / det
        if x < 0 or y < 0:
            continue
        p = DofPoint(x, y)
        if all(h.satisfied(p) for h in halfplanes):
            found.add(p)

    origin = DofPoint(0, 0)
    rest = [p for p in found if p != origin]

    # counterclockwise around the origin: ascending polar angle, all points in quadrant I
    def angle_key(p: DofPoint):
        return (0, p.d2 / p.d1) if p.d1 > 0 else (1, Fraction(0))

    rest.sort(key=lambda p: (angle_key(p), p.d1 + p.d2))
    # keep only the farthest point on each ray from the origin
    hull: list[DofPoint] = [origin]
    for p in rest:
        if len(hull) > 1 and _cross(origin, hull[-1], p) == 0:
            hull[-1] = p
        else:
            hull.append(p)
    # drop points lying on a hull edge
    changed = True
    while changed and len(hull) > 2:
        changed = False
        n = len(hull)
        for i in range(n):
            if _cross(hull[i - 1], hull[i], hull[(i + 1) % n]) == 0:
                del hull[i]
                changed = True
                break
    return hull


def enumerate_vertices(region: DofRegion) -> list[DofPoint]:
    """Exact vertices of ``region``, counterclockwise from the origin."""
    if region.vertices:
        return list(region.vertices)
    return _enumerate(region.inequalities)


def contains(region: DofRegion, p: DofPoint) -> bool:
    return all(h.satisfied(p) for h in region.inequalities)


def region_equal(r1: DofRegion, r2: DofRegion) -> bool:
    return set(enumerate_vertices(r1)) == set(enumerate_vertices(r2))


def region_subset(r1: DofRegion, r2: DofRegion) -> bool:
    """True when ``r1`` is contained in ``r2``."""
    return all(contains(r2, v) for v in enumerate_vertices(r1))


def region_strict_subset(r1: DofRegion, r2: DofRegion) -> bool:
    return region_subset(r1, r2) and not region_equal(r1, r2)


# ---------------------------------------------------------------------------
# region formulas


def _box(config: SystemConfig) -> list[HalfPlane]:
    return [
        HalfPlane(1, 0, min(config.m1, config.n1)),
        HalfPlane(0, 1, min(config.m2, config.n2)),
    ]


def zic_csit_halfplanes(config: SystemConfig) -> list[HalfPlane]:
    m1, n1, m2, n2 = config.as_tuple()
    return _box(config) + [HalfPlane(1, 1, min(max(n1, m2), n1 + n2, m1 + m2))]


def fic_csit_halfplanes(config: SystemConfig) -> list[HalfPlane]:
    m1, n1, m2, n2 = config.as_tuple()
    return _box(config) + [HalfPlane(1, 1, min(max(n1, m2), max(m1, n2), n1 + n2, m1 + m2))]


def _outer_user1(config: SystemConfig) -> HalfPlane:
    m1, n1, m2, n2 = config.as_tuple()
    return HalfPlane(1, Fraction(min(n1, n2, m2), min(n2, m2)), min(m1 + m2, n1))


def _outer_user2(config: SystemConfig) -> HalfPlane:
    m1, n1, m2, n2 = config.as_tuple()
    return HalfPlane(Fraction(min(n1, n2, m1), min(n1, m1)), 1, min(m1 + m2, n2))


def zic_nocsit_halfplanes(config: SystemConfig) -> list[HalfPlane]:
    """Region of the Z channel without CSIT when enough modes are available."""
    return _box(config) + [_outer_user1(config)]


def fic_nocsit_halfplanes(config: SystemConfig) -> list[HalfPlane]:
    """Outer bound for the full channel without CSIT (tight with enough modes)."""
    return _box(config) + [_outer_user1(config), _outer_user2(config)]


def iid_alpha(config: SystemConfig) -> int:
    m1, n1, m2, _ = config.as_tuple()
    return min(m1 + m2, n1) - min(m1, n1)


def iid_halfplanes(config: SystemConfig) -> list[HalfPlane]:
    """Region for i.i.d. isotropic fading without switching, ``N1 <= N2``.

    The shifted constraint ``d1 + c (d2 - alpha) <= min(M1, N1)`` is stored
    as ``d1 + c d2 <= min(M1, N1) + c alpha``.
    """
    m1, n1, m2, n2 = config.as_tuple()
    if n1 > n2:
        raise DomainError(f"i.i.d. region formula needs N1 <= N2, got {config}")
    alpha = iid_alpha(config)
    den = min(n2, m2) - alpha
    if den <= 0:
        raise DomainError(f"degenerate i.i.d. region coefficient for {config}")
    c = Fraction(min(n1, m2) - alpha, den)
    return _box(config) + [HalfPlane(1, c, min(m1, n1) + c * alpha)]


def limited_modes_halfplanes(config: SystemConfig, k: int) -> list[HalfPlane]:
    """Region with ``K`` antenna modes at transmitter 1, ``M1 <= K <= N1``.

    At ``K = N1`` this coincides with the enough-modes region, at ``K = M1``
    with the i.i.d. region.
    """
    m1, n1, _, _ = config.as_tuple()
    if not needs_switching(config):
        raise DomainError(f"limited-modes region needs M1 < N1 < min(M2, N2), got {config}")
    if not m1 <= k <= n1:
        raise DomainError(f"K={k} outside [{m1}, {n1}]")
    m = min(config.m2, config.n2)
    den = m - (n1 - k)
    coef = Fraction(k, den)
    rhs = m1 + Fraction(k * (n1 - m1) + (m - n1) * (k - m1), den)
    return _box(config) + [HalfPlane(1, coef, rhs)]


def limited_modes_region(config: SystemConfig, k: int) -> DofRegion:
    return DofRegion.from_halfplanes(limited_modes_halfplanes(config, k))


def build_region(config: SystemConfig, scenario: Scenario) -> DofRegion:
    """Exact DoF region of the result governing ``(config, scenario)``.

    Redundant inequalities of the closed-form descriptions are kept as they are.
    """
    label = classify(config, scenario)
    r = label.result
    if r is Result.THM1_ZIC_CSIT:
        hp = zic_csit_halfplanes(config)
    elif r is Result.FIC_CSIT:
        hp = fic_csit_halfplanes(config)
    elif r in (Result.THM2_C1, Result.THM2_C2):
        hp = zic_nocsit_halfplanes(config)
    elif r in (Result.THM3_C1, Result.THM3_C2, Result.THM3_C3):
        hp = fic_nocsit_halfplanes(config)
    else:
        k = effective_modes(config, scenario)
        if label.side is Side.TX2:
            inner = config.swapped()
            if r is Result.THM4_LIMITED_MODES:
                base = limited_modes_halfplanes(inner, _check_limited_k(inner, k))
            else:
                base = iid_halfplanes(inner)
            hp = [h.swapped() for h in base]
        elif r is Result.THM4_LIMITED_MODES:
            hp = limited_modes_halfplanes(config, _check_limited_k(config, k))
        else:
            hp = iid_halfplanes(config)
    return DofRegion.from_halfplanes(hp)


def _check_limited_k(config: SystemConfig, k: int) -> int:
    if not config.m1 <= k < config.n1:
        raise DomainError(f"K={k} outside [{config.m1}, {config.n1}) for the limited-modes case")
    return k


def zic_csit_zf_allocation(config: SystemConfig, d1: int) -> int:
    """User-2 stream count that zero forcing supports next to ``d1`` user-1 streams."""
    m1, n1, m2, n2 = config.as_tuple()
    if not 0 <= d1 <= min(m1, n1):
        raise DomainError(f"d1={d1} outside [0, {min(m1, n1)}]")
    if m2 >= n1:
        return min((m2 - n1) + (n1 - d1), n2)
    for d2 in range(min(m2, n2), -1, -1):
        if min(n1 - d2, m1) >= d1:
            return d2
    raise DomainError(f"no feasible d2 for d1={d1} in {config}")  # pragma: no cover


def limited_modes_corner(config: SystemConfig, k: int) -> DofPoint:
    """Per-slot DoF pair reached by the space-frequency scheme over ``K`` slots."""
    m1, n1, _, _ = config.as_tuple()
    if not needs_switching(config):
        raise DomainError(f"corner needs M1 < N1 < min(M2, N2), got {config}")
    if not m1 <= k <= n1:
        raise DomainError(f"K={k} outside [{m1}, {n1}]")
    m = min(config.m2, config.n2)
    return DofPoint(m1, Fraction(m * (k - m1) + m1 * (n1 - k), k))


def unknown_corner(config: SystemConfig) -> DofPoint:
    """The corner ``(M1, min(M2,N2)(N1-M1)/N1)`` of the no-CSIT outer bound."""
    m = min(config.m2, config.n2)
    return DofPoint(config.m1, Fraction(m * (config.n1 - config.m1), config.n1))


def scenario(channel: str, csit: str, modes: int | None = None) -> Scenario:
    """Shorthand: ``scenario("zic", "absent", 2)``."""
    return Scenario(Channel(channel), CSIT(csit), modes)
