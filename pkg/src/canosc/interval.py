"""Closed brackets on the extended half-line [0, inf]."""

from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf


def encode_real(v: float):
    """JSON-safe extended real: infinities become the strings ``"inf"``/``"-inf"``."""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def decode_real(v) -> float:
    return float(v)


@dataclass(frozen=True)
class Bracket:
    """``[lo, hi]`` with ``0 <= lo <= hi <= inf``; ``lo == inf`` is the at-infinity sentinel.

    ``hi == inf`` with finite ``lo`` means the upper side stayed unresolved.
    """

    lo: float
    hi: float
    inconclusive: tuple[float, ...] = ()

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty bracket [{self.lo}, {self.hi}]")

    @classmethod
    def infinite(cls) -> "Bracket":
        return cls(INF, INF)

    @classmethod
    def point(cls, v: float) -> "Bracket":
        return cls(v, v)

    @property
    def is_infinite(self) -> bool:
        return self.lo == INF

    @property
    def width(self) -> float:
        if self.is_infinite:
            return 0.0
        return self.hi - self.lo

    def contains(self, v: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= v <= self.hi + tol

    def overlaps(self, other: "Bracket", tol: float = 0.0) -> bool:
        return self.lo <= other.hi + tol and other.lo <= self.hi + tol

    def inflate(self, rel: float = 0.05) -> "Bracket":
        """Widen by the bracket's own width plus ``rel`` of its magnitude."""
        if self.is_infinite:
            return self
        pad_lo = self.width + rel * self.lo
        pad_hi = self.width + rel * self.hi
        return Bracket(max(0.0, self.lo - pad_lo), self.hi + pad_hi, self.inconclusive)

    def scale(self, lo_factor: float, hi_factor: float | None = None) -> "Bracket":
        hi_factor = lo_factor if hi_factor is None else hi_factor
        return Bracket(self.lo * lo_factor, self.hi * hi_factor)

    def to_json(self) -> dict:
        return {
            "lo": encode_real(self.lo),
            "hi": encode_real(self.hi),
            "at_infinity": self.is_infinite,
            "inconclusive_probes": list(self.inconclusive),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Bracket":
        return cls(decode_real(d["lo"]), decode_real(d["hi"]), tuple(d.get("inconclusive_probes", ())))

    def __str__(self) -> str:
        if self.is_infinite:
            return "inf"
        return f"[{self.lo:.6g}, {self.hi:.6g}]"


def bracket_min(a: Bracket, b: Bracket) -> Bracket:
    """Pointwise minimum of two uncertain quantities."""
    return Bracket(min(a.lo, b.lo), min(a.hi, b.hi))


def bracket_ratio(num: Bracket, den: Bracket) -> Bracket:
    """Range of ``num / den`` over both brackets (conservative at infinite ends)."""
    lo = 0.0 if den.hi == INF else num.lo / den.hi if den.hi > 0 else INF
    hi = INF if den.lo == 0 else num.hi / den.lo
    if num.is_infinite and den.is_infinite:
        return Bracket(0.0, INF)
    return Bracket(lo, max(lo, hi))
