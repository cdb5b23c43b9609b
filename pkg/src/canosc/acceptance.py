"""Acceptance criteria as runnable checks.

Every ``criterion_*`` function returns a :class:`CriterionResult`; ``run_all``
evaluates them in order.  Tolerances are those the criteria state.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import properties
from .bounds import tail_stats, thm11_interval, thm13_interval, thm14_upper
from .interval import Bracket, bracket_ratio
from .model import builtin_family
from .schrodinger import (ShootingPolicy, euler_zero_count, negative_spectrum_finite, riccati_crosscheck, s_bracket,
                          shoot_zero_energy)
from .spectrum import Verdict, classify, m_estimate
from .transforms import diagonal_to_dirac


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name}: {self.detail}"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed, "detail": self.detail,
                "seconds": self.seconds}


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def criterion_1() -> CriterionResult:
    est, dt = _timed(m_estimate, builtin_family("section5"))
    ok = est.m.width <= 0.05 and est.m.contains(0.25) and dt <= 120
    return CriterionResult(1, "section5 full system M = 1/4", ok, f"m = {est.m}, width {est.m.width:.4g}, {dt:.1f}s", dt)


def criterion_2() -> CriterionResult:
    t0 = time.perf_counter()
    est_d = m_estimate(builtin_family("section5_diagonal"))
    est = m_estimate(builtin_family("section5"))
    ratio = bracket_ratio(est.m, est_d.m)
    ok = est_d.m.width <= 0.05 and est_d.m.contains(0.5) and ratio.contains(0.5)
    return CriterionResult(2, "section5 diagonal M_d = 1/2, sandwich lower end attained", ok,
                           f"m_d = {est_d.m}, M/M_d in {ratio}", time.perf_counter() - t0)


def criterion_3() -> CriterionResult:
    t0 = time.perf_counter()
    fld = builtin_family("power_tail", c=1.0, p=2.0)
    est = m_estimate(fld)
    exact = tail_stats(fld)
    quad = tail_stats(fld, quadrature=True)
    inconclusive = sorted(set(est.m_plus.inconclusive) | set(est.m_minus.inconclusive))
    reported = all("inconclusive_probes" in b.to_json() for b in (est.m_plus, est.m_minus, est.m))
    ok = (est.m.contains(0.5) and est.m.width <= 0.2 and reported
          and exact.exact and exact.A_hat == 1.0 and exact.B_hat == 1.0
          and abs(quad.A_hat - 1.0) <= 1e-3 and abs(quad.B_hat - 1.0) <= 1e-3)
    return CriterionResult(
        3, "power tail c=1 p=2", ok,
        f"m = {est.m}, inconclusive probes {[round(t, 6) for t in inconclusive]}, "
        f"A,B exact = {exact.A_hat},{exact.B_hat}, quadrature = {quad.A_hat:.8f},{quad.B_hat:.8f}",
        time.perf_counter() - t0)


def criterion_4() -> CriterionResult:
    i1, u1, i0 = thm13_interval(1.0), thm14_upper(1.0), thm13_interval(0.0)
    i11 = thm11_interval(Bracket(0.5, 0.5))
    ok = (abs(i1.lo - 0.5) <= 1e-12 and abs(i1.hi - 1.0) <= 1e-12 and abs(u1 - 0.5) <= 1e-12
          and i0.is_infinite and abs(i11.lo - 0.25) <= 1e-12
          and abs(i11.hi - 0.5 * 2 / (3 - math.sqrt(5))) <= 1e-12)
    return CriterionResult(4, "tail-bound arithmetic", ok,
                           f"A=1 -> {i1}, B=1 -> {u1}, A=0 -> {i0} (discrete spectrum), [0.5,0.5] -> {i11}")


def criterion_5() -> CriterionResult:
    t0 = time.perf_counter()
    fld = builtin_family("power_tail", c=1.0, p=2.0)
    pol = ShootingPolicy()
    s = s_bracket(fld, pol)
    v04, d04 = _timed(negative_spectrum_finite, fld, 0.4, pol)
    v1, d1 = _timed(negative_spectrum_finite, fld, 1.0, pol)
    count = shoot_zero_energy(fld, 1.0, 1e6).count
    oracle = euler_zero_count(1.0, 1e6)
    ok = (s.bracket.overlaps(Bracket(0.45, 0.55)) and v04.kind == "Finite" and v1.kind == "Infinite"
          and pol.x_max <= 1e8 and d04 <= 60 and d1 <= 60 and abs(count - oracle) <= 1)
    return CriterionResult(
        5, "Schroedinger probe threshold", ok,
        f"S in {s.bracket}; t=0.4 {v04.kind} ({d04:.2f}s), t=1 {v1.kind} ({d1:.2f}s); "
        f"zeros(X=1e6) = {count}, oracle {oracle}", time.perf_counter() - t0)


def criterion_6() -> CriterionResult:
    t0 = time.perf_counter()
    fld = builtin_family("power_tail", c=1.0, p=3.0)
    ts = list(np.geomspace(0.01, 100.0, 25))
    kinds = [classify(fld, s * float(t)).kind for t in ts for s in (1, -1)]
    est = m_estimate(fld)
    ok = all(k is Verdict.NON_OSCILLATORY for k in kinds) and est.m.is_infinite
    n_non = sum(k is Verdict.NON_OSCILLATORY for k in kinds)
    return CriterionResult(6, "discrete spectrum for p=3", ok,
                           f"{n_non}/{len(kinds)} probes NonOscillatory up to |t|=100, m = {est.m}",
                           time.perf_counter() - t0)


def criterion_7() -> CriterionResult:
    W = diagonal_to_dirac(builtin_family("section5_diagonal"))
    xs = np.linspace(0.0, 20.0, 100)
    err = max(abs(W(float(x)) - 0.5) for x in xs)
    return CriterionResult(7, "Dirac potential of a = e^x", err < 1e-12, f"max |W - 1/2| = {err:.3g} at 100 points")


def criterion_8() -> CriterionResult:
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, suite in properties.SUITES.items():
        n, bad = suite()
        ok = ok and not bad and n >= 200
        parts.append(f"{name} {n - len(bad)}/{n}")
    return CriterionResult(8, "property suites", ok, "; ".join(parts), time.perf_counter() - t0)


def criterion_9() -> CriterionResult:
    free = riccati_crosscheck(builtin_family("zero_phi"), 1.0, 1.0, 1e6)
    power = riccati_crosscheck(builtin_family("power_tail", c=1.0, p=2.0), 0.3, 1.0, 1e6)
    return CriterionResult(9, "Riccati cross-check", free < 1e-6 and power < 1e-6,
                           f"free residual {free:.3g}, power-tail residual {power:.3g}")


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9)


def run_all(skip: tuple[int, ...] = ()) -> list[CriterionResult]:
    out = []
    for i, fn in enumerate(CRITERIA, start=1):
        if i in skip:
            continue
        try:
            out.append(fn())
        except Exception as exc:  # a crash is a failure with its message, not an abort
            out.append(CriterionResult(i, fn.__name__, False, f"error: {type(exc).__name__}: {exc}"))
    return out

