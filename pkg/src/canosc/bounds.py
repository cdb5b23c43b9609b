"""Tail statistics and the quantitative bounds on the diagonal threshold.

With ``W(x) = int_x^inf sin^2 phi``, ``A = limsup x W(x)`` and
``B = liminf x W(x)`` control the diagonal edge:

    1/(2 sqrt A) <= M(H_d) <= 1/sqrt A,     M(H_d) <= 1/(2 sqrt B),

and the full system is sandwiched as ``M_d/2 <= M <= (3 + sqrt 5)/2 * M_d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .interval import INF, Bracket, bracket_ratio, encode_real
from .model import CoefficientField, DomainError
from .transforms import prepare

# 2 / (3 - sqrt 5), written without the cancellation
SANDWICH_UPPER = (3.0 + math.sqrt(5.0)) / 2.0
SANDWICH_LOWER = 0.5

__all__ = [
    "TailPolicy",
    "TailStats",
    "tail_stats",
    "thm13_interval",
    "thm14_upper",
    "thm11_interval",
    "discrete_spectrum",
    "ConsistencyReport",
    "consistency_report",
    "SANDWICH_UPPER",
]


@dataclass(frozen=True)
class TailPolicy:
    """Log-spaced sampling of ``x W(x)``; limsup/liminf over the last decade."""

    x_start: float = 1.0
    x_max: float = 1e8
    per_decade: int = 16
    rel_tol: float = 1e-10

    def __post_init__(self):
        if not (0 < self.x_start < self.x_max and math.isfinite(self.x_max)):
            raise DomainError("need 0 < x_start < x_max < inf")
        if self.per_decade < 2:
            raise DomainError("per_decade must be at least 2")

    def grid(self) -> np.ndarray:
        decades = math.log10(self.x_max / self.x_start)
        n = max(int(round(decades * self.per_decade)), 2) + 1
        return np.geomspace(self.x_start, self.x_max, n)


@dataclass(frozen=True)
class TailStats:
    samples: tuple[tuple[float, float, float], ...]  # (x, W(x), x W(x))
    A_hat: float
    B_hat: float
    exact: bool
    diagnostics: dict = field(default_factory=dict)
    source: str = ""

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "A_hat": encode_real(self.A_hat),
            "B_hat": encode_real(self.B_hat),
            "exact": self.exact,
            "diagnostics": self.diagnostics,
            "samples": [list(s) for s in self.samples],
        }


def _breakpoints(fld: CoefficientField, a: float, b: float) -> list[float] | None:
    base = fld.extras.get("breakpoint_base")
    if base is None:
        return None
    lo, hi = math.ceil(math.log(a, base)), math.floor(math.log(b, base))
    pts = [base ** k for k in range(lo, hi + 1) if a < base ** k < b]
    return pts or None


def _quadrature_W(fld: CoefficientField, xs: np.ndarray, rel_tol: float) -> tuple[np.ndarray, dict]:
    """``W`` at ``xs`` by interval quadrature plus a fitted power-law tail past ``xs[-1]``."""
    s2 = fld.sin2
    X = float(xs[-1])
    diag: dict = {}

    def mass(a, b):
        return integrate.quad(s2, a, b, points=_breakpoints(fld, a, b), limit=400,
                              epsabs=0.0, epsrel=rel_tol)[0]

    # power-law remainder beyond X, exponent fitted from the masses of the last
    # two windows; a family with log-periodic modulation declares its period so
    # that the windows cover whole periods
    F = float(fld.extras.get("log_period", 10.0))
    last, prev = mass(X / F, X), mass(X / F ** 2, X / F)
    if last == 0.0:
        rest = 0.0
        diag["tail_model"] = "zero past the horizon"
    elif prev <= 0.0:
        rest = 0.0
        diag["tail_model"] = "assumed zero (sin^2 phi not fittable)"
    else:
        p = 1.0 + math.log(prev / last, F)
        diag["fitted_exponent"] = p
        if p > 1.0:
            rest = last / (F ** (p - 1.0) - 1.0)
            diag["tail_model"] = f"power law x^-{p:.4g}"
        else:
            rest = INF
            diag["tail_model"] = "divergent"
            diag["divergent"] = f"sin^2 phi decays like x^-{p:.4g}; its integral does not converge"
    W = np.empty(len(xs))
    acc = rest
    W[-1] = acc
    for i in range(len(xs) - 2, -1, -1):
        a, b = float(xs[i]), float(xs[i + 1])
        acc += mass(a, b)
        W[i] = acc
    return W, diag


def tail_stats(fld: CoefficientField, policy: TailPolicy | None = None, *, quadrature: bool = False) -> TailStats:
    """``A_hat, B_hat`` as sup/inf of ``x W(x)`` over the last sampled decade.

    A closed-form tail is used directly (``exact``) unless ``quadrature`` is
    requested.  The field is prepared first (trace-normed, L^2 direction on e_1).
    """
    policy = policy or TailPolicy()
    prepared = prepare(fld)
    xs = policy.grid()
    extra = _breakpoints(prepared, float(xs[0]), float(xs[-1]))
    if extra:
        # extrema of x W(x) sit on the block boundaries of piecewise families
        xs = np.union1d(xs, extra)
    tail = prepared.tail
    diag: dict = {}
    if tail is not None and not quadrature:
        W = np.array([tail.W(float(x)) for x in xs])
        exact = True
    else:
        W, diag = _quadrature_W(prepared, xs, policy.rel_tol)
        exact = False
    xw = xs * W
    samples = tuple((float(x), float(w), float(v)) for x, w, v in zip(xs, W, xw))
    if exact:
        A, B = tail.A_exact, tail.B_exact
    elif diag.get("divergent"):
        # infinity is never estimated from finite data, only reported as a failure
        raise DomainError(diag["divergent"])
    else:
        last = xs >= policy.x_max / 10.0 * (1 - 1e-12)
        prev = (xs >= policy.x_max / 100.0 * (1 - 1e-12)) & ~last
        A, B = float(xw[last].max()), float(xw[last].min())
        if prev.any():
            diag["decade_drift"] = {"sup": abs(A - float(xw[prev].max())), "inf": abs(B - float(xw[prev].min()))}
        if np.any(np.diff(W) > 0):
            diag["non_monotone_W"] = True
    return TailStats(samples, A, B, exact, diag, fld.name)


def _check_nonneg(v: float, name: str) -> None:
    if math.isnan(v) or v < 0:
        raise DomainError(f"{name} must lie in [0, inf], got {v}")


def thm13_interval(A: float) -> Bracket:
    """``[1/(2 sqrt A), 1/sqrt A]``; ``A = 0`` gives the at-infinity sentinel, ``A = inf`` gives ``[0, 0]``."""
    _check_nonneg(A, "A")
    if A == 0.0:
        return Bracket.infinite()
    if A == INF:
        return Bracket(0.0, 0.0)
    r = math.sqrt(A)
    return Bracket(0.5 / r, 1.0 / r)


def discrete_spectrum(A: float) -> bool:
    """``A = 0`` is exactly the case of empty essential spectrum."""
    return thm13_interval(A).is_infinite


def thm14_upper(B: float) -> float:
    """``1/(2 sqrt B)``; vacuous (inf) for ``B = 0``."""
    _check_nonneg(B, "B")
    if B == 0.0:
        return INF
    if B == INF:
        return 0.0
    return 0.5 / math.sqrt(B)


def thm11_interval(m_d: Bracket) -> Bracket:
    """Range allowed for M(H) given a bracket for M(H_d)."""
    if m_d.is_infinite:
        return Bracket.infinite()
    return Bracket(m_d.lo * SANDWICH_LOWER, m_d.hi * SANDWICH_UPPER)


@dataclass(frozen=True)
class ConsistencyReport:
    source: str
    checks: dict  # name -> {"passed": bool | None, "detail": str}
    intervals: dict
    ratio: Bracket | None
    lower_endpoint_attained: bool | None
    discrete_spectrum: bool

    @property
    def passed(self) -> bool:
        return all(c["passed"] is not False for c in self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, c in self.checks.items() if c["passed"] is False]

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "passed": self.passed,
            "checks": self.checks,
            "intervals": {k: (v.to_json() if isinstance(v, Bracket) else encode_real(v))
                          for k, v in self.intervals.items()},
            "ratio_M_over_Md": None if self.ratio is None else self.ratio.to_json(),
            "lower_endpoint_attained": self.lower_endpoint_attained,
            "discrete_spectrum": self.discrete_spectrum,
        }


def _overlap(a: Bracket, b: Bracket) -> bool:
    if a.is_infinite or b.is_infinite:
        return a.is_infinite and b.is_infinite
    return a.overlaps(b)


def consistency_report(fld: CoefficientField, est, s, stats: TailStats, est_diag=None,
                       rel: float = 0.05) -> ConsistencyReport:
    """Cross-check measured brackets against the tail bounds and the sandwich.

    ``est`` is the :class:`SpectralEstimate` of ``fld``; ``est_diag`` that of its
    diagonal part (defaults to ``est`` for diagonal fields); ``s`` is an
    ``SBracketResult`` or a :class:`Bracket`.  Measured brackets are inflated
    by their own width plus ``rel`` before comparison.  Checks that need a
    missing input are recorded with ``passed = None``.
    """
    s_br = s.bracket if hasattr(s, "bracket") else s
    for name, obj in (("estimate", est), ("S bracket", s), ("tail stats", stats)):
        src = getattr(obj, "source", "")
        if src and src != fld.name:
            raise DomainError(f"{name} was computed for {src!r}, not {fld.name!r}")
    if est_diag is None and fld.diagonal:
        est_diag = est
    m = est.m.inflate(rel)
    md = est_diag.m.inflate(rel) if est_diag is not None else None
    i13 = thm13_interval(stats.A_hat)
    u14 = thm14_upper(stats.B_hat)
    checks: dict = {}

    def put(key, passed, detail):
        checks[key] = {"passed": passed, "detail": detail}

    if md is None:
        put("a_thm13", None, "no diagonal estimate supplied")
        put("b_thm14", None, "no diagonal estimate supplied")
        put("c_thm12", None, "no diagonal estimate supplied")
        put("d_thm11", None, "no diagonal estimate supplied")
        put("e_symmetry", None, "no diagonal estimate supplied")
    else:
        put("a_thm13", _overlap(md, i13), f"M_d {est_diag.m} vs {i13}")
        put("b_thm14", md.lo <= u14 * (1 + rel), f"M_d {est_diag.m} vs upper {u14:.6g}")
        put("c_thm12", _overlap(md, s_br.inflate(rel)), f"S {s_br} vs M_d {est_diag.m}")
        i11 = thm11_interval(est_diag.m)
        put("d_thm11", _overlap(m, i11), f"M {est.m} vs {i11}")
        put("e_symmetry", est_diag.m_plus.inflate(rel).overlaps(est_diag.m_minus.inflate(rel))
            if not est_diag.m_plus.is_infinite or not est_diag.m_minus.is_infinite else True,
            f"M_+ {est_diag.m_plus} vs |M_-| {est_diag.m_minus}")
    ratio = attained = None
    if est_diag is not None and not est.m.is_infinite and not est_diag.m.is_infinite:
        ratio = bracket_ratio(est.m, est_diag.m)
        attained = ratio.contains(SANDWICH_LOWER)
        put("ratio_upper", ratio.lo <= SANDWICH_UPPER, f"M/M_d {ratio} vs {SANDWICH_UPPER:.6g}")
    intervals = {"thm13": i13, "thm14_upper": u14, "m": est.m, "s": s_br}
    if est_diag is not None:
        intervals["m_d"] = est_diag.m
        intervals["thm11"] = thm11_interval(est_diag.m)
    return ConsistencyReport(fld.name, checks, intervals, ratio, attained, discrete_spectrum(stats.A_hat))
