"""Zero-energy shooting for the probe ``L(t) = -d^2/dx^2 - t^2 sin^2 phi``.

The Dirichlet solution is written as ``u = r sin(psi)``, ``u' = r cos(psi)``
and integrated through the rescaled angle ``tan(vartheta) = tan(psi) / rho``,
``rho = 1 + x``, in ``xi = ln rho``:

    dvartheta/dxi = cos^2 - sin cos + rho^2 t^2 sin^2(phi) sin^2

Both angles hit multiples of pi exactly at the zeros of u, so the zero count
over ``(0, X]`` is ``floor(vartheta / pi)``; the rescaled equation is
autonomous for ``sin^2 phi ~ C / x^2`` tails, which keeps long horizons cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from ._dopri import PI, AngleStepper, StiffnessError, solve_scalar
from .interval import INF, Bracket
from .model import CoefficientField, DomainError
from .prufer import write_csv
from .spectrum import ThresholdError, bisect_threshold
from .transforms import prepare

__all__ = [
    "ShootingPolicy",
    "ShootingRun",
    "ProbeVerdict",
    "shoot_zero_energy",
    "negative_spectrum_finite",
    "s_bracket",
    "riccati_crosscheck",
    "euler_zero_count",
    "write_zero_counts",
]


@dataclass(frozen=True)
class ShootingPolicy:
    """Horizons, verdict thresholds and bisection controls for the probe."""

    x_first: float = 10.0
    x_max: float = 1e8
    scaled_gain: float = math.pi
    plateau: float = 1e-3
    t_min: float = 1e-2
    t_max: float = 100.0
    rel_resolution: float = 1e-2
    max_probes: int = 80
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 10_000_000

    def __post_init__(self):
        vals = (self.x_first, self.x_max, self.scaled_gain, self.plateau, self.t_min, self.t_max,
                self.rel_resolution, self.rtol, self.atol)
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise DomainError("policy values must be positive and finite")
        if self.x_max < self.x_first or self.t_max < self.t_min:
            raise DomainError("need x_max >= x_first and t_max >= t_min")

    def horizons(self, X: float | None = None) -> list[float]:
        X = self.x_max if X is None else X
        out, x = [], self.x_first
        while x < X:
            out.append(x)
            x *= 2.0
        out.append(X)
        return out


@dataclass(frozen=True)
class ShootingRun:
    t: float
    psi: float  # lifted Pruefer angle of u at the last horizon
    zero_counts: tuple[tuple[float, int], ...]
    scaled: tuple[tuple[float, float], ...] = ()  # (X, vartheta(X))
    step_stats: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return self.zero_counts[-1][1]

    def count_at(self, X: float) -> int:
        """Zero count at the largest recorded horizon ``<= X``."""
        best = 0
        for x, c in self.zero_counts:
            if x <= X:
                best = c
        return best

    def to_json(self) -> dict:
        return {"t": self.t, "psi": self.psi, "zero_counts": [list(p) for p in self.zero_counts],
                "step_stats": self.step_stats}


def _probe_rhs(sin2, t: float):
    cos, sin, exp, expm1 = math.cos, math.sin, math.exp, math.expm1
    t2 = t * t

    def f(xi, v):
        rho = exp(xi)
        c, s = cos(v), sin(v)
        return c * c - s * c + t2 * sin2(expm1(xi)) * rho * rho * s * s

    return f


def _floor_count(k: int, r: float) -> int:
    return k if r >= 0.0 else k - 1


def _shoot(prepared: CoefficientField, t: float, horizons: list[float], policy: ShootingPolicy) -> ShootingRun:
    if not t >= 0 or not math.isfinite(t):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    st = AngleStepper(_probe_rhs(prepared.sin2, t), 0.0, 0, 0.0, rtol=policy.rtol, atol=policy.atol,
                      max_steps=policy.max_steps, to_x=math.expm1)
    counts, scaled = [], []
    for X in horizons:
        st.advance(math.log1p(X))
        counts.append((X, _floor_count(st.k, st.r)))
        scaled.append((X, st.angle))
    rho = 1.0 + horizons[-1]
    psi = st.k * PI + math.atan(rho * math.tan(st.r))
    stats = {"steps": st.steps, "rejected": st.rejected, "max_local_error": st.max_err}
    return ShootingRun(t, psi, tuple(counts), tuple(scaled), stats)


def shoot_zero_energy(fld: CoefficientField, t: float, X: float,
                      policy: ShootingPolicy | None = None) -> ShootingRun:
    """Dirichlet solution of ``-u'' - t^2 sin^2(phi) u = 0`` with zero counts up to ``X``.

    Counts are recorded at dyadic horizons ``x_first * 2^k`` and at ``X``.
    Stiffness errors from the integrator propagate.
    """
    if not X > 0:
        raise DomainError(f"X must be positive, got {X}")
    policy = policy or ShootingPolicy()
    return _shoot(prepare(fld), t, policy.horizons(X), policy)


@dataclass(frozen=True)
class ProbeVerdict:
    kind: str  # "Finite" | "Infinite" | "Inconclusive"
    t: float
    run: ShootingRun | None
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "t": self.t, "evidence": self.evidence}
        if self.run is not None:
            out["zero_counts"] = [list(p) for p in self.run.zero_counts]
        return out


def _angle_at(run: ShootingRun, X: float) -> float:
    best = run.scaled[0][1]
    for x, v in run.scaled:
        if x <= X:
            best = v
    return best


def _hille(prepared: CoefficientField, t: float, a: float) -> bool:
    tail = prepared.tail
    if tail is None or tail.sup_xw is None:
        return False
    return t * t * tail.sup_xw(a) < 0.25


def _verdict(prepared: CoefficientField, t: float, policy: ShootingPolicy) -> ProbeVerdict:
    if t == 0:
        return ProbeVerdict("Finite", 0.0, None, {"reason": "t = 0 is the free equation"})
    X = policy.x_max
    q1, q2, q3 = X ** 0.25, X ** 0.5, X ** 0.75
    horizons = sorted(set(policy.horizons()) | {q1, q2, q3})
    try:
        run = _shoot(prepared, t, horizons, policy)
    except StiffnessError as exc:
        return ProbeVerdict("Inconclusive", t, None, {"reason": "integration failed", "diagnostic": str(exc)})
    c1, c2, c3, cX = (run.count_at(q) for q in (q1, q2, q3, X))
    gain = abs(_angle_at(run, X) - _angle_at(run, q2))
    # Hille: limsup x * int_x^inf V < 1/4 forces finitely many zeros
    cert = _hille(prepared, t, q3)
    ev = {"counts": {"X^1/4": c1, "X^1/2": c2, "X^3/4": c3, "X": cX}, "scaled_gain": gain,
          "certificate": cert, "horizon": X}
    if gain >= policy.scaled_gain and cX > c2:
        ev["reason"] = "zeros keep accumulating over the last log-half of the horizon"
        return ProbeVerdict("Infinite", t, run, ev)
    if gain <= policy.plateau and cX == c1:
        ev["reason"] = "zero count and rescaled angle settled"
        return ProbeVerdict("Finite", t, run, ev)
    if cert and cX == c3:
        ev["reason"] = "zero count settled under the tail certificate"
        return ProbeVerdict("Finite", t, run, ev)
    ev["reason"] = "horizon exhausted without a decision"
    return ProbeVerdict("Inconclusive", t, run, ev)


def negative_spectrum_finite(fld: CoefficientField, t: float, policy: ShootingPolicy | None = None) -> ProbeVerdict:
    """Finite / Infinite / Inconclusive verdict on the negative spectrum of ``L(t)``.

    With ``X = x_max``: Infinite when the rescaled angle gains at least
    ``scaled_gain`` over ``[X^1/2, X]`` and the count grows there; Finite when
    that gain is below ``plateau`` and the count is constant on ``[X^1/4, X]``,
    or when a closed-form tail gives ``t^2 sup x W(x) < 1/4`` past ``X^3/4``
    and the count is constant there.
    """
    if not t >= 0 or not math.isfinite(t):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    return _verdict(prepare(fld), t, policy or ShootingPolicy())


@dataclass(frozen=True)
class SBracketResult:
    bracket: Bracket
    probes: tuple[ProbeVerdict, ...]
    diagnostics: tuple[str, ...] = ()
    source: str = ""

    def to_json(self) -> dict:
        return {"source": self.source, "bracket": self.bracket.to_json(),
                "probes": [{"t": p.t, "kind": p.kind} for p in self.probes],
                "diagnostics": list(self.diagnostics)}


def s_bracket(fld: CoefficientField, policy: ShootingPolicy | None = None) -> SBracketResult:
    """Bracket ``S = sup{t >= 0 : L(t) has finite negative spectrum}``."""
    policy = policy or ShootingPolicy()
    prepared = prepare(fld)
    seen: dict[float, ProbeVerdict] = {}

    def predicate(t):
        v = _verdict(prepared, t, policy)
        seen[t] = v
        return {"Finite": "low", "Infinite": "high"}.get(v.kind, "unknown")

    lo, hi, unknown, calls, notes = bisect_threshold(
        predicate, policy.t_min, policy.t_max, policy.rel_resolution, policy.max_probes)
    probes = tuple(seen[t] for t, _ in calls)
    if all(p.kind == "Inconclusive" for p in probes):
        raise ThresholdError("every probe was inconclusive", [p.to_json() for p in probes])
    bracket = Bracket.infinite() if lo == INF else Bracket(lo, hi, tuple(unknown))
    return SBracketResult(bracket, probes, tuple(notes), fld.name)


def riccati_crosscheck(fld: CoefficientField, t: float, a: float, X: float,
                       policy: ShootingPolicy | None = None, n_points: int = 200) -> float:
    """Max ``|theta_2(x) + u'(x) / (t u(x))|`` over ``[a, X]``.

    ``theta_2`` solves ``theta_2' = t (theta_2^2 + sin^2 phi)`` from the shooting
    value at ``a``; ``u`` comes from the shooting run.  The two integrations are
    independent, so the residual measures their joint accuracy.
    """
    if not t > 0:
        raise DomainError("the Riccati transform needs t > 0")
    if not X > a > 0:
        raise DomainError(f"need X > a > 0, got a={a}, X={X}")
    policy = policy or ShootingPolicy()
    prepared = prepare(fld)
    xi_a, xi_X = math.log1p(a), math.log1p(X)
    xis = [xi_a + (xi_X - xi_a) * j / (n_points - 1) for j in range(n_points)]
    xs = [math.expm1(xi) for xi in xis]
    xs[0], xs[-1] = a, X
    run = _shoot(prepared, t, xs, policy)
    if run.count_at(X) != run.count_at(a):
        raise DomainError(f"u vanishes in [{a}, {X}]; choose a past the last zero")

    def theta2_of(x, v):
        s = math.sin(v)
        if s == 0.0:
            raise DomainError(f"u vanishes at x={x}")
        return -math.cos(v) / (t * (1.0 + x) * s)

    ref = [theta2_of(x, v) for x, v in run.scaled]
    sin2 = prepared.sin2

    def rhs(xi, y):
        return math.exp(xi) * t * (y * y + sin2(math.expm1(xi)))

    got = solve_scalar(rhs, xi_a, ref[0], [math.log1p(x) for x in xs[1:]], rtol=policy.rtol, atol=1e-15)
    return max(abs(g - r) for g, r in zip(got, ref[1:]))


def euler_zero_count(gamma: float, X: float) -> int:
    """Zeros on ``(0, X]`` of the Dirichlet solution of ``-u'' - gamma (1+x)^-2 u = 0``.

    For ``gamma > 1/4`` the solution is ``sqrt(rho) sin(w ln rho)`` with
    ``w = sqrt(gamma - 1/4)``, so zeros sit at ``rho = exp(k pi / w)``.
    """
    if gamma <= 0.25:
        return 0
    w = math.sqrt(gamma - 0.25)
    return math.floor(w * math.log1p(X) / PI)


def write_zero_counts(run: ShootingRun, path: str | Path | None = None, fh=None) -> None:
    """CSV ``X,count``."""
    write_csv(run.zero_counts, ("X", "count"), path, fh)
