"""Oscillation verdicts and brackets for the essential-spectrum edges.

The set of ``t > 0`` at which the Pruefer equation is oscillatory is an up-set
of the form (T, inf) or [T, inf), so its infimum M_+ can be bracketed by
bisection on a three-valued classifier.  Finite horizons cannot decide an
asymptotic property, so every threshold used here is policy and is reported
alongside the verdict.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

from ._dopri import PI, StiffnessError
from .interval import INF, Bracket, bracket_min
from .model import CoefficientField, DomainError
from .prufer import PruferSolver, StepPolicy
from .transforms import prepare


class Verdict(str, enum.Enum):
    OSCILLATORY = "Oscillatory"
    NON_OSCILLATORY = "NonOscillatory"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ClassifyPolicy:
    """Horizon schedule, decision thresholds and bisection controls.

    Horizons are ``x_first * 2**k`` up to ``x_max``.  A verdict is Oscillatory
    when the dyadic window ending at ``x_max`` gains at least ``window_gain``
    in theta, when two consecutive windows gain at least that much with the
    gain not shrinking (early stop), or when the rescaled angle gains at least
    ``scaled_gain`` over the last half of the logarithmic horizon (only if
    ``x_max >= scaled_from``).  NonOscillatory needs a theta plateau (window
    gain <= ``plateau``) together with a tail certificate or compact support
    of sin(phi).
    """

    x_first: float = 10.0
    x_max: float = 1e30
    theta0: float = 0.0
    window_gain: float = 2 * math.pi
    scaled_gain: float = math.pi
    scaled_from: float = 1e4
    plateau: float = 1e-4
    t_min: float = 1e-2
    t_max: float = 100.0
    rel_resolution: float = 1e-2
    max_probes: int = 80
    step: StepPolicy = field(default_factory=StepPolicy)

    def __post_init__(self):
        vals = (self.x_first, self.x_max, self.window_gain, self.scaled_gain, self.plateau,
                self.t_min, self.t_max, self.rel_resolution)
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise DomainError("policy values must be positive and finite")
        if self.t_max < self.t_min:
            raise DomainError("need t_max >= t_min")
        if self.x_max < self.x_first:
            raise DomainError("need x_max >= x_first")

    def horizons(self) -> list[float]:
        out, x = [], self.x_first
        while x < self.x_max:
            out.append(x)
            x *= 2.0
        out.append(self.x_max)
        return out

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        return d


@dataclass(frozen=True)
class OscillationVerdict:
    kind: Verdict
    t: float
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "t": self.t, "evidence": self.evidence}


def tail_certificate(prepared: CoefficientField, t: float, a: float) -> bool:
    """Sound non-oscillation test from a closed-form tail.

    For a diagonal system ``t^2 sup_{x>=a} x W(x) < 1/4`` forces non-oscillation
    (the lower bound 1/(2 sqrt A) on the diagonal threshold); a general system
    needs the same at ``2t`` because its right-hand side is at most twice the
    diagonal one.
    """
    tail = prepared.tail
    if tail is None or tail.sup_xw is None:
        return False
    factor = 1.0 if prepared.diagonal else 2.0
    return (factor * t) ** 2 * tail.sup_xw(a) < 0.25


def _classify_prepared(prepared: CoefficientField, t: float, policy: ClassifyPolicy) -> OscillationVerdict:
    if t == 0:
        raise DomainError("t = 0 is never probed")
    solver = PruferSolver(prepared, t, policy.theta0, 0.0, policy.step)
    ell = policy.step.length_scale
    # exact cell stepping is cheap to any horizon, so grids never stop early on growth
    early_osc = prepared.cells is None
    history: list[tuple[float, float]] = []  # (xi, rescaled angle) at each horizon
    gains: list[float] = []
    prev = solver.state
    evidence: dict = {"horizon": 0.0, "window_gain": None, "scaled_gain": None,
                      "rotations": 0.0, "certificate": False, "reason": ""}
    horizons = policy.horizons()
    try:
        for X in horizons:
            st = solver.advance_to(X)
            history.append((math.log1p(X / ell), solver.scaled_angle()))
            gain = abs(st.gain_from(prev))
            a = prev.x
            prev = st
            evidence.update(horizon=X, window_gain=gain, rotations=(st.theta - policy.theta0) / PI)
            if a > 0:
                gains.append(gain)
            final = X == horizons[-1]
            # a large gain in a shrinking window is a transient (finitely many
            # rotations); only growing gains justify stopping before x_max
            growing = len(gains) >= 2 and gains[-2] >= policy.window_gain and gains[-1] >= gains[-2]
            if (final and gain >= policy.window_gain) or (early_osc and growing):
                evidence["reason"] = "theta gain over the last dyadic window"
                return OscillationVerdict(Verdict.OSCILLATORY, t, evidence)
            if a > 0 and gain <= policy.plateau:
                cert = tail_certificate(prepared, t, a)
                compact = prepared.support_end is not None and prepared.support_end <= a
                evidence["certificate"] = cert
                if cert or compact:
                    evidence["reason"] = "plateau with tail certificate" if cert else "plateau past the support of sin(phi)"
                    return OscillationVerdict(Verdict.NON_OSCILLATORY, t, evidence)
        xi_end = history[-1][0]
        ref = max((h for h in history if h[0] <= 0.5 * xi_end), default=history[0], key=lambda h: h[0])
        sgain = abs(history[-1][1] - ref[1])
        evidence["scaled_gain"] = sgain
        if X >= policy.scaled_from and sgain >= policy.scaled_gain:
            evidence["reason"] = "rescaled-angle gain over the last log-half of the horizon"
            return OscillationVerdict(Verdict.OSCILLATORY, t, evidence)
    except StiffnessError as exc:
        evidence["diagnostic"] = str(exc)
        evidence["reason"] = "integration failed"
        return OscillationVerdict(Verdict.INCONCLUSIVE, t, evidence)
    evidence["reason"] = "horizon exhausted without a decision"
    return OscillationVerdict(Verdict.INCONCLUSIVE, t, evidence)


def classify(fld: CoefficientField, t: float, policy: ClassifyPolicy | None = None) -> OscillationVerdict:
    """Classify the Pruefer equation of ``fld`` at spectral parameter ``t != 0``.

    The field is first trace-normalized and rotated onto its declared L^2
    direction; neither step changes the verdict.
    """
    if t == 0 or not math.isfinite(t):
        raise DomainError(f"t must be finite and nonzero, got {t}")
    policy = policy or ClassifyPolicy()
    return _classify_prepared(prepare(fld), t, policy)


@dataclass(frozen=True)
class ThresholdResult:
    bracket: Bracket
    sign: int
    probes: tuple[OscillationVerdict, ...]
    diagnostics: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "bracket": self.bracket.to_json(),
            "sign": self.sign,
            "probes": [{"t": p.t, "kind": p.kind.value} for p in self.probes],
            "diagnostics": list(self.diagnostics),
        }


class ThresholdError(RuntimeError):
    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


def _mid(a: float, b: float) -> float:
    if a > 0 and b / a > 2.0:
        return math.sqrt(a * b)
    return 0.5 * (a + b)


def bisect_threshold(predicate, t_min: float, t_max: float, rel_resolution: float, max_probes: int):
    """Bracket the switch of a monotone three-valued predicate on ``[t_min, t_max]``.

    ``predicate(t)`` returns ``"low"`` (below the switch), ``"high"`` (above) or
    ``"unknown"``.  Unknown probes are kept and widen the result.  Returns
    ``(lo, hi, unknown_points, calls, notes)`` where ``lo`` is the largest
    "low" point (0 if none) and ``hi`` the smallest "high" point (inf if none);
    ``lo == hi == inf`` when ``t_max`` is still "low".
    """
    calls: list[tuple[float, str]] = []
    notes: list[str] = []
    cache: dict[float, str] = {}

    def probe(t):
        if t not in cache:
            cache[t] = predicate(t)
            calls.append((t, cache[t]))
        return cache[t]

    top = probe(t_max)
    if top == "low":
        return INF, INF, [], calls, notes
    lo, hi = 0.0, INF
    unknown: list[float] = []
    if top == "high":
        hi = t_max
    else:
        unknown.append(t_max)
    bottom = probe(t_min)
    if bottom == "high":
        return 0.0, t_min, unknown, calls, notes
    if bottom == "low":
        lo = t_min
    else:
        unknown.append(t_min)

    def record(t, kind):
        nonlocal lo, hi
        if kind == "high":
            if t < lo:
                notes.append(f"non-monotone verdicts: high at {t:.6g} below low at {lo:.6g}")
            hi = min(hi, t)
        elif kind == "low":
            if t > hi:
                notes.append(f"non-monotone verdicts: low at {t:.6g} above high at {hi:.6g}")
            lo = max(lo, t)
        else:
            unknown.append(t)

    # shrink from above: largest non-high point below hi
    while hi < INF and len(calls) < max_probes:
        a = max([lo] + [u for u in unknown if u < hi])
        if a == 0.0 or hi - a <= rel_resolution * hi:
            break
        t = _mid(a, hi)
        record(t, probe(t))
    # shrink from below: smallest unknown (or hi) above lo
    while len(calls) < max_probes:
        b = min([u for u in unknown if u > lo] + [hi])
        if b == INF or lo == 0.0 or b - lo <= rel_resolution * b:
            break
        t = _mid(lo, b)
        record(t, probe(t))
    if len(calls) >= max_probes:
        notes.append(f"probe budget of {max_probes} exhausted")
    unknown = sorted(u for u in unknown if lo < u < hi)
    return lo, hi, unknown, calls, notes


def oscillatory_threshold(fld: CoefficientField, sign: int = 1, policy: ClassifyPolicy | None = None,
                          _prepared: CoefficientField | None = None) -> ThresholdResult:
    """Bracket ``inf{t > 0 : oscillatory at sign * t}``.

    Returns ``[t_lo, t_hi]`` with a NonOscillatory verdict at ``t_lo`` and an
    Oscillatory one at ``t_hi``; ``t_lo = 0`` or ``t_hi = inf`` mark sides that
    stayed unresolved (Inconclusive probes are listed, never hidden).
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    policy = policy or ClassifyPolicy()
    prepared = _prepared if _prepared is not None else prepare(fld)
    verdicts: dict[float, OscillationVerdict] = {}

    def predicate(t):
        v = _classify_prepared(prepared, sign * t, policy)
        verdicts[t] = v
        return {Verdict.NON_OSCILLATORY: "low", Verdict.OSCILLATORY: "high"}.get(v.kind, "unknown")

    lo, hi, unknown, calls, notes = bisect_threshold(
        predicate, policy.t_min, policy.t_max, policy.rel_resolution, policy.max_probes)
    probes = tuple(verdicts[t] for t, _ in calls)
    if all(p.kind is Verdict.INCONCLUSIVE for p in probes):
        raise ThresholdError("every probe was inconclusive", [p.to_json() for p in probes])
    bracket = Bracket.infinite() if lo == INF else Bracket(lo, hi, tuple(unknown))
    return ThresholdResult(bracket, sign, probes, tuple(notes))


@dataclass(frozen=True)
class SpectralEstimate:
    m_plus: Bracket
    m_minus: Bracket  # magnitude of M_-
    m: Bracket
    zero_in_ess: str
    details: tuple[ThresholdResult, ThresholdResult] | None = None
    source: str = ""  # name of the field the estimate was computed for

    def to_json(self) -> dict:
        out = {
            "source": self.source,
            "m_plus": self.m_plus.to_json(),
            "m_minus": self.m_minus.to_json(),
            "m": self.m.to_json(),
            "zero_in_ess": self.zero_in_ess,
        }
        if self.details is not None:
            out["thresholds"] = [d.to_json() for d in self.details]
        return out


def m_estimate(fld: CoefficientField, policy: ClassifyPolicy | None = None) -> SpectralEstimate:
    """Brackets for M_+, |M_-| and M = min of the two, over both signs of t."""
    policy = policy or ClassifyPolicy()
    prepared = prepare(fld)
    plus = oscillatory_threshold(fld, 1, policy, _prepared=prepared)
    minus = oscillatory_threshold(fld, -1, policy, _prepared=prepared)
    bp, bm = plus.bracket, minus.bracket
    if (bp.lo == 0.0 and bp.hi <= policy.t_min) or (bm.lo == 0.0 and bm.hi <= policy.t_min):
        zero = "yes"
    elif bp.lo > 0 and bm.lo > 0:
        zero = "no"
    else:
        zero = "unknown"
    return SpectralEstimate(bp, bm, bracket_min(bp, bm), zero, (plus, minus), fld.name)


def diagonal_symmetry_check(est: SpectralEstimate, fld: CoefficientField) -> bool:
    """Diagonal systems have spectra symmetric about 0, so M_+ and |M_-| must agree."""
    if not fld.diagonal:
        raise DomainError("symmetry check needs a diagonal field (g = 0)")
    return est.m_plus.overlaps(est.m_minus)
