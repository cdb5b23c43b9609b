"""Pruefer angle of a canonical system: theta' = t e_theta^* H e_theta.

Long horizons are integrated in the logarithmic variable ``xi = ln(1 + x/l)``
for the rescaled angle ``tan(vartheta) = (1 + x/l) tan(theta)``.  Both angles
pass multiples of pi/2 together, so windings agree, but the rescaled one has
an autonomous limit for tails ``sin^2 phi ~ C/x^2`` and its non-oscillatory
equilibria sit at O(1) angles instead of at O(1/x) offsets from k*pi.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ._dopri import PI, AngleStepper, StiffnessError, reduce_angle
from .model import CoefficientField, DomainError, GridCells, HMatrix

__all__ = [
    "StepPolicy",
    "PruferState",
    "PruferTrajectory",
    "PruferSolver",
    "StiffnessError",
    "rhs",
    "integrate",
    "rotation_count",
    "write_csv",
]


@dataclass(frozen=True)
class StepPolicy:
    rtol: float = 1e-9
    atol: float = 1e-12
    max_steps: int = 10_000_000
    min_step: float = 1e-14
    scaled: bool = True
    length_scale: float = 1.0
    per_decade: int = 8

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0 and self.min_step > 0 and self.max_steps > 0):
            raise DomainError("step policy tolerances must be positive")


@dataclass(frozen=True)
class PruferState:
    """Angle ``winding * pi + reduced`` at ``x`` (a continuous lift)."""

    x: float
    winding: int
    reduced: float

    @property
    def theta(self) -> float:
        return self.winding * PI + self.reduced

    def gain_from(self, other: "PruferState") -> float:
        """``theta(self) - theta(other)`` without cancellation in the small parts."""
        return (self.winding - other.winding) * PI + (self.reduced - other.reduced)

    def __le__(self, other: "PruferState") -> bool:
        return (self.winding, self.reduced) <= (other.winding, other.reduced)


@dataclass(frozen=True)
class PruferTrajectory:
    samples: tuple[PruferState, ...]
    t: float
    step_stats: dict = field(default_factory=dict)

    @property
    def rotations(self) -> float:
        return rotation_count(self)

    @property
    def xs(self) -> list[float]:
        return [s.x for s in self.samples]

    @property
    def thetas(self) -> list[float]:
        return [s.theta for s in self.samples]


def rhs(t: float, theta: float, H: HMatrix) -> float:
    """``t * (sin^2 phi cos^2 theta + cos^2 phi sin^2 theta + 2 g sin phi cos phi sin theta cos theta)``.

    Written with the matrix entries, which also covers fields that are not trace-normed.
    """
    return t * H.quad(theta)


def _scaled_rhs(fld: CoefficientField, t: float, ell: float):
    ent = fld.entries
    cos, sin, exp, expm1 = math.cos, math.sin, math.exp, math.expm1

    def f(xi, v):
        rho = exp(xi)
        h11, h12, h22 = ent(ell * expm1(xi))
        c, s = cos(v), sin(v)
        return s * c + ell * t * (h11 * rho * rho * c * c + 2.0 * h12 * rho * s * c + h22 * s * s)

    return f


def _plain_rhs(fld: CoefficientField, t: float):
    ent = fld.entries
    cos, sin = math.cos, math.sin

    def f(x, v):
        h11, h12, h22 = ent(x)
        c, s = cos(v), sin(v)
        return t * (h11 * c * c + 2.0 * h12 * s * c + h22 * s * s)

    return f


def to_scaled(reduced: float, rho: float) -> float:
    return math.atan(rho * math.tan(reduced))


def from_scaled(reduced: float, rho: float) -> float:
    return math.atan(math.tan(reduced) / rho)


class _CellSolver:
    """Exact solution of the autonomous Pruefer equation on constant cells."""

    def __init__(self, cells: GridCells, t: float, x0: float, winding: int, reduced: float):
        self.cells = cells
        self.t = t
        self.x = x0
        self.theta = winding * PI + reduced
        self.steps = 0

    def _advance_cell(self, a: float, b: float, d: float, dx: float) -> None:
        t = self.t
        alpha = 0.5 * (a + d)
        beta, gamma = 0.5 * (a - d), b
        r = math.hypot(beta, gamma)
        delta = math.atan2(gamma, beta)
        p, q = alpha + r, max(alpha - r, 0.0)
        psi = self.theta - 0.5 * delta
        if p <= 0.0:
            return
        if q > 1e-15 * p:
            k = math.sqrt(q / p)
            n = round(psi / PI)
            lifted = math.atan(k * math.tan(psi - n * PI)) + n * PI
            value = lifted + t * math.sqrt(p * q) * dx
            m = round(value / PI)
            psi = math.atan(math.tan(value - m * PI) / k) + m * PI
        else:
            # rank one: psi is trapped between consecutive zeros of cos(psi)
            n = math.floor((psi + 0.5 * PI) / PI)
            base = psi - n * PI
            if base == -0.5 * PI:
                return
            psi = math.atan(math.tan(base) + t * p * dx) + n * PI
        self.theta = psi + 0.5 * delta

    def advance(self, x1: float) -> None:
        xs = self.cells.x
        while self.x < x1:
            i = max(self.cells.index(self.x), 0)
            right = xs[i + 1] if i + 1 < len(xs) else math.inf
            stop = min(right, x1)
            self._advance_cell(self.cells.h11[i], self.cells.h12[i], self.cells.h22[i], stop - self.x)
            self.x = stop
            self.steps += 1

    def state(self) -> PruferState:
        k, r = reduce_angle(self.theta)
        return PruferState(self.x, k, r)


class PruferSolver:
    """Incremental integrator: call :meth:`advance_to` with increasing ``x``.

    Piecewise-constant fields are advanced exactly cell by cell; everything
    else uses the adaptive Dormand-Prince stepper, by default on the rescaled
    angle in ``xi``.
    """

    def __init__(
        self,
        fld: CoefficientField,
        t: float,
        theta0: float = 0.0,
        x0: float = 0.0,
        policy: StepPolicy | None = None,
    ):
        if not x0 >= 0:
            raise DomainError(f"x0 must be >= 0, got {x0}")
        self.field = fld
        self.t = t
        self.policy = policy or StepPolicy()
        self.clamp = 1 if t > 0 else (-1 if t < 0 else 0)
        k, r = reduce_angle(theta0)
        self._state = PruferState(x0, k, r)
        pol = self.policy
        ell = pol.length_scale
        self._ell = ell
        if fld.cells is not None:
            self._mode = "cells"
            self._cells = _CellSolver(fld.cells, t, x0, k, r)
        elif pol.scaled:
            self._mode = "scaled"
            rho0 = 1.0 + x0 / ell
            self._stepper = AngleStepper(
                _scaled_rhs(fld, t, ell),
                math.log1p(x0 / ell),
                k,
                to_scaled(r, rho0),
                rtol=pol.rtol,
                atol=pol.atol,
                max_steps=pol.max_steps,
                min_step=pol.min_step,
                to_x=lambda xi: ell * math.expm1(xi),
            )
        else:
            self._mode = "plain"
            self._stepper = AngleStepper(
                _plain_rhs(fld, t),
                x0,
                k,
                r,
                rtol=pol.rtol,
                atol=pol.atol,
                max_steps=pol.max_steps,
                min_step=pol.min_step,
                clamp=self.clamp,
            )

    @property
    def state(self) -> PruferState:
        return self._state

    @property
    def stats(self) -> dict:
        if self._mode == "cells":
            return {"steps": self._cells.steps, "rejected": 0, "max_local_error": 0.0, "mode": "cells"}
        st = self._stepper
        return {"steps": st.steps, "rejected": st.rejected, "max_local_error": st.max_err, "mode": self._mode}

    def scaled_angle(self) -> float:
        """Rescaled angle ``vartheta`` at the current position (lifted)."""
        s = self._state
        rho = 1.0 + s.x / self._ell
        return s.winding * PI + to_scaled(s.reduced, rho)

    def advance_to(self, x1: float) -> PruferState:
        prev = self._state
        if x1 <= prev.x:
            return prev
        if self._mode == "cells":
            self._cells.advance(x1)
            new = self._cells.state()
        elif self._mode == "scaled":
            st = self._stepper
            st.advance(math.log1p(x1 / self._ell))
            rho = 1.0 + x1 / self._ell
            new = PruferState(x1, st.k, from_scaled(st.r, rho))
            if new.reduced >= 0.5 * PI:
                new = PruferState(x1, new.winding + 1, new.reduced - PI)
        else:
            st = self._stepper
            st.advance(x1)
            new = PruferState(x1, st.k, st.r)
        # theta is monotone in x with the sign of t; remove roundoff reversals
        if self.clamp > 0 and not prev <= new:
            new = PruferState(x1, prev.winding, prev.reduced)
        elif self.clamp < 0 and not new <= prev:
            new = PruferState(x1, prev.winding, prev.reduced)
        self._state = new
        return new


def _checkpoints(x0: float, x1: float, per_decade: int) -> list[float]:
    pts = {x0, x1}
    n = 10
    for j in range(1, n):
        pts.add(x0 + (min(x1, x0 + 10.0) - x0) * j / n)
    lo = math.floor(math.log10(max(x0, 1e-3)) * per_decade)
    hi = math.ceil(math.log10(x1) * per_decade)
    for j in range(lo, hi + 1):
        x = 10.0 ** (j / per_decade)
        if x0 < x < x1:
            pts.add(x)
    return sorted(pts)


def integrate(
    fld: CoefficientField,
    t: float,
    theta0: float = 0.0,
    x0: float = 0.0,
    x1: float = 1.0,
    policy: StepPolicy | None = None,
    checkpoints: Iterable[float] | None = None,
) -> PruferTrajectory:
    """Integrate the Pruefer angle from ``theta(x0) = theta0`` up to ``x1``.

    Samples are taken at log-spaced checkpoints (plus ``checkpoints`` if given).
    Raises :class:`StiffnessError` when the step size underflows or the step
    budget is exhausted, which for a field like ``[[e^x, 1], [1, e^-x]]``
    means it should be trace-normalized first.
    """
    if not x1 > x0 >= 0:
        raise DomainError(f"need x1 > x0 >= 0, got x0={x0}, x1={x1}")
    pol = policy or StepPolicy()
    pts = _checkpoints(x0, x1, pol.per_decade)
    if checkpoints is not None:
        pts = sorted(set(pts) | {float(c) for c in checkpoints if x0 <= c <= x1})
    solver = PruferSolver(fld, t, theta0, x0, pol)
    samples = [solver.state]
    for x in pts[1:]:
        samples.append(solver.advance_to(x))
    return PruferTrajectory(tuple(samples), t, solver.stats)


def rotation_count(traj: PruferTrajectory) -> float:
    """Signed number of half-turns, ``(theta_end - theta_start) / pi``."""
    if not traj.samples:
        raise DomainError("empty trajectory")
    return traj.samples[-1].gain_from(traj.samples[0]) / PI


def write_csv(rows: Sequence[tuple], header: Sequence[str], path: str | Path | None, fh=None) -> None:
    """Write ``rows`` under ``header`` to ``path`` (or the open handle ``fh``)."""
    def _dump(out):
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])

    if fh is not None:
        _dump(fh)
    else:
        with open(path, "w", newline="") as out:
            _dump(out)


def trajectory_rows(traj: PruferTrajectory) -> list[tuple[float, float]]:
    return [(s.x, s.theta) for s in traj.samples]
