"""Scalar Dormand-Prince 5(4) stepper for angle variables.

The state is an angle whose right-hand side is pi-periodic, so it is stored as
``winding * pi + reduced`` with ``reduced`` in ``[-pi/2, pi/2)``.  Error control
acts on the reduced part only, which keeps full relative precision for angles
that sit very close to a multiple of pi after many rotations.
"""

from __future__ import annotations

import math
from typing import Callable

PI = math.pi
HALF_PI = 0.5 * math.pi

# Dormand-Prince tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th order minus embedded 4th order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


class StiffnessError(RuntimeError):
    """Raised when the adaptive stepper cannot make progress."""

    def __init__(self, message: str, x: float):
        super().__init__(message)
        self.x = x


def reduce_angle(angle: float) -> tuple[int, float]:
    """Split ``angle`` into ``(winding, reduced)`` with reduced in [-pi/2, pi/2)."""
    k = math.floor((angle + HALF_PI) / PI)
    r = angle - k * PI
    if r >= HALF_PI:
        k += 1
        r -= PI
    elif r < -HALF_PI:
        k -= 1
        r += PI
    return k, r


class AngleStepper:
    """Adaptive integrator for ``d(angle)/ds = rhs(s, angle)``.

    ``clamp`` is +1 (or -1) to forbid the angle from decreasing (increasing)
    across an accepted step; 0 disables the clamp.
    """

    def __init__(
        self,
        rhs: Callable[[float, float], float],
        s0: float,
        winding: int,
        reduced: float,
        *,
        rtol: float = 1e-9,
        atol: float = 1e-12,
        max_steps: int = 10_000_000,
        min_step: float = 1e-14,
        clamp: int = 0,
        h0: float | None = None,
        to_x: Callable[[float], float] | None = None,
        periodic: bool = True,
    ):
        self.rhs = rhs
        self.s = s0
        self.k = winding
        self.r = reduced
        self.rtol = rtol
        self.atol = atol
        self.max_steps = max_steps
        self.min_step = min_step
        self.clamp = clamp
        self.h = h0
        self.steps = 0
        self.rejected = 0
        self.max_err = 0.0
        self._to_x = to_x or (lambda s: s)
        self._f = None
        self.periodic = periodic

    @property
    def angle(self) -> float:
        return self.k * PI + self.r

    def _eval(self, s: float, y: float) -> float:
        try:
            v = self.rhs(s, y)
        except (OverflowError, ZeroDivisionError, ValueError) as exc:
            raise StiffnessError(
                f"right-hand side failed at x={self._to_x(s):.6g} ({exc}); "
                "trace-normalize the field before long-horizon integration",
                self._to_x(s),
            ) from exc
        if not math.isfinite(v):
            raise StiffnessError(
                f"non-finite right-hand side at x={self._to_x(s):.6g}; "
                "trace-normalize the field before long-horizon integration",
                self._to_x(s),
            )
        return v

    def advance(self, s_end: float) -> None:
        """Integrate forward to ``s_end`` (landing on it exactly)."""
        if s_end <= self.s:
            return
        rhs_ok = self._eval
        s, y = self.s, self.r
        f1 = self._f if self._f is not None else rhs_ok(s, y)
        h = self.h
        if h is None:
            h = min(s_end - s, 0.01 / max(abs(f1), 1e-12), 0.1 * max(1.0, abs(s_end - s)))
        rtol, atol = self.rtol, self.atol
        floor_step = self.min_step * max(1.0, abs(s))
        while s < s_end:
            if self.steps >= self.max_steps:
                raise StiffnessError(
                    f"exceeded {self.max_steps} steps at x={self._to_x(s):.6g}; "
                    "trace-normalize the field or loosen the step policy",
                    self._to_x(s),
                )
            last = False
            if s + h >= s_end:
                h_try = s_end - s
                last = True
            else:
                h_try = h
            k1 = f1
            k2 = rhs_ok(s + _C2 * h_try, y + h_try * _A21 * k1)
            k3 = rhs_ok(s + _C3 * h_try, y + h_try * (_A31 * k1 + _A32 * k2))
            k4 = rhs_ok(s + _C4 * h_try, y + h_try * (_A41 * k1 + _A42 * k2 + _A43 * k3))
            k5 = rhs_ok(s + _C5 * h_try, y + h_try * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
            k6 = rhs_ok(s + h_try, y + h_try * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
            y_new = y + h_try * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
            s_new = s_end if last else s + h_try
            k7 = rhs_ok(s_new, y_new)
            err = h_try * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
            scale = atol + rtol * max(abs(y), abs(y_new))
            ratio = abs(err) / scale
            if ratio <= 1.0:
                self.steps += 1
                if abs(err) > self.max_err:
                    self.max_err = abs(err)
                if self.clamp > 0 and y_new < y:
                    y_new = y
                elif self.clamp < 0 and y_new > y:
                    y_new = y
                s, y, f1 = s_new, y_new, k7
                if self.periodic and (y >= HALF_PI or y < -HALF_PI):
                    dk, y = reduce_angle(y)
                    self.k += dk
                    f1 = rhs_ok(s, y)
                fac = 5.0 if ratio == 0.0 else min(5.0, 0.9 * ratio ** -0.2)
                if not last:
                    h = h_try * fac
                else:
                    h = max(h, h_try * fac)
            else:
                self.rejected += 1
                h = h_try * max(0.2, 0.9 * ratio ** -0.2)
                if h < floor_step:
                    raise StiffnessError(
                        f"step size underflow ({h:.3g}) at x={self._to_x(s):.6g}; "
                        "trace-normalize the field before integrating",
                        self._to_x(s),
                    )
        self.s, self.r, self.h, self._f = s, y, h, f1


def solve_scalar(
    rhs: Callable[[float, float], float],
    s0: float,
    y0: float,
    points: list[float],
    *,
    rtol: float = 1e-10,
    atol: float = 1e-13,
    max_steps: int = 10_000_000,
) -> list[float]:
    """Plain scalar integration, values returned at increasing ``points``."""
    st = AngleStepper(rhs, s0, 0, y0, rtol=rtol, atol=atol, max_steps=max_steps, periodic=False)
    out = []
    for p in points:
        st.advance(p)
        out.append(st.r)
    return out
