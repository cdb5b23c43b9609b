"""Rotations, the Schroedinger-to-canonical construction, and the Dirac potential."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import CoefficientField, DomainError, GridCells, trace_normalize

HALF_PI = 0.5 * math.pi


def _cos_sin(alpha: float) -> tuple[float, float]:
    # exact values on multiples of pi/2 so that axis swaps lose no precision
    n = round(alpha / HALF_PI)
    if abs(alpha - n * HALF_PI) <= 1e-15 * max(1.0, abs(alpha)):
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[n % 4]
    return math.cos(alpha), math.sin(alpha)


def rotate_entries(h11: float, h12: float, h22: float, alpha: float) -> tuple[float, float, float]:
    """Entries of ``R^* H R`` with ``R`` the rotation by ``alpha``."""
    c, s = _cos_sin(alpha)
    r11 = c * c * h11 + 2.0 * c * s * h12 + s * s * h22
    r22 = s * s * h11 - 2.0 * c * s * h12 + c * c * h22
    r12 = -c * s * h11 + (c * c - s * s) * h12 + c * s * h22
    return r11, r12, r22


@dataclass(frozen=True)
class RotationAngle:
    alpha: float

    def matrix(self) -> np.ndarray:
        c, s = _cos_sin(self.alpha)
        return np.array([[c, -s], [s, c]])


def rotate(fld: CoefficientField, alpha: float) -> CoefficientField:
    """The field of ``R^* H(x) R``; its essential spectrum equals that of H.

    Successive rotations are composed on the angle rather than on sampled
    entries, so undoing a rotation returns the original field exactly.
    """
    base, total = fld, alpha
    if fld.rotation_of is not None:
        base, prev = fld.rotation_of
        total = prev + alpha
    if total == 0.0:
        return base
    ent = base.entries

    def entries(x):
        return rotate_entries(*ent(x), total)

    c, s = _cos_sin(total)
    axis = c == 0.0 or s == 0.0
    cells = None
    if base.cells is not None:
        rot = [rotate_entries(a, b, d, total) for a, b, d in zip(base.cells.h11, base.cells.h12, base.cells.h22)]
        cells = GridCells(base.cells.x, *(tuple(col) for col in zip(*rot)))
    l2 = base.l2_angle - total
    return dataclasses.replace(
        base,
        entries=entries,
        tail=base.tail if (axis and s == 0.0) else None,
        l2_angle=l2,
        l2_direction_ok=_cos_sin(l2)[1] == 0.0,
        diagonal=base.diagonal and axis,
        name=f"{base.name}[rot {total:.6g}]",
        support_end=base.support_end if (axis and s == 0.0) else None,
        cells=cells,
        rotation_of=(base, total),
    )


def align_l2_direction(fld: CoefficientField, v: Sequence[float]) -> CoefficientField:
    """Rotate so that the (caller-asserted) L^2 direction ``v`` becomes ``e_1``."""
    vx, vy = float(v[0]), float(v[1])
    if vx == 0.0 and vy == 0.0:
        raise DomainError("L^2 direction must be a nonzero vector")
    if vy == 0.0:
        alpha = 0.0 if vx > 0 else math.pi
    elif vx == 0.0:
        alpha = HALF_PI if vy > 0 else -HALF_PI
    else:
        alpha = math.atan2(vy, vx)
    out = rotate(fld, alpha)
    if out.l2_direction_ok and out.l2_angle == 0.0:
        return out
    return dataclasses.replace(out, l2_direction_ok=True, l2_angle=0.0)


def prepare(fld: CoefficientField) -> CoefficientField:
    """Trace-normed field with its L^2 direction on ``e_1``.

    This is the form every long-horizon computation works with.  Alignment
    happens before normalization so rotation bookkeeping can still collapse.
    """
    out = fld
    if not fld.l2_direction_ok and fld.l2_angle != 0.0:
        # rotate by the stored angle itself (not via a unit vector) so that a
        # previously rotated field collapses back onto its base exactly
        out = rotate(fld, fld.l2_angle)
    out = trace_normalize(out)
    if out.tail is None and fld.prepared_tail is not None:
        out = dataclasses.replace(out, tail=fld.prepared_tail)
    return out


def _deriv(f: Callable[[float], float], x: float, h: float = 1e-3) -> float:
    if x >= 2 * h:
        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)
    # forward stencil near the left endpoint
    f0, f1, f2, f3, f4 = (f(x + k * h) for k in range(5))
    return (-25 * f0 + 48 * f1 - 36 * f2 + 16 * f3 - 3 * f4) / (12 * h)


def schrodinger_to_canonical(
    p: Callable[[float], float],
    q: Callable[[float], float],
    dp: Callable[[float], float] | None = None,
    dq: Callable[[float], float] | None = None,
    samples: Sequence[float] | None = None,
    tol: float = 1e-10,
) -> CoefficientField:
    """Canonical system ``H = [[p^2, pq], [pq, q^2]]`` from two zero-energy solutions.

    ``p, q`` must solve ``-y'' + V y = 0`` with ``p'q - q'p = 1``; the
    Wronskian is checked at the sample points (derivatives by finite
    differences when not supplied).
    """
    xs = list(samples) if samples is not None else [0.25 * k for k in range(21)]
    dpf = dp or (lambda x: _deriv(p, x))
    dqf = dq or (lambda x: _deriv(q, x))
    for x in xs:
        w = dpf(x) * q(x) - dqf(x) * p(x)
        if abs(w - 1.0) > tol:
            raise DomainError(f"Wronskian p'q - q'p = {w!r} at x={x}, expected 1")

    def entries(x):
        a, b = p(x), q(x)
        return a * a, a * b, b * b

    return CoefficientField(
        entries=entries,
        trace_normed=False,
        l2_direction_ok=False,
        name="schrodinger_to_canonical",
    )


@dataclass(frozen=True)
class DiracPotential:
    W_dirac: Callable[[float], float]

    def __call__(self, x: float) -> float:
        return self.W_dirac(x)


def diagonal_to_dirac(
    fld: CoefficientField,
    a_prime: Callable[[float], float] | None = None,
    step: float = 1e-4,
    samples: Sequence[float] | None = None,
    tol: float = 1e-10,
) -> DiracPotential:
    """Dirac potential ``W = a'/(2a)`` of ``H_d = diag(a, 1/a)``.

    ``a'`` comes from ``a_prime``, the family metadata, or a central difference
    with the declared ``step``.
    """
    xs = list(samples) if samples is not None else [0.5 * k for k in range(41)]
    ent = fld.entries
    for x in xs:
        h11, h12, h22 = ent(x)
        if h12 != 0.0:
            raise DomainError(f"field is not diagonal at x={x}")
        if abs(h11 * h22 - 1.0) > tol:
            raise DomainError(f"det H({x}) = {h11 * h22!r}, expected 1")

    def a(x):
        return ent(x)[0]

    da = a_prime or fld.extras.get("a_prime")
    if da is None:
        def da(x):
            lo = max(0.0, x - step)
            return (a(x + step) - a(lo)) / (x + step - lo)

    return DiracPotential(lambda x: da(x) / (2.0 * a(x)))
