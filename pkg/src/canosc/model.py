"""Coefficient fields H(x) >= 0 of half-line canonical systems.

A field is stored through its matrix entries ``(h11, h12, h22)`` as a pure
function of ``x``; the angle/weight description

    H = tau * [[sin^2 phi, g sin phi cos phi], [g sin phi cos phi, cos^2 phi]]

with ``0 <= g <= 1`` and ``-pi/2 <= phi < pi/2`` is derived on demand.  Keeping
the entries primary matters numerically: a tail such as ``sin^2 phi ~ 1/x^2``
must survive rotations by pi/2 and trace normalization with full relative
precision, which a stored angle near pi/2 cannot provide.
"""

from __future__ import annotations

import bisect
import csv
import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, optimize

Entries = Callable[[float], "tuple[float, float, float]"]

PSD_TOL = 1e-12


class DomainError(ValueError):
    """Raised for arguments outside an operation's domain."""


@dataclass(frozen=True)
class HMatrix:
    """Symmetric 2x2 matrix; ``h21 = h12`` is implied."""

    h11: float
    h12: float
    h22: float

    @property
    def trace(self) -> float:
        return self.h11 + self.h22

    @property
    def det(self) -> float:
        return self.h11 * self.h22 - self.h12 * self.h12

    def eigvals(self) -> tuple[float, float]:
        mean = 0.5 * (self.h11 + self.h22)
        rad = math.hypot(0.5 * (self.h11 - self.h22), self.h12)
        return mean - rad, mean + rad

    def as_array(self) -> np.ndarray:
        return np.array([[self.h11, self.h12], [self.h12, self.h22]])

    def quad(self, theta: float) -> float:
        """``e_theta^* H e_theta`` with ``e_theta = (cos theta, sin theta)``."""
        c, s = math.cos(theta), math.sin(theta)
        return self.h11 * c * c + 2.0 * self.h12 * s * c + self.h22 * s * s

    def is_psd(self, tol: float = PSD_TOL) -> bool:
        return self.eigvals()[0] >= -tol


class PhiG(NamedTuple):
    phi: float
    g: float
    trace: float
    degenerate: bool


@dataclass(frozen=True)
class AnalyticTail:
    """Closed-form ``W(x) = int_x^inf sin^2 phi`` with its asymptotic constants.

    ``sup_xw(a)`` returns ``sup_{x >= a} x W(x)`` when the family can supply it;
    that quantity drives the non-oscillation certificate.
    """

    W: Callable[[float], float]
    A_exact: float
    B_exact: float
    sup_xw: Callable[[float], float] | None = None


@dataclass(frozen=True)
class GridCells:
    """Right-continuous piecewise-constant table; ``x[0] == 0``."""

    x: tuple[float, ...]
    h11: tuple[float, ...]
    h12: tuple[float, ...]
    h22: tuple[float, ...]

    def index(self, x: float) -> int:
        return bisect.bisect_right(self.x, x) - 1

    def entries(self, x: float) -> tuple[float, float, float]:
        i = max(0, self.index(x))
        return self.h11[i], self.h12[i], self.h22[i]


@dataclass(frozen=True)
class CoefficientField:
    """A coefficient function ``H(x)`` on ``[0, inf)`` plus metadata.

    ``l2_angle`` is the polar angle of the declared direction ``v`` with
    ``int v^* H v dx < inf``; ``l2_direction_ok`` is true when that direction is
    ``e_1`` already, i.e. ``sin phi`` is square integrable.
    """

    entries: Entries
    trace_normed: bool = True
    tail: AnalyticTail | None = None
    l2_direction_ok: bool = True
    l2_angle: float = 0.0
    diagonal: bool = False
    name: str = "custom"
    params: dict = field(default_factory=dict)
    arclength: tuple[Callable[[float], float], Callable[[float], float]] | None = None
    support_end: float | None = None
    cells: GridCells | None = None
    prepared_tail: AnalyticTail | None = None
    rotation_of: tuple["CoefficientField", float] | None = None
    extras: dict = field(default_factory=dict)

    def h(self, x: float) -> HMatrix:
        return HMatrix(*self.entries(x))

    def trace(self, x: float) -> float:
        h11, _, h22 = self.entries(x)
        return h11 + h22

    def phi(self, x: float) -> float:
        return to_phi_g(self.h(x)).phi

    def g(self, x: float) -> float:
        return to_phi_g(self.h(x)).g

    def sin2(self, x: float) -> float:
        """``sin^2 phi(x)``, i.e. ``h11 / tr H``."""
        h11, _, h22 = self.entries(x)
        tr = h11 + h22
        return h11 / tr if tr > 0 else 0.0

    def describe(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "trace_normed": self.trace_normed}


def h_at(fld: CoefficientField, x: float) -> HMatrix:
    """Evaluate the coefficient matrix at ``x >= 0``."""
    if not x >= 0:
        raise DomainError(f"x must be >= 0, got {x}")
    return fld.h(x)


def reduce_phi(phi: float) -> float:
    """Reduce an angle to ``[-pi/2, pi/2)`` (H only depends on phi mod pi)."""
    r = math.fmod(phi + 0.5 * math.pi, math.pi)
    if r < 0:
        r += math.pi
    r -= 0.5 * math.pi
    if r >= 0.5 * math.pi:
        r -= math.pi
    return r


def from_phi_g(phi: float, g: float, trace: float = 1.0) -> HMatrix:
    if not 0.0 <= g <= 1.0:
        raise DomainError(f"g must lie in [0, 1], got {g}")
    if not trace > 0:
        raise DomainError(f"trace must be positive, got {trace}")
    s, c = math.sin(phi), math.cos(phi)
    return HMatrix(trace * s * s, trace * g * s * c, trace * c * c)


def to_phi_g(H: HMatrix) -> PhiG:
    """Recover ``(phi, g, trace)``; ``g`` is returned as 0 when sin phi cos phi = 0."""
    h11, h12, h22 = H.h11, H.h12, H.h22
    tr = h11 + h22
    if not tr > 0:
        raise DomainError("H must be nonzero")
    if h11 < -PSD_TOL * tr or h22 < -PSD_TOL * tr:
        raise DomainError("H must be positive semidefinite")
    a = math.sqrt(max(h11, 0.0) / tr)
    b = math.sqrt(max(h22, 0.0) / tr)
    if h12 < 0:
        a = -a
    phi = math.atan2(a, b)
    if phi >= 0.5 * math.pi:
        phi = -0.5 * math.pi
    sc = a * b
    if sc == 0.0:
        return PhiG(phi, 0.0, tr, True)
    g = h12 / (tr * sc)
    return PhiG(phi, min(max(g, 0.0), 1.0), tr, False)


def projection(beta: float) -> HMatrix:
    """Orthogonal projection onto ``(sin beta, cos beta)^t``."""
    s, c = math.sin(beta), math.cos(beta)
    return HMatrix(s * s, s * c, c * c)


def lambda_segment(phi: float, lam: float) -> HMatrix:
    """``lam * P_phi + (1 - lam) * P_{-phi}``: all trace-one H with given diagonal."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    s, c = math.sin(phi), math.cos(phi)
    # P_phi and P_-phi only differ in the sign of the off-diagonal entry
    return HMatrix(s * s, (2.0 * lam - 1.0) * s * c, c * c)


def diagonal_part(fld: CoefficientField) -> CoefficientField:
    """Same diagonal entries, off-diagonal (equivalently ``g``) set to zero."""
    if fld.diagonal:
        return fld
    ent = fld.entries

    def entries(x):
        h11, _, h22 = ent(x)
        return h11, 0.0, h22

    cells = None
    if fld.cells is not None:
        c = fld.cells
        cells = GridCells(c.x, c.h11, tuple(0.0 for _ in c.h12), c.h22)
    # prepared_tail only depends on the (1,1) entry after alignment, which the
    # diagonal part shares when no rotation is needed
    prepared_tail = fld.prepared_tail if fld.l2_angle in (0.0, 0.5 * math.pi) else None
    return dataclasses.replace(
        fld,
        entries=entries,
        diagonal=True,
        name=f"{fld.name}[diag]",
        cells=cells,
        rotation_of=None,
        prepared_tail=prepared_tail,
    )


def _numeric_arclength(trace: Callable[[float], float]):
    def s_of_x(x: float) -> float:
        return integrate.quad(trace, 0.0, x, limit=200)[0]

    def x_of_s(s: float) -> float:
        if s <= 0:
            return 0.0
        hi = 1.0
        while s_of_x(hi) < s:
            hi *= 2.0
            if hi > 1e300:
                raise DomainError("trace integral is bounded; cannot reparametrize")
        return optimize.brentq(lambda x: s_of_x(x) - s, 0.0, hi, xtol=1e-14, rtol=1e-15)

    return s_of_x, x_of_s


def trace_normalize(fld: CoefficientField) -> CoefficientField:
    """Reparametrize by ``s(x) = int_0^x tr H`` so that the result has trace one.

    A positive time change of the Pruefer equation, so the oscillation
    classification at every ``t`` is unchanged.  The declared L^2 direction is
    preserved because ``int v^* H v`` is invariant under the substitution.
    """
    if fld.trace_normed:
        return fld
    if fld.arclength is not None:
        s_of_x, x_of_s = fld.arclength
    else:
        s_of_x, x_of_s = _numeric_arclength(fld.trace)
    ent = fld.entries

    def entries(s: float):
        x = x_of_s(s)
        h11, h12, h22 = ent(x)
        tr = h11 + h22
        if not tr > 0:
            raise DomainError(f"trace vanishes at x={x}; cannot reparametrize")
        return h11 / tr, h12 / tr, h22 / tr

    support_end = None if fld.support_end is None else s_of_x(fld.support_end)
    return dataclasses.replace(
        fld,
        entries=entries,
        trace_normed=True,
        tail=None,
        name=f"{fld.name}[normalized]",
        arclength=None,
        support_end=support_end,
        cells=None,
        rotation_of=None,
        extras={**fld.extras, "reparametrized_from": fld.name},
    )


def validate(fld: CoefficientField, xs: Sequence[float]) -> None:
    """Check the pointwise invariants at the sample points ``xs``."""
    for x in xs:
        H = fld.h(x)
        if not H.is_psd(PSD_TOL * max(1.0, H.trace)):
            raise DomainError(f"H({x}) is not positive semidefinite: {H}")
        if fld.trace_normed and abs(H.trace - 1.0) > 1e-12:
            raise DomainError(f"trace H({x}) = {H.trace} but the field is declared trace-normed")
        pg = to_phi_g(H)
        if not (0.0 <= pg.g <= 1.0 and -0.5 * math.pi <= pg.phi < 0.5 * math.pi):
            raise DomainError(f"(phi, g) out of range at x={x}: {pg}")


def l2_diagnostic(fld: CoefficientField, x_max: float = 1e8) -> bool:
    """Heuristic check that ``int_0^X sin^2 phi`` settles as ``X`` grows.

    No finite computation can prove convergence; this only warns when the last
    decade still contributes comparably to the one before it.
    """
    f = fld if fld.trace_normed else trace_normalize(fld)
    edges = [0.0] + [10.0**k for k in range(0, int(round(math.log10(x_max))) + 1)]
    inc = []
    for a, b in zip(edges[:-1], edges[1:]):
        inc.append(_quad_log(f.sin2, a, b))
    total = sum(inc)
    last, prev = inc[-1], inc[-2]
    ok = last <= 0.5 * prev or last <= 1e-6 * (total + 1e-300) or total == 0.0
    if not ok:
        warnings.warn(
            f"int sin^2 phi over the last decade is {last:.3g} (previous {prev:.3g}); "
            "sin phi does not look square integrable",
            RuntimeWarning,
            stacklevel=2,
        )
    return ok


def _quad_log(f: Callable[[float], float], a: float, b: float) -> float:
    if b <= a:
        return 0.0
    return integrate.quad(f, a, b, limit=400, epsabs=0.0, epsrel=1e-11)[0]


# ---------------------------------------------------------------- families


def _power_tail(c: float = 1.0, p: float = 2.0, g: float = 0.0) -> CoefficientField:
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"power_tail needs 0 <= c <= 1, got c={c}")
    if not p > 1.0:
        raise DomainError(f"power_tail needs p > 1 for sin phi in L^2, got p={p}")
    if not 0.0 <= g <= 1.0:
        raise DomainError(f"g must lie in [0, 1], got {g}")

    def entries(x):
        s2 = c / (1.0 + x) ** p
        c2 = 1.0 - s2
        return s2, g * math.sqrt(s2 * c2), c2

    def W(x):
        return c / ((p - 1.0) * (1.0 + x) ** (p - 1.0))

    if p == 2.0:
        A = c
        sup_xw = lambda a: c  # noqa: E731  x/(1+x) increases to 1
    elif p > 2.0:
        A = 0.0
        xstar = 1.0 / (p - 2.0)

        def sup_xw(a):
            x = max(a, xstar)
            return x * W(x)
    else:
        A = math.inf
        sup_xw = lambda a: math.inf  # noqa: E731
    if c == 0.0:
        A = 0.0
        sup_xw = lambda a: 0.0  # noqa: E731
    return CoefficientField(
        entries=entries,
        tail=AnalyticTail(W, A, A, sup_xw),
        diagonal=(g == 0.0),
        name="power_tail",
        params={"c": c, "p": p, "g": g},
        support_end=0.0 if c == 0.0 else None,
    )


def _section5_tail() -> AnalyticTail:
    # after trace normalization (s = 2 sinh x) and swapping e_1 <-> e_2:
    # sin^2 = 1/(1 + e^{2x}), so W(s) = e^{-x} = 2 / (s + sqrt(s^2 + 4))
    def W(s):
        return 2.0 / (s + math.sqrt(s * s + 4.0))

    return AnalyticTail(W, 1.0, 1.0, lambda a: 1.0)


def _section5(diagonal: bool) -> CoefficientField:
    off = 0.0 if diagonal else 1.0

    def entries(x):
        return math.exp(x), off, math.exp(-x)

    return CoefficientField(
        entries=entries,
        trace_normed=False,
        l2_direction_ok=False,
        l2_angle=0.5 * math.pi,
        diagonal=diagonal,
        name="section5_diagonal" if diagonal else "section5",
        arclength=(lambda x: 2.0 * math.sinh(x), lambda s: math.asinh(0.5 * s)),
        prepared_tail=_section5_tail(),
        extras={"a": math.exp, "a_prime": math.exp} if diagonal else {},
    )


def _zero_phi() -> CoefficientField:
    return CoefficientField(
        entries=lambda x: (0.0, 0.0, 1.0),
        tail=AnalyticTail(lambda x: 0.0, 0.0, 0.0, lambda a: 0.0),
        diagonal=True,
        name="zero_phi",
        support_end=0.0,
    )


def _constant_h(phi: float = math.pi / 4, g: float = 0.0) -> CoefficientField:
    phi = reduce_phi(phi)
    H = from_phi_g(phi, g)
    vals = (H.h11, H.h12, H.h22)
    zero = H.h11 == 0.0
    return CoefficientField(
        entries=lambda x: vals,
        l2_direction_ok=zero,
        diagonal=(H.h12 == 0.0),
        name="constant_H",
        params={"phi": phi, "g": g},
        tail=AnalyticTail(lambda x: 0.0, 0.0, 0.0, lambda a: 0.0) if zero else None,
        support_end=0.0 if zero else None,
    )


def _dyadic_modulated(c: float = 1.0, c2: float = 0.25) -> CoefficientField:
    """``sin^2 phi = c/(1+x)^2`` on even dyadic blocks, ``c2/(1+x)^2`` on odd ones."""
    if not (0.0 <= c2 <= 1.0 and 0.0 <= c <= 1.0):
        raise DomainError("dyadic_modulated needs c, c2 in [0, 1]")

    def weight(x):
        if x < 1.0:
            return c
        k = math.frexp(x)[1] - 1  # x in [2^k, 2^{k+1})
        return c if k % 2 == 0 else c2

    def entries(x):
        s2 = weight(x) / (1.0 + x) ** 2
        return s2, 0.0, 1.0 - s2

    return CoefficientField(
        entries=entries,
        diagonal=True,
        name="dyadic_modulated",
        params={"c": c, "c2": c2},
        extras={"breakpoint_base": 2.0, "log_period": 4.0},
    )


def grid_field(
    x: Sequence[float],
    phi: Sequence[float],
    g: Sequence[float] | None = None,
    name: str = "grid_sampled",
) -> CoefficientField:
    """Piecewise-constant field from a sorted sample table (right-continuous)."""
    xs = [float(v) for v in x]
    if not xs or xs[0] != 0.0:
        raise DomainError("grid must start at x = 0")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise DomainError("grid abscissae must be strictly increasing")
    if len(phi) != len(xs) or (g is not None and len(g) != len(xs)):
        raise DomainError("grid columns must have equal length")
    gs = [0.0] * len(xs) if g is None else [float(v) for v in g]
    mats = [from_phi_g(reduce_phi(float(p)), gv) for p, gv in zip(phi, gs)]
    cells = GridCells(
        tuple(xs),
        tuple(m.h11 for m in mats),
        tuple(m.h12 for m in mats),
        tuple(m.h22 for m in mats),
    )
    support_end = None
    tail = None
    if cells.h11[-1] == 0.0:
        i = len(xs) - 1
        while i > 0 and cells.h11[i - 1] == 0.0:
            i -= 1
        support_end = xs[i]
        tail = _grid_tail(cells, support_end)
    return CoefficientField(
        entries=cells.entries,
        tail=tail,
        l2_direction_ok=support_end is not None,
        diagonal=all(v == 0.0 for v in cells.h12),
        name=name,
        params={"n": len(xs)},
        support_end=support_end,
        cells=cells,
    )


def _grid_tail(cells: GridCells, end: float) -> AnalyticTail:
    xs = list(cells.x) + [math.inf]
    # cumulative W at the left edge of each cell, computed right to left
    n = len(cells.x)
    w_left = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        width = 0.0 if cells.h11[i] == 0.0 else xs[i + 1] - xs[i]
        w_left[i] = w_left[i + 1] + cells.h11[i] * width

    def W(x):
        if x >= end:
            return 0.0
        i = cells.index(x)
        return w_left[i + 1] + cells.h11[i] * (xs[i + 1] - x)

    def sup_xw(a):
        if a >= end:
            return 0.0
        best = a * W(a)
        for i in range(max(cells.index(a), 0), n):
            lo, hi = max(xs[i], a), min(xs[i + 1], end)
            if hi <= lo:
                continue
            s = cells.h11[i]
            # x W(x) = x (w_left[i+1] + s (x_{i+1} - x)) is concave on the cell
            cand = [lo, hi]
            if s > 0:
                cand.append((w_left[i + 1] + s * xs[i + 1]) / (2 * s))
            for x in cand:
                if lo <= x <= hi:
                    best = max(best, x * W(x))
        return best

    return AnalyticTail(W, 0.0, 0.0, sup_xw)


def read_grid_csv(path: str | Path) -> CoefficientField:
    """Load a grid table with columns ``x,phi[,g]``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "x" not in rows[0] or "phi" not in rows[0]:
        raise DomainError(f"{path}: expected CSV columns x,phi[,g]")
    x = [float(r["x"]) for r in rows]
    phi = [float(r["phi"]) for r in rows]
    g = [float(r["g"]) for r in rows] if "g" in rows[0] else None
    return grid_field(x, phi, g, name=f"grid_sampled:{Path(path).name}")


_FAMILIES: dict[str, Callable[..., CoefficientField]] = {
    "power_tail": _power_tail,
    "section5": lambda: _section5(False),
    "section5_diagonal": lambda: _section5(True),
    "zero_phi": _zero_phi,
    "constant_H": _constant_h,
    "dyadic_modulated": _dyadic_modulated,
    "grid_sampled": grid_field,
}

FAMILY_NAMES = tuple(_FAMILIES)


def builtin_family(name: str, **params: Any) -> CoefficientField:
    """Construct a named family; unknown names and bad parameters raise DomainError."""
    try:
        make = _FAMILIES[name]
    except KeyError:
        raise DomainError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}") from None
    if name == "grid_sampled" and "path" in params:
        return read_grid_csv(params["path"])
    try:
        fld = make(**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {name}: {exc}") from None
    if name not in ("section5", "section5_diagonal", "grid_sampled"):
        fld = dataclasses.replace(fld, params={**fld.params, **params})
    return fld
