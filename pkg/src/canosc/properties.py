"""Randomized invariant checks, seeded for reproducibility.

Each suite returns ``(cases, failures)`` where ``failures`` lists short
descriptions of counterexamples (empty when the invariant held).
"""

from __future__ import annotations

import math

import numpy as np

from .model import CoefficientField, builtin_family, from_phi_g, grid_field
from .prufer import PruferSolver, StepPolicy, integrate
from .schrodinger import ShootingPolicy, _verdict
from .spectrum import ClassifyPolicy, Verdict, _classify_prepared, m_estimate
from .transforms import prepare, rotate

# Pruefer comparisons carry the integrator tolerance
ANGLE_TOL = 1e-7


def _random_field(rng: np.random.Generator) -> CoefficientField:
    kind = rng.integers(4)
    if kind == 0:
        return builtin_family("power_tail", c=float(rng.uniform(0.05, 1.0)), p=float(rng.uniform(1.5, 4.0)),
                              g=float(rng.choice([0.0, rng.uniform(0, 1)])))
    if kind == 1:
        return builtin_family("constant_H", phi=float(rng.uniform(-1.5, 1.5)), g=float(rng.uniform(0, 1)))
    if kind == 2:
        n = int(rng.integers(2, 8))
        xs = np.cumsum(rng.uniform(0.1, 2.0, n)) - 0.1
        xs[0] = 0.0
        return grid_field(list(xs), list(rng.uniform(-1.5, 1.5, n)), list(rng.uniform(0, 1, n)))
    return builtin_family("section5_diagonal" if rng.random() < 0.5 else "section5")


def _theta(fld, t, theta0, x):
    return PruferSolver(fld, t, theta0, 0.0, StepPolicy(rtol=1e-11, atol=1e-13)).advance_to(x).theta


def monotone_in_x(n: int = 200, seed: int = 1) -> tuple[int, list[str]]:
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(n):
        fld = prepare(_random_field(rng))
        t = float(rng.uniform(-5, 5)) or 1.0
        xs = np.sort(rng.uniform(0, 50, 6))
        traj = integrate(fld, t, float(rng.uniform(-3, 3)), 0.0, float(xs[-1]) + 1.0, checkpoints=xs)
        th = np.array(traj.thetas) * np.sign(t)
        if np.any(np.diff(th) < -ANGLE_TOL):
            bad.append(f"{fld.name} t={t:.4g}")
    return n, bad


def monotone_in_t(n: int = 200, seed: int = 2) -> tuple[int, list[str]]:
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(n):
        fld = prepare(_random_field(rng))
        t1, t2 = np.sort(rng.uniform(-5, 5, 2))
        x, th0 = float(rng.uniform(0.1, 40)), float(rng.uniform(-3, 3))
        if _theta(fld, float(t1), th0, x) > _theta(fld, float(t2), th0, x) + ANGLE_TOL:
            bad.append(f"{fld.name} t={t1:.4g},{t2:.4g} x={x:.4g}")
    return n, bad


def initial_ordering(n: int = 200, seed: int = 3) -> tuple[int, list[str]]:
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(n):
        fld = prepare(_random_field(rng))
        t = float(rng.uniform(-5, 5)) or 1.0
        a, b = np.sort(rng.uniform(-3, 3, 2))
        x = float(rng.uniform(0.1, 40))
        if _theta(fld, t, float(a), x) > _theta(fld, t, float(b), x) + ANGLE_TOL:
            bad.append(f"{fld.name} t={t:.4g} theta0={a:.4g},{b:.4g}")
    return n, bad


def pi_shift(n: int = 200, seed: int = 4) -> tuple[int, list[str]]:
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(n):
        fld = prepare(_random_field(rng))
        t, th0, x = float(rng.uniform(-5, 5)) or 1.0, float(rng.uniform(-3, 3)), float(rng.uniform(0.1, 40))
        k = int(rng.integers(-3, 4))
        d = _theta(fld, t, th0 + k * math.pi, x) - _theta(fld, t, th0, x) - k * math.pi
        if abs(d) > ANGLE_TOL:
            bad.append(f"{fld.name} t={t:.4g} k={k} defect={d:.3g}")
    return n, bad


def diagonal_domination(n: int = 200, seed: int = 5) -> tuple[int, list[str]]:
    """``e^* H e <= 2 e^* H_d e`` for every unit vector ``e``."""
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(n):
        H = from_phi_g(float(rng.uniform(-math.pi / 2, math.pi / 2)), float(rng.uniform(0, 1)),
                       float(rng.uniform(0.1, 10)))
        for th in rng.uniform(-math.pi, math.pi, 16):
            c, s = math.cos(th), math.sin(th)
            full = H.quad(float(th))
            diag = H.h11 * c * c + H.h22 * s * s
            if full > 2 * diag + 1e-14 * (1 + diag):
                bad.append(f"H={H} theta={th:.4g}")
    return n, bad


ROTATION_FAMILIES = (
    ("power_tail", {"c": 1.0, "p": 2.0, "g": 0.5}),
    ("power_tail", {"c": 1.0, "p": 3.0}),
    ("zero_phi", {}),
    ("section5", {}),
    ("constant_H", {"phi": 0.7, "g": 0.3}),
)


def rotation_invariance(n: int = 200, seed: int = 6, policy: ClassifyPolicy | None = None) -> tuple[int, list[str]]:
    """m brackets of ``R^* H R`` (rotated back onto the L^2 direction) agree with those of H."""
    rng = np.random.default_rng(seed)
    policy = policy or ClassifyPolicy(rel_resolution=0.05)
    base = [m_estimate(builtin_family(name, **kw), policy) for name, kw in ROTATION_FAMILIES]
    bad = []
    for i in range(n):
        j = i % len(ROTATION_FAMILIES)
        name, kw = ROTATION_FAMILIES[j]
        fld = builtin_family(name, **kw)
        alpha = float(rng.uniform(-math.pi, math.pi))
        est = m_estimate(rotate(fld, alpha), policy)
        ref = base[j].m
        same = (est.m.is_infinite and ref.is_infinite) or (
            not est.m.is_infinite and not ref.is_infinite and est.m.inflate().overlaps(ref.inflate()))
        if not same:
            bad.append(f"{name} alpha={alpha:.4g}: {est.m} vs {ref}")
    return n, bad


def _grid_family(rng: np.random.Generator) -> CoefficientField:
    kind = rng.integers(3)
    if kind == 0:
        return builtin_family("power_tail", c=float(rng.uniform(0.1, 1.0)), p=float(rng.choice([2.0, 2.5, 3.0])),
                              g=float(rng.choice([0.0, 0.5])))
    if kind == 1:
        return builtin_family("section5_diagonal" if rng.random() < 0.5 else "section5")
    return builtin_family("dyadic_modulated", c=1.0, c2=float(rng.uniform(0, 1)))


def upward_closure(n: int = 200, seed: int = 7, policy: ClassifyPolicy | None = None) -> tuple[int, list[str]]:
    """On an 8-point t-grid no NonOscillatory verdict follows an Oscillatory one."""
    rng = np.random.default_rng(seed)
    policy = policy or ClassifyPolicy()
    bad = []
    for _ in range(n):
        fld = _grid_family(rng)
        prepared = prepare(fld)
        sign = 1 if rng.random() < 0.5 else -1
        ts = np.sort(np.exp(rng.uniform(math.log(0.05), math.log(5.0), 8)))
        kinds = [_classify_prepared(prepared, sign * float(t), policy).kind for t in ts]
        seen_osc = False
        for t, k in zip(ts, kinds):
            if k is Verdict.OSCILLATORY:
                seen_osc = True
            elif k is Verdict.NON_OSCILLATORY and seen_osc:
                bad.append(f"{fld.name} sign={sign} grid={np.round(ts, 4).tolist()} "
                           f"verdicts={[v.value for v in kinds]}")
                break
    return n, bad


def single_switch(n: int = 200, seed: int = 8, policy: ShootingPolicy | None = None) -> tuple[int, list[str]]:
    """Schroedinger probes switch from Finite to Infinite at most once along t."""
    rng = np.random.default_rng(seed)
    policy = policy or ShootingPolicy()
    bad = []
    for _ in range(n):
        fld = _grid_family(rng)
        prepared = prepare(fld)
        ts = np.sort(np.exp(rng.uniform(math.log(0.05), math.log(5.0), 8)))
        kinds = [_verdict(prepared, float(t), policy).kind for t in ts]
        seen_inf = False
        for k in kinds:
            if k == "Infinite":
                seen_inf = True
            elif k == "Finite" and seen_inf:
                bad.append(f"{fld.name} grid={np.round(ts, 4).tolist()} verdicts={kinds}")
                break
    return n, bad


SUITES = {
    "pruefer monotone in x": monotone_in_x,
    "pruefer monotone in t": monotone_in_t,
    "initial-condition ordering": initial_ordering,
    "pi-shift equivariance": pi_shift,
    "f(H) <= 2 f(H_d)": diagonal_domination,
    "rotation invariance of m brackets": rotation_invariance,
    "upward closure of the oscillatory set": upward_closure,
    "single Finite->Infinite switch": single_switch,
}
