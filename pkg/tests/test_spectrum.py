import math

import pytest

from canosc.interval import INF
from canosc.model import DomainError, builtin_family, grid_field
from canosc.spectrum import (ClassifyPolicy, ThresholdError, Verdict, bisect_threshold, classify,
                             diagonal_symmetry_check, m_estimate, oscillatory_threshold, tail_certificate)
from canosc.transforms import prepare

OSC, NON = Verdict.OSCILLATORY, Verdict.NON_OSCILLATORY


@pytest.mark.parametrize("family,kw,t,kind", [
    ("power_tail", {"c": 1.0, "p": 2.0}, 1.0, OSC),        # t^2 c = 1 > 1/4
    ("power_tail", {"c": 1.0, "p": 2.0}, 0.4, NON),        # 0.16 < 1/4
    ("power_tail", {"c": 1.0, "p": 2.0}, -1.0, OSC),
    ("power_tail", {"c": 1.0, "p": 3.0}, 100.0, NON),
    ("zero_phi", {}, 5.0, NON),
    ("constant_H", {}, 0.05, OSC),
    ("section5", {}, 1.0, OSC),
    ("section5", {}, 0.2, NON),
    ("section5_diagonal", {}, 0.45, NON),
    ("section5_diagonal", {}, 0.6, OSC),
])
def test_classify(family, kw, t, kind):
    assert classify(builtin_family(family, **kw), t).kind is kind


def test_classify_rejects_zero(power2):
    with pytest.raises(DomainError):
        classify(power2, 0.0)


def test_tail_certificate_factor(power2):
    p = prepare(power2)
    assert tail_certificate(p, 0.49, 1.0) and not tail_certificate(p, 0.51, 1.0)
    g = prepare(builtin_family("power_tail", c=1.0, p=2.0, g=0.5))
    # general fields need the doubled parameter
    assert tail_certificate(g, 0.24, 1.0) and not tail_certificate(g, 0.26, 1.0)


def test_compact_support_grid_is_non_oscillatory():
    f = grid_field([0.0, 2.0, 5.0], [0.8, -0.3, 0.0], [0.0, 0.5, 0.0])
    assert classify(f, 30.0).kind is NON


def test_bisect_threshold_synthetic():
    lo, hi, unknown, calls, notes = bisect_threshold(lambda t: "high" if t > 0.3 else "low", 0.01, 100.0, 1e-3, 80)
    assert lo <= 0.3 <= hi and hi - lo <= 1e-3 * hi and not unknown and not notes
    lo, hi, *_ = bisect_threshold(lambda t: "low", 0.01, 100.0, 1e-2, 80)
    assert lo == hi == INF
    lo, hi, *_ = bisect_threshold(lambda t: "high", 0.01, 100.0, 1e-2, 80)
    assert (lo, hi) == (0.0, 0.01)


def test_bisect_threshold_keeps_unknown_band():
    def pred(t):
        return "low" if t < 0.29 else ("high" if t > 0.31 else "unknown")

    lo, hi, unknown, calls, _ = bisect_threshold(pred, 0.01, 100.0, 1e-3, 80)
    assert lo < 0.29 and hi > 0.31 and unknown and all(0.29 <= u <= 0.31 for u in unknown)
    assert len(calls) <= 80


def test_threshold_error_when_everything_is_inconclusive():
    pol = ClassifyPolicy(x_max=20.0, t_min=0.3, t_max=0.4)
    with pytest.raises(ThresholdError):
        oscillatory_threshold(builtin_family("dyadic_modulated"), 1, pol)


def test_m_estimates():
    est = m_estimate(builtin_family("power_tail", c=1.0, p=2.0))
    assert est.m.contains(0.5) and est.m.width <= 0.05 and est.zero_in_ess == "no"
    assert diagonal_symmetry_check(est, builtin_family("power_tail"))
    assert m_estimate(builtin_family("zero_phi")).m.is_infinite
    const = m_estimate(builtin_family("constant_H"))
    assert const.zero_in_ess == "yes"
    s5 = m_estimate(builtin_family("section5"))
    assert s5.m.contains(0.25) and s5.m.width <= 0.05
    # the negative side of the full system is not resolved below t_max
    assert s5.m_minus.hi == INF and s5.m_minus.lo >= s5.m.lo
    with pytest.raises(DomainError):
        diagonal_symmetry_check(s5, builtin_family("section5"))


def test_estimate_json_keys(power2):
    d = m_estimate(power2).to_json()
    assert {"m_plus", "m_minus", "m", "zero_in_ess", "thresholds", "source"} <= set(d)
    assert "inconclusive_probes" in d["m"]


def test_policy_validation():
    with pytest.raises(DomainError):
        ClassifyPolicy(t_min=1.0, t_max=0.5)
    with pytest.raises(DomainError):
        ClassifyPolicy(x_max=math.inf)
    h = ClassifyPolicy(x_first=10, x_max=100).horizons()
    assert h == [10, 20, 40, 80, 100]
