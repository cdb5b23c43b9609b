import math

import pytest

from canosc.bounds import (SANDWICH_UPPER, TailPolicy, consistency_report, discrete_spectrum, tail_stats,
                           thm11_interval, thm13_interval, thm14_upper)
from canosc.interval import INF, Bracket
from canosc.model import DomainError, builtin_family
from canosc.schrodinger import s_bracket
from canosc.spectrum import m_estimate


def test_thm13():
    b = thm13_interval(1.0)
    assert (b.lo, b.hi) == (0.5, 1.0)
    b = thm13_interval(0.25)
    assert (b.lo, b.hi) == (1.0, 2.0)
    assert thm13_interval(0.0).is_infinite and discrete_spectrum(0.0) and not discrete_spectrum(1.0)
    assert thm13_interval(INF) == Bracket(0.0, 0.0)
    with pytest.raises(DomainError):
        thm13_interval(-1.0)


def test_thm13_is_antitone():
    prev = thm13_interval(1e-6)
    for A in (1e-3, 0.1, 0.5, 1.0, 7.0):
        cur = thm13_interval(A)
        assert cur.lo <= cur.hi and cur.lo <= prev.lo and cur.hi <= prev.hi
        prev = cur


def test_thm14():
    assert thm14_upper(1.0) == 0.5 and thm14_upper(4.0) == 0.25 and thm14_upper(0.0) == INF
    with pytest.raises(DomainError):
        thm14_upper(-0.1)


def test_thm11():
    b = thm11_interval(Bracket(0.5, 0.5))
    assert b.lo == 0.25 and b.hi == pytest.approx(1.0 / (3.0 - math.sqrt(5.0)), abs=1e-12)
    assert thm11_interval(Bracket(1.0, 1.0)).hi == pytest.approx(2.0 / (3.0 - math.sqrt(5.0)), abs=1e-12)
    assert thm11_interval(Bracket.infinite()).is_infinite
    assert SANDWICH_UPPER == pytest.approx(2.618033988749895, abs=1e-15)


def test_tail_stats_exact_and_quadrature(power2):
    ex = tail_stats(power2)
    assert ex.exact and ex.A_hat == 1.0 and ex.B_hat == 1.0
    q = tail_stats(power2, quadrature=True)
    assert not q.exact and abs(q.A_hat - 1.0) < 1e-3 and abs(q.B_hat - 1.0) < 1e-3 and q.B_hat <= q.A_hat
    assert all(v >= 0 for _, _, v in q.samples)


def test_tail_stats_p3_and_zero(power3):
    assert tail_stats(power3).A_hat == 0.0
    q = tail_stats(power3, quadrature=True)
    # x W = x / (2 (1+x)^2) ~ 1/(2x): at most 5e-8 over the last decade
    assert q.A_hat == pytest.approx(5e-8, rel=1e-3) and q.B_hat == pytest.approx(5e-9, rel=1e-3)
    z = tail_stats(builtin_family("zero_phi"), quadrature=True)
    assert (z.A_hat, z.B_hat) == (0.0, 0.0)


def dyadic_block_oracle(x, c=1.0, c2=0.25, blocks=400):
    # exact W by summing 1/(1+x)^2 block integrals
    k = math.frexp(x)[1] - 1
    w = lambda j: c if j % 2 == 0 else c2  # noqa: E731
    tot = w(k) * (1 / (1 + x) - 1 / (1 + 2 ** (k + 1)))
    for j in range(k + 1, blocks):
        tot += w(j) * (1 / (1 + 2 ** j) - 1 / (1 + 2 ** (j + 1)))
    return x * tot


def test_dyadic_modulated_has_a_above_b():
    st = tail_stats(builtin_family("dyadic_modulated"), quadrature=True)
    xs = [2.0 ** k for k in range(24, 27)] + [1e7 * 1.01 ** j for j in range(232)]
    ref = [dyadic_block_oracle(x) for x in xs]
    assert st.A_hat > st.B_hat
    # oracle extremes over the decade: 3/4 and 1/2
    assert st.A_hat == pytest.approx(max(ref), abs=1e-3) and st.A_hat == pytest.approx(0.75, abs=1e-3)
    assert st.B_hat == pytest.approx(min(ref), abs=1e-2) and st.B_hat == pytest.approx(0.5, abs=1e-3)


def test_divergent_tail_is_reported():
    with pytest.raises(DomainError, match="does not converge"):
        tail_stats(builtin_family("power_tail", c=1.0, p=1.0000001), quadrature=True,
                   policy=TailPolicy(x_max=1e6))


def test_consistency_power2(power2):
    r = consistency_report(power2, m_estimate(power2), s_bracket(power2), tail_stats(power2))
    assert r.passed and not r.discrete_spectrum
    assert set(r.checks) >= {"a_thm13", "b_thm14", "c_thm12", "d_thm11", "e_symmetry"}


def test_consistency_section5():
    f, d = builtin_family("section5"), builtin_family("section5_diagonal")
    r = consistency_report(f, m_estimate(f), s_bracket(f), tail_stats(f), m_estimate(d))
    assert r.passed and r.lower_endpoint_attained and r.ratio.contains(0.5)


def test_consistency_zero_phi():
    f = builtin_family("zero_phi")
    r = consistency_report(f, m_estimate(f), s_bracket(f), tail_stats(f))
    assert r.passed and r.discrete_spectrum


def test_consistency_rejects_mismatched_inputs(power2, power3):
    with pytest.raises(DomainError):
        consistency_report(power2, m_estimate(builtin_family("zero_phi")), s_bracket(power2), tail_stats(power2))


def test_consistency_flags_a_wrong_estimate(power2):
    est = m_estimate(power2)
    fake = type(est)(Bracket(2.0, 2.1), Bracket(2.0, 2.1), Bracket(2.0, 2.1), "no", None, power2.name)
    r = consistency_report(power2, fake, s_bracket(power2), tail_stats(power2))
    assert not r.passed and "b_thm14" in r.failures()
