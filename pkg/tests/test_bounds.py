import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from ranklip.bounds import (
    BoundInputs,
    BoundReport,
    DomainError,
    SmoothIntermediates,
    chapelle_wu_bound,
    covering_lipschitz,
    covering_smooth,
    dudley_bound,
    dudley_bound_detail,
    lipschitz_generalization_bound,
    local_rademacher_psi,
    online_excess_risk,
    rademacher_closed_form,
    smooth_excess_risk_chain,
    smooth_intermediates,
    smooth_uniform_bound_solve,
)
from ranklip.classes import ClassSpec

# values produced by an independent 50-digit mpmath evaluation of each formula
COVERING_F2_EXAMPLE = 43.86602180762296
COVERING_SMOOTH_EXAMPLE = 263.1961308457378
RADEMACHER_F2_EXAMPLE = 7.811680537247916
C_EXAMPLE = 1.4936201766314590
R_STAR_EXAMPLE = 80.54052452809181
CHAIN_EXAMPLE = 1.3497617696340304
CW_EXAMPLE = 0.6707106781186547


def spec2(m=10, W=1.0, R=1.0, d=5):
    return ClassSpec("l2", W, R, d, m)


def inter(r_star, r0, C=1.0, B=5.0):
    return SmoothIntermediates(C, r0, r_star, 45 * r_star + 20 * r0, math.log(3 * math.sqrt(B) / C), B)


class TestCovering:
    def test_f2_example(self):
        assert covering_lipschitz(spec2(), 1.0, 100, 2.0) == pytest.approx(COVERING_F2_EXAMPLE, rel=1e-14)

    def test_f2_ceiling_floor(self):
        assert covering_lipschitz(spec2(), 5.0, 100, 2.0) == pytest.approx(math.log2(2001))

    def test_f1_monotone(self):
        spec = ClassSpec("l1", 1.0, 1.0, 20, 5)
        eps = np.geomspace(1e-3, 10, 300)
        vals = covering_lipschitz(spec, eps, 50, 2.0)
        assert np.all(np.diff(vals) <= 0)

    def test_f1_uses_natural_log_of_d(self):
        spec = ClassSpec("l1", 1.0, 1.0, 20, 5)
        count = math.ceil(288 * 4 * (2 + math.log(20)))
        expected = count * math.log2(2 * 16 * 5 * 50 + 1)
        assert covering_lipschitz(spec, 1.0, 50, 2.0) == pytest.approx(expected)

    def test_eps_validation(self):
        with pytest.raises(ValueError):
            covering_lipschitz(spec2(), 0.0, 10, 2.0)
        with pytest.raises(ValueError):
            covering_smooth(spec2(), -1.0, 10, 2.0, 1.0)

    def test_smooth_example(self):
        assert covering_smooth(spec2(), 1.0, 100, 2.0, 1.0) == pytest.approx(COVERING_SMOOTH_EXAMPLE, rel=1e-14)

    def test_smooth_linear_in_r_before_ceiling(self):
        base = covering_smooth(spec2(), 1e-3, 100, 2.0, 1.0)
        assert covering_smooth(spec2(), 1e-3, 100, 2.0, 2.0) == pytest.approx(2 * base, rel=1e-6)

    def test_smooth_limits(self):
        assert covering_smooth(spec2(), 1e6, 100, 2.0, 1.0) == pytest.approx(math.log2(2001))
        assert covering_smooth(spec2(), 1.0, 100, 2.0, 0.0) == 0.0


class TestDudley:
    def test_zero_covering(self):
        assert dudley_bound(lambda e: np.zeros_like(e), 1.0, 100) == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("K,n", [(400.0, 100), (1.0, 100)])
    def test_constant_covering(self, K, n):
        slope = 10 * math.sqrt(K / n)
        expected = 1.0 * min(4.0, slope)
        assert dudley_bound(lambda e: np.full_like(e, K), 1.0, n) == pytest.approx(expected, rel=1e-6)

    def test_returns_minimiser(self):
        value, alpha = dudley_bound_detail(lambda e: np.full_like(e, 400.0), 2.0, 100)
        assert alpha == pytest.approx(2.0)
        assert value == pytest.approx(8.0)

    def test_scalar_covering_accepted(self):
        assert dudley_bound(lambda e: 0.0 if e > 0.5 else 1.0, 1.0, 1) > 0

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            dudley_bound(lambda e: e, 1.0, 10, upper=2.0)

    def test_below_closed_form_where_ceiling_is_inactive(self):
        # with upper = G W R the ceiling never floors; numeric inf <= the chosen-alpha closed form
        spec = spec2(m=10)
        inputs = BoundInputs(1000, 0.01, B=2.0)
        numeric = dudley_bound(lambda e: covering_lipschitz(spec, e, 1000, 2.0), 2.0, 1000)
        assert numeric <= rademacher_closed_form(spec, inputs)


class TestRademacherClosedForm:
    def test_example(self):
        val = rademacher_closed_form(spec2(), BoundInputs(1000, 0.1, G=2, B=5))
        assert val == pytest.approx(RADEMACHER_F2_EXAMPLE, rel=1e-14)

    def test_n_scaling(self):
        def without_logs(n):
            l2 = math.log2(30 * n)
            log_factor = math.log(6 * 5 * math.sqrt(n) / (5 * 2 * math.sqrt(l2)))
            return rademacher_closed_form(spec2(), BoundInputs(n, 0.1, B=5)) / (math.sqrt(l2) * log_factor)

        for n in (100, 1000, 10**4):
            assert without_logs(4 * n) / without_logs(n) == pytest.approx(0.5, rel=1e-12)

    def test_zero_G_is_domain_error(self):
        with pytest.raises(DomainError):
            rademacher_closed_form(spec2(), BoundInputs(100, 0.1, G=0.0, B=5))

    def test_zero_radius(self):
        assert rademacher_closed_form(spec2(W=0.0), BoundInputs(100, 0.1, B=5)) == 0.0

    def test_negative_log_factor(self):
        with pytest.raises(DomainError):
            rademacher_closed_form(spec2(W=100.0), BoundInputs(10, 0.1, B=0.1))

    def test_f1_matches_printed_expression(self):
        spec = ClassSpec("l1", 1.0, 1.0, 50, 5)
        n, G, B = 1000, 2.0, 4.0
        root = math.sqrt(math.log(50) * math.log2(24 * 5 * n * G))
        expected = 120 * math.sqrt(2) * G * root / math.sqrt(n) * math.log((B + 24 * 5 * n * G) / (40 * math.sqrt(2) * G * root)) ** 2
        assert rademacher_closed_form(spec, BoundInputs(n, 0.1, G=G, B=B)) == pytest.approx(expected, rel=1e-14)

    def test_f1_single_feature_is_domain_error(self):
        with pytest.raises(DomainError):
            rademacher_closed_form(ClassSpec("l1", 1.0, 1.0, 1, 5), BoundInputs(100, 0.1, B=5))


class TestSmoothIntermediates:
    def test_example(self):
        iv = smooth_intermediates(spec2(), BoundInputs(1000, 0.1, H=2, B=5))
        assert iv.C == pytest.approx(C_EXAMPLE, rel=1e-14)
        assert iv.r_star == pytest.approx(R_STAR_EXAMPLE, rel=1e-13)
        assert iv.D0 == pytest.approx(45 * iv.r_star + 20 * iv.r0)

    def test_r0_substitution(self):
        iv = smooth_intermediates(spec2(W=0.1), BoundInputs(16, 1 / math.e, B=1.0))
        assert iv.r0 == pytest.approx((1 + math.log(math.log(16))) / 16, rel=1e-14)

    def test_r_star_decreasing_in_n(self):
        rs = [smooth_intermediates(spec2(), BoundInputs(n, 0.1, B=5)).r_star for n in (10**3, 10**4, 10**5, 10**6)]
        assert all(a > b for a, b in zip(rs, rs[1:]))

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            smooth_intermediates(spec2(), BoundInputs(2, 0.1, B=5))
        with pytest.raises(DomainError):
            smooth_intermediates(ClassSpec("l1", 1, 1, 5, 5), BoundInputs(100, 0.1, B=5))
        with pytest.raises(DomainError):
            smooth_intermediates(spec2(), BoundInputs(10, 0.1, B=0.5))

    def test_psi_identities(self):
        iv = smooth_intermediates(spec2(), BoundInputs(1000, 0.1, B=5))
        assert local_rademacher_psi(0.0, iv) == 0.0
        assert iv.psi(iv.r_star) == pytest.approx(iv.r_star, rel=1e-12)
        assert iv.psi(4 * 0.37) == pytest.approx(2 * iv.psi(0.37), rel=1e-14)
        with pytest.raises(ValueError):
            iv.psi(-1.0)


class TestLipschitzBound:
    def test_degenerate(self):
        rep = lipschitz_generalization_bound(0.3, spec2(W=0.0), BoundInputs(100, 1 - 1e-12, B=1.0))
        assert rep.terms["complexity"] == 0.0
        assert rep.value == pytest.approx(0.3 + 3 * math.sqrt(math.log(2) / 200), rel=1e-9)

    def test_doubling_B(self):
        spec = spec2()
        a = lipschitz_generalization_bound(0.1, spec, BoundInputs(10**4, 0.05, B=5))
        b = lipschitz_generalization_bound(0.1, spec, BoundInputs(10**4, 0.05, B=10))
        assert b.terms["confidence"] == pytest.approx(2 * a.terms["confidence"])
        assert b.terms["empirical_risk"] == a.terms["empirical_risk"]

    def test_logarithmic_in_m(self):
        inp = BoundInputs(10**4, 0.05, B=5)
        small = lipschitz_generalization_bound(0.0, spec2(m=10), inp).terms["complexity"]
        large = lipschitz_generalization_bound(0.0, spec2(m=1000), inp).terms["complexity"]
        assert large / small < 2.0 < math.sqrt(100)

    def test_negative_risk(self):
        with pytest.raises(ValueError):
            lipschitz_generalization_bound(-0.1, spec2(), BoundInputs(100, 0.1, B=5))


class TestSmoothSolve:
    def test_trivial(self):
        assert smooth_uniform_bound_solve(0.7, inter(0.0, 0.0)).value == pytest.approx(0.7, rel=1e-15)

    def test_hand_solve(self):
        rep = smooth_uniform_bound_solve(1.0, inter(0.0, 0.01))
        assert rep.intermediates["a"] == pytest.approx(0.2)
        assert rep.intermediates["c"] == pytest.approx(1.2)
        assert rep.value == pytest.approx(1.44, rel=1e-14)

    @given(st.floats(0, 10), st.floats(0, 5), st.floats(0, 5))
    def test_resubstitution_and_monotonicity(self, L_hat, rs, r0):
        iv = inter(rs, r0)
        L = smooth_uniform_bound_solve(L_hat, iv).value
        rhs = L_hat + 45 * rs + math.sqrt(8 * rs * L) + math.sqrt(4 * r0 * L) + 20 * r0
        assert abs(L - rhs) <= 1e-9 * max(1.0, L)
        assert smooth_uniform_bound_solve(L_hat + 0.5, iv).value > L


class TestChain:
    def test_hand_example(self):
        rep = smooth_excess_risk_chain(0.0, inter(0.02, 0.01))
        assert rep.terms["empirical_risk_at_optimum"] == pytest.approx(0.04)
        assert rep.terms["D0"] == pytest.approx(1.1)
        assert rep.value == pytest.approx(CHAIN_EXAMPLE, rel=1e-14)

    def test_trivial(self):
        assert smooth_excess_risk_chain(0.4, inter(0.0, 0.0)).value == pytest.approx(0.4)

    def test_monotone(self):
        base = smooth_excess_risk_chain(0.3, inter(0.02, 0.01)).value
        assert smooth_excess_risk_chain(0.4, inter(0.02, 0.01)).value > base
        assert smooth_excess_risk_chain(0.3, inter(0.03, 0.01)).value > base
        assert smooth_excess_risk_chain(0.3, inter(0.02, 0.02)).value > base


class TestOnline:
    def test_examples(self):
        assert online_excess_risk(0.0, 1.0, 2.0, 100).value == pytest.approx(0.16)
        assert online_excess_risk(1.0, 1.0, 2.0, 100).value == pytest.approx(1.36)

    def test_exact_forms_agree(self):
        rep = online_excess_risk(0.8, 1.3, 2.0, 50)
        iv = rep.intermediates
        assert iv["exact"] == pytest.approx(iv["exact_expanded"], rel=1e-12)
        assert iv["exact"] == pytest.approx(iv["exact_simplified"], rel=1e-12)

    def test_plugged_expression_symbolically(self):
        L, H, W, n = sp.symbols("L H W n", positive=True)
        S = sp.sqrt(4 * H**2 * W**2 + 2 * H * L * n)
        eta = W / (4 * H * W + 2 * S)
        exact = L / (1 - 4 * eta * H) + W**2 / (2 * eta * (1 - 4 * eta * H) * n)
        x = H * W**2 / n
        simplified = L + 2 * sp.sqrt(4 * x**2 + 2 * x * L) + 4 * x
        for vals in ({L: 1, H: 2, W: 1, n: 100}, {L: sp.Rational(3, 7), H: 5, W: 2, n: 13}):
            assert sp.N(exact.subs(vals) - simplified.subs(vals), 40) == pytest.approx(0, abs=1e-30)

    def test_optimistic_exact_below_printed(self):
        rep = online_excess_risk(0.0, 1.0, 2.0, 100)
        assert rep.intermediates["exact"] <= rep.value + 1e-15


class TestChapelleWu:
    def test_example(self):
        rep = chapelle_wu_bound(0.0, BoundInputs(1600, 1 / math.e, G_cw=2), ClassSpec("l2", 1, 1, 3, 16))
        assert rep.value == pytest.approx(CW_EXAMPLE, rel=1e-14)
        assert rep.terms["complexity"] == pytest.approx(0.6)

    def test_single_document(self):
        rep = chapelle_wu_bound(0.0, BoundInputs(400, 0.1, G_cw=2), ClassSpec("l2", 1.5, 2, 3, 1))
        assert rep.terms["complexity"] == pytest.approx(3 * 2 * 1.5 * 2 / 20)

    def test_ratio_grows_like_sqrt_m(self):
        ratios = []
        for m in (4, 16, 64, 256):
            spec = spec2(m=m)
            inp = BoundInputs(10**4, 0.01, B=2 + math.log(m))
            uniform = lipschitz_generalization_bound(0.0, spec, inp).terms["complexity"]
            ratios.append(chapelle_wu_bound(0.0, inp, spec).terms["complexity"] / uniform)
        assert all(b > a for a, b in zip(ratios, ratios[1:]))


@pytest.mark.parametrize("builder", [
    lambda: lipschitz_generalization_bound(0.2, spec2(), BoundInputs(500, 0.05, B=4)),
    lambda: smooth_uniform_bound_solve(0.2, smooth_intermediates(spec2(), BoundInputs(500, 0.05, B=4))),
    lambda: smooth_excess_risk_chain(0.2, smooth_intermediates(spec2(), BoundInputs(500, 0.05, B=4))),
    lambda: online_excess_risk(0.3, 1.0, 2.0, 500),
    lambda: chapelle_wu_bound(0.2, BoundInputs(500, 0.05), spec2()),
])
def test_reports_reconstruct(builder):
    rep = builder()
    assert isinstance(rep, BoundReport)
    assert abs(rep.value - rep.reconstruct()) <= 1e-12 * max(1.0, rep.value)
    assert rep.to_dict()["formula_id"] == rep.formula_id


def test_dominant_terms_shrink_with_n():
    vals = []
    for n in (10**3, 10**4, 10**5):
        inp = BoundInputs(n, 0.05, B=4)
        rep = lipschitz_generalization_bound(0.0, spec2(), inp)
        vals.append((rep.terms["complexity"], rep.terms["confidence"],
                     chapelle_wu_bound(0.0, inp, spec2()).terms["complexity"]))
    for a, b in zip(vals, vals[1:]):
        assert all(y < x for x, y in zip(a, b))


def test_bound_inputs_validation():
    with pytest.raises(ValueError):
        BoundInputs(0, 0.1)
    with pytest.raises(ValueError):
        BoundInputs(10, 1.0)
    with pytest.raises(ValueError):
        BoundInputs(10, 0.1, B=-1)
