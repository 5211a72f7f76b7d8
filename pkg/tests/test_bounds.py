import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gibbs_burnin.bounds import (
    DkscCurve,
    RosenthalInputs,
    certificate_from_curve,
    default_grids,
    dksc_curve,
    grid_search,
    rosenthal_curve,
    solve_n_star,
)
from gibbs_burnin.errors import (
    InapplicableBoundError,
    InfeasibleSearchError,
    InvalidRateError,
    NoSolutionError,
    NotGeometricallyCertifiedError,
    SmallSetTooSmallError,
    UselessBoundWarning,
)
from gibbs_burnin.minorization import Ar1Law, minorization_mass
from gibbs_burnin.models import ModelSpec

from conftest import GAMMA_REF, R_REF, W_REF


@pytest.fixture
def ref_curve(worked):
    eps = minorization_mass(Ar1Law.from_model(worked), W_REF)
    return rosenthal_curve(RosenthalInputs(R_REF, GAMMA_REF, 0.375, W_REF, eps, 0.0))


def test_ref_bases(ref_curve):
    assert abs(ref_curve.base1 - 0.952697) <= 1e-5
    assert abs(ref_curve.base2 - 0.9328785) <= 1e-5
    assert ref_curve.coeff == 1.5


def test_ref_bases_with_rounded_eps():
    curve = rosenthal_curve(RosenthalInputs(R_REF, 0.25, 0.375, W_REF, 0.225552, 0.0))
    assert abs(curve.base1 - 0.952697) <= 1e-5
    assert abs(curve.base2 - 0.9328785) <= 1e-5


def test_ref_value_at_99(ref_curve):
    assert ref_curve(99) <= 0.00980
    assert ref_curve(99) == pytest.approx(0.00978, abs=2e-5)


def test_zeroth_power_unclipped(ref_curve):
    assert ref_curve(0) == pytest.approx(2.5)
    assert ref_curve.is_vacuous(0)


def test_start_point_enters_coefficient(worked):
    eps = minorization_mass(Ar1Law.from_model(worked), W_REF)
    curve = rosenthal_curve(RosenthalInputs(R_REF, 0.25, 0.375, W_REF, eps, 4.0))
    assert curve.coeff == pytest.approx(5.5)


def test_small_set_threshold():
    with pytest.raises(SmallSetTooSmallError):
        RosenthalInputs(0.2, 0.25, 0.375, 1.0, 0.3)


def test_useless_bound_warns():
    with pytest.warns(UselessBoundWarning):
        curve = rosenthal_curve(RosenthalInputs(0.99, 0.9, 0.375, 8.0, 0.01))
    assert not curve.decays
    with pytest.raises(NoSolutionError):
        solve_n_star(curve, 0.01)
    with pytest.raises(NotGeometricallyCertifiedError):
        certificate_from_curve(curve)


def test_dksc_values(worked):
    d = dksc_curve(0.0, worked)
    assert d(3) == pytest.approx(0.00552477757, rel=1e-8)
    assert round(d(3), 5) <= 0.00552
    assert d(2) > 0.01
    # direct evaluation of the printed formula: 0.0905477208
    assert d(1) == pytest.approx(0.0905477208, abs=1e-10)


def test_dksc_matches_printed_formula():
    for x in (0.0, 0.7, -2.0):
        for l in (1, 2, 5, 9):
            printed = 0.5 * math.sqrt(
                math.exp(x**2 * 2 ** (1 - 2 * l) / (1 + 2 ** (-2 * l))) / math.sqrt(1 - 2 ** (-4 * l)) - 1
            )
            assert DkscCurve(x)(l) == pytest.approx(printed, rel=1e-9)


def test_dksc_monotone_to_zero():
    ls = np.arange(1, 80)
    vals = DkscCurve(1.5)(ls)
    assert np.all(np.diff(vals) < 0) and vals[-1] < 1e-20


@pytest.mark.parametrize("model", [
    ModelSpec.gaussian(0.1, 0.25, 0.25),
    ModelSpec.gaussian(0.0, 0.3, 0.3),
    ModelSpec.beta_binomial(1, 1, 1),
])
def test_dksc_inapplicable(model):
    with pytest.raises(InapplicableBoundError):
        dksc_curve(0.0, model)


def test_dksc_other_split_of_half_is_fine():
    dksc_curve(0.0, ModelSpec.gaussian(0.0, 0.1, 0.4))


def test_n_star_ref(ref_curve, worked):
    assert solve_n_star(ref_curve, 0.01) == 99
    assert solve_n_star(dksc_curve(0.0, worked), 0.01) == 3


def test_n_star_first_iterate(worked):
    d = dksc_curve(0.0, worked)
    assert solve_n_star(d, d(1)) == 1
    assert solve_n_star(d, 0.5) == 1


@settings(max_examples=60)
@given(st.floats(0.01, 0.99), st.floats(1e-6, 0.5), st.floats(0.0, 20.0))
def test_n_star_is_first_crossing(r, omega, v0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UselessBoundWarning)
        curve = rosenthal_curve(RosenthalInputs(r, 0.25, 0.375, W_REF, 0.225553, v0))
    if not curve.decays:
        return
    n = solve_n_star(curve, omega)
    assert curve(n) <= omega
    if n >= 2:
        assert curve(n - 1) > omega


def test_n_star_cap():
    curve = rosenthal_curve(RosenthalInputs(R_REF, 0.25, 0.375, W_REF, 0.225553))
    assert curve.decays
    with pytest.raises(NoSolutionError):
        solve_n_star(curve, 0.01, l_max=50)


def test_certificate(ref_curve):
    cert = certificate_from_curve(ref_curve)
    assert cert.m0 == pytest.approx(2.5)
    assert cert.t == pytest.approx(ref_curve.base1)
    ls = np.arange(0, 201)
    assert np.all(cert.envelope(ls) >= ref_curve(ls))


def test_pinned_grid_reproduces_curve(worked, ref_curve):
    res = grid_search(worked, 0.0, 0.01, [R_REF], [GAMMA_REF], [W_REF])
    assert res.n_star == 99
    assert res.curve.base1 == ref_curve.base1
    assert res.curve.base2 == ref_curve.base2
    assert res.curve.coeff == ref_curve.coeff
    assert res.bound == ref_curve(99)
    assert len(res.trace) == 1 and res.trace[0].feasible == 1


def test_grid_containing_ref_triple_does_at_least_as_well(worked):
    res = grid_search(worked, 0.0, 0.01, [0.1, R_REF, 0.3], [0.25, 0.4], [1.5, W_REF, 4.0])
    assert res.n_star <= 99


def test_search_is_order_independent(worked):
    r = [0.15, 0.19, 0.2, 0.25]
    g = [0.25, 0.3, 0.5]
    w = [2.0, 2.2, 2.5, 3.0, 4.0]
    a = grid_search(worked, 0.0, 0.01, r, g, w)
    b = grid_search(worked, 0.0, 0.01, r[::-1], g[::-1], w[::-1])
    assert a.inputs == b.inputs and a.n_star == b.n_star


def test_tie_break_prefers_smaller_bound(worked):
    res = grid_search(worked, 0.0, 0.01, [0.185, 0.19], [0.25], [2.2])
    vals = []
    for r in (0.185, 0.19):
        c = rosenthal_curve(RosenthalInputs(r, 0.25, 0.375, 2.2, res.inputs.eps))
        vals.append((solve_n_star(c, 0.01), c(solve_n_star(c, 0.01)), r))
    assert (res.n_star, res.bound, res.inputs.r) == min(vals)


def test_search_errors(worked):
    with pytest.raises(InfeasibleSearchError):
        grid_search(worked, 0.0, 0.01, [0.2], [0.25], [0.5, 0.9])
    with pytest.raises(InfeasibleSearchError):
        grid_search(worked, 0.0, 0.01, [0.2], [0.25], [])
    with pytest.raises(InvalidRateError):
        grid_search(worked, 0.0, 0.01, [0.2], [0.1], [2.0])
    with pytest.raises(InapplicableBoundError):
        grid_search(ModelSpec.poisson_gamma(1, 1), 0.0, 0.01)


def test_search_with_user_epsilon():
    model = ModelSpec.beta_binomial(1, 1, 1)
    res = grid_search(model, 0.0, 0.01, epsilon=0.5, refine=False)
    assert res.inputs.eps == 0.5
    assert res.curve(res.n_star) <= 0.01


def test_default_grid_shapes():
    r, gamma, w = default_grids(0.25, 0.375)
    assert r.size == 99 and gamma.size == 50 and w.shape == (50, 200)
    assert gamma[0] == 0.25 and gamma[-1] < 1
    thresholds = 2 * 0.375 / (1 - gamma)
    finite = np.isfinite(w)
    assert np.all(w[finite] > np.broadcast_to(thresholds[:, None], w.shape)[finite])
    assert np.nanmax(w) == pytest.approx(20.0)


@pytest.mark.slow
def test_default_search_meets_published_burn_in(worked):
    res = grid_search(worked, 0.0, 0.01)
    assert res.n_star <= 99
    assert res.curve(res.n_star) <= 0.01
    assert [e.stage for e in res.trace] == ["grid", "refine-1", "refine-2"]


def test_enlarging_w_lowers_eps_and_changes_n_star(worked):
    law = Ar1Law.from_model(worked)
    out = []
    for w in (1.5, W_REF, 4.0, 8.0):
        eps = minorization_mass(law, w)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UselessBoundWarning)
            c = rosenthal_curve(RosenthalInputs(R_REF, 0.25, 0.375, w, eps))
        out.append((eps, solve_n_star(c, 0.01) if c.decays else None))
    eps_values = [e for e, _ in out]
    assert eps_values == sorted(eps_values, reverse=True)
