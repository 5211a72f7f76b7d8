import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gibbs_burnin.drift import (
    DriftCertificate,
    build_drift,
    exact_drift_expectation,
    verify_drift_identity,
    write_drift_report,
)
from gibbs_burnin.errors import DegenerateCenterError, FamilyRestrictionError, InvalidRateError
from gibbs_burnin.models import MomentConstants, ModelSpec, moment_constants


def test_worked_model_certificate(worked):
    cert = build_drift(moment_constants(worked))
    assert (cert.u, cert.L, cert.ch, cert.gamma) == pytest.approx((0.0, 0.375, 0.25, 0.25), abs=1e-15)
    assert cert.threshold == pytest.approx(1.0)


def test_beta_binomial_certificate(bb111):
    cert = build_drift(moment_constants(bb111))
    assert (cert.ch, cert.u, cert.L) == pytest.approx((0.0, 0.5, 0.25))


def test_poisson_gamma_center():
    cert = build_drift(moment_constants(ModelSpec.poisson_gamma(1, 1)))
    assert cert.u == pytest.approx(2.5)
    assert cert.ch == pytest.approx(0.25)


def test_gaussian_center_is_prior_mean():
    cert = build_drift(moment_constants(ModelSpec.gaussian(1.7, 0.3, 0.7)))
    assert cert.u == pytest.approx(1.7)


@given(st.floats(0.25, 0.999))
def test_gamma_only_loosens(gamma):
    mc = moment_constants(ModelSpec.gaussian(0, 0.25, 0.25))
    base = build_drift(mc)
    cert = build_drift(mc, gamma)
    assert (cert.u, cert.L, cert.ch) == (base.u, base.L, base.ch)
    assert cert.gamma == gamma


def test_errors():
    contracting = MomentConstants(1, 0, 2, 0, 0, 0.5, 0, 0.5, 0, 0)
    with pytest.raises(FamilyRestrictionError):
        build_drift(contracting)
    degenerate = MomentConstants(1, 0, 1, 0, 0, 0.25, 0, 0.25, 0, 0)
    with pytest.raises(DegenerateCenterError):
        build_drift(degenerate)
    mc = moment_constants(ModelSpec.gaussian(0, 0.25, 0.25))
    for gamma in (0.2, 1.0, 1.5):
        with pytest.raises(InvalidRateError):
            build_drift(mc, gamma)


def test_negative_constant_is_flagged_not_hidden():
    cert = DriftCertificate(u=0.0, ch=0.2, gamma=0.2, L=-0.1)
    assert cert.negative_constant


def test_identity_predictions(worked):
    cert = build_drift(moment_constants(worked))
    assert cert.predicted(2.0) == pytest.approx(1.375)
    assert cert.predicted(0.0) == pytest.approx(0.375)


@pytest.mark.slow
@pytest.mark.parametrize("model, xs", [
    (ModelSpec.gaussian(0, 0.25, 0.25), (-3, -1, 0, 1, 2, 3)),
    (ModelSpec.gaussian(-1.2, 0.6, 0.9), (-4, -1.2, 0, 2)),
    (ModelSpec.poisson_gamma(1, 1), (0, 1, 3, 8)),
    (ModelSpec.poisson_gamma(3.5, 0.4), (0, 2, 20)),
])
def test_identity_is_an_equality_monte_carlo(model, xs):
    cert = build_drift(moment_constants(model))
    rows = verify_drift_identity(model, cert, xs, 100_000, np.random.default_rng(11))
    assert all(not r.exact and r.stderr > 0 for r in rows)
    assert all(r.passed() for r in rows), [(r.x, r.zscore) for r in rows]


@pytest.mark.parametrize("n, alpha, beta", [(1, 1, 1), (2, 2, 3), (6, 0.7, 4.0), (20, 3, 3)])
def test_identity_exact_for_beta_binomial(n, alpha, beta):
    model = ModelSpec.beta_binomial(n, alpha, beta)
    cert = build_drift(moment_constants(model))
    rows = verify_drift_identity(model, cert, range(n + 1), 1000, np.random.default_rng(0))
    for r in rows:
        assert r.exact
        assert abs(r.estimate - r.predicted) <= 1e-12 * abs(r.predicted)


def test_beta_binomial_111_is_quarter(bb111):
    cert = build_drift(moment_constants(bb111))
    for x in (0, 1):
        assert exact_drift_expectation(bb111, cert, x) == pytest.approx(0.25, rel=1e-12)


def test_center_removes_linear_term():
    # E[(Y - c)^2 | x] - ch (x - c)^2 is constant in x only for c = u
    model = ModelSpec.gaussian(0.8, 0.4, 0.6)
    mc = moment_constants(model)
    cert = build_drift(mc)
    s2 = 0.4 + 0.4 * 0.6 / 1.0
    xs = np.linspace(-5, 5, 41)
    centers = np.linspace(cert.u - 1, cert.u + 1, 201)
    spreads = []
    for c in centers:
        exact = s2 + (mc.f * xs + mc.g - c) ** 2
        resid = exact - mc.ch * (xs - c) ** 2
        spreads.append(np.ptp(resid))
    assert centers[int(np.argmin(spreads))] == pytest.approx(cert.u, abs=1e-12)
    assert min(spreads) < 1e-12


def test_sample_size_precondition(worked):
    cert = build_drift(moment_constants(worked))
    with pytest.raises(ValueError):
        verify_drift_identity(worked, cert, [0.0], 999, np.random.default_rng(0))


def test_report_csv(worked):
    cert = build_drift(moment_constants(worked))
    rows = verify_drift_identity(worked, cert, [0.0, 2.0], 1000, np.random.default_rng(1))
    buf = io.StringIO()
    write_drift_report(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x,predicted,estimate,stderr,zscore"
    assert lines[2].startswith("2,1.375,")
