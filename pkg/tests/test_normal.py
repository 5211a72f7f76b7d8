import math

import mpmath
import numpy as np
from hypothesis import given, strategies as st

from gibbs_burnin.normal import norm_cdf, norm_pdf, normal_density


@given(st.floats(min_value=-38.0, max_value=38.0))
def test_cdf_matches_high_precision(z):
    assert abs(norm_cdf(z) - float(mpmath.ncdf(z))) <= 1e-12


def test_lower_tail_keeps_relative_precision():
    for z in (-10.0, -20.0, -30.0):
        exact = float(mpmath.ncdf(z))
        assert math.isclose(norm_cdf(z), exact, rel_tol=1e-12)


def test_array_and_scalar_agree():
    z = np.linspace(-8, 8, 33)
    np.testing.assert_allclose(norm_cdf(z), [norm_cdf(float(v)) for v in z], rtol=1e-14)
    np.testing.assert_allclose(norm_pdf(z), [norm_pdf(float(v)) for v in z], rtol=1e-15)


def test_normal_density_scaling():
    assert math.isclose(float(normal_density(1.0, 1.0, 0.375)), 1 / math.sqrt(2 * math.pi * 0.375))
