import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings, strategies as st

from pmcsurf import _pykernels, elliptic
from pmcsurf.errors import DomainError

try:
    from pmcsurf import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

M_GRID = np.array([0.0, 1e-8, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999999])


def test_complete_integrals_match_scipy():
    kk, ee = elliptic.complete_integrals(M_GRID)
    np.testing.assert_allclose(kk, sp.ellipk(M_GRID), rtol=1e-14)
    np.testing.assert_allclose(ee, sp.ellipe(M_GRID), rtol=1e-14)


def test_complete_integrals_scalar_returns_float():
    kk, ee = elliptic.complete_integrals(0.0)
    assert isinstance(kk, float)
    assert kk == pytest.approx(np.pi / 2, abs=1e-15)
    assert ee == pytest.approx(np.pi / 2, abs=1e-15)


def test_legendre_relation():
    m = np.linspace(0.05, 0.95, 19)
    k1, e1 = elliptic.complete_integrals(m)
    k2, e2 = elliptic.complete_integrals(1.0 - m)
    np.testing.assert_allclose(e1 * k2 + e2 * k1 - k1 * k2, np.pi / 2, atol=1e-13)


@pytest.mark.parametrize("m", [0.1, 0.5, 0.9, 0.999])
def test_incomplete_integrals_match_scipy_beyond_half_period(m):
    phi = np.linspace(-7.0, 7.0, 57)
    np.testing.assert_allclose(elliptic.incomplete_F(phi, m), sp.ellipkinc(phi, m), rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(elliptic.incomplete_E(phi, m), sp.ellipeinc(phi, m), rtol=1e-13, atol=1e-14)


@pytest.mark.parametrize("m", [0.0, 0.2, 0.6, 0.95])
def test_jacobi_functions_match_scipy(m):
    s = np.linspace(-12.0, 12.0, 101)
    _, _, dn_ref, ph_ref = sp.ellipj(s, m)
    amp, d, dd = elliptic.am_dn(s, m)
    np.testing.assert_allclose(amp, ph_ref, atol=1e-12)
    np.testing.assert_allclose(d, dn_ref, atol=1e-13)
    np.testing.assert_allclose(dd, -m * np.sin(ph_ref) * np.cos(ph_ref), atol=1e-12)


def test_dn_squared_integral_by_quadrature():
    from scipy.integrate import quad
    m = 0.7
    for s in (0.3, 2.5, -4.0):
        ref, _ = quad(lambda u: sp.ellipj(u, m)[2] ** 2, 0.0, s, epsabs=1e-13, epsrel=1e-13, limit=200)
        assert elliptic.dn_squared_integral(s, m) == pytest.approx(ref, abs=1e-12)


def test_dn_dm_against_high_precision_difference():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40

    def dn_mp(s, m):
        return mpmath.ellipfun("dn", s, m=m)

    for s, m in [(0.4, 0.3), (2.0, 0.8), (-3.1, 0.55)]:
        ref = float(mpmath.diff(lambda mm: dn_mp(s, mm), m))
        assert elliptic.dn_dm(s, m) == pytest.approx(ref, abs=1e-12)


def test_dn_dm_rejects_zero_parameter():
    with pytest.raises(DomainError):
        elliptic.dn_dm(0.5, 0.0)


@pytest.mark.parametrize("bad", [-0.1, 1.0, 1.5, np.nan])
def test_parameter_outside_unit_interval_rejected(bad):
    with pytest.raises(DomainError):
        elliptic.complete_integrals(bad)


@settings(max_examples=60, deadline=None)
@given(s=st.floats(-30.0, 30.0), m=st.floats(0.0, 0.999))
def test_amplitude_inverts_F(s, m):
    assert elliptic.incomplete_F(elliptic.amplitude(s, m), m) == pytest.approx(s, abs=1e-11)


@settings(max_examples=60, deadline=None)
@given(s=st.floats(-30.0, 30.0), m=st.floats(0.0, 0.999))
def test_dn_bounds(s, m):
    d, _ = elliptic.dn(s, m)
    assert np.sqrt(1.0 - m) - 1e-14 <= d <= 1.0 + 1e-14


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
@pytest.mark.parametrize("name", ["complete_integrals", "ellipf", "ellipe", "am_dn"])
def test_backends_agree(name):
    rng = np.random.default_rng(5)
    m = rng.uniform(0.0, 0.9999, 500)
    phi = rng.uniform(-10.0, 10.0, 500)
    args = (m,) if name == "complete_integrals" else (phi, m)
    ref = np.atleast_2d(getattr(_pykernels, name)(*args))
    out = np.atleast_2d(getattr(_ckernels, name)(*args))
    np.testing.assert_allclose(out, ref, rtol=1e-13, atol=1e-13)


def test_elliptic_point_validates():
    pt = elliptic.EllipticPoint(1.0, 0.5)
    assert pt.F() == pytest.approx(sp.ellipkinc(1.0, 0.5), rel=1e-14)
    with pytest.raises(DomainError):
        elliptic.EllipticPoint(np.inf, 0.5)


def test_environment_forces_numpy_backend():
    import os
    import subprocess
    import sys
    env = dict(os.environ, PMCSURF_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "from pmcsurf import elliptic; print(elliptic.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
