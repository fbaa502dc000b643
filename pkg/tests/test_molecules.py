import math
from types import SimpleNamespace

import pytest
from scipy.optimize import brentq

from pdmcavity.errors import InvalidParameterError, InvalidRecordError
from pdmcavity.molecules import (
    CATALOG_ENV,
    MoleculeRecord,
    coupling_from_cavity,
    default_catalog,
    derive_alpha,
    find,
    format_catalog,
    params_for,
    read_catalog,
    write_catalog,
)


def test_bundled_catalog():
    recs = default_catalog()
    assert [r.key for r in recs] == ["SrF:X2Sigma-A2Pi", "diphenyl:1-2", "diphenyl:1-4",
                                     "diphenyl:1-7"]


@pytest.mark.parametrize("key,alpha", [
    ("SrF", (2.059 - 3.482) / (2 * 6.227)),
    ("diphenyl:1-2", (16.66 - 10.67) / (2 * 9.13)),
    ("diphenyl:1-7", (14.07 - 10.67) / (2 * 3.37)),
])
def test_alpha(key, alpha):
    assert find(default_catalog(), key).alpha == pytest.approx(alpha, rel=1e-14)


def test_roundtrip(tmp_path):
    recs = default_catalog()
    path = tmp_path / "cat.csv"
    write_catalog(recs, path)
    assert read_catalog(path) == recs
    assert format_catalog(read_catalog(path)) == format_catalog(recs)


def test_env_override(tmp_path, monkeypatch):
    path = tmp_path / "one.csv"
    write_catalog([MoleculeRecord("X", "a-b", 1.0, 2.0, 0.5, 1000.0)], path)
    monkeypatch.setenv(CATALOG_ENV, str(path))
    assert [r.name for r in default_catalog()] == ["X"]


@pytest.mark.parametrize("body", [
    "name,transition,mu_gg\nX,a,1\n",
    "name,transition,mu_gg,mu_ee,mu_ge,omega0_cm\nX,a,1,2,0,1000\n",
    "name,transition,mu_gg,mu_ee,mu_ge,omega0_cm\nX,a,1,2,oops,1000\n",
    "name,transition,mu_gg,mu_ee,mu_ge,omega0_cm\nX,a,1,2,1,-5\n",
])
def test_invalid_records(tmp_path, body):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(InvalidRecordError):
        read_catalog(path)


def test_zero_transition_dipole():
    with pytest.raises(InvalidRecordError):
        derive_alpha(SimpleNamespace(mu_gg=1.0, mu_ee=2.0, mu_ge=0.0))
    assert coupling_from_cavity(0.0, 1.5e4, 1e-26) == 0.0


def test_find():
    recs = default_catalog()
    assert find(recs, "srf").name == "SrF"
    assert find(recs, "diphenyl", "1-4").transition == "1-4"
    with pytest.raises(InvalidParameterError):
        find(recs, "diphenyl")
    with pytest.raises(InvalidParameterError):
        find(recs, "H2O")


def test_coupling_scaling():
    g = coupling_from_cavity(6.227, 1.52e4, 1e-24)
    assert coupling_from_cavity(2 * 6.227, 1.52e4, 1e-24) == pytest.approx(2 * g)
    assert coupling_from_cavity(6.227, 1.52e4, 4e-24) == pytest.approx(g / 2)
    assert coupling_from_cavity(6.227, 4 * 1.52e4, 1e-24) == pytest.approx(2 * g)


def test_cavity_volume_for_strong_coupling():
    """Volume giving lam = 760 cm^-1 (f = 0.05) for SrF, found by root search."""
    v = brentq(lambda x: coupling_from_cavity(6.227, 1.52e4, x) - 760.0, 1e-30, 1e-20,
               xtol=1e-40, rtol=1e-14)
    assert v == pytest.approx(3.2276e-26, rel=1e-3)
    # independent SI evaluation
    mu = 6.227 * 3.33564e-30
    e_ph = 1.52e4 * 1.986445e-23
    lam_j = mu * math.sqrt(e_ph / (2 * 8.8541878128e-12 * v))
    assert lam_j / 1.986445e-23 == pytest.approx(760.0, rel=1e-10)


def test_params_for():
    r = find(default_catalog(), "SrF")
    p = params_for(r, 0.05, delta=100.0)
    assert p.omega_0 == 15200.0 and p.omega_c == 15100.0
    assert p.lam == pytest.approx(0.05 * 15100.0)
    assert p.alpha == r.alpha
    with pytest.raises(InvalidParameterError):
        params_for(r, 0.05, delta=2e4)
    with pytest.raises(InvalidParameterError):
        params_for(r, 0.0)
