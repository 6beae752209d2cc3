import math

import pytest

import rdlab


def test_solve_sinsin_converges():
    coarse = rdlab.solve("sinsin", 8)
    fine = rdlab.solve("sinsin", 16)
    assert coarse["vertices"] == 81
    assert len(fine["coefficients"]) == 289
    assert math.log2(coarse["energy"] / fine["energy"]) == pytest.approx(1.0, abs=0.05)


def test_estimate_is_guaranteed():
    r = rdlab.estimate("sinsin", 16, 1e4, "aubin")
    assert r["total"] >= r["true_energy_sq"]
    assert r["effectivity"] >= 1.0
    recombined = r["prefactor"] * (r["diffusion"] + r["residual_mult"] * r["residual_sq"]) + r["oscillation"]
    assert r["total"] == pytest.approx(recombined, rel=1e-12)


def test_range_errors():
    with pytest.raises(rdlab.RangeError):
        rdlab.estimate("sinsin", 4, 0.0, "aubin")
    with pytest.raises(ValueError):
        rdlab.estimate("sinsin", 4, 0.0, "fem1")
    assert rdlab.critical_sigma(0.5, 0.1) == pytest.approx(400.0)


def test_sweep_csv():
    out = rdlab.sweep("levels=4,8\nsigmas=0,h^-2\nestimators=consistent,aubin\nc_dagger=0.35\n")
    header = out["csv"].splitlines()[0]
    assert header == (
        "level,h,sigma,estimator,total,diffusion,residual_mult,residual_sq,"
        "oscillation,true_energy_sq,effectivity,rate"
    )
    rows = out["rows"]
    assert len(rows) == 8
    assert rows[1]["error"]  # aubin at sigma = 0
    assert all(r["effectivity"] >= 1.0 for r in rows if not r["error"])


def test_inverse_check_reports_both_orders():
    rows = rdlab.inverse_check("levels=4,8\nflux=l2project\nc_dagger=0.35\nc_sz=0.13\nc_tilde=3.7\n")
    assert [r["k"] for r in rows] == [1, 2, 1, 2]
    assert all(r["ratio"] > 1.0 for r in rows)
