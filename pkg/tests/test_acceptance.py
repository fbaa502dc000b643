"""Acceptance criteria, each run at its stated tolerance.

Each check records one ``PASS``/``FAIL`` line, printed in the terminal summary
(or on stdout when this file is executed directly).
"""
import itertools
import math
import time
import warnings

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, EXCITED, GRID
from pdmcavity.exact import build, converged_spectrum, eigensolve, match_levels, residuals
from pdmcavity.errors import PdmCavityError
from pdmcavity.model import GROUND, Channel, SystemParams, lowest_labels
from pdmcavity.observables import exact_populations, populations, table1
from pdmcavity.perturbation import (
    e2_excited,
    e2_ground,
    energy,
    generic_rs,
    psi1_excited,
    psi_ground,
)

SEVEN = lowest_labels(7)


def record(key, ok, detail):
    ACCEPTANCE_LINES[key] = f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}"
    return ok


# 1 -------------------------------------------------------------------------

REFERENCE_SHIFTS = {
    ("SrF", "X2Sigma-A2Pi"): (0.091, 0.454),
    ("diphenyl", "1-2"): (1.53, 0.91),
    ("diphenyl", "1-4"): (1.57, 1.151),
    ("diphenyl", "1-7"): (5.65, 1.461),
}


def test_1_table_reproduction():
    t0 = time.perf_counter()
    rows = table1(f=0.05)
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for r in rows:
        pdm, crt = REFERENCE_SHIFTS[(r.molecule, r.transition)]
        worst = max(worst, abs(r.pdm_shift_cm / pdm - 1), abs(r.crt_shift_cm / crt - 1))
    ok = len(rows) == 4 and worst <= 0.02
    record("1", ok, f"table rows={len(rows)}, worst relative deviation {worst:.4f} "
                    f"(tol 0.02), {elapsed * 1e3:.1f} ms")
    assert ok


# 2 -------------------------------------------------------------------------

def test_2_vacuum_bloch_siegert():
    values = []
    for f, alpha in itertools.product((0.001, 0.0025, 0.005, 0.0075, 0.01), (0.0, 0.5, 1.0)):
        p = SystemParams.from_f(f, alpha=alpha)
        values.append(e2_ground(p)[1] * (p.omega_0 + p.omega_c) / p.lam ** 2)
    ok = all(-1.01 <= v <= -0.99 for v in values)
    record("2", ok, f"e2_crt (w0+wc)/lam^2 in [{min(values):.5f}, {max(values):.5f}] "
                    "(required [-1.01, -0.99])")
    assert ok


# 3 -------------------------------------------------------------------------

def _rel(a, b, floor):
    return abs(a - b) / max(abs(a), abs(b), floor)


def test_3_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for p in GRID:
        rs = generic_rs(GROUND, p)
        pdm, crt = e2_ground(p)
        worst = max(worst, _rel(pdm, rs.e2_pdm, 1e-300), _rel(crt, rs.e2_crt, 1e-300))
        closed, oracle = psi_ground(p, 2), rs.expansion
        for order, ch in itertools.product((1, 2), (Channel.PDM, Channel.CRT, Channel.MIXED)):
            a, b = closed.coefficients(order, ch), oracle.coefficients(order, ch)
            scale = p.f ** order * 1e-3
            worst = max([worst] + [_rel(a.get(l, 0.0), b.get(l, 0.0), scale)
                                   for l in set(a) | set(b)])
        for label in EXCITED:
            rs = generic_rs(label, p)
            pdm, crt = e2_excited(label.n, label.branch, p)
            worst = max(worst, _rel(pdm, rs.e2_pdm, 1e-300), _rel(crt, rs.e2_crt, 1e-300))
            a = psi1_excited(label.n, label.branch, p)
            b = generic_rs(label, p, 1).expansion
            for ch in (Channel.PDM, Channel.CRT):
                ca, cb = a.coefficients(1, ch), b.coefficients(1, ch)
                worst = max([worst] + [_rel(ca.get(l, 0.0), cb.get(l, 0.0), p.f * 1e-3)
                                       for l in set(ca) | set(cb)])
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 1.0
    record("3", ok, f"{len(GRID)} parameter points x {1 + len(EXCITED)} levels, worst relative "
                    f"difference {worst:.2e} (tol 1e-12), {elapsed:.2f} s (limit 1 s)")
    assert ok


# 4 -------------------------------------------------------------------------

BAND_F = (0.01, 0.025, 0.05)
BAND_ALPHA = (-1.0, -0.5, 0.0, 0.5, 1.0)


def band_error(f, alpha, delta):
    """Largest |E_DSP - E_exact| over the seven lowest levels (units of omega_c)."""
    p = SystemParams.from_f(f, alpha=alpha, delta=delta)
    s = match_levels(converged_spectrum(p, n_levels=9), p, SEVEN)
    return max(abs(s.energy(l) - energy(l, p).total) for l in SEVEN), s.n_max_used


def _band(deltas):
    worst, where, n_used, failures = 0.0, None, 0, []
    for f, a, d in itertools.product(BAND_F, BAND_ALPHA, map(float, deltas)):
        try:
            err, n = band_error(f, a, d)
        except PdmCavityError as exc:
            failures.append(f"f={f} alpha={a} delta={d:+.2f}: {exc.code}")
            continue
        n_used = max(n_used, n)
        if err > worst:
            worst, where = err, (f, a, d)
    return worst, where, n_used, failures


@pytest.mark.xfail(strict=True, reason="closed interval includes delta=-1 (omega_0=0) and the "
                                       "delta=+1 two-photon resonance; see README")
def test_4_band_closed_interval():
    t0 = time.perf_counter()
    worst, where, n_used, failures = _band(np.linspace(-1.0, 1.0, 11))
    elapsed = time.perf_counter() - t0
    ok = worst <= 5e-3 and not failures
    record("4", ok, f"delta in linspace(-1,1,11): max |E_DSP-E_exact| {worst:.2e} at "
                    f"(f,alpha,delta)={where} (tol 5e-3); {len(failures)} invalid points "
                    f"[{failures[0] if failures else ''}]; n_max<={n_used}; {elapsed:.1f} s")
    assert ok


def test_4a_band_open_interval():
    t0 = time.perf_counter()
    worst, where, n_used, failures = _band(np.linspace(-1.0, 1.0, 13)[1:-1])
    elapsed = time.perf_counter() - t0
    ok = worst <= 5e-3 and not failures and n_used <= 128 and elapsed < 30
    record("4a", ok, f"delta in 11 interior points of (-1,1): max |E_DSP-E_exact| {worst:.2e} "
                     f"at {where} (tol 5e-3); n_max<={n_used}; {elapsed:.1f} s")
    assert ok


def test_4b_error_scaling():
    e05 = band_error(0.05, 1.0, 0.0)[0]
    e025 = band_error(0.025, 1.0, 0.0)[0]
    ratio = e05 / e025
    ok = 4.0 <= ratio <= 16.0
    record("4b", ok, f"err(0.05)/err(0.025) = {e05:.3e}/{e025:.3e} = {ratio:.2f} "
                     "(required [4, 16])")
    assert ok


# 5 -------------------------------------------------------------------------

def test_5_population_structure():
    fs = np.linspace(0.0, 0.1, 41)
    notes, ok = [], True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for alpha in (0.0, 0.5, -0.5, 1.0, -1.0):
            pg = [populations(GROUND, SystemParams.from_f(f, alpha=alpha))["g,0"] for f in fs]
            mono = all(b < a for a, b in zip(pg, pg[1:]))
            ok &= mono
        notes.append(f"P(g,0) strictly decreasing on [0,0.1]: {ok}")
        pe0 = populations(GROUND, SystemParams.from_f(0.05, alpha=0.0))["e,0"]
        pe1 = min(populations(GROUND, SystemParams.from_f(0.05, alpha=a))["e,0"]
                  for a in (1.0, -1.0))
        ok &= pe0 == 0.0 and pe1 > 0.0
        notes.append(f"P(e,0)={pe0:g} at alpha=0, {pe1:.2e} at |alpha|=1")
        worst = 0.0
        for f, alpha in itertools.product((0.01, 0.025, 0.05), (0.0, 0.5, 1.0)):
            p = SystemParams.from_f(f, alpha=alpha)
            spec = match_levels(converged_spectrum(p, n_levels=9), p, SEVEN)
            for level in SEVEN:
                a, b = populations(level, p), exact_populations(level, p, spec)
                worst = max(worst, max(abs(a[s] - b[s]) for s in set(a.entries) | set(b.entries)))
        ok &= worst < 1e-2
        notes.append(f"max |P_DSP-P_exact| {worst:.2e} over seven levels (tol 1e-2)")
    record("5", ok, "; ".join(notes))
    assert ok


# 6 -------------------------------------------------------------------------

def test_6_exact_self_checks():
    herm, res_worst, drift = True, 0.0, 0.0
    for f, alpha, delta in itertools.product((0.01, 0.05, 0.1), (0.0, 0.5, 1.0), (-0.5, 0.0, 0.5)):
        p = SystemParams.from_f(f, alpha=alpha, delta=delta)
        s = converged_spectrum(p, n_levels=7)
        h = build(p, s.n_max_used)
        herm &= bool(np.array_equal(h.matrix, h.matrix.T))
        r = residuals(h.matrix, s.eigenvalues, s.eigenvectors).max() / np.linalg.norm(h.matrix)
        res_worst = max(res_worst, r)
        bigger = eigensolve(build(p, 2 * s.n_max_used))
        drift = max(drift, np.abs(bigger.eigenvalues[:7] - s.eigenvalues[:7]).max())
    ok = herm and res_worst <= 1e-10 and drift < 1e-10
    record("6", ok, f"symmetric={herm}; max residual/||H|| {res_worst:.1e} (tol 1e-10); "
                    f"extra doubling drift {drift:.1e} (tol 1e-10)")
    assert ok


# 7 -------------------------------------------------------------------------

def test_7_structural_invariants():
    e1_zero = alpha_sq = crt_free = rabi = True
    labels = [GROUND] + EXCITED
    for p in GRID:
        ref = p.replace(alpha=1.0)
        for lvl in labels:
            e1_zero &= generic_rs(lvl, p, 1).energies[1] == 0.0 and energy(lvl, p).e1 == 0.0
            br, br1 = energy(lvl, p), energy(lvl, ref)
            alpha_sq &= math.isclose(br.e2_pdm, p.alpha ** 2 * br1.e2_pdm, rel_tol=1e-12,
                                     abs_tol=1e-300)
            crt_free &= br.e2_crt == br1.e2_crt
            if p.alpha == 0.0:
                rabi &= math.isclose(br.e2, generic_rs(lvl, ref, channels=("crt",)).energies[2],
                                     rel_tol=1e-12)
        if p.alpha == 0.0:
            rabi &= bool(np.array_equal(build(p, 12).matrix,
                                        build(ref, 12, terms={"rwa", "crt"}).matrix))
    ok = e1_zero and alpha_sq and crt_free and rabi
    record("7", ok, f"E1==0: {e1_zero}; PDM ~ alpha^2: {alpha_sq}; CRT alpha-free: {crt_free}; "
                    f"alpha=0 equals Rabi model: {rabi}")
    assert ok


if __name__ == "__main__":  # pragma: no cover
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                pass
    for key in sorted(ACCEPTANCE_LINES):
        print(ACCEPTANCE_LINES[key])
