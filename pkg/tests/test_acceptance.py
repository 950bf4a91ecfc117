"""Acceptance criteria, one group of tests per criterion.

Run directly (``python tests/test_acceptance.py``) or through pytest; either
way the terminal summary prints one PASS/FAIL line per criterion.  Two checks
restate printed claims that the oracle contradicts; they are kept verbatim as
strict expected failures, and a companion test records what does hold.
"""
import math
import sys
import time

import numpy as np
import pytest
from scipy.integrate import quad

from hesvs import analytic, gridscan, oracle
from hesvs.exceptions import ZeroProbabilityError
from hesvs.gridscan import DEFAULT_POINTS, DEFAULT_WINDOW, GridSpec, grid, peak_positions, q_region_map
from hesvs.params import ModelParams, derive

THETAS = (math.pi / 7, math.pi / 5, 2 * math.pi / 7, 3 * math.pi / 7)
RS = (0.3, 0.5, 1.0)
MS = (0, 1, 2, 3, 4)
GRID = [(t, r, m) for t in THETAS for r in RS for m in MS]


def state(theta, r, m):
    d = derive(ModelParams(theta, r, m))
    return d, analytic.event_probability(d, r, m)


@pytest.fixture(scope="module")
def report():
    start = time.perf_counter()
    rep = gridscan.validate()
    return rep, time.perf_counter() - start


# 1. Fock reduction
@pytest.mark.criterion(1)
def test_fock_reduction():
    start = time.perf_counter()
    for theta in (0.0, math.pi / 2):
        for r in RS:
            for m in MS:
                d, p = state(theta, r, m)
                assert abs(p - math.tanh(r) ** (2 * m) / math.cosh(r) ** 2) < 1e-12
                probs = analytic.fock_amplitudes(d, r, m, 40, norm=p) ** 2
                delta = np.zeros(41)
                delta[m] = 1.0
                assert np.max(np.abs(probs - delta)) < 1e-12
    assert time.perf_counter() - start < 1.0


# 2. Central Wigner value, d^2 alpha density
@pytest.mark.criterion(2)
def test_central_wigner_value():
    start = time.perf_counter()
    for theta, r, m in GRID:
        d, p = state(theta, r, m)
        assert p > 0
        w = analytic.wigner(d, r, m, 0.0, 0.0, measure="alpha", norm=p)
        assert abs(w - 2 / math.pi * (-1) ** m) < 1e-9
    assert time.perf_counter() - start < 1.0


# 3. m = 0 reductions
AXIS81 = np.linspace(-4, 4, 81)


@pytest.mark.criterion(3)
@pytest.mark.xfail(strict=True, reason="oracle puts the squeezed quadrature on x, not p: the stated Gaussian has x and p swapped")
def test_vacuum_wigner_literal_gaussian():
    X, P = np.meshgrid(AXIS81, AXIS81)
    for theta in THETAS:
        for r in RS:
            d, p = state(theta, r, 0)
            ref = np.exp(-P ** 2 * math.exp(-2 * d.lam) - X ** 2 * math.exp(2 * d.lam)) / math.pi
            assert np.max(np.abs(analytic.wigner(d, r, 0, X, P, norm=p) - ref)) < 1e-10


@pytest.mark.criterion(3, companion=True)
def test_vacuum_wigner_gaussian_with_axes_exchanged():
    X, P = np.meshgrid(AXIS81, AXIS81)
    for theta in THETAS:
        for r in RS:
            d, p = state(theta, r, 0)
            ref = np.exp(-X ** 2 * math.exp(-2 * d.lam) - P ** 2 * math.exp(2 * d.lam)) / math.pi
            assert np.max(np.abs(analytic.wigner(d, r, 0, X, P, norm=p) - ref)) < 1e-10
            s, _ = oracle.conditional_amplitudes(ModelParams(theta, r, 0), gridscan.VALIDATION_POLICY)
            assert np.max(np.abs(oracle.oracle_wigner(s, X, P) - ref)) < 1e-10


@pytest.mark.criterion(3)
def test_vacuum_mean_photon_number():
    for theta in THETAS:
        for r in RS:
            d, p = state(theta, r, 0)
            target = math.sinh(d.lam) ** 2
            assert abs(analytic.mean_photon(d, r, 0, norm=p) - target) < 1e-10
            s, _ = oracle.conditional_amplitudes(ModelParams(theta, r, 0))
            assert abs(oracle.oracle_mean(s) - target) < 1e-10
            assert abs(math.sinh(r) ** 2 - target) > 1e-3


# 4. Parity selection rule
@pytest.mark.criterion(4)
def test_parity_selection():
    for theta, r, m in GRID:
        d, p = state(theta, r, m)
        probs = analytic.fock_amplitudes(d, r, m, 40, norm=p) ** 2
        assert np.all(probs[(m + 1) % 2 :: 2] < 1e-12)
        s, _ = oracle.conditional_amplitudes(ModelParams(theta, r, m))
        assert np.all(oracle.oracle_pnd(s)[(m + 1) % 2 : 41 : 2] < 1e-12)


# 5. Symmetric beam splitter
@pytest.mark.criterion(5)
def test_symmetric_splitter_odd_counts_impossible():
    for r in RS:
        for m in (1, 3, 5):
            d = derive(ModelParams(math.pi / 4, r, m))
            assert oracle.unnormalized_amplitudes(ModelParams(math.pi / 4, r, m))[1] < 1e-12
            with pytest.raises(ZeroProbabilityError):
                analytic.event_probability(d, r, m)


@pytest.mark.criterion(5)
def test_symmetric_splitter_even_counts_give_squeezed_vacuum():
    n = np.arange(41)
    for r in RS:
        t = math.tanh(r)
        sq = np.zeros(41)
        k = n[0::2] // 2
        log_c = np.array([math.lgamma(2 * j + 1) - 2 * math.lgamma(j + 1) - 2 * j * math.log(2) for j in k])
        sq[0::2] = np.exp(log_c + 2 * k * math.log(t)) / math.cosh(r)
        for m in (0, 2, 4):
            d, p = state(math.pi / 4, r, m)
            probs = analytic.fock_amplitudes(d, r, m, 40, norm=p) ** 2
            assert np.max(np.abs(probs - sq)) < 1e-10
            s, _ = oracle.conditional_amplitudes(ModelParams(math.pi / 4, r, m))
            assert np.max(np.abs(oracle.oracle_pnd(s)[:41] - sq)) < 1e-10


# 6. Oracle equivalence
@pytest.mark.criterion(6)
def test_oracle_equivalence(report):
    rep, elapsed = report
    assert rep.failed() == []
    assert elapsed < 60.0


@pytest.mark.criterion(6)
def test_discrepancies_are_named_findings(report):
    rep, _ = report
    flagged = {f.name for f in rep.findings if f.discrepancy}
    assert {"legendre_sign", "wigner_sum_sign", "wigner_m0_orientation", "mean_photon_m0",
            "mandel_q_nonnegative", "symmetric_b1"} <= flagged
    assert "omega_m" not in flagged


# 7. Normalizations
@pytest.mark.criterion(7)
def test_pnd_and_quadrature_normalization():
    for theta, r, m in GRID:
        d, p = state(theta, r, m)
        assert abs((analytic.fock_amplitudes(d, r, m, 400, norm=p) ** 2).sum() - 1) < 1e-10
        for phi in (0.0, math.pi / 4, math.pi / 2):
            total, _ = quad(lambda x: float(analytic.qcd(d, r, m, x, phi, norm=p)), -np.inf, np.inf,
                            epsabs=1e-13, epsrel=1e-13, limit=200)
            assert abs(total - 1) < 1e-8


@pytest.mark.criterion(7)
def test_phase_space_mass_on_default_window():
    axis = np.linspace(*DEFAULT_WINDOW, DEFAULT_POINTS)
    X, P = np.meshgrid(axis, axis)
    for theta, r, m in GRID:
        d, p = state(theta, r, m)
        for fn in (analytic.wigner, analytic.husimi):
            mass = np.trapezoid(np.trapezoid(fn(d, r, m, X, P, norm=p), axis, axis=1), axis)
            assert abs(mass - 1) < 1e-3


@pytest.mark.criterion(7)
def test_heralding_probabilities_sum_to_one():
    theta, r = math.pi / 7, 0.5
    # counts above M need at least floor(M/2) + 1 pairs, of total weight tanh^(2(floor(M/2) + 1)) r
    M = 0
    while math.tanh(r) ** (2 * (M // 2 + 1)) >= 1e-9:
        M += 1
    total = math.fsum(state(theta, r, m)[1] for m in range(M + 1))
    assert abs(total - 1) < 1e-8


# 8. Peak order of p(m) against r
@pytest.mark.criterion(8)
def test_peak_order_pi7():
    peaks = peak_positions(math.pi / 7)
    assert all(a < b for a, b in zip(peaks, peaks[1:]))


@pytest.mark.criterion(8)
@pytest.mark.xfail(strict=True, reason="at theta = 2pi/7 the r-argmax is 1.93, 1.00, 1.66, 1.23 for m = 1..4")
def test_peak_order_2pi7():
    peaks = peak_positions(2 * math.pi / 7)
    assert all(a < b for a, b in zip(peaks, peaks[1:]))


# 9. Symmetry about the balanced splitter
@pytest.mark.criterion(9)
def test_complementary_angle_symmetry():
    r = 0.5
    for theta in np.linspace(0, math.pi / 2, 50):
        for m in (1, 2, 3, 4):
            a = analytic.observables(derive(ModelParams(theta, r, m)), r, m)
            b = analytic.observables(derive(ModelParams(math.pi / 2 - theta, r, m)), r, m)
            assert abs(a.mean_n - b.mean_n) < 1e-9
            assert abs(a.mandel_q - b.mandel_q) < 1e-9


# 10. Nonclassicality witnesses
@pytest.mark.criterion(10)
def test_wigner_negativity():
    for m in (1, 2, 3, 4):
        t = grid(GridSpec("wigner"), ModelParams(math.pi / 7, 0.5, m))
        assert min(t.column("wigner")) < -1e-3


@pytest.mark.criterion(10)
def test_negative_mandel_q_in_window():
    thetas = np.linspace(0, math.pi / 2, 91)
    rs = np.linspace(0.05, 2.0, 40)
    for m in (1, 2, 3, 4):
        qs = [q for *_, q in q_region_map(thetas, rs, m).rows if q is not None]
        assert min(qs) < 0


# 11. Wigner marginal
@pytest.mark.criterion(11)
def test_wigner_marginal_matches_quadrature():
    rng = np.random.default_rng(11)
    p_axis = np.linspace(-6, 6, 201)
    x = np.linspace(-4, 4, 33)
    X, P = np.meshgrid(x, p_axis, indexing="ij")
    done = 0
    while done < 5:
        theta, r, m = rng.uniform(0, math.pi / 2), rng.uniform(0.1, 1.0), int(rng.integers(0, 5))
        try:
            d, p = state(theta, r, m)
        except ZeroProbabilityError:
            continue
        marginal = np.trapezoid(analytic.wigner(d, r, m, X, P, norm=p), p_axis, axis=1)
        assert np.max(np.abs(marginal - analytic.qcd(d, r, m, x, 0.0, norm=p))) < 1e-6
        done += 1


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
