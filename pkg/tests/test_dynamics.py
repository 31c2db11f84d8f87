from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from lrbounds.bounds import BoundCurve, BoundInputs, BoundKind, build_curves, h_lambda_norm
from lrbounds.dynamics import (
    NetworkHamiltonian,
    TimeSeries,
    build_xy_chain,
    commutator_norm_series,
    default_time_grid,
    evolve_observable,
    leading_order_check,
    validity_windows,
    windows_as_times,
)
from lrbounds.operators import PAULI, DenseOperator, LocalTerm, gamma_d, local_operator, operator_norm


def expm_commutator_norm(H, A, B, t):
    """Oracle: propagate with scipy's matrix exponential, no eigenbasis."""
    U = scipy.linalg.expm(-1j * H * t)
    At = U.conj().T @ A @ U
    return np.linalg.norm(At @ B - B @ At, 2)


def chain_setup(L, J=1.0):
    H = build_xy_chain(L, J)
    A = local_operator(PAULI["z"], 1, L)
    B = local_operator(PAULI["z"], L, L)
    return H, A, B


def curves_for(L, H, A, B, kinds):
    inp = BoundInputs(dist=L - 1, d_bar=1, zeta=h_lambda_norm(H, H.graph, 0.0), h_norm=H.h_norm,
                      gamma_d=gamma_d(H.terms, A, B, L - 1))
    return build_curves(kinds, inp, d=L - 1, H_norm=H.norm)


def test_xy_chain_two_sites():
    H = build_xy_chain(2)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(H.matrix)), [-2, 0, 0, 2], atol=1e-12)


@pytest.mark.parametrize("L, J", [(2, 1.0), (3, -0.5), (6, 2.0)])
def test_xy_chain_structure(L, J):
    H = build_xy_chain(L, J)
    assert H.h_norm == pytest.approx(2 * abs(J))
    assert len(H.terms) == L - 1
    assert H.d_bar == 1 and H.is_nearest_neighbour_chain()
    np.testing.assert_allclose(H.matrix, H.matrix.conj().T)
    mz = sum(local_operator(PAULI["z"], i, L).matrix for i in range(1, L + 1))
    assert np.max(np.abs(H.matrix @ mz - mz @ H.matrix)) < 1e-12


def test_invalid_chains():
    with pytest.raises(ValueError):
        build_xy_chain(1)
    with pytest.raises(ValueError):
        build_xy_chain(3, 0.0)
    with pytest.raises(ValueError):
        NetworkHamiltonian(3, (LocalTerm.from_paulis((3, 4), "zz"),))


def test_evolve_observable_identities(rng):
    H, A, _ = chain_setup(4)
    assert evolve_observable(H, A, 0.0) is A
    Hop = DenseOperator(H.matrix, hermitian=True)
    for t in rng.uniform(-3, 3, size=4):
        np.testing.assert_allclose(evolve_observable(H, Hop, t).matrix, H.matrix, atol=1e-12)
        assert operator_norm(evolve_observable(H, A, t)) == pytest.approx(1.0, abs=1e-12)


def test_evolve_matches_expm():
    H, A, _ = chain_setup(3)
    t = 0.37
    U = scipy.linalg.expm(-1j * H.matrix * t)
    np.testing.assert_allclose(evolve_observable(H, A, t).matrix, U.conj().T @ A.matrix @ U, atol=1e-12)


@pytest.mark.parametrize("J", [1.0, 0.7, -1.3])
def test_two_site_closed_form(J):
    H, A, B = chain_setup(2, J)
    ts = np.linspace(0, 3, 301)
    sim = commutator_norm_series(H, A, B, ts)
    np.testing.assert_allclose(sim.values, 2 * np.abs(np.sin(4 * J * ts)), atol=1e-12)


@pytest.mark.parametrize("L", [3, 4, 5, 6])
def test_series_against_expm(L):
    H, A, B = chain_setup(L)
    ts = np.concatenate([[0.0, 1e-3, 0.02], np.linspace(0.1, 4.0, 7)])
    sim = commutator_norm_series(H, A, B, ts)
    for t, v in zip(ts, sim.values):
        ref = expm_commutator_norm(H.matrix, A.matrix, B.matrix, t)
        assert v == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_small_values_relative_accuracy():
    # [A(t), B] ~ t^d / d! ||[[H,A]_d,B]|| with no noise floor
    L = 8
    H, A, B = chain_setup(L)
    d = L - 1
    coeff = 2 ** (d + 2)
    t = 1e-4
    sim = commutator_norm_series(H, A, B, [t]).values[0]
    assert sim == pytest.approx(t**d / math.factorial(d) * coeff, rel=1e-3)
    assert sim < 1e-25


def test_global_shift_and_time_reversal(rng):
    H, A, B = chain_setup(4)
    Hs = DenseOperator(H.matrix + np.eye(H.matrix.shape[0]), hermitian=True)
    ts = np.sort(rng.uniform(0.05, 3, size=5))
    np.testing.assert_allclose(commutator_norm_series(Hs, A, B, ts).values,
                               commutator_norm_series(H, A, B, ts).values, rtol=1e-10, atol=1e-13)
    for t in ts[:3]:
        fwd = evolve_observable(H, A, t).matrix
        bwd = evolve_observable(H, A, -t).matrix
        nf = np.linalg.norm(fwd @ B.matrix - B.matrix @ fwd, 2)
        nb = np.linalg.norm(bwd @ B.matrix - B.matrix @ bwd, 2)
        assert nf == pytest.approx(nb, rel=1e-10)


def test_random_hamiltonian_no_block_structure(rng):
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    Hm = m + m.conj().T
    A = local_operator(PAULI["x"], 1, 3)
    B = local_operator(PAULI["y"], 3, 3)
    ts = [0.0, 0.01, 0.3, 1.7]
    sim = commutator_norm_series(DenseOperator(Hm, hermitian=True), A, B, ts)
    for t, v in zip(ts, sim.values):
        assert v == pytest.approx(expm_commutator_norm(Hm, A.matrix, B.matrix, t), rel=1e-9, abs=1e-13)


def test_series_input_validation():
    H, A, B = chain_setup(3)
    for bad in ([], [0.1, 0.1], [-1.0, 0.0], [[0.1]]):
        with pytest.raises(ValueError):
            commutator_norm_series(H, A, B, bad)
    with pytest.raises(ValueError):
        commutator_norm_series(H, A, local_operator(PAULI["z"], 1, 2), [0.0])


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 20))
def test_trivial_ceiling_property(t):
    H, A, B = chain_setup(5)
    assert commutator_norm_series(H, A, B, [t]).values[0] <= 2 + 1e-9


def test_default_grid():
    g = default_time_grid(3, 2.0)
    assert len(g) == 400 and g[0] == 0
    assert g[-1] == pytest.approx(15 / (4 * math.e))


def test_signal_arrives_later_for_longer_chains():
    def first_crossing(L):
        H, A, B = chain_setup(L)
        ts = np.linspace(0, 4, 401)
        v = commutator_norm_series(H, A, B, ts).values
        return ts[np.argmax(v > 0.1)]

    assert first_crossing(4) < first_crossing(8)


def test_leading_order_ratio():
    L = 3
    H, A, B = chain_setup(L)
    d = L - 1
    t0 = 1e-3 / (H.h_norm * d)
    ts = t0 * np.array([1, 2, 4, 8, 16])
    ratios = leading_order_check(H, A, B, d, ts)
    assert 0.98 <= ratios[0] <= 1.02
    dev = np.abs(np.array(ratios) - 1)
    assert np.all(np.diff(dev) > 0)
    with pytest.raises(ValueError):
        leading_order_check(H, A, B, d, [1.0])
    with pytest.raises(ValueError):
        leading_order_check(H, A, B, 1, [t0])


def test_leading_order_warns_when_lower_order_contributes():
    H, A, _ = chain_setup(3)
    B = local_operator(PAULI["x"], 1, 3)
    with pytest.warns(RuntimeWarning):
        leading_order_check(H, A, B, 1, [1e-4])


def test_validity_window_runs():
    sim = TimeSeries(np.arange(6.0), np.array([0, 1, 2, 3, 2, 1.0]))
    upper = BoundCurve(BoundKind.TRIVIAL, lambda t: np.array([0, 1, 1, 3, 3, 0.5]))
    lower = BoundCurve(BoundKind.PERT_LOWER, lambda t: np.array([0, 0.5, 2, 4, 1, 1.0]))
    w = validity_windows(sim, [upper, lower])
    assert w == {"trivial": [(0, 1), (3, 4)], "pert_lower": [(0, 2), (4, 5)]}
    assert windows_as_times(sim, w)["trivial"] == [[0.0, 1.0], [3.0, 4.0]]


def test_validity_windows_on_chain():
    L = 4
    H, A, B = chain_setup(L)
    sim = commutator_norm_series(H, A, B, default_time_grid(L - 1, H.h_norm))
    kinds = [BoundKind.PERT_UPPER, BoundKind.PERT_LOWER_SIMPLIFIED, BoundKind.TRIVIAL]
    w = validity_windows(sim, curves_for(L, H, A, B, kinds))
    full = [(0, len(sim) - 1)]
    assert w["pert_upper"] == full and w["trivial"] == full
    (start, end), = w["pert_lower_simplified"]
    assert start == 0 and 0 < end < len(sim) - 1


@pytest.mark.parametrize("L", range(2, 11))
def test_bound_dominance(L):
    H, A, B = chain_setup(L)
    n = 400 if L <= 8 else 120
    sim = commutator_norm_series(H, A, B, default_time_grid(max(L - 1, 1), H.h_norm, n))
    kinds = [BoundKind.PERT_UPPER, BoundKind.POLY_WITH_F, BoundKind.TRIVIAL, BoundKind.PERT_LOWER]
    c = {cv.kind: cv(sim.times) for cv in curves_for(L, H, A, B, kinds)}
    s = sim.values
    assert np.all(c[BoundKind.PERT_UPPER] >= s * (1 - 1e-9))
    assert np.all(np.minimum(c[BoundKind.POLY_WITH_F], c[BoundKind.TRIVIAL]) >= s * (1 - 1e-9))
    assert np.all(c[BoundKind.PERT_LOWER] <= s * (1 + 1e-9))
    assert np.all(s <= 2 + 1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("L", [11, 12])
def test_pert_upper_dominance_large_chains(L):
    H, A, B = chain_setup(L)
    n = 40 if L == 11 else 16
    sim = commutator_norm_series(H, A, B, default_time_grid(L - 1, H.h_norm, n))
    (upper,) = curves_for(L, H, A, B, [BoundKind.PERT_UPPER])
    assert np.all(upper(sim.times) >= sim.values * (1 - 1e-9))
    assert np.all(sim.values <= 2 + 1e-9)


def test_lower_bound_invisible_for_long_chain():
    L = 10
    H, A, B = chain_setup(L)
    (low,) = curves_for(L, H, A, B, [BoundKind.PERT_LOWER])
    vals = low(default_time_grid(L - 1, H.h_norm))
    assert np.max(vals) <= 1e-6
    # informative only before ln(1 + Gamma)/(2 ||h|| d), well inside the first grid step
    tbar = math.log1p(gamma_d(H.terms, A, B, L - 1)) / (2 * H.h_norm * (L - 1))
    inside = low(np.linspace(0, tbar, 50)[1:-1])
    assert np.all(inside > 0) and np.max(inside) <= 1e-6
