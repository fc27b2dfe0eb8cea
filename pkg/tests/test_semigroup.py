import math

import numpy as np
import pytest

from conftest import random_graph, random_symmetric_form_matrix
from oracles import semigroup_oracle, taylor_exp
from dirichlet_lab.domain import build_graph, build_interval, build_rectangle
from dirichlet_lab.errors import DomainMismatch, InvalidTime
from dirichlet_lab.forms import FormMatrix, add_jump, dirichlet_form, neumann_form, robin_form
from dirichlet_lab.semigroup import (
    dominates,
    eventually_positive,
    expm,
    generator,
    is_positivity_preserving,
    min_entry_profile,
    profile_csv,
)


def _rel(X, Y):
    return np.max(np.abs(X - Y)) / max(np.max(np.abs(Y)), 1e-300)


def test_time_zero_is_identity_on_free_block(path3):
    S = expm(robin_form(path3, ["inf", 1.0]), 0.0).S
    np.testing.assert_array_equal(S, np.diag([0.0, 1.0, 1.0]))


def test_zero_form_is_identity(path3):
    S = expm(FormMatrix(path3, np.zeros((3, 3))), 3.7).S
    np.testing.assert_allclose(S, np.eye(3), atol=1e-15)


def test_negative_time(path3):
    with pytest.raises(InvalidTime):
        expm(neumann_form(path3), -1e-9)


def test_long_time_projection(path3):
    S = expm(neumann_form(path3), 50.0).S
    np.testing.assert_allclose(S, np.full((3, 3), 1 / 3), atol=1e-14)


def test_endpoint_entry_against_taylor(aw_form):
    t = 0.01
    got = expm(aw_form, t).S[0, 2]
    want = taylor_exp(-t * aw_form.A)[0, 2]
    assert got == pytest.approx(want, rel=1e-12)
    assert abs(got - (-t)) <= 0.1 * t
    assert got == pytest.approx(-0.0099, rel=0.1)


@pytest.mark.parametrize("n", [3, 17, 60, 200])
def test_matches_pade_oracle(n):
    rng = np.random.default_rng(n)
    d = build_interval(n, 1.0) if n < 60 else random_graph(rng, n, 0.05)
    f = robin_form(d, rng.uniform(0, 3, len(d.boundary))) if n < 60 else FormMatrix(d, random_symmetric_form_matrix(rng, n, 0.1) + 3 * np.eye(n))
    for t in (1e-3, 0.1, 1.0):
        assert _rel(expm(f, t).S, semigroup_oracle(f.A, d.mass, t, f.pinned)) <= 1e-12


def test_rectangle_against_oracle_with_pinning():
    d = build_rectangle(6, 5, 1.0, 0.7)
    mu = np.linspace(0, 2, len(d.boundary))
    mu[::4] = math.inf
    f = robin_form(d, mu)
    for t in (0.01, 0.3):
        S = expm(f, t).S
        assert _rel(S, semigroup_oracle(f.A, d.mass, t, f.pinned)) <= 1e-12
        np.testing.assert_array_equal(S[sorted(f.pinned)], 0.0)


def test_semigroup_law_and_mass_symmetry(rng):
    d = build_rectangle(5, 4, 1.3, 0.9)
    f = robin_form(d, rng.uniform(0, 2, len(d.boundary)))
    M = np.diag(d.mass)
    for _ in range(10):
        s, t = rng.uniform(0, 5, 2)
        lhs = expm(f, s + t).S
        assert _rel(expm(f, s).S @ expm(f, t).S, lhs) <= 1e-10
        assert _rel(M @ lhs, (M @ lhs).T) <= 1e-10


def test_generator_consistency():
    d = build_interval(7, 1.0)
    f = robin_form(d, [0.5, 1.5])
    L = generator(f)
    errs = [np.max(np.abs((np.eye(d.n) - expm(f, e).S) / e - L)) for e in (1e-3, 1e-4)]
    assert 8 < errs[0] / errs[1] < 12


def test_markovian_conservation_and_submarkov(rng):
    d = build_rectangle(7, 6, 1.0, 1.0)
    N = neumann_form(d)
    R = robin_form(d, rng.uniform(0, 2, len(d.boundary)))
    for t in (1e-3, 0.1, 1.0, 10.0):
        np.testing.assert_allclose(expm(N, t).S.sum(axis=1), 1.0, atol=1e-10)
        S = expm(R, t).S
        assert S.sum(axis=1).max() <= 1 + 1e-10 and S.min() >= -1e-10


def test_positivity_examples(path3, aw_form):
    r = is_positivity_preserving(neumann_form(path3))
    assert r.algebraic.ok and r.numerical and r.consistent
    assert is_positivity_preserving(robin_form(path3, [1, 2])).verdict
    r = is_positivity_preserving(aw_form)
    assert not r.algebraic.ok and not r.numerical
    assert r.algebraic.witness == (0, 2)
    with pytest.raises(InvalidTime):
        is_positivity_preserving(aw_form, [0.0])


def test_positivity_equivalence_random_4x4():
    rng = np.random.default_rng(4)
    d = build_graph([(0, 1), (1, 2), (2, 3)], [0, 3])
    times = np.logspace(-4, 1, 26)
    metzler = 0
    for _ in range(500):
        A = random_symmetric_form_matrix(rng, 4, 0.7)
        # flip off-diagonal signs half the time so both verdicts occur
        if rng.random() < 0.5:
            off = ~np.eye(4, dtype=bool)
            A[off] = -np.abs(A[off])
        r = is_positivity_preserving(FormMatrix(d, A), times)
        assert r.consistent
        metzler += r.algebraic.ok
    assert 100 < metzler < 400


def test_domination_examples(path3):
    N, R, D = neumann_form(path3), robin_form(path3, [1, 2]), dirichlet_form(path3)
    assert dominates(R, N, [0.01, 0.1, 1, 10]).verdict
    rep = dominates(D, R)
    assert rep.verdict and rep.form_level.ok
    rep = dominates(N, R)
    assert not rep.verdict and not rep.form_level.ok
    assert rep.worst_t == 1.0 and rep.worst_entry[0] == rep.worst_entry[1]
    with pytest.raises(DomainMismatch):
        dominates(N, neumann_form(build_interval(3, 1.0)))


def test_domination_transitive(rng):
    d = build_interval(9, 1.0)
    f, g, h = dirichlet_form(d), robin_form(d, [2.0, 3.0]), robin_form(d, [0.5, 0.1])
    assert dominates(f, g).verdict and dominates(g, h).verdict and dominates(f, h).verdict


def test_domination_is_order_reversing_on_forms(path3):
    # larger form matrix, smaller kernel
    rep = dominates(robin_form(path3, [1, 2]), robin_form(path3, [0.5, 1]))
    assert rep.verdict and rep.form_level.ok


def test_refine_catches_fine_mesh_jump():
    d = build_interval(65, 1.0)
    f = add_jump(neumann_form(d), 0, 2, 0.1)
    N = neumann_form(d)
    assert not dominates(f, N, refine=True).verdict
    assert not dominates(f, N, refine=True).form_level.ok


def test_workers_do_not_change_results(aw_form):
    a = dominates(aw_form, neumann_form(aw_form.domain), np.logspace(-3, 1, 20))
    b = dominates(aw_form, neumann_form(aw_form.domain), np.logspace(-3, 1, 20), workers=6)
    assert a == b


def test_eventual_positivity_neumann_connected(path3):
    ev = eventually_positive(neumann_form(path3))
    assert ev.verdict and ev.certificate and ev.t_star == 0.0
    assert semigroup_oracle(neumann_form(path3).A, path3.mass, 0.1).min() > 0


def test_eventual_positivity_interval_example():
    from dirichlet_lab.forms import nonlocal_robin_form

    f = nonlocal_robin_form(build_interval(3, 1.0), [[1, 1], [1, 1]])
    ev = eventually_positive(f)
    assert ev.verdict and 0 < ev.t_star < 10
    assert expm(f, ev.t_star * 1.001).S.min() > 0
    assert expm(f, ev.t_star * 0.99).S.min() < 0


def test_unit_path_example_is_not_eventually_positive(aw_form):
    # ground eigenvalue 1 is double; entry (0,2) is (exp(-4t) - exp(-t))/3 < 0 forever
    ev = eventually_positive(aw_form)
    assert not ev.verdict and "not simple" in ev.reason
    for t in (0.5, 5.0, 20.0):
        assert expm(aw_form, t).S[0, 2] == pytest.approx((math.exp(-4 * t) - math.exp(-t)) / 3, abs=1e-15)


def test_eventual_positivity_reducible():
    d = build_graph([(0, 1), (2, 3)], [0, 2])
    ev = eventually_positive(neumann_form(d))
    assert not ev.verdict and ev.t_star is None
    with pytest.raises(InvalidTime):
        eventually_positive(neumann_form(d), t_max=0)


def test_profile(path3, aw_form):
    (t, m), = min_entry_profile(neumann_form(path3), [1.0])
    assert t == 1.0 and m > 0
    assert min_entry_profile(aw_form, [0.01])[0][1] < 0
    assert min_entry_profile(aw_form, [0.0]) == [(0.0, 0.0)]
    text = profile_csv([(0.5, -0.25)])
    assert text == "t,min_entry\n0.5,-0.25\n"


def test_zero_killing_components_are_deflated_exactly():
    d = build_graph([(0, 1), (1, 2), (3, 4)], [0, 3], mass=[1, 2, 3, 4, 5])
    f = neumann_form(d)
    from dirichlet_lab.semigroup import Spectral

    lam = Spectral(f).eigenvalues
    assert lam[0] == 0.0 and lam[1] == 0.0 and lam[2] > 0
    np.testing.assert_allclose(expm(f, 1e3).S.sum(axis=1), 1.0, rtol=0, atol=1e-14)
    # killing on one component keeps exactly one zero mode
    lam = Spectral(robin_form(d, [0.5, 0.0])).eigenvalues
    assert lam[0] == 0.0 and lam[1] > 0


def test_fine_grid_conservation_at_long_times():
    f = neumann_form(build_interval(200, 0.5))
    for t in (1.0, 10.0, 100.0):
        np.testing.assert_allclose(expm(f, t).S.sum(axis=1), 1.0, rtol=0, atol=1e-12)
