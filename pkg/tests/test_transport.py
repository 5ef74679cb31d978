from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otbound.transport import (
    EmpiricalMeasure,
    mc_wasserstein_mean,
    point_mass_sampler,
    transport_plan,
    uniform_box_sampler,
    w1_1d,
    w_alpha,
)

from oracles import permutation_ot

U = EmpiricalMeasure.uniform


def test_measure_validation():
    with pytest.raises(ValueError):
        EmpiricalMeasure(np.zeros((0, 1)), np.zeros(0))
    with pytest.raises(ValueError):
        EmpiricalMeasure(np.zeros((2, 1)), np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        EmpiricalMeasure(np.zeros((2, 1)), np.array([1.0, 0.0]))


def test_basic_distances():
    assert w_alpha(U([[0.0]]), U([[0.0]])) == 0.0
    assert w_alpha(U([[0.0]]), U([[4.0]]), 0.5) == pytest.approx(2.0)
    assert w_alpha(U([[0, 0], [1, 0]]), U([[0, 1], [1, 1]])) == pytest.approx(1.0)
    assert w1_1d(U([0.0, 1.0]), U([1.0, 2.0])) == pytest.approx(1.0)
    assert w1_1d(U([0.0, 0.5, 1.0]), U([0.25, 0.5, 0.75])) == pytest.approx(1 / 6)
    x = U(np.random.default_rng(1).normal(size=9))
    assert w1_1d(x, x) == 0.0


def test_errors():
    with pytest.raises(ValueError):
        w_alpha(U([[0.0]]), U([[0.0, 1.0]]))
    with pytest.raises(ValueError):
        w1_1d(U([[0.0, 1.0]]), U([[0.0, 1.0]]))
    with pytest.raises(ValueError):
        w_alpha(U([[0.0]]), U([[1.0]]), 1.5)


def test_plan_marginals_and_cost(rng):
    a = EmpiricalMeasure(rng.normal(size=(7, 2)), np.full(7, 1 / 7))
    wb = rng.uniform(0.1, 1, 5)
    b = EmpiricalMeasure(rng.normal(size=(5, 2)), wb / wb.sum())
    plan = transport_plan(a, b)
    F = plan.flows.toarray()
    assert np.allclose(F.sum(1), plan.source.weights, atol=1e-10)
    assert np.allclose(F.sum(0), plan.target.weights, atol=1e-10)
    cost = np.linalg.norm(plan.source.points[:, None] - plan.target.points[None], axis=2)
    assert float(np.sum(F * cost)) == pytest.approx(plan.cost, abs=1e-10)


def test_duplicate_atoms_are_merged():
    a = U([[0.0], [0.0], [1.0]])
    m = a.merged()
    assert len(m) == 2 and np.allclose(sorted(m.weights), [1 / 3, 2 / 3])


def test_csv_roundtrip(tmp_path, rng):
    wb = rng.uniform(0.1, 1, 4)
    a = EmpiricalMeasure(rng.normal(size=(4, 3)), wb / wb.sum())
    a.to_csv(tmp_path / "m.csv")
    b = EmpiricalMeasure.from_csv(tmp_path / "m.csv")
    assert np.array_equal(a.points, b.points) and np.allclose(a.weights, b.weights)


pairs = st.tuples(st.integers(1, 6), st.integers(1, 3), st.sampled_from([0.5, 1.0]), st.integers(0, 10**6))


@settings(max_examples=150, deadline=None)
@given(pairs)
def test_matches_permutation_oracle(p):
    n, d, alpha, seed = p
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(n, d)), rng.normal(size=(n, d))
    assert w_alpha(U(x), U(y), alpha) == pytest.approx(permutation_ot(x, y, alpha), abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(pairs)
def test_metric_axioms(p):
    n, d, alpha, seed = p
    rng = np.random.default_rng(seed)
    a, b, c = (U(rng.normal(size=(n, d))) for _ in range(3))
    ab, ba = w_alpha(a, b, alpha), w_alpha(b, a, alpha)
    assert w_alpha(a, a, alpha) == 0.0
    assert ab == pytest.approx(ba, abs=1e-10)
    assert ab <= w_alpha(a, c, alpha) + w_alpha(c, b, alpha) + 1e-10
    pts = np.vstack([a.points, b.points])
    diam = np.max(np.linalg.norm(pts[:, None] - pts[None], axis=2))
    assert ab <= diam**alpha + 1e-12


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 40), st.integers(0, 10**6))
def test_fast_1d_path_matches_lp(n, seed):
    rng = np.random.default_rng(seed)
    a, b = U(rng.normal(size=n)), U(rng.normal(size=n) * 2)
    assert w1_1d(a, b) == pytest.approx(w_alpha(a, b, 1.0), abs=1e-10)


def test_monte_carlo_point_mass_and_determinism():
    m, se = mc_wasserstein_mean(point_mass_sampler([0.3, 0.1]), 8, 5)
    assert m == 0.0 and se == 0.0
    s = uniform_box_sampler([0, 0], [1, 1])
    assert mc_wasserstein_mean(s, 4, 3, seed=7) == mc_wasserstein_mean(s, 4, 3, seed=7)
    with pytest.raises(ValueError):
        mc_wasserstein_mean(s, 4, 1)


def test_monte_carlo_inconsistent_dimensions():
    def bad(rng, n):
        return rng.uniform(size=(n, 1 if n < 10 else 2))

    with pytest.raises(ValueError):
        mc_wasserstein_mean(bad, 2, 2)


def test_monte_carlo_single_atom_line_is_one_third():
    m, se = mc_wasserstein_mean(uniform_box_sampler([0.0], [1.0]), 1, 2000, seed=3)
    assert abs(m - 1 / 3) <= 3 * se
