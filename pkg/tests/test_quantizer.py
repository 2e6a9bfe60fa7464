import math

import numpy as np
import pytest

from quantdim import geometry, model, quadrature, quantizer, spectral, words
from quantdim.errors import BudgetExceeded

from .oracles import interval_of, word_logs, words_of_length

LOG3 = math.log(3)
S0_CANTOR = math.log(2) / LOG3


def grid_oracle(system, real, state, lo, hi, size=10_000, depth=12, keep=24):
    """Best certified hi over a dense grid, ranked first by a midpoint rule."""
    sub = model.MarkovSystem(system.P, system.C, np.eye(system.N)[state - 1] * (1 - 1e-300)
                             + 1e-300 / system.N)
    mids, mass = [], []
    for w in words_of_length(system.P, depth):
        if w[0] != state:
            continue
        a, length = interval_of(real, w)
        mids.append(a + 0.5 * length)
        mass.append(math.exp(word_logs(sub.P, sub.C, sub.q, w)[0]))
    mids, mass = np.array(mids), np.array(mass)
    grid = np.linspace(lo, hi, size)
    est = np.array([mass @ np.log(np.abs(mids - g) + 1e-300) for g in grid])
    best = grid[np.argsort(est)[:keep]]
    return min(quadrature.integral_log_dist(real, system, [b], tol=1e-3, state=state).hi
               for b in best)


def test_codebook_normalizes_points():
    book = quantizer.Codebook([0.5, 0.1, 0.5])
    assert book.n == 2 and list(book.points) == [0.1, 0.5]
    assert not book.points.flags.writeable
    with pytest.raises(ValueError):
        quantizer.Codebook([])


def test_gamma_on_cantor(cantor, cantor_layout):
    g = quantizer.gamma_upper(cantor_layout, cantor, 2)
    assert g.n == 16 and g.extra["psi"] == 16
    assert g.extra["sum_m_log_c"] == pytest.approx(-3 * LOG3, abs=1e-12)
    assert g.objective.hi <= -3 * LOG3 + 1e-6
    assert g.a == pytest.approx(S0_CANTOR)
    assert g.q_value <= LOG3 + 1e-6
    assert g.q_value == pytest.approx(math.log(16) / g.a + g.objective.hi, abs=1e-15)


@pytest.mark.parametrize("name", ["cantor2", "ring3", "skew2"])
def test_gamma_is_below_its_ceiling(name):
    system = getattr(model, name)()
    real = geometry.equal_gap(system, allow_touching=name == "skew2")
    for j in range(1, 6):
        g = quantizer.gamma_upper(real, system, j)
        summ = words.lambda_summary(system, j)
        assert g.n == summ.psi
        assert g.extra["sum_m_log_c"] == pytest.approx(summ.sum_m_log_c, abs=1e-12)
        assert g.objective.lo <= g.objective.hi <= g.extra["sum_m_log_c"] + 1e-6


def test_gamma_on_random_systems(systems):
    for system in systems[:5]:
        real = geometry.equal_gap(system)
        g = quantizer.gamma_upper(real, system, 3)
        assert g.objective.hi <= g.extra["sum_m_log_c"] + 1e-6


def test_conditional_gamma(skew, skew_layout):
    g = quantizer.gamma_upper(skew_layout, skew, 3, state=2)
    summ = words.lambda_summary_conditional(skew, 2, 3)
    assert g.n == summ.psi
    assert g.objective.hi <= summ.sum_m_log_c + 1e-6


def test_budget_propagates(skew, skew_layout):
    with pytest.raises(BudgetExceeded):
        quantizer.gamma_upper(skew_layout, skew, 12, budget=1000)


def test_zero_iterations_is_identity(cantor, cantor_layout):
    book = quantizer.Codebook([0.2, 0.9, 3.4])
    res = quantizer.improve(cantor_layout, cantor, book, iterations=0)
    ref = quadrature.eval_quantizer(cantor_layout, cantor, book.points, tol=1e-3)
    assert res.objective.hi == pytest.approx(ref.hi, abs=1e-12)
    assert res.objective.lo == pytest.approx(ref.lo, abs=1e-12)
    assert np.array_equal(res.codebook.points, book.points)
    g = quantizer.gamma_upper(cantor_layout, cantor, 2)
    same = quantizer.improve(cantor_layout, cantor, g.codebook, iterations=0, start=g)
    assert same.objective.hi <= g.objective.hi + 1e-12


def test_improvement_is_monotone(cantor, cantor_layout):
    g = quantizer.gamma_upper(cantor_layout, cantor, 2)
    res = quantizer.improve(cantor_layout, cantor, g.codebook, iterations=50, start=g)
    assert res.objective.hi <= g.objective.hi
    assert res.objective.hi <= -3 * LOG3
    assert res.n <= g.n


def test_improvement_from_poor_starts(ring, ring_layout):
    rng = np.random.default_rng(4)
    for seed in range(3):
        book = quantizer.Codebook(rng.uniform(0, 7, size=4))
        before = quadrature.eval_quantizer(ring_layout, ring, book.points, tol=1e-3)
        res = quantizer.improve(ring_layout, ring, book, iterations=5, seed=seed)
        assert res.objective.hi <= before.hi + 1e-12
        if res.extra["sweeps_accepted"]:
            assert res.objective.hi < before.hi
            assert res.codebook.provenance == "improved"


def test_improvement_is_deterministic(skew, skew_layout):
    book = quantizer.codebook_for_n(skew_layout, skew, 3)
    a = quantizer.improve(skew_layout, skew, book, iterations=3, seed=42)
    b = quantizer.improve(skew_layout, skew, book, iterations=3, seed=42)
    assert np.array_equal(a.codebook.points, b.codebook.points)
    assert a.objective.hi == b.objective.hi


def test_single_center_matches_grid_oracle(cantor, cantor_layout):
    book = quantizer.codebook_for_n(cantor_layout, cantor, 1, state=1)
    assert book.n == 1
    res = quantizer.improve(cantor_layout, cantor, book, iterations=20, seed=0, state=1)
    oracle = grid_oracle(cantor, cantor_layout, 1, 0.0, 1.0)
    assert res.objective.hi <= oracle + 1e-3


def test_codebook_for_n(cantor, cantor_layout, ring, ring_layout):
    for n in (1, 2, 3, 5, 8, 16):
        book = quantizer.codebook_for_n(cantor_layout, cantor, n)
        assert book.n <= n
        assert book.n >= n - 1  # binary splits overshoot by at most one
    assert quantizer.codebook_for_n(ring_layout, ring, 2).n == 2
    with pytest.raises(ValueError):
        quantizer.codebook_for_n(ring_layout, ring, 0)


def test_q_sequence_at_the_dimension(cantor, cantor_layout):
    rows = quantizer.q_sequence(cantor_layout, cantor, S0_CANTOR, 5, iterations=2)
    assert [r.j for r in rows] == [1, 2, 3, 4, 5]
    assert [r.psi for r in rows] == [2 ** (j + 2) for j in range(1, 6)]
    for r in rows:
        assert r.Q <= LOG3 + 1e-6
        assert r.ehat_hi <= -(r.j + 1) * LOG3 + 1e-6
        assert r.ehat_bestfound <= r.ehat_hi


def test_q_sequence_off_the_dimension(cantor, cantor_layout):
    low = quantizer.q_sequence(cantor_layout, cantor, S0_CANTOR / 2, 6, iterations=0)
    high = quantizer.q_sequence(cantor_layout, cantor, 2 * S0_CANTOR, 6, iterations=0)
    assert all(b.Q > a.Q for a, b in zip(low, low[1:]))
    assert all(b.Q < a.Q for a, b in zip(high, high[1:]))
    # both move by at least log(2)/s0 - log(3)-ish per level once the codebook is refined
    assert low[-1].Q - low[0].Q > 5 * LOG3 - 1.0
    with pytest.raises(ValueError):
        quantizer.q_sequence(cantor_layout, cantor, 0.0, 2)


def test_q_sequence_budget_keeps_partial_rows(skew, skew_layout):
    with pytest.raises(BudgetExceeded) as info:
        quantizer.q_sequence(skew_layout, skew, 0.87, 8, iterations=0, budget=300)
    rows = info.value.partial
    assert rows and all(r.psi <= 300 for r in rows)


@pytest.mark.parametrize("name, j_max", [("cantor2", 10), ("ring3", 10), ("skew2", 8)])
def test_q_stays_within_envelope(name, j_max):
    system = getattr(model, name)()
    real = geometry.equal_gap(system, allow_touching=name == "skew2")
    s0 = spectral.s0(system).s0
    dc = model.derived_constants(system)
    rows = quantizer.q_sequence(real, system, s0, j_max, iterations=0, j_min=3)
    q = [r.Q for r in rows]
    envelope = (abs(math.log(dc.p_lo)) / s0 + abs(math.log(dc.q_lo * dc.p_lo)) / s0
                + abs(math.log(dc.q_hi)) / (2 * s0) + 1)
    assert max(q) - min(q) <= envelope
