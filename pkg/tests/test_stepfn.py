import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from majorization.errors import DomainError
from majorization.stepfn import (
    LorenzCurve,
    StepFunction,
    coarse_grain,
    convex_integral,
    distribution,
    dominates,
    hockey_stick,
    l1_distance,
    lorenz,
    power_function,
    rearrange,
    tensor,
    weighted,
    xlogx,
)

from oracles import lorenz_lp

# strategies -----------------------------------------------------------------

values = st.floats(min_value=0.0, max_value=10.0, allow_nan=False)
masses = st.sampled_from([0.25, 0.5, 1.0, 1.5, 2.0, 3.0])


@st.composite
def step_functions(draw, max_pieces=6):
    n = draw(st.integers(1, max_pieces))
    vs = sorted({round(draw(st.floats(0.01, 5.0)), 6) for _ in range(n)}, reverse=True)
    ws = [draw(masses) for _ in vs]
    return StepFunction(vs, ws)


@st.composite
def atom_lists(draw, max_atoms=7):
    n = draw(st.integers(1, max_atoms))
    return [(draw(values), draw(masses)) for _ in range(n)]


# StepFunction ----------------------------------------------------------------

def test_canonical_form_merges_and_drops_zeros():
    f = StepFunction([1.0, 1.0, 0.5, 0.0], [0.5, 0.5, 2.0, 3.0])
    assert f.pieces == [(1.0, 1.0), (0.5, 2.0)]
    assert f.total == pytest.approx(2.0)
    assert f.support == pytest.approx(3.0)


def test_increasing_input_is_rejected():
    with pytest.raises(DomainError):
        StepFunction([0.1, 0.2], [1, 1])


@pytest.mark.parametrize("vals,widths", [([-1.0], [1.0]), ([1.0], [0.0]), ([math.inf], [1.0])])
def test_invalid_pieces(vals, widths):
    with pytest.raises(DomainError):
        StepFunction(vals, widths)


def test_evaluation_is_right_open():
    f = StepFunction.from_pieces([(0.5, 1), (0.2, 2)])
    assert f(0.0) == 0.5
    assert f(1.0) == 0.2
    assert f(2.999) == 0.2
    assert f(3.0) == 0.0


def test_json_round_trip():
    f = StepFunction.from_pieces([(0.5, 1), (0.25, 2)])
    g = StepFunction.from_json(f.to_json())
    assert g == f
    assert json.loads(f.to_json())


# rearrange / distribution ----------------------------------------------------

def test_rearrange_examples():
    assert rearrange([(0.2, 1), (0.5, 1), (0.3, 1)]).pieces == [(0.5, 1), (0.3, 1), (0.2, 1)]
    assert rearrange([(0.4, 2)]).pieces == [(0.4, 2)]
    assert rearrange([(1, 0.5), (1, 0.5), (0, 3)]).pieces == [(1, 1)]


@pytest.mark.parametrize("bad", [[(-0.1, 1)], [(0.1, 0)], [(0.1, -2)]])
def test_rearrange_domain_errors(bad):
    with pytest.raises(DomainError):
        rearrange(bad)


def test_distribution_examples():
    D = distribution(StepFunction.from_pieces([(0.5, 1), (0.2, 2)]))
    assert D.pieces == [(3.0, 0.2), (1.0, pytest.approx(0.3))]
    D1 = distribution(StepFunction.flat(0.7, 2.5))
    assert D1.pieces == [(2.5, 0.7)]


@given(step_functions())
def test_distribution_is_an_involution(f):
    assert distribution(distribution(f)).isclose(f, atol=1e-12)


@given(atom_lists())
def test_equimeasurability(atoms):
    f = rearrange(atoms)
    v = np.array([a for a, _ in atoms])
    m = np.array([b for _, b in atoms])
    for phi in (power_function(1), power_function(2), power_function(3.5), hockey_stick(0.7), xlogx):
        assert convex_integral(f, phi) == pytest.approx(float(np.dot(phi(v), m)), rel=1e-12, abs=1e-12)


# Lorenz curves ---------------------------------------------------------------

def test_lorenz_examples():
    L = lorenz(StepFunction.from_pieces([(0.5, 1), (0.3, 1), (0.2, 1)]))
    assert L(1) == pytest.approx(0.5)
    assert L(2) == pytest.approx(0.8)
    assert L(3) == pytest.approx(1.0)
    L1 = lorenz(StepFunction.flat(1, 1))
    for t in (0, 0.3, 1, 4):
        assert L1(t) == pytest.approx(min(t, 1))


@given(atom_lists(), st.floats(0, 12))
def test_lorenz_matches_variational_lp(atoms, t):
    v = [a for a, _ in atoms]
    m = [b for _, b in atoms]
    assert lorenz(rearrange(atoms))(t) == pytest.approx(lorenz_lp(v, m, t), abs=1e-9)


@given(step_functions())
def test_lorenz_shape(f):
    L = lorenz(f)
    s = L.slopes
    assert np.all(np.diff(s) <= 1e-12)
    assert np.all(s >= 0)
    assert L(1e9) == pytest.approx(f.total)


def test_concavity_is_enforced():
    with pytest.raises(DomainError):
        LorenzCurve([0, 1, 2], [0, 0.2, 1.0])


def test_dominates_examples():
    a = lorenz(StepFunction.from_pieces([(0.5, 1), (0.3, 1), (0.2, 1)]))
    b = lorenz(rearrange([0.4, 0.3, 0.3]))
    assert dominates(a, b)
    assert dominates(a, a)
    assert not dominates(lorenz(StepFunction.flat(0.5, 2)), lorenz(rearrange([0.8, 0.2])))


@given(step_functions(), step_functions(), step_functions())
def test_dominates_is_a_partial_order(f, g, h):
    F, G, H = lorenz(f), lorenz(g), lorenz(h)
    assert dominates(F, F, 0)
    if dominates(F, G, 0) and dominates(G, H, 0):
        assert dominates(F, H, 1e-12)
    if dominates(F, G, 0) and dominates(G, F, 0):
        assert np.allclose(F(np.union1d(F.t, G.t)), G(np.union1d(F.t, G.t)))


def test_lorenz_csv_has_header():
    text = lorenz(StepFunction.flat(0.5, 2)).to_csv()
    assert text.splitlines()[0] == "t,L"
    assert len(text.splitlines()) == 3


# functionals -----------------------------------------------------------------

def test_convex_integral_examples():
    f = StepFunction.from_pieces([(0.5, 1), (0.5, 1)])
    assert convex_integral(f, power_function(2)) == pytest.approx(0.5)
    g = rearrange([0.5, 0.3, 0.2])
    assert convex_integral(g, power_function(1)) == pytest.approx(g.total)
    assert convex_integral(g, hockey_stick(0.3)) == pytest.approx(0.2)


def test_convex_integral_diverges_on_infinite_zero_set():
    f = StepFunction.flat(1, 1)
    with pytest.raises(DomainError):
        convex_integral(f, lambda x: x + 1.0)
    assert convex_integral(f, lambda x: x + 1.0, zero_measure=2.0) == pytest.approx(4.0)


def test_l1_distance_examples():
    assert l1_distance(rearrange([0.7, 0.3]), rearrange([0.5, 0.5])) == pytest.approx(0.4)
    f = rearrange([0.7, 0.3])
    assert l1_distance(f, f) == 0


@given(step_functions(), step_functions(), step_functions())
def test_l1_triangle_inequality(f, g, h):
    assert l1_distance(f, h) <= l1_distance(f, g) + l1_distance(g, h) + 1e-12


@given(step_functions(), step_functions())
def test_tensor_multiplies_totals_and_supports(f, g):
    t = tensor(f, g)
    assert t.total == pytest.approx(f.total * g.total, rel=1e-12)
    assert t.support == pytest.approx(f.support * g.support, rel=1e-12)


@given(step_functions(), st.sampled_from([0.5, 1.0, 2.0, 0.75]))
def test_coarse_grain_is_a_conditional_expectation(f, cell):
    c = coarse_grain(f, cell)
    assert c.total == pytest.approx(f.total, rel=1e-12)
    # averaging is majorized by the original
    assert dominates(lorenz(f), lorenz(c), 1e-12)
    # and is constant on grid cells
    for b in c.breakpoints[:-1]:
        assert abs(b / cell - round(b / cell)) < 1e-9


def test_coarse_grain_with_aligned_breakpoints_inside_a_run():
    f = StepFunction.from_pieces([(0.5, 1), (0.25, 1), (0.125, 0.5), (0.1, 1.5)])
    c = coarse_grain(f, 1.0)
    assert c.pieces[0] == (0.5, 1.0)
    assert c.pieces[1] == (0.25, 1.0)
    assert c.total == pytest.approx(f.total)


def test_weighted_vector_validation():
    with pytest.raises(DomainError):
        weighted([1, 2], [1])
    w = weighted([1, 0, 2], [1, 2, 0.5])
    assert w.integral == 2.0
    assert w.support_measure == 1.5
    assert w.cosupport_measure == 2.0
    assert weighted([1], infinite_tail=True).cosupport_measure == math.inf
