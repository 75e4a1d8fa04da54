from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab.combinatorics import (
    Configuration,
    FiniteSet,
    cyclic_counterexample_search,
    cyclic_recurrence_profile,
    density,
    find_configuration,
    parse_set,
    recurrence_profile,
    recurrence_set,
    shifted_count,
    sliding_upper_density,
    solve_dilated_system,
    syndeticity_gap,
    validate_configuration,
)

from conftest import family, real


def test_density_examples():
    assert density(parse_set("evens", 100)) == F(1, 2)
    E = FiniteSet.from_elements(range(1, 51), 100)
    assert density(E) == F(1, 2)
    assert sliding_upper_density(E, 10) == 1
    assert density(FiniteSet.from_elements([], 100)) == 0
    with pytest.raises(ValueError):
        sliding_upper_density(E, 0)


def test_set_algebra():
    ev, od = parse_set("evens", 50), parse_set("odds", 50)
    assert len(ev & od) == 0
    assert np.array_equal(ev.complement().mask, od.mask)
    assert len(parse_set("primes", 100)) == 25
    with pytest.raises(ValueError):
        parse_set("nonsense", 10)


def test_set_from_file(tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("3\n5\n\n8\n")
    assert list(parse_set(str(f), 10).elements) == [3, 5, 8]


def naive_count(elements: set, N: int, offsets) -> int:
    return sum(1 for m in range(1, N + 1) if m in elements and all(m + k in elements for k in offsets))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 60), st.data())
def test_shift_and_matches_naive(N, data):
    els = data.draw(st.sets(st.integers(1, N)))
    offsets = data.draw(st.lists(st.integers(-N - 2, N + 2), max_size=3))
    assert shifted_count(FiniteSet.from_elements(els, N), offsets) == naive_count(els, N, offsets)


@settings(max_examples=40, deadline=None)
@given(st.integers(20, 400), st.lists(st.integers(-500, 500), max_size=3))
def test_rotation_count_matches_membership_rule(N, offsets):
    # shifted members outside the window are decided by the rotation rule
    alpha = 3 ** 0.5
    member = lambda n: 0.1 <= (n * alpha) % 1 < 0.6
    E = FiniteSet.beatty(real("sqrt(3)"), N, 0.1, 0.6)
    brute = sum(1 for m in range(1, N + 1) if member(m) and all(member(m + k) for k in offsets))
    assert shifted_count(E, offsets) == brute


@pytest.mark.parametrize("m", range(1, 13))
def test_cyclic_profile_matches_double_loop(m):
    rng = np.random.default_rng(m)
    A = [a for a in range(m) if rng.random() < 0.5]
    coeffs = [0, 1, 1]
    naive = F(0)
    for n in range(1, m + 1):
        k = (n * n + n) % m
        naive += F(sum(1 for a in A if (a + k) % m in A), m)
    assert cyclic_recurrence_profile(m, A, coeffs) == naive / m


def test_z5_counterexample():
    assert cyclic_recurrence_profile(5, [0, 2], [0, 0, 1]) == F(2, 25)
    found = cyclic_counterexample_search(5, [0, 0, 1])
    hit = [v for v in found if v.m == 5 and v.A == (0, 2)]
    assert hit and hit[0].average == F(2, 25) and hit[0].bound == F(4, 25)


def test_counterexamples_rotation_symmetric():
    found = {(v.m, v.A): v.average for v in cyclic_counterexample_search(9, [0, 0, 1])}
    assert found
    for (m, A), avg in found.items():
        shifted = tuple(sorted((a + 1) % m for a in A))
        assert found.get((m, shifted)) == avg


def test_linear_and_full_sets_never_violate():
    assert cyclic_counterexample_search(8, [0, 1]) == []
    for v in cyclic_counterexample_search(8, [0, 0, 1]):
        assert len(v.A) < v.m
    with pytest.raises(ValueError):
        cyclic_counterexample_search(17, [0, 1])


def test_recurrence_full_window():
    E = parse_set("all", 1000)
    prof = recurrence_profile(E, family("sqrt(2)*t"), 100)
    assert prof.bound == 1 and prof.passed


def test_recurrence_beatty_example():
    E = FiniteSet.beatty(real("sqrt(3)"), 10**5, 0.0, 0.5)
    prof = recurrence_profile(E, family("sqrt(2)*t^2 + t"), 1000, tolerance=0.03)
    assert prof.edge == 0 and prof.passed
    assert prof.average >= 0.25 - 0.03


def test_recurrence_window_precondition():
    E = parse_set("evens", 1000)
    with pytest.raises(ValueError):
        recurrence_profile(E, family("t^2"), 100)


def test_find_configuration_evens():
    E = parse_set("evens", 1000)
    fam = family("sqrt(2)*t")
    conf = find_configuration(E, fam, 100)
    assert (conf.m, conf.n) == (2, 2) and validate_configuration(E, fam, conf)
    assert not validate_configuration(E, fam, Configuration(2, 2, (3,)))
    assert find_configuration(parse_set("odds", 10), family("2*t + 1"), 3) is None


@pytest.mark.parametrize("mode", ["all", "prime"])
def test_find_configuration_beatty(mode):
    E = parse_set("beatty sqrt(3) 0.4", 10**4)
    fam = family("sqrt(2)*t^2 + t", "sqrt(3)*t^2 - t")
    conf = find_configuration(E, fam, 100, mode)
    assert conf is not None and validate_configuration(E, fam, conf)


def test_solve_dilated_examples():
    assert solve_dilated_system(parse_set("all", 100), [1, 1], family("sqrt(2)*t"), 10) == ((1, 2), 1)
    assert solve_dilated_system(FiniteSet.from_elements([], 100), [1, 1], family("t"), 10) is None
    sol, n = solve_dilated_system(parse_set("evens", 100), [1, 1], family("t"), 10)
    assert (sol, n) == ((2, 4), 2)
    sol, n = solve_dilated_system(parse_set("all", 100), [2, 3], family("sqrt(2)*t"), 10)
    assert 3 * sol[1] - 2 * sol[0] == int(np.floor(np.sqrt(2) * n))


def test_syndeticity_examples():
    assert syndeticity_gap(parse_set("evens", 100)).interior == 2
    g = syndeticity_gap(FiniteSet.from_elements([1, 100], 100))
    assert g.interior == 99 and g.leading == 0 and g.trailing == 0
    with pytest.raises(ValueError):
        syndeticity_gap(FiniteSet.from_elements([], 5))


def test_recurrence_set_is_syndetic():
    R = recurrence_set(real("sqrt(3)"), (0.0, 0.25), family("sqrt(2)*t^2"), 10**4, 0.05)
    assert syndeticity_gap(R).interior <= 50
