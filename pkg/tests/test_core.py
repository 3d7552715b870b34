import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmokit.core import (
    Bounds,
    Population,
    RandomStream,
    Solution,
    _stable_hash64,
    crowding_distance,
    crowding_distance_matrix,
    dominates,
    non_dominated_filter,
    non_dominated_mask,
    non_dominated_sort,
    scd_from_matrices,
    special_crowding_distance,
)


def brute_nd_mask(F):
    n = len(F)
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if i != j and np.all(F[j] <= F[i]) and np.any(F[j] < F[i]):
                keep[i] = False
                break
    return keep


def pop_from_objectives(F):
    F = np.asarray(F, dtype=float)
    X = np.zeros((len(F), 1))
    return Population.from_arrays(X, F)


# ---------------------------------------------------------------- dominance


def test_dominates_weak_improvement_counts():
    assert dominates((1.0, 2.0), (1.0, 3.0))
    assert not dominates((1.0, 3.0), (1.0, 2.0))


def test_dominates_identical_vectors_do_not_dominate():
    assert not dominates((1.0, 2.0), (1.0, 2.0))


def test_dominates_incomparable_pair():
    assert not dominates((1.0, 3.0), (2.0, 2.0))
    assert not dominates((2.0, 2.0), (1.0, 3.0))


def test_dominates_accepts_solutions():
    a = Solution(np.zeros(1), np.array([0.0, 1.0]))
    b = Solution(np.zeros(1), np.array([1.0, 1.0]))
    assert dominates(a, b) and not dominates(b, a)


vec3 = st.tuples(*[st.integers(0, 3)] * 3)


@given(vec3)
def test_dominance_irreflexive(v):
    assert not dominates(v, v)


@given(vec3, vec3, vec3)
def test_dominance_transitive(a, b, c):
    if dominates(a, b) and dominates(b, c):
        assert dominates(a, c)


# ------------------------------------------------------ non-dominated filter


def test_nd_filter_drops_dominated_keeps_order():
    pop = pop_from_objectives([(1, 2), (2, 1), (2, 2)])
    out = non_dominated_filter(pop)
    assert [tuple(s.objectives) for s in out] == [(1, 2), (2, 1)]


def test_nd_filter_keeps_exact_duplicates():
    pop = pop_from_objectives([(1, 2), (1, 2)])
    assert len(non_dominated_filter(pop)) == 2


def test_nd_mask_matches_bruteforce_2d():
    rng = np.random.default_rng(42)
    # one decimal place forces plenty of exact ties
    F = np.round(rng.random((50, 2)), 1)
    assert np.array_equal(non_dominated_mask(F), brute_nd_mask(F))


def test_nd_mask_matches_bruteforce_general():
    rng = np.random.default_rng(43)
    for m in (3, 4):
        F = np.round(rng.random((50, m)), 1)
        assert np.array_equal(non_dominated_mask(F), brute_nd_mask(F))


def test_nd_filter_idempotent():
    rng = np.random.default_rng(44)
    pop = pop_from_objectives(np.round(rng.random((40, 2)), 1))
    once = non_dominated_filter(pop)
    twice = non_dominated_filter(once)
    assert len(once) == len(twice)
    assert all(np.array_equal(a.objectives, b.objectives) for a, b in zip(once, twice))


# -------------------------------------------------------- non-dominated sort


def test_nds_singleton():
    assert non_dominated_sort(np.array([[0.0, 0.0]])) == [[0]]


def test_nds_dominance_chain_gives_singleton_fronts():
    F = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    assert non_dominated_sort(F) == [[0], [1], [2]]


def test_nds_matches_peel_off_oracle():
    rng = np.random.default_rng(7)
    F = np.round(rng.random((50, 3)), 1)
    fronts = non_dominated_sort(F)
    remaining = list(range(len(F)))
    for front in fronts:
        mask = brute_nd_mask(F[remaining])
        expect = [remaining[i] for i in np.flatnonzero(mask)]
        assert sorted(front) == sorted(expect)
        remaining = [i for i in remaining if i not in set(expect)]
    assert not remaining


def test_nds_fronts_partition_population():
    rng = np.random.default_rng(8)
    F = rng.random((60, 2))
    fronts = non_dominated_sort(F)
    flat = [i for front in fronts for i in front]
    assert sorted(flat) == list(range(60))


def test_nds_accepts_population():
    pop = pop_from_objectives([(0, 1), (1, 0), (2, 2)])
    assert non_dominated_sort(pop) == [[0, 1], [2]]


# --------------------------------------------------------- crowding distance


def test_crowding_single_coordinate_collinear():
    M = np.array([[0.0], [0.5], [1.0]])
    d = crowding_distance_matrix(M)
    assert np.isinf(d[0]) and np.isinf(d[2])
    assert d[1] == pytest.approx(1.0)


def test_crowding_collinear_two_coordinates():
    # equally spaced on a line: middle point accumulates 1.0 per coordinate
    M = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]])
    d = crowding_distance_matrix(M)
    assert d[1] == pytest.approx(2.0)


def test_crowding_two_or_fewer_points_all_infinite():
    assert np.all(np.isinf(crowding_distance_matrix(np.array([[0.0, 1.0]]))))
    assert np.all(np.isinf(crowding_distance_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))))


def test_crowding_identical_points_interior_zero():
    M = np.zeros((4, 2))
    d = crowding_distance_matrix(M)
    assert np.isinf(d).sum() == 2  # boundary slots only
    assert (d[~np.isinf(d)] == 0.0).all()


def test_crowding_degenerate_coordinate_skipped():
    M = np.array([[0.0, 5.0], [0.5, 5.0], [1.0, 5.0]])
    d = crowding_distance_matrix(M)
    assert np.isfinite(d[1]) and d[1] == pytest.approx(1.0)


def test_crowding_distance_population_spaces():
    X = np.array([[0.0], [0.2], [1.0]])
    F = np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])
    pop = Population.from_arrays(X, F)
    assert crowding_distance(pop, "decision")[1] == pytest.approx(1.0)
    assert crowding_distance(pop, "objective")[1] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        crowding_distance(pop, "latent")


# --------------------------------------------- special crowding distance SCD


def test_scd_single_member_infinite():
    pop = Population.from_arrays(np.zeros((1, 2)), np.zeros((1, 2)))
    assert np.isinf(special_crowding_distance(pop)).all()


def test_scd_branch_selection_hand_case():
    # interior crowding: Cx = [inf, .5, .1, .5, inf] (mean .3667),
    #                    Cf = [inf, .5, .5, .5, inf] (mean .5)
    X = np.array([[0.0], [0.45], [0.5], [0.55], [1.0]])
    F = np.array([[0.0], [0.25], [0.5], [0.75], [1.0]])
    scd = scd_from_matrices(X, F)
    # member 2: neither crowding above its mean -> min branch
    assert scd[2] == pytest.approx(0.1)
    # member 1: decision crowding above mean -> max branch
    assert scd[1] == pytest.approx(0.5)
    assert np.isinf(scd[0]) and np.isinf(scd[4])


def test_scd_follows_published_recombination_rule():
    rng = np.random.default_rng(3)
    X = rng.random((12, 3))
    F = rng.random((12, 2))
    cx = crowding_distance_matrix(X)
    cf = crowding_distance_matrix(F)

    def finite_mean(v):
        fin = v[np.isfinite(v)]
        return fin.mean() if len(fin) else 0.0

    mx, mf = finite_mean(cx), finite_mean(cf)
    expect = np.where((cx > mx) | (cf > mf), np.maximum(cx, cf), np.minimum(cx, cf))
    assert np.array_equal(scd_from_matrices(X, F), expect)


def test_scd_bounded_by_component_crowdings():
    rng = np.random.default_rng(4)
    X = rng.random((15, 2))
    F = rng.random((15, 2))
    cx = crowding_distance_matrix(X)
    cf = crowding_distance_matrix(F)
    scd = scd_from_matrices(X, F)
    lo = np.minimum(cx, cf)
    hi = np.maximum(cx, cf)
    fin = np.isfinite(scd)
    assert (scd[fin] >= lo[fin]).all() and (scd[fin] <= hi[fin]).all()


# ------------------------------------------------------------- value objects


def test_bounds_require_strictly_increasing():
    with pytest.raises(ValueError):
        Bounds(np.array([0.0, 1.0]), np.array([1.0, 1.0]))


def test_bounds_clip_and_contains():
    b = Bounds(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    assert b.dimension == 2
    clipped = b.clip(np.array([-1.0, 5.0]))
    assert np.array_equal(clipped, [0.0, 2.0])
    assert b.contains(np.array([0.0, 2.0]))
    assert not b.contains(np.array([0.0, 2.1]))


def test_solution_rejects_non_finite_objectives():
    with pytest.raises(ValueError):
        Solution(np.zeros(2), np.array([0.0, np.inf]))


def test_solution_arrays_frozen():
    s = Solution(np.zeros(2), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        s.decision[0] = 3.0


def test_population_accessors_and_aux():
    X = np.arange(6, dtype=float).reshape(3, 2)
    F = np.arange(6, dtype=float).reshape(3, 2)
    A = np.ones((3, 4))
    pop = Population.from_arrays(X, F, A)
    assert np.array_equal(pop.decisions(), X)
    assert np.array_equal(pop.objectives(), F)
    assert pop.aux().shape == (3, 4)
    assert Population.from_arrays(X, F).aux() is None


# -------------------------------------------------------------------- random


def test_random_stream_deterministic():
    a = RandomStream(123).rng.random(5)
    b = RandomStream(123).rng.random(5)
    assert np.array_equal(a, b)


def test_child_streams_stable_and_distinct():
    r1 = RandomStream(9).child("alg", 0)
    r2 = RandomStream(9).child("alg", 0)
    r3 = RandomStream(9).child("alg", 1)
    assert np.array_equal(r1.rng.random(3), r2.rng.random(3))
    assert not np.array_equal(RandomStream(9).child("alg", 0).rng.random(3), r3.rng.random(3))


def test_stable_hash_is_reproducible_and_label_sensitive():
    h = _stable_hash64(0, "omni", "two_ps", 4)
    assert h == _stable_hash64(0, "omni", "two_ps", 4)
    assert h != _stable_hash64(0, "omni", "two_ps", 5)
    assert 0 <= h < 2**64
