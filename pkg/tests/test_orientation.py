import math
import random
from fractions import Fraction as F

import pytest

from localdensity.exact import local_density_exact, solve_fo2
from localdensity.graph import Graph, clique, gnm, lollipop, path, star
from localdensity.orientation import (
    FLOOR_LEVEL,
    FractionalOrientation,
    LevelIndex,
    PreconditionError,
    approx_check,
    decrease,
    delete_edge_maintaining_fairness,
    depth_bound,
    eta_for,
    init_half,
    is_eta_fair,
    is_locally_fair,
    level_base,
    level_of,
    orientation_from_masses,
    relax_to_eta_fair,
    schedule_k,
)


def edge():
    return Graph.from_edges(2, [(0, 1)])


def one_way_edge(exact=True):
    return orientation_from_masses(edge(), {(0, 1): 1}, exact=exact)


def test_init_half_examples():
    assert init_half(clique(3)).out == [1, 1, 1]
    assert init_half(star(3)).out == [F(3, 2), F(1, 2), F(1, 2), F(1, 2)]
    assert init_half(edge()).out == [F(1, 2), F(1, 2)]


def test_local_fairness_examples():
    assert is_locally_fair(solve_fo2(clique(3))) == []
    assert sorted(is_locally_fair(init_half(star(3)))) == [(0, 1), (0, 2), (0, 3)]
    assert is_locally_fair(one_way_edge()) == [(0, 1)]


def test_eta_fairness_examples():
    fair = solve_fo2(lollipop(4, 3))
    assert is_eta_fair(fair, 0.3) == []
    assert len(is_eta_fair(init_half(star(3)), 0.1)) == 3
    assert is_eta_fair(init_half(star(3)), 2.0) == []
    with pytest.raises(ValueError):
        is_eta_fair(fair, -1)


def test_parameter_examples():
    assert eta_for(0.5, 1024) == pytest.approx(1.953125e-4, rel=1e-12)
    assert eta_for(1, 2) == 1 / 128
    assert schedule_k(0.5, 1024) == 400
    assert schedule_k(1, 16) == 16
    for bad in (0, 1.5, -1):
        with pytest.raises(ValueError):
            eta_for(bad, 10)
    with pytest.raises(ValueError):
        schedule_k(0.5, 1)


def test_level_of_examples():
    eta = 0.1
    r = level_base(eta)
    # on a threshold: the lowest admissible level after an increase, the highest otherwise
    assert level_of(r**3, eta, rising=True) == 2
    assert level_of(r**3, eta, rising=False) == 3
    assert level_of(1, eta) == 0
    assert level_of(1, 0.7) == 0
    assert level_of(0, eta) == FLOOR_LEVEL
    assert level_of(r**3 * 1.01, eta, rising=True) == 3
    with pytest.raises(ValueError):
        level_of(-1, eta)


def test_level_of_monotone():
    eta = 0.05
    vals = sorted(random.Random(1).uniform(0.01, 50) for _ in range(500))
    levels = [level_of(v, eta) for v in vals]
    assert levels == sorted(levels)
    r = level_base(eta)
    for v, i in zip(vals, levels):
        assert r**i <= v * (1 + 1e-12) and v < r ** (i + 1) * (1 + 1e-12)


def test_level_gap_means_eta_fair():
    # adjacent levels never break eta-fairness; a two-level gap always does
    eta = 0.2
    r = level_base(eta)
    for i in range(-5, 6):
        top = r ** (i + 2) * 0.999999
        assert top <= (1 + eta) * r**i
        assert r ** (i + 2) > (1 + eta) * r ** (i + 1) * 0.999999 / r


def test_level_index_tracks_updates():
    eta = 0.1
    idx = LevelIndex([1.0, 2.0], eta)
    r = idx.base
    assert idx.update(0, 1.0, r**2) == 1  # rose onto a threshold
    assert idx.update(1, 2.0, r**2) == 2  # fell onto it
    assert idx.threshold(2) == pytest.approx(r**2)


def test_decrease_single_edge():
    o = one_way_edge()
    st = decrease(o, 0, 1, 1, eta=1)
    assert o.out == [0, 1] and st.depth == 0


def test_decrease_directed_path_example():
    # a -> b -> c, unit weights, all mass forward
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    o = orientation_from_masses(g, {(0, 1): 1, (1, 2): 1}, exact=True)
    st = decrease(o, 1, 2, 1, eta=0.1)
    assert o.out[0] == 0 and o.out[1] == 1
    assert o.mass(1, 0) == 1 and o.mass(2, 1) == 1
    assert st.depth == 1 and (1, 0, 1) in st.trail


def test_decrease_zero_and_precondition():
    o = one_way_edge()
    before = list(o.x)
    decrease(o, 0, 1, 0, eta=0.5)
    assert o.x == before
    with pytest.raises(PreconditionError):
        decrease(o, 1, 0, F(1, 2), eta=0.5)


def sequential_executor(o, u, v, delta, eta):
    """Loop-based executor with an explicit frame stack instead of recursion.

    A frame ``[vertex, target, amount, left]`` stands for "``vertex`` will
    give ``amount`` to ``target`` once it has pulled in what it can".
    Vertices with an open frame never donate.
    """
    frames = [[u, v, delta, delta]]
    while frames:
        top = frames[-1]
        x, _, full, left = top
        chain = {f[0] for f in frames}
        donors = [w for w, _ in o.neighbors(x) if w not in chain and o.mass(w, x) > 0]
        if left > 0 and donors:
            w = max(donors, key=lambda y: (o.out[y], -y))
            if o.out[w] > (1 + eta) * (o.out[x] - full):
                d = min(left, o.mass(w, x))
                top[3] = left - d
                frames.append([w, x, d, d])
                continue
        frames.pop()
        o.transfer(top[0], top[1], top[2])


@pytest.mark.parametrize("seed", range(12))
def test_decrease_matches_sequential_executor(seed):
    rng = random.Random(seed)
    g = gnm(9, 18, seed)
    masses = {(a, b): F(rng.randint(0, 4), 4) for a, b, _ in g.edges}
    eta = rng.choice([0.05, 0.1, 0.5])
    ours = orientation_from_masses(g, masses, exact=True)
    ref = orientation_from_masses(g, masses, exact=True)
    a, b = next((a, b) for a, b, _ in g.edges if ours.mass(a, b) > 0)
    delta = ours.mass(a, b)
    decrease(ours, a, b, delta, eta)
    sequential_executor(ref, a, b, delta, eta)
    assert ours.x == ref.x


def test_decrease_conserves_weight_exactly():
    rng = random.Random(3)
    g = gnm(10, 24, 3)
    o = orientation_from_masses(g, {(a, b): F(rng.randint(0, 3), 3) for a, b, _ in g.edges}, exact=True)
    for _ in range(30):
        a, b, _ = rng.choice(g.edges)
        if rng.random() < 0.5:
            a, b = b, a
        if o.mass(a, b) > 0:
            decrease(o, a, b, o.mass(a, b) / 2, 0.1)
        for e, (x, y, w) in enumerate(g.edges):
            assert o.mass(x, y) + o.mass(y, x) == w
            assert o.mass(x, y) >= 0 and o.mass(y, x) >= 0
        o.check()


def fair_start(g, eta):
    o = solve_fo2(g)
    assert is_eta_fair(o, eta) == []
    return o


def test_delete_keeps_p3_fair():
    g = path(3)
    eta = eta_for(0.5, 3)
    o = fair_start(g, eta)
    delete_edge_maintaining_fairness(o, 1, 2, eta)
    assert is_eta_fair(o, eta) == []


def test_delete_only_edge():
    o = init_half(edge(), exact=False)
    delete_edge_maintaining_fairness(o, 0, 1, 0.1)
    assert o.out == [0, 0] and is_eta_fair(o, 0.1) == []
    with pytest.raises(KeyError):
        delete_edge_maintaining_fairness(o, 0, 1, 0.1)


def test_delete_lollipop_path_edge():
    g = lollipop(4, 3)
    eta = eta_for(0.5, g.n)
    o = fair_start(g, eta)
    before = o.out[:4]
    delete_edge_maintaining_fairness(o, 5, 6, eta)
    assert is_eta_fair(o, eta) == []
    assert o.out[:4] == pytest.approx(before, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_deletions_stay_fair_with_bounded_depth(seed):
    rng = random.Random(seed)
    g = gnm(12, 30, seed)
    eta = eta_for(1.0, g.n)
    o = fair_start(g, eta)
    bound = depth_bound(g.n, eta)
    for _ in range(12):
        u, v = rng.choice(o.alive_edges())
        st = delete_edge_maintaining_fairness(o, u, v, eta)
        assert st.depth <= bound
        assert is_eta_fair(o, eta) == []
        o.check()


def test_overshoot_single_step():
    # w -> u carries 1 and g(w) barely exceeds g(u); dropping u's out-edge
    # pulls the whole unit from w, leaving g(u) well above (1+eta) g(w)
    g = Graph.from_edges(4, [(0, 1, 1), (0, 2, 5), (1, 3, F(401, 100))])
    o = FractionalOrientation(g, [F(0), F(5), F(401, 100)], exact=True)
    eta = F(1, 10)
    assert (o.out[0], o.out[1]) == (5, F(501, 100))
    decrease(o, 0, 2, 1, eta)
    assert o.mass(0, 1) == 1
    assert o.out[0] > (1 + eta) * o.out[1]


def test_cleanup_restores_fairness_after_overshoot():
    g = gnm(10, 24, 0)
    eta = eta_for(1.0, g.n)
    start = solve_fo2(g)
    unfair_without = 0
    for u, v in start.alive_edges():
        raw = start.copy()
        delete_edge_maintaining_fairness(raw, u, v, eta, cleanup=False)
        unfair_without += bool(is_eta_fair(raw, eta))
        fixed = start.copy()
        st = delete_edge_maintaining_fairness(fixed, u, v, eta)
        assert is_eta_fair(fixed, eta) == []
        assert st.cleanup_moves > 0 or not is_eta_fair(raw, eta)
    assert unfair_without > 0


def test_tie_order_changes_witness_not_fairness():
    g = gnm(10, 22, 8)
    eta = 0.05
    for reverse in (False, True):
        o = solve_fo2(g, reverse=reverse)
        u, v = o.alive_edges()[3]
        delete_edge_maintaining_fairness(o, u, v, eta)
        assert is_eta_fair(o, eta) == []


def test_relax_reaches_fairness():
    rng = random.Random(9)
    g = gnm(12, 30, 9)
    o = orientation_from_masses(g, {(a, b): rng.random() for a, b, _ in g.edges})
    relax_to_eta_fair(o, 0.01)
    assert is_eta_fair(o, 0.01) == []


def test_approx_check_examples():
    g = lollipop(4, 3)
    exact = local_density_exact(g)
    assert approx_check(solve_fo2(g), exact, 0.1)["pass"]
    k3 = clique(3)
    assert approx_check(init_half(k3), local_density_exact(k3), 0.5)["pass"]
    rep = approx_check(one_way_edge(), local_density_exact(edge()), 0.1)
    assert not rep["pass"] and [r["pass"] for r in rep["vertices"]] == [False, False]


def test_depth_bound_formula():
    assert depth_bound(16, 1.0) == math.ceil(4 / 1.0) + 1
