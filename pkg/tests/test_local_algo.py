import math

import pytest

from localdensity.exact import local_density_exact, solve_fo2
from localdensity.graph import clique, gnm, lollipop, path
from localdensity.local_algo import local_density_local_model, local_reference
from localdensity.orientation import schedule_k


def sandwich(values, exact, eps, tol=1e-6):
    return all(float(r) / (1 + eps) - tol <= values[v] <= float(r) * (1 + eps) + tol for v, r in exact.items())


def test_k3_whole_graph():
    out, trace = local_density_local_model(clique(3), 0.5)
    assert all(abs(x - 1) <= 1e-9 for x in out.values())
    assert trace.rounds == schedule_k(0.5, 3)


def test_lollipop_sandwich():
    g = lollipop(4, 3)
    out, _ = local_density_local_model(g, 0.5)
    exact = local_density_exact(g)
    assert sandwich(out, exact, 0.5)
    assert all(1 <= out[v] <= 2.25 for v in range(4))
    assert all(2 / 3 <= out[v] <= 1.5 for v in range(4, 7))


def test_p10_eps1():
    g = path(10)
    out, trace = local_density_local_model(g, 1.0)
    assert sandwich(out, local_density_exact(g), 1.0)
    assert trace.rounds == math.ceil(math.log2(10) ** 2)


def test_truncated_radius_matches_centralised_balls():
    # a short radius on a long path makes the balls differ from the whole graph
    g = lollipop(6, 8)
    out, trace = local_density_local_model(g, 1.0, k=2)
    ref = local_reference(g, 2)
    assert trace.rounds == 2
    assert all(abs(out[v] - ref[v]) <= 1e-9 for v in range(g.n))
    whole = solve_fo2(g).out
    assert any(abs(out[v] - whole[v]) > 1e-3 for v in range(g.n))


def test_saturation_is_stable():
    g = gnm(9, 16, 2)
    d = g.diameter()
    a, _ = local_density_local_model(g, 1.0, k=d)
    b, _ = local_density_local_model(g, 1.0, k=d + 3)
    exact = local_density_exact(g)
    assert a == b
    assert all(abs(a[v] - float(exact[v])) <= 1e-6 for v in range(g.n))


def test_weighted_rejected():
    from localdensity.graph import Graph

    with pytest.raises(ValueError):
        local_density_local_model(Graph.from_edges(2, [(0, 1, 2)]), 0.5)


def test_isolated_vertex_outputs_zero():
    from localdensity.graph import Graph

    g = Graph.from_edges(3, [(0, 1)])
    out, _ = local_density_local_model(g, 1.0)
    assert out[2] == 0.0 and abs(out[0] - 0.5) < 1e-9
