"""Quick check that the extension module loads and its main entry points work.

Build and install first, e.g. `maturin build -m crates/python/Cargo.toml` and
`pip install target/wheels/hyperrank-*.whl`.
"""

import hyperrank


def main():
    h = hyperrank.Hypergraph.toy()
    assert (h.n, h.k, len(h)) == (9, 3, 9), h

    v = [0.5, 0.5] + [0.0] * 7
    r = hyperrank.solve_pagerank(h, 0.2, v)
    expected = [0.4796, 0.4796, 0.0527, 0.0527, 0, 0, 0, 0, 0]
    assert r["converged"]
    assert max(abs(a - b) for a, b in zip(r["y"], expected)) <= 5e-4, r["y"]

    x = hyperrank.to_mpr(h, 0.2, r["y"], v)
    assert abs(sum(x) - 1) < 1e-12
    mpr = hyperrank.solve_pagerank(h, 0.2, v, model="mpr", tol_step=1e-13, tol_eq=1e-13)
    assert sum(abs(a - b) for a, b in zip(x, mpr["y"])) < 1e-6

    varsigma, contracts = hyperrank.contraction(3, 0.2)
    assert contracts and abs(varsigma - 0.6708) < 1e-4

    edges = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3], [3, 4, 5],
             [4, 5, 6], [4, 5, 7], [4, 6, 7], [5, 6, 7]]
    planted = hyperrank.Hypergraph(8, 3, edges)
    side, curve, h_min = hyperrank.bisect(planted)
    assert side in ([0, 1, 2, 3], [4, 5, 6, 7]), side
    assert len(curve) == 7 and h_min == min(curve)
    assert sorted(map(len, hyperrank.partition(planted, 2))) == [4, 4]

    cycles, ids = hyperrank.d3c_network(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)])
    assert len(cycles) == 1 and ids == [0, 1, 2]

    delta = hyperrank.perturb_vector([0.25] * 4, 0.1, seed=3)
    assert abs(sum(map(abs, delta)) - 0.1) < 1e-10 and abs(sum(delta)) < 1e-12

    try:
        hyperrank.solve_pagerank(h, 1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("alpha >= 1 accepted")

    ratio = hyperrank.subspace_run(n=100, seed=7, noise_variance=0.0)
    assert 0.0 <= ratio <= 1.0
    print("python smoke test passed:", hyperrank.__version__)


if __name__ == "__main__":
    main()
