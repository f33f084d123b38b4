"""Smoke test for the compiled `tulap` module.

Build and install first, e.g. `pip install maturin && maturin develop -m crates/python/Cargo.toml`.
"""

import math

import tulap


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    noise = tulap.Tulap(0.0, 0.5)
    assert close(noise.cdf(1.0), 0.75, 1e-12)
    assert close(noise.quantile(0.75), 1.0, 1e-9)
    draws = noise.sample(20000, seed=1)
    mean = sum(draws) / len(draws)
    assert abs(mean) < 0.1, mean

    z1 = tulap.privatize(22, 30, epsilon=1.0, seed=7)
    z2 = tulap.privatize(22, 30, epsilon=1.0, seed=7)
    assert z1 == z2

    for kind in ["greater", "less", "bonferroni", "umpu", "approx"]:
        tv = tulap.test_vector(30, 0.3, 0.05, epsilon=1.0, kind=kind)
        assert close(tv.size(), 0.05, 1e-8), kind
        assert tv.is_private(), kind
        assert len(tv.phi) == 31

    k, m = tulap.umpu_solve(30, 0.5, 0.05, epsilon=1.0)
    assert close(k, 15.0, 1e-6), k

    p = tulap.ump_pvalue(1e6, 30, 0.9, epsilon=1.0)
    assert p < 1e-6
    for kind in ["bonferroni", "approx", "umau"]:
        pv = tulap.two_sided_pvalue(12.3, 30, 0.5, epsilon=1.0, kind=kind)
        assert 0.0 <= pv <= 1.0
    assert close(
        tulap.two_sided_pvalue(12.3, 30, 0.5, epsilon=1.0, kind="approx"),
        tulap.two_sided_pvalue(12.3, 30, 0.5, epsilon=1.0, kind="umau"),
        1e-6,
    )

    lo, hi = tulap.confidence_interval(z1, 30, 0.05, epsilon=1.0, kind="approx")
    assert 0.0 <= lo < hi <= 1.0

    grid = [i / 20 for i in range(21)]
    values = tulap.confidence_distribution(z1, 30, grid, epsilon=1.0)
    assert all(a <= b for a, b in zip(values, values[1:]))

    pairs = [(i * 0.37 % 5 + 2.0, i * 0.53 % 5) for i in range(40)]
    res = tulap.sign_test(pairs, epsilon=1.0, seed=5, alternative="greater")
    assert 0.0 <= res["p_value"] <= 1.0

    res = tulap.median_test([1.5, 2.5, 3.5], [0.1, 0.2, 0.3], epsilon=2.0, seed=1)
    assert res["n"] == 3

    try:
        tulap.privatize(40, 30, epsilon=1.0, seed=1)
    except ValueError:
        pass
    else:
        raise AssertionError("count above n accepted")

    rows = tulap.simulate(1, seed=1, replicates=200, ns=[10, 30])
    assert len(rows) == 6
    assert all(math.isfinite(r["estimate"]) for r in rows)

    print(f"tulap {tulap.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
