"""Smoke test for the pyvpdev extension module.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/pyvpdev-*.whl
"""

import math

import pyvpdev as vp


def main():
    geo = vp.Sequence.geometric(0.5)
    neu = vp.Sequence("neumann:q=0.5")
    assert abs(neu.psi(3) - 0.125 / 3) < 1e-15
    assert abs(neu.epsilon(9) - 0.05) < 1e-15

    # V_{n,1} is the partial sum S_{n-1}
    f = vp.TrigPoly(0.3, [(1.0, -0.5), (0.25, 0.1), (0.7, 0.0), (-0.2, 0.4)])
    assert f.vp(3, 1) == f.partial_sum(2)
    assert vp.TrigPoly.from_csv(f.to_csv()) == f

    k = vp.TailKernel(geo, 10, 2)
    closed = 0.5**9 / 2 + 0.5**10 / 0.5
    assert abs(k(0.0) - closed) < 1e-15

    r = vp.worstcase(geo, 12, 3, s=2.0)
    assert r.method == "dual_norm" and r.lower_bound <= r.value <= r.upper_bound
    lp = vp.worstcase(geo, 5, 2, omega="power:alpha=0.5", lp_grid=128)
    assert lp.method == "lp" and lp.value > 0

    rep = vp.asymptotic("2", neu, 60, 2, s=math.inf)
    assert abs(rep.ratio - 1) < 0.05, rep

    assert abs(vp.k_qp(0.5, 3, 1.0) - vp.k_qp_elliptic(0.5, 3)) < 1e-10 * vp.k_qp_elliptic(0.5, 3)
    assert [vp.sigma_exponent(s, p) for s in (1.0, 2.0, math.inf) for p in (1, 2)] == [1, 3, 2, 3, 2, 3]
    assert all(passed for _, passed, _ in vp.verify(["sigma", "neumann-eps"]))

    try:
        vp.worstcase(geo, 3, 4, s=2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("p > n must be rejected")

    print("pyvpdev smoke test passed")


if __name__ == "__main__":
    main()
