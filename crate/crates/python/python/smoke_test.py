"""Smoke test for the pyraogeo extension module.

Build and install first, e.g. ``maturin develop --release`` from crates/python,
then run ``python python/smoke_test.py``.
"""

import math

import pyraogeo as rg


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    f = rg.fisher_information("normal", [0.0, 2.0])
    close(f[0][0], 0.25, 1e-9)
    close(f[1][1], 0.5, 1e-9)
    close(rg.fisher_information("bernoulli", [0.3])[0][0], 1 / 0.21, 1e-9)

    g, rank = rg.multinomial_alpha_tensor([0.2, 0.3, 0.5], 2.0)
    assert rank == 3
    close(g[0][0], 0.2 ** -2, 1e-9)

    close(rg.rao_distance("poisson", [1.0], [4.0]), 2.0, 1e-4)
    close(rg.rao_distance_1d("bernoulli", 0.2, 0.7),
          2 * abs(math.asin(math.sqrt(0.7)) - math.asin(math.sqrt(0.2))), 1e-8)
    p, q = [0.2, 0.3, 0.5], [0.6, 0.3, 0.1]
    bc = sum(math.sqrt(a * b) for a, b in zip(p, q))
    close(rg.rao_distance("multinomial", p, q), 2 * math.acos(bc), 1e-6)

    close(rg.arc_length("circle 0 0 1 0 3.141592653589793"), math.pi, 1e-10)
    close(rg.tangent_angle("line 0 0 1 1", 0.5), math.pi / 4, 1e-12)

    h, v = "line 0.5 1 1.5 1", "line 1 0.5 1 1.5"
    ok = rg.conformal_check("square", h, v, 0.5)
    assert ok.passed, ok
    bad = rg.conformal_check("conjugate", h, v, 0.5)
    assert not bad.passed
    close(bad.image_angle, -math.pi / 2, 1e-6)

    scene = rg.Scene.parse("A0 = 0 0 0\nB0 = 0 -1 0.5\nC0 = 1 0 0\nC1 = 0 1 0\n")
    close(scene.view_angles()["alpha"], math.pi / 2, 1e-15)
    close(scene.five_distances()["a0c0"], 1.0, 0.0)
    assert not scene.single_plane_feasible()
    assert "alpha,1.5707963268,radians,ok" in scene.report_csv()
    assert scene.render_svg("xy").count("<line ") == 5

    try:
        rg.fisher_information("bernoulli", [1.5])
    except rg.RaoGeoError as e:
        assert "outside" in str(e)
    else:
        raise AssertionError("expected RaoGeoError")

    print("pyraogeo smoke test passed")


if __name__ == "__main__":
    main()
