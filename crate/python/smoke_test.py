"""Smoke test for the savings_chaos Python extension.

Build and install the module first, e.g.

    pip install maturin && maturin develop -m crates/python/Cargo.toml --release

then run ``python python/smoke_test.py``.
"""

import math

import savings_chaos as sc

PRINTED = "010010100100101001010010010100100101001010010010100"


def main():
    assert sc.fibonacci_word(51) == PRINTED
    alpha = (3 - math.sqrt(5)) / 2
    coding = sc.rotation_coding(alpha, alpha, 51)
    assert [s - 1 for s in coding] == [int(c) for c in PRINTED]

    c = sc.chaotic_params(2.0)
    assert abs(c.rho - 1709.8034428612914) <= 1e-12
    lo, hi = c.invariant_interval()
    assert abs(lo - 1354.9017214306457) <= 1e-9 and abs(hi - lo - 500) <= 1e-9
    assert c.eta == 500.0

    p = sc.ProcessParams(-0.5, 1000.0, 500.0, 1500.0)
    assert p.absorbing_bound() == 4000.0
    assert p.step(1500.0) == 1250.0
    cycle = sc.detect_cycle(p, 0.0)
    assert cycle["found"] and cycle["period"] == 2
    pts = sorted(cycle["cycle_points"])
    assert abs(pts[0] - 4000 / 3) < 1e-9 and abs(pts[1] - 5000 / 3) < 1e-9

    assert sc.classify(p)["periods"] == [2]
    chaotic = sc.classify(c)
    assert chaotic["verdict"] == "cantor_like", chaotic

    constant = sc.ProcessParams(-0.5, 500.0, 500.0, 700.0)
    orbit = constant.simulate(10.0, 100)
    assert len(orbit) == 101 and abs(orbit[-1] - 1000.0) < 1e-6
    assert abs(sc.closed_form(500.0, -0.5, 750.0, 1) - 875.0) < 1e-12

    f = sc.visit_frequency(c, 1450.0, 1400.0, 1600.0, 100_000, precision="extended")
    assert abs(f["freq"] - f["predicted"]) <= f["prediction_error"] + 1e-3, f

    seeds = sc.omega_limit_approx(c, 1450.0, 2000, 20000, 0.5)
    probe = sc.sensitivity_probe(c, seeds[0], 1e-6)
    assert probe["found"] and probe["achieved_separation"] >= 500.0

    gs = sc.GapSystem(2.0, 60)
    x1 = 2.0 * (1.0 - c.delta)
    assert abs(gs.breakpoint() - x1) <= 1e-15
    residuals = [gs.residual(c, (i + 0.5) / 1000) for i in range(1000)]
    assert max(r for r in residuals if r is not None) <= 2 * gs.tail_mass + 1e-9

    try:
        sc.ProcessParams(0.5, 1.0, 1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("positive rate accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
