"""Smoke test for the frobtor extension module.

Build and install first:  pip install --no-build-isolation -e crates/py
"""

import cmath
import math

import frobtor


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    d4 = frobtor.verify("D", 4, k=1, k_prime=0)
    assert d4["overall"] == "pass", d4["overall"]
    assert d4["system"] == "D4"

    a3 = frobtor.verify("A", 3, k=0.5, k_prime=0.5, points=2)
    assert a3["degenerate"] and a3["overall"] == "degenerate"

    g2 = frobtor.verify("G", 2, k=1, k_prime=2, points=2, metric_scale=1.1)
    assert g2["overall"] == "fail"

    try:
        frobtor.verify("Q", 2)
    except ValueError:
        pass
    else:
        raise AssertionError("bad family accepted")

    assert len(frobtor.roots("E", 8)["positive_roots"]) == 120
    assert len(frobtor.roots("G", 2)["positive_roots"]) == 6

    direct = sum(0.5**n / n**3 for n in range(1, 41))
    assert close(frobtor.li3(0.5), direct, 1e-9)

    q, _, _, q3 = frobtor.q_eval(-1.0)
    assert close(q, -1 / 12 + frobtor.li3(math.exp(-1)), 1e-14)
    assert close(q3, 0.5 * (1 + math.exp(-1)) / (1 - math.exp(-1)), 1e-13)

    alg = frobtor.FiberAlgebra("B", 3, k=0.7, k_prime=0.3)
    assert not alg.degenerate
    x = [complex(-0.5, 0.3), complex(-0.9, -1.1), complex(-0.4, 2.0)]
    s = 0.2j
    e = [0, 0, 0, 1]
    u = [0.3, -0.2j, 1.0, 0.5]
    v = [1j, 0.4, -0.1, 0.0]
    assert all(close(a, b, 1e-14) for a, b in zip(alg.product(x, s, e, u), u))
    uv = alg.product(x, s, u, v)
    assert all(close(a, b, 0) for a, b in zip(uv, alg.product(x, s, v, u)))
    w = [0.2, 0.1, -0.3j, 1.0]
    t = alg.third_derivative(x, s, u, v, w)
    assert close(t, alg.metric(uv, w), 1e-9 * max(1.0, abs(t)))
    assert alg.wdvv_residual(x, s) < 1e-8
    assert cmath.isfinite(alg.phi(x, s))

    laur = frobtor.lauricella("1,1,1")
    assert laur["symmetric"] and laur["type_a_ratio"] == "2/3"

    print(f"frobtor {frobtor.__version__}: smoke test ok")


if __name__ == "__main__":
    main()
