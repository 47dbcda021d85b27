"""Smoke test for the mlfc extension module.

Build and install first, e.g. `pip install maturin && maturin develop -m crates/py/Cargo.toml --release`.
"""

import cmath
import json
import math

import mlfc


def close(a, b, tol):
    return abs(a - b) <= tol * max(abs(b), 1.0)


def main():
    assert close(mlfc.ml_eval(1.0, 1.0, 1.0), math.e, 1e-13)
    assert close(mlfc.ml_eval(2.0, 1.0, -4.0), math.cos(2.0), 1e-12)
    assert close(mlfc.oracle(0.5, 1.0, 2.0 + 1.0j), mlfc.ml_eval(0.5, 1.0, 2.0 + 1.0j, 1e-12), 1e-10)
    assert close(mlfc.asymptotic(1.0, 1.0, -50.0, 6), math.exp(-50.0), 1e-12)

    value, err, evals = mlfc.compute_integral(1.0, 1.0, 100.0, "quadratic:c=0", "0,1")
    assert err < 1e-8 and evals > 0
    # Fresnel-type integral on [0, 1] at lambda = 100
    assert 0.05 < abs(value) < 0.12, value

    exponent, log_power, base = mlfc.theoretical_rate(1.0, 1.0, 2, "T33")
    assert exponent == 0.5 and log_power == 0.0, (exponent, log_power, base)

    lams = [10.0 * 10 ** (3 * i / 7) for i in range(8)]
    slope, _, r2 = mlfc.fit_decay(lams, [3.0 / math.sqrt(x) for x in lams])
    assert close(slope, -0.5, 1e-12) and r2 > 0.999999

    report = json.loads(mlfc.verify_bound("T33", 1.0, 1.0, 2, "quadratic:c=0", "0,1"))
    assert report["pass"], report
    try:
        mlfc.verify_bound("T33", 1.0, 1.0, 1, "quadratic:c=0", "0,1")
    except mlfc.HypothesisViolation:
        pass
    else:
        raise AssertionError("k = 1 with a quadratic phase was accepted")

    x, u = mlfc.kg_solve(2.0, 1.0, 1.0, x=(-5.0, 5.0, 21))
    assert len(x) == len(u) == 21 and all(cmath.isfinite(v) for v in u)
    x, u = mlfc.schrodinger_solve(0.8, 0.3, 1.0, 1.0, x=(-2.0, 2.0, 5))
    assert len(u) == 5

    print("mlfc smoke test passed")


if __name__ == "__main__":
    main()
