"""Smoke test for the kneadlab extension module.

Build it first, e.g. `maturin develop -m crates/py/Cargo.toml`, or copy
target/release/libkneadlab.so next to this file as kneadlab.so.
"""

from fractions import Fraction

import kneadlab


def main():
    fib = kneadlab.KneadingMap.builtin("fibonacci")
    assert fib.cutting_times(6) == [1, 2, 3, 5, 8, 13, 21]
    assert fib.admissibility(100) == "admissible"

    x = kneadlab.OdometerPoint("101", fib)
    y = x.successor()
    assert y.word == "0001" and y.value == 5
    assert y.predecessor() == x
    big = kneadlab.OdometerPoint.expand(10**30, fib)
    assert big.value == 10**30

    cantor = kneadlab.KneadingMap.builtin("cantor")
    det, one_minus_alpha, size = kneadlab.det_a(cantor, 1)
    assert one_minus_alpha == Fraction(504, 511) and size == 2
    assert det == -one_minus_alpha
    assert len(kneadlab.extreme_threads(cantor, 4)) == 5
    assert kneadlab.intertwine_holds(cantor, 2)

    verdict, delta = kneadlab.separation_certificate(kneadlab.KneadingMap.builtin("finite:2"), 3, 3)
    assert verdict == "separated" and delta > 0

    m = kneadlab.find_parameter("logistic", fib, 10)
    assert m.kneading(10) == [max(k - 2, 0) for k in range(11)]
    avg, trace = kneadlab.UnimodalMap("logistic", "4").lyapunov(10_000, "0.1234567")
    assert abs(avg - 0.6931471805599453) < 0.02 and trace[-1][0] == 10_000

    try:
        kneadlab.UnimodalMap("logistic", "3").kneading(5)
    except kneadlab.KneadingError as e:
        assert str(e).startswith("domain")
    else:
        raise AssertionError("expected a domain error")
    print("smoke test ok")


if __name__ == "__main__":
    main()
