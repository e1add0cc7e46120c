#!/usr/bin/env python3
"""Recompute the frozen elementwise activation constants.

For each activation the script locates
  d0 = sup |f'(x)|, e0 = sup |f''(x)|, m0 = sup |f(x) - m1*relu-part|
by a dense grid (step 1e-3) over a bracket followed by golden-section
refinement around the best grid point. Output is the C++ table body used in
include/dnnbounds/activations.hpp.
"""
import mpmath as mp

mp.mp.dps = 40


def logistic(x):
    return 1 / (1 + mp.e ** (-x))


ACTS = {
    "tanh": (lambda x: mp.tanh(x), (-5, 5)),
    "logistic": (lambda x: logistic(x), (-10, 10)),
    "swish": (lambda x: x * logistic(x), (-20, 20)),
}


def sup_abs(g, lo, hi, step=mp.mpf("1e-3")):
    n = int((hi - lo) / step)
    best_x, best = lo, abs(g(mp.mpf(lo)))
    for i in range(n + 1):
        x = lo + i * step
        v = abs(g(x))
        if v > best:
            best_x, best = x, v
    a, b = best_x - step, best_x + step
    phi = (mp.sqrt(5) - 1) / 2
    for _ in range(200):
        c = b - phi * (b - a)
        d = a + phi * (b - a)
        if abs(g(c)) > abs(g(d)):
            b = d
        else:
            a = c
    x = (a + b) / 2
    return max(best, abs(g(x))), x


def main():
    for name, (f, (lo, hi)) in ACTS.items():
        d1 = lambda x: mp.diff(f, x, 1)
        d2 = lambda x: mp.diff(f, x, 2)
        d0, xd = sup_abs(d1, lo, hi)
        e0, xe = sup_abs(d2, lo, hi)
        if name == "swish":
            # deviation from the unit-slope ReLU envelope
            m0, xm = sup_abs(lambda x: f(x) - max(x, 0), lo, hi)
        else:
            m0, xm = sup_abs(f, lo, hi)
            # bounded sigmoids approach their sup only asymptotically
            tail = max(abs(f(mp.mpf(-60))), abs(f(mp.mpf(60))))
            if tail > m0:
                m0, xm = tail, mp.mpf(60)
        print(f"{name}: m0={mp.nstr(m0, 20)} (x={mp.nstr(xm, 8)}) "
              f"d0={mp.nstr(d0, 20)} (x={mp.nstr(xd, 8)}) "
              f"e0={mp.nstr(e0, 20)} (x={mp.nstr(xe, 8)})")


if __name__ == "__main__":
    main()
