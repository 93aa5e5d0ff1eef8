#!/usr/bin/env python3
"""Exact-arithmetic reference values for small lattice, weight and norm examples.

Everything here is computed by literal enumeration (Fractions for the
kernel sums, mpmath at 40 digits for transcendental weight formulas).
Output is pasted into the C++ unit tests.
"""
from fractions import Fraction as F
from itertools import combinations
from math import gcd
from mpmath import mp, mpf, pi, zeta, log, sqrt

mp.dps = 40


def b2(x):
    return x * x - x + F(1, 6)


def kernel_avg(n, zs):
    """(1/n) sum_k prod_j B2({k z_j / n}) for the coordinates in zs."""
    tot = F(0)
    for k in range(n):
        p = F(1)
        for z in zs:
            p *= b2(F((k * z) % n, n))
        tot += p
    return tot / n


def wce2(n, z, weight):
    s = len(z)
    tot = F(0)
    for size in range(1, s + 1):
        for u in combinations(range(s), size):
            tot += weight(u) * kernel_avg(n, [z[j] for j in u])
    return tot


def order(g, n):
    x, m = g % n, 1
    while x != 1:
        x, m = x * g % n, m + 1
    return m


def primitive_root(n):
    for g in range(2, n):
        if order(g, n) == n - 1:
            return g


def main():
    print("primitive roots:", {n: primitive_root(n) for n in (3, 5, 7, 11, 13, 251, 32003)})
    print("phi(12) =", sum(1 for k in range(1, 12) if gcd(k, 12) == 1))

    # n=3, s=1
    print("n=3 s=1 e2 =", wce2(3, [1], lambda u: 1), float(wce2(3, [1], lambda u: 1)))
    # n=5, s=2, z=(1,2), product gamma=(1,1)
    e2 = wce2(5, [1, 2], lambda u: 1)
    print("n=5 z=(1,2) e2 =", e2, float(e2), "wce =", float(sqrt(mpf(e2.numerator) / e2.denominator)))
    K1, K2, K12 = kernel_avg(5, [1]), kernel_avg(5, [2]), kernel_avg(5, [1, 2])
    print("K1 K2 K12 =", K1, K2, K12)
    # exhaustive CBC for n=5 s=2 gamma=(1,1)
    best = min(range(1, 5), key=lambda z: (wce2(5, [1, z], lambda u: 1), z))
    print("cbc n=5 best z2 =", best)
    # G_2(1, z) for each z
    G = {z: (wce2(5, [1, z], lambda u: 1) - wce2(5, [1], lambda u: 1)) for z in range(1, 5)}
    print("G2 =", {z: float(g) for z, g in G.items()})
    # DCBC step, b=(1,1), gamma1 = 1
    e21 = F(1, 150)
    G2 = G[2]
    g2 = sqrt(mpf(e21.numerator) / e21.denominator / (mpf(G2.numerator) / G2.denominator))
    e22 = mpf(e21.numerator) / e21.denominator + g2 * mpf(G2.numerator) / G2.denominator
    M2 = (1 + 1) * (1 + 1 / g2)
    print("dcbc n=5: G2 =", mp.nstr(mpf(G2.numerator) / G2.denominator, 20), "gamma2 =", mp.nstr(g2, 20),
          "e2 =", mp.nstr(e22, 20), "M2 =", mp.nstr(M2, 20), "E2 =", mp.nstr(sqrt(e22 * M2), 20))
    # POD with Gamma=(1,1,2), gamma=(1,1)
    e2pod = K1 + K2 + 2 * K12
    print("pod n=5 Gamma=(1,1,2) e2 =", e2pod, float(e2pod))
    # norm bound b_i=i^-2, gamma_i=i^-2, s=3
    print("M prod =", float((1 + 1) * (1 + F(1, 4)) * (1 + F(1, 9))))
    # lambda weights, lambda=0.6, b=0.5
    lam = mpf("0.6")
    gj = ((2 * pi**2) ** lam * mpf("0.25") / (2 * zeta(2 * lam))) ** (1 / (1 + lam))
    print("gamma_j(0.6, b=0.5) =", mp.nstr(gj, 20))
    # derivative reduction at lambda=1 with gamma_u = 1
    d = (log(2 * pi**2) - 2 * zeta(2, derivative=1) / zeta(2)) / 2
    print("gamma'(1) with gamma_u=1 =", mp.nstr(d, 20))

    # lambda objective E^2(lambda) for a fixed vector, by subset enumeration and mpmath differentiation
    def objective(n, z, b, Bfun, lam):
        s = len(z)
        c = lambda j: (2 * pi**2) ** lam * b[j] ** 2 / (2 * zeta(2 * lam))
        e2 = mpf(0)
        M = mpf(1)
        for size in range(1, s + 1):
            for u in combinations(range(s), size):
                pc = mpf(1)
                for j in u:
                    pc *= c(j)
                g = (Bfun(size) * pc) ** (1 / (1 + lam))
                K = kernel_avg(n, [z[j] for j in u])
                e2 += g * mpf(K.numerator) / K.denominator
                pb = mpf(1)
                for j in u:
                    pb *= b[j] ** 2
                M += Bfun(size) * pb / g
        return e2 * M

    from mpmath import diff, factorial
    for (n, z, b, Bname, Bfun, lam) in [
        (7, [1, 3, 2], [mpf(1), mpf(1) / 4, mpf(1) / 9], "one", lambda l: 1, mpf("0.7")),
        (11, [1, 4, 3, 5], [mpf(1) / 2 ** (i + 1) for i in range(4)], "linear", lambda l: l, mpf("0.65")),
        (13, [1, 5, 3, 2, 6], [mpf(1) / (i + 1) ** 2 for i in range(5)], "factorial", lambda l: factorial(l), mpf("0.9")),
    ]:
        f = lambda x: objective(n, z, b, Bfun, x)
        print(f"objective n={n} z={z} B={Bname} lambda={lam}: E2 =", mp.nstr(f(lam), 20),
              "dE2 =", mp.nstr(diff(f, lam), 20))


if __name__ == "__main__":
    main()
