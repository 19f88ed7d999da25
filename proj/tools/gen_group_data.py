#!/usr/bin/env python3
"""Writes data/groups.json: Cayley tables, irreducible unitary representations
and character tables of the small finite groups in the catalog.

Matrix entries are elements of Q(zeta_N) for the group's field order N, stored
as lists of [num, den] coefficients of zeta_N^0, zeta_N^1, ... (unreduced).
"""

import itertools
import json
import sys
from fractions import Fraction

VERSION = 1


class Cyc:
    """Element of Q(zeta_n) as a length-n coefficient vector (no reduction)."""

    def __init__(self, n, coeffs=None):
        self.n = n
        self.c = [Fraction(0)] * n if coeffs is None else [Fraction(x) for x in coeffs]

    @staticmethod
    def zeta(n, k):
        z = Cyc(n)
        z.c[k % n] = Fraction(1)
        return z

    @staticmethod
    def const(n, v):
        z = Cyc(n)
        z.c[0] = Fraction(v)
        return z

    def __add__(self, o):
        return Cyc(self.n, [a + b for a, b in zip(self.c, o.c)])

    def __mul__(self, o):
        out = Cyc(self.n)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    if b:
                        out.c[(i + j) % self.n] += a * b
        return out

    def scale(self, f):
        return Cyc(self.n, [a * f for a in self.c])

    def to_complex(self):
        import cmath
        return sum(float(a) * cmath.exp(2j * cmath.pi * i / self.n) for i, a in enumerate(self.c))

    def dump(self):
        return [[a.numerator, a.denominator] for a in self.c]


def matmul(a, b):
    n = len(a)
    zero = Cyc(a[0][0].n)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            s = zero
            for k in range(n):
                s = s + a[i][k] * b[k][j]
            row.append(s)
        out.append(row)
    return out


def close(a, b):
    return all(abs(x.to_complex() - y.to_complex()) < 1e-12 for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def finish(name, field, elements, names, table, irreps):
    # numeric sanity: homomorphism on the whole table
    order = len(elements)
    for label, mats in irreps:
        for a in range(order):
            for b in range(order):
                assert close(matmul(mats[a], mats[b]), mats[table[a][b]]), (name, label, a, b)
    chars = []
    for label, mats in irreps:
        row = []
        for m in mats:
            s = Cyc(field)
            for i in range(len(m)):
                s = s + m[i][i]
            row.append(s.dump())
        chars.append({"label": label, "values": row})
    return {
        "name": name,
        "field_order": field,
        "elements": elements,
        "names": names,
        "table": table,
        "irreps": [
            {"label": label, "dim": len(mats[0]), "matrices": [[[e.dump() for e in row] for row in m] for m in mats]}
            for label, mats in irreps
        ],
        "characters": chars,
    }


def s3():
    perms = list(itertools.permutations((1, 2, 3)))

    def compose(p, q):  # (pq)(i) = p(q(i))
        return tuple(p[q[i] - 1] for i in range(3))

    def cycle_name(p):
        seen, out = set(), ""
        for s in (1, 2, 3):
            if s in seen or p[s - 1] == s:
                seen.add(s)
                continue
            cyc, i = "(", s
            while i not in seen:
                seen.add(i)
                cyc += str(i)
                i = p[i - 1]
            out += cyc + ")"
        return out or "e"

    table = [[perms.index(compose(p, q)) for q in perms] for p in perms]
    field = 3

    def sign(p):
        inv = sum(1 for i in range(3) for j in range(i + 1, 3) if p[i] > p[j])
        return -1 if inv % 2 else 1

    triv = [[[Cyc.const(field, 1)]] for _ in perms]
    sgn = [[[Cyc.const(field, sign(p))]] for p in perms]

    # permutation matrix P e_i = e_{p(i)} restricted to the Fourier basis
    # f_k(i) = omega^{k i} / sqrt(3), k = 1, 2: entry (j, k) = (1/3) sum_i omega^{-j i + k pinv(i)}
    std = []
    for p in perms:
        pinv = [0, 0, 0]
        for i in range(3):
            pinv[p[i] - 1] = i
        m = []
        for j in (1, 2):
            row = []
            for k in (1, 2):
                s = Cyc(field)
                for i in range(3):
                    s = s + Cyc.zeta(field, -j * i + k * pinv[i])
                row.append(s.scale(Fraction(1, 3)))
            m.append(row)
        std.append(m)
    return finish("S3", field, [[i] for i in range(6)], [cycle_name(p) for p in perms], table,
                  [("triv", triv), ("sgn", sgn), ("std", std)])


def cyclic(m):
    table = [[(a + b) % m for b in range(m)] for a in range(m)]
    irreps = [(str(k), [[[Cyc.zeta(m, k * x)]] for x in range(m)]) for k in range(m)]
    return finish(f"Z/{m}", m, [[x] for x in range(m)], [str(x) for x in range(m)], table, irreps)


def dihedral4():
    n, field = 4, 1
    elements = [(r, f) for r in range(n) for f in (0, 1)]

    def mul(x, y):
        r = x[0] + (y[0] if x[1] == 0 else -y[0])
        return (r % n, (x[1] + y[1]) % 2)

    table = [[elements.index(mul(x, y)) for y in elements] for x in elements]
    one = lambda v: Cyc.const(field, v)
    R = [[one(0), one(-1)], [one(1), one(0)]]
    S = [[one(1), one(0)], [one(0), one(-1)]]
    I = [[one(1), one(0)], [one(0), one(1)]]

    def power(m, k):
        out = I
        for _ in range(k):
            out = matmul(out, m)
        return out

    std = [matmul(power(R, r), S if f else I) for r, f in elements]
    lin = lambda a, b: [[[one(a ** r * b ** f)]] for r, f in elements]
    irreps = [("triv", lin(1, 1)), ("a", lin(1, -1)), ("b", lin(-1, 1)), ("c", lin(-1, -1)), ("std", std)]
    return finish("D4", field, [list(e) for e in elements], [f"({r},{f})" for r, f in elements], table, irreps)


def quaternion():
    field = 4
    z = lambda k: Cyc.zeta(field, k)
    c = lambda v: Cyc.const(field, v)
    one = [[c(1), c(0)], [c(0), c(1)]]
    qi = [[z(1), c(0)], [c(0), z(3)]]
    qj = [[c(0), c(1)], [c(-1), c(0)]]
    qk = matmul(qi, qj)
    neg = lambda m: [[e.scale(-1) for e in row] for row in m]
    # index = 2 * unit + sign, units 1, i, j, k
    std = []
    for u in (one, qi, qj, qk):
        std += [u, neg(u)]
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    table = []
    for a in range(8):
        row = []
        for b in range(8):
            p = matmul(std[a], std[b])
            row.append(next(t for t in range(8) if close(std[t], p)))
        table.append(row)
    # one-dimensional irreps factor through Q8/{+-1}: values on (1, i, j, k)
    def lin(vi, vj):
        vals = [1, vi, vj, vi * vj]
        return [[[c(vals[t // 2])]] for t in range(8)]

    irreps = [("triv", lin(1, 1)), ("ci", lin(1, -1)), ("cj", lin(-1, 1)), ("ck", lin(-1, -1)), ("std", std)]
    return finish("Q8", field, [[t] for t in range(8)], names, table, irreps)


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data/groups.json"
    groups = [s3(), dihedral4(), quaternion()] + [cyclic(m) for m in range(1, 13)]
    with open(out, "w") as f:
        json.dump({"version": VERSION, "groups": groups}, f, separators=(",", ":"))
        f.write("\n")


if __name__ == "__main__":
    main()
