#!/usr/bin/env python3
"""Generate rank-1 lattice generating vectors by component-by-component search.

The criterion is the worst-case error in the weighted Korobov space with
smoothness alpha = 2 (Bernoulli polynomial B2 kernel) and product weights
1 / j^2, which suits the decaying importance of later variables after the
conditioning order is fixed. Output is a C++ include file consumed by
src/lattice_table.cpp.

Usage: gen_lattice_table.py OUT.inc [MAX_DIM]
"""

import sys

import numpy as np

PRIMES = [251, 503, 1009, 2003, 5003, 10007]


def cbc(n, max_dim):
    k = np.arange(n, dtype=np.int64)
    x = k / n
    omega = 2.0 * np.pi**2 * (x * x - x + 1.0 / 6.0)
    candidates = np.arange(1, (n - 1) // 2 + 1, dtype=np.int64)
    prod = np.ones(n)
    z = []
    for j in range(1, max_dim + 1):
        weight = 1.0 / (j * j)
        best_err, best_z = None, None
        chunk = 256
        for start in range(0, len(candidates), chunk):
            cand = candidates[start:start + chunk]
            idx = np.outer(cand, k) % n
            err = ((1.0 + weight * omega[idx]) * prod[None, :]).sum(axis=1)
            i = int(np.argmin(err))
            if best_err is None or err[i] < best_err:
                best_err, best_z = err[i], int(cand[i])
        z.append(best_z)
        prod *= 1.0 + weight * omega[(best_z * k) % n]
    return z


def main():
    out = sys.argv[1]
    max_dim = int(sys.argv[2]) if len(sys.argv) > 2 else 384
    with open(out, "w") as fh:
        fh.write("// Generated by tools/gen_lattice_table.py; do not edit.\n")
        fh.write(f"constexpr int kTableMaxDim = {max_dim};\n")
        fh.write(f"constexpr int kTableSizes[] = {{{', '.join(map(str, PRIMES))}}};\n")
        fh.write(f"constexpr int kTableVectors[][{max_dim}] = {{\n")
        for n in PRIMES:
            z = cbc(n, max_dim)
            body = ", ".join(map(str, z))
            fh.write(f"    {{{body}}},\n")
            print(f"n={n} done", file=sys.stderr, flush=True)
        fh.write("};\n")


if __name__ == "__main__":
    main()
