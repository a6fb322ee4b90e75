"""Writes levi_civita_gen.hpp: closed-form Christoffel symbols and curvature
operators for the quadratic zoo metrics, derived with sympy."""

import sys

import sympy as sp


def de_sitter(n, R):
    x = sp.symbols(f"x0:{n}", real=True)
    y = sp.Matrix(x[1:])
    s = (y.T * y)[0]
    g = sp.zeros(n, n)
    g[0, 0] = -(1 - s / R**2)
    for a in range(1, n):
        for b in range(1, n):
            g[a, b] = (1 if a == b else 0) + x[a] * x[b] / (R**2 - s)
    return x, g


def conformal_product(n, R, k):
    x = sp.symbols(f"x0:{n}", real=True)
    s = sum(x[i] ** 2 for i in range(1, n))
    psi = (1 - k * s / (4 * R**2)) ** -2
    g = sp.zeros(n, n)
    g[0, 0] = -1
    for i in range(1, n):
        g[i, i] = psi
    return x, g


def levi_civita(x, g):
    n = len(x)
    gi = sp.simplify(g.inv())
    G = [[[0] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                G[i][j][k] = sp.simplify(
                    sum(gi[i, l] * (sp.diff(g[l, j], x[k]) + sp.diff(g[l, k], x[j]) - sp.diff(g[j, k], x[l]))
                        for l in range(n)) / 2)
    return G


def riemann(x, G):
    # R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}
    n = len(x)
    Rm = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    e = sp.diff(G[i][l][j], x[k]) - sp.diff(G[i][k][j], x[l])
                    e += sum(G[i][k][m] * G[m][l][j] - G[i][l][m] * G[m][k][j] for m in range(n))
                    Rm[i, j, k, l] = sp.simplify(e)
    return Rm


def emit(name, x, g, R):
    n = len(x)
    G = levi_civita(x, g)
    Rm = riemann(x, G)
    subs = {x[i]: sp.Symbol(f"x[{i}]") for i in range(n)}
    out = []
    out.append(f"inline void {name}(const double* x, double R, double g[{n}][{n}], double gamma[{n}][{n}][{n}], "
               f"double riem[{n}][{n}][{n}][{n}]) {{")
    exprs, targets = [], []
    for i in range(n):
        for j in range(n):
            exprs.append(g[i, j]); targets.append(f"g[{i}][{j}]")
            for k in range(n):
                exprs.append(G[i][j][k]); targets.append(f"gamma[{i}][{j}][{k}]")
                for l in range(n):
                    exprs.append(Rm[i, j, k, l]); targets.append(f"riem[{i}][{j}][{k}][{l}]")
    exprs = [sp.sympify(e).subs(subs) for e in exprs]
    reps, reduced = sp.cse(exprs, symbols=sp.numbered_symbols("c"))
    out.append("  (void)R;")
    for s, e in reps:
        out.append(f"  const double {s} = {sp.ccode(e)};")
    for t, e in zip(targets, reduced):
        out.append(f"  {t} = {sp.ccode(e)};")
    out.append("}")
    return "\n".join(out)


def main(path):
    R = sp.Symbol("R", positive=True)
    parts = ["// Generated by gen_levi_civita.py; do not edit.", "#pragma once", "#include <cmath>",
             "namespace oracle {"]
    for n in (2, 3):
        x, g = de_sitter(n, R)
        parts.append(emit(f"de_sitter_{n}", x, g, R))
    for n in (2, 3):
        x, g = conformal_product(n, R, 1)
        parts.append(emit(f"product_hyperbolic_{n}", x, g, R))
        x, g = conformal_product(n, R, -1)
        parts.append(emit(f"product_sphere_{n}", x, g, R))
    parts.append("}  // namespace oracle\n")
    with open(path, "w") as f:
        f.write("\n\n".join(parts))


if __name__ == "__main__":
    main(sys.argv[1])
