#!/usr/bin/env python3
"""Re-solve a dumped conic program with cvxpy and compare against the stored solution.

usage: crosscheck_dump.py program.json [--solver CLARABEL]

The dump lists variables, an affine objective and constraint blocks. Every affine row is
{"terms": [[index, coef], ...], "const": c}. Block kinds:
  eq   row == 0
  ge   row >= 0
  soc  rows[0] >= ||rows[1:]||
  psd  lower triangle, column-major, of a symmetric matrix that must be PSD
"""
import argparse
import json
import sys

import cvxpy as cp
import numpy as np
import scipy.sparse as sp


def affine(rows, n):
    data, ri, ci, const = [], [], [], np.zeros(len(rows))
    for r, e in enumerate(rows):
        for j, a in e["terms"]:
            ri.append(r)
            ci.append(j)
            data.append(a)
        const[r] = e["const"]
    return sp.csr_matrix((data, (ri, ci)), shape=(len(rows), n)), const


def build(dump):
    n = dump["num_vars"]
    x = cp.Variable(n)
    cons = []
    for cb in dump["constraints"]:
        A, c = affine(cb["rows"], n)
        e = A @ x + c
        kind = cb["kind"]
        if kind == "eq":
            cons.append(e == 0)
        elif kind == "ge":
            cons.append(e >= 0)
        elif kind == "soc":
            cons.append(cp.SOC(e[0], e[1:]))
        elif kind == "psd":
            d = cb["order"]
            idx = {}
            k = 0
            for j in range(d):
                for i in range(j, d):
                    idx[(i, j)] = k
                    k += 1
            # full column-major d*d vector as a selection of the lower-triangle entries
            sel = sp.csr_matrix(
                (np.ones(d * d), ([i + j * d for j in range(d) for i in range(d)],
                                  [idx[(max(i, j), min(i, j))] for j in range(d) for i in range(d)])),
                shape=(d * d, k))
            M = cp.reshape(sel @ e, (d, d), order="F")
            cons.append((M + M.T) / 2 >> 0)
        else:
            raise ValueError(f"unknown block kind {kind}")
    A, c = affine([dump["objective"]], n)
    obj = (A @ x)[0] + c[0]
    return cp.Problem(cp.Minimize(obj), cons), x


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("dump")
    ap.add_argument("--solver", default="CLARABEL")
    ap.add_argument("--rtol", type=float, default=1e-5, help="allowed relative objective difference")
    args = ap.parse_args()
    with open(args.dump) as f:
        dump = json.load(f)
    prob, x = build(dump)
    prob.solve(solver=args.solver)
    print(f"cvxpy status {prob.status} objective {prob.value:.10g}")
    if "x" not in dump:
        return 0
    xs = np.asarray(dump["x"])
    A, c = affine([dump["objective"]], dump["num_vars"])
    ours = float((A @ xs)[0] + c[0])
    rel = abs(ours - prob.value) / max(1.0, abs(prob.value))
    print(f"stored objective {ours:.10g} relative difference {rel:.3e}")
    return 0 if rel <= args.rtol else 1


if __name__ == "__main__":
    sys.exit(main())
