#!/usr/bin/env python3
# Project molkit - Copyright 2026 molkit developers.
# SPDX-License-Identifier: Apache-2.0
"""Feasibility solver for the LP files this toolkit emits.

Parses the documented CPLEX-LP subset (Minimize / Subject To / Bounds /
Generals / Binaries / End) and hands the MILP to HiGHS through
scipy.optimize.milp. Writes "name value" lines, prefixed by a status line,
so the output can be read back with `molkit milp decode`.

Usage: lp_solve.py MODEL.lp OUT.sol [TIME_LIMIT_SECONDS]
"""

import sys

import numpy as np
from scipy import sparse
from scipy.optimize import LinearConstraint, Bounds, milp


def tokenize_expr(tokens):
    """[('+', coef, var), ...] from e.g. ['2', 'x', '+', '3', 'y']"""
    terms = []
    sign = 1.0
    i = 0
    while i < len(tokens):
        t = tokens[i]
        if t == "+":
            sign = 1.0
            i += 1
            continue
        if t == "-":
            sign = -1.0
            i += 1
            continue
        try:
            coef = float(t)
            var = tokens[i + 1]
            i += 2
        except ValueError:
            coef = 1.0
            var = t
            i += 1
        terms.append((sign * coef, var))
        sign = 1.0
    return terms


def parse_lp(path):
    section = None
    constraints = []   # (name, terms, sense, rhs)
    bounds = {}        # var -> [lb, ub]
    integers = set()
    order = []
    seen = set()

    def touch(var):
        if var not in seen:
            seen.add(var)
            order.append(var)

    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("\\"):
                continue
            low = line.lower()
            if low in ("minimize", "maximize"):
                section = "obj"
                continue
            if low in ("subject to", "st", "s.t."):
                section = "con"
                continue
            if low == "bounds":
                section = "bnd"
                continue
            if low in ("generals", "general", "integers"):
                section = "gen"
                continue
            if low in ("binaries", "binary"):
                section = "bin"
                continue
            if low == "end":
                break

            if section == "obj":
                continue  # constant-zero feasibility objective
            if section == "con":
                name, expr = line.split(":", 1)
                toks = expr.split()
                sense_idx = next(i for i, t in enumerate(toks)
                                 if t in ("<=", ">=", "=", "<", ">"))
                sense = toks[sense_idx].rstrip("=") or "="
                if toks[sense_idx] == "=":
                    sense = "="
                rhs = float(toks[sense_idx + 1])
                terms = tokenize_expr(toks[:sense_idx])
                for _, var in terms:
                    touch(var)
                constraints.append((name.strip(), terms, sense, rhs))
            elif section == "bnd":
                toks = line.split()
                if len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
                    var = toks[2]
                    touch(var)
                    bounds[var] = [float(toks[0]), float(toks[4])]
                elif len(toks) == 3 and toks[1] == "=":
                    var = toks[0]
                    touch(var)
                    bounds[var] = [float(toks[2])] * 2
                elif len(toks) == 2 and toks[1].lower() == "free":
                    touch(toks[0])
                    bounds[toks[0]] = [-np.inf, np.inf]
                else:
                    raise ValueError("unsupported bounds line: " + line)
            elif section == "gen":
                touch(line)
                integers.add(line)
            elif section == "bin":
                touch(line)
                integers.add(line)
    return order, constraints, bounds, integers


def main():
    if len(sys.argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    lp_path, sol_path = sys.argv[1], sys.argv[2]
    time_limit = float(sys.argv[3]) if len(sys.argv) > 3 else 300.0

    order, constraints, var_bounds, integers = parse_lp(lp_path)
    index = {v: i for i, v in enumerate(order)}
    n = len(order)

    rows, cols, vals = [], [], []
    lo, hi = [], []
    for r, (_, terms, sense, rhs) in enumerate(constraints):
        for coef, var in terms:
            rows.append(r)
            cols.append(index[var])
            vals.append(coef)
        if sense == "<":
            lo.append(-np.inf)
            hi.append(rhs)
        elif sense == ">":
            lo.append(rhs)
            hi.append(np.inf)
        else:
            lo.append(rhs)
            hi.append(rhs)

    a = sparse.csr_matrix((vals, (rows, cols)), shape=(len(constraints), n))
    lb = np.array([var_bounds.get(v, [0.0, np.inf])[0] for v in order])
    ub = np.array([var_bounds.get(v, [0.0, np.inf])[1] for v in order])
    integrality = np.array([1 if v in integers else 0 for v in order])

    res = milp(c=np.zeros(n),
               constraints=LinearConstraint(a, lo, hi),
               bounds=Bounds(lb, ub),
               integrality=integrality,
               options={"time_limit": time_limit, "presolve": True})
    if res.status == 2:
        # HiGHS presolve occasionally misreports tight feasibility models;
        # only trust an infeasibility verdict confirmed without presolve
        res = milp(c=np.zeros(n),
                   constraints=LinearConstraint(a, lo, hi),
                   bounds=Bounds(lb, ub),
                   integrality=integrality,
                   options={"time_limit": time_limit, "presolve": False})

    if res.status == 2:
        with open(sol_path, "w") as out:
            out.write("Infeasible - no assignment satisfies the model\n")
        return 0
    if res.status != 0 or res.x is None:
        print("solver stopped without a verdict: %s" % res.message,
              file=sys.stderr)
        return 3

    with open(sol_path, "w") as out:
        out.write("Optimal - objective value 0\n")
        for v, x in zip(order, res.x):
            if v in integers:
                r = round(x)
                if abs(x - r) < 1e-5:
                    x = float(r)
            out.write("%s %.17g\n" % (v, x))
    return 0


if __name__ == "__main__":
    sys.exit(main())
