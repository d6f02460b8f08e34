"""Smoke test for the maxmin_py extension.

Build it with `cargo build --release -p maxmin-py --features extension-module`
and copy target/release/libmaxmin_py.so next to this file as maxmin_py.so.
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import maxmin_py as mm  # noqa: E402


def main():
    square = [("0", "0"), ("1", "0"), ("1", "1"), ("0", "1")]
    opt, edges = mm.maxmin_triangulation(square)
    assert opt == "1/1", opt
    assert len(edges) == 5
    hexagon = [(str(i), str(i * i)) for i in range(6)]
    assert mm.count_triangulations(hexagon) == 14

    fig = mm.Formula.figure()
    assert fig.num_vars == 4 and len(fig.clauses) == 3
    cds, cert = fig.compile()
    assert (cds.num_stabbers, cds.num_targets) == (27, 21)
    cover = cds.solve_structured(cert)
    assert cover is not None and cds.verify(cover)
    assert fig.eval(cert.decode(cover))
    svg = cds.render_svg(cert)
    assert svg.startswith("<?xml") and svg.count("<line ") == 27

    again = mm.CdsInstance.from_json(cds.to_json())
    assert again.to_json() == cds.to_json()

    f = mm.Formula.from_dimacs("p cnf 2 1\n1 -2 0\n")
    inst, _ = f.compile()
    pts = inst.to_points(gap="n^2")
    assert pts.invariant_violations() == []
    assert len(pts) == len(pts.points)

    unsat = mm.Formula.from_dimacs("p cnf 1 2\n1 0\n-1 0\n")
    assert unsat.sat_bruteforce() is None
    report = json.loads(unsat.check("unsat"))
    assert report["consistent"] and not report["sat"] and not report["cds_feasible"]

    reports = [json.loads(r) for r in mm.check_seeds(20)]
    assert all(r["consistent"] for r in reports)

    try:
        mm.Formula.from_dimacs("p cnf 1 1\n1 x 0\n")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed DIMACS accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
