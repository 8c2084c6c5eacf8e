"""Smoke test for the pydegensl extension.

Build and run from the repository root:

    cargo build -p degensl-py --features extension-module --release
    cp target/release/libpydegensl.so python/pydegensl.so
    python3 python/smoke_test.py
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pydegensl as d  # noqa: E402


def main():
    zero = d.Potential.builtin("zero", 513)
    assert zero.n_points == 513 and zero.max_abs() == 0.0

    # free Dirichlet zeros are the integers
    zeros = d.find_zeros(zero, (0.5, 4.5, -1.0, 1.0), det="dirichlet")
    assert [round(z[0].real, 9) for z in zeros] == [1.0, 2.0, 3.0, 4.0], zeros

    # symmetric potentials have an identically vanishing determinant
    cos2x = d.Potential.builtin("cos2x", 513)
    assert abs(d.char_det(cos2x, 1.3 + 0.2j)) < 1e-10

    lin = d.Potential.builtin("linear", 513)
    c, cp, s, sp = d.endpoints(lin, 2.0 + 0.5j)
    assert abs(c * sp - cp * s - 1) < 1e-8

    g = d.green_function(lin, 0.5 + 0.5j, stride=16)
    assert len(g) == 33 and len(g[0]) == 33
    assert abs(g[0][5] - g[-1][5]) < 1e-6 * max(abs(v) for row in g for v in row)

    p = d.projections(lin, (-0.3, 3.3, -1.3, 1.7), count=2)
    for entry in p:
        tr = complex(*entry["trace"])
        # 65 kernel nodes at this grid; the trace carries the Simpson error
        assert abs(tr - entry["multiplicity"]) < 1e-4, entry
        assert entry["norm"] >= 1.0 - 1e-9

    q_hat, report = d.reconstruct([0.01], grid_points=257, truncation_m=16)
    assert q_hat.n_points == 257
    assert report["max_residual"] < 1e-1, report["max_residual"]
    assert report["min_re_w"] > 0

    verdict = d.completeness(lin)["verdict"]
    assert verdict == "likely-complete", verdict

    try:
        d.Potential.builtin("nope", 33)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown builtin accepted")

    try:
        d.green_function(cos2x, 0.5 + 0.5j)
    except d.NumericalError as e:
        assert "degenerate" in str(e)
    else:
        raise AssertionError("degenerate determinant accepted")

    print("pydegensl smoke test passed")


if __name__ == "__main__":
    main()
