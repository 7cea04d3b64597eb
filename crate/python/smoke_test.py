#!/usr/bin/env python3
"""End-to-end smoke test for the hodlr_py extension module.

Builds nothing itself; expects `cargo build -p hodlr-py` (or --release) to
have produced libhodlr_py.so. Run as: python3 python/smoke_test.py
"""

import math
import os
import shutil
import sys
import tempfile

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def import_module():
    candidates = [
        os.path.join(REPO_ROOT, "target", profile, name)
        for profile in ("debug", "release")
        for name in ("libhodlr_py.so", "hodlr_py.so", "libhodlr_py.dylib")
    ]
    built = next((p for p in candidates if os.path.exists(p)), None)
    if built is None:
        sys.exit("libhodlr_py.so not found; run `cargo build -p hodlr-py` first")
    stage = tempfile.mkdtemp(prefix="hodlr_py_")
    shutil.copy(built, os.path.join(stage, "hodlr_py.so"))
    sys.path.insert(0, stage)
    import hodlr_py

    return hodlr_py


def inf_norm(v):
    return max(abs(x) for x in v)


def check_solve(hodlr_py):
    a = hodlr_py.HMatrix.tridiagonal(2, 6, 42)
    assert a.dim == 128 and a.level == 6 and a.leaf_size == 2 and a.rank == 1
    assert a.storage == (2 * 1 * 6 + 2) * 128

    f = a.factorize()
    z = [math.sin(0.7 * i) + 0.25 for i in range(a.dim)]
    x = f.solve(z)
    r = a.matvec(x)
    residual = inf_norm([ri - zi for ri, zi in zip(r, z)]) / inf_norm(z)
    assert residual <= 1e-12, f"solve residual {residual}"

    w = [math.cos(0.3 * i) for i in range(a.dim)]
    y = f.solve_adjoint(w)
    d1 = sum(xi * wi for xi, wi in zip(x, w))
    d2 = sum(zi * yi for zi, yi in zip(z, y))
    assert abs(d1 - d2) <= 1e-10 * max(abs(d1), abs(d2)), "adjoint duality"
    print(f"solve: dim 128, residual {residual:.3e}, duality ok")


def check_json_round_trip(hodlr_py):
    a = hodlr_py.HMatrix.random_regular(3, 3, 2, 7)
    text = a.to_json()
    b = hodlr_py.HMatrix.from_json(text)
    assert b.to_json() == text, "round trip must be bit-exact"
    assert (b.dim, b.rank) == (24, 2)
    try:
        hodlr_py.HMatrix.from_json("{}")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed document must raise ValueError")
    print(f"json: {len(text)} bytes round trip exactly")


def check_dense_agreement(hodlr_py):
    a = hodlr_py.HMatrix.random_regular(2, 3, 4, 99)
    rows = a.to_dense()
    x = [((i * 37) % 11 - 5) / 3.0 for i in range(a.dim)]
    direct = [sum(rij * xj for rij, xj in zip(ri, x)) for ri in rows]
    fast = a.matvec(x)
    err = inf_norm([d - f for d, f in zip(direct, fast)]) / inf_norm(direct)
    assert err <= 1e-13, f"matvec disagrees with dense expansion: {err}"
    print(f"dense: matvec agreement {err:.3e}")


def check_ops(hodlr_py):
    f0 = hodlr_py.HMatrix.tridiagonal(2, 0, 5).factorize()
    f1 = hodlr_py.HMatrix.tridiagonal(2, 1, 5).factorize()
    s0, s1 = f0.solve_ops(), f1.solve_ops()
    assert s0["total"] == 6
    assert s1["total"] == 2 * s0["total"] + 12 * 2, "solve count recurrence"
    assert s0["add_sub"] + s0["mul"] + s0["div"] == s0["total"]
    assert f1.setup_ops()["storage"] == (2 * 1 + 2) * 4
    print(f"ops: S_0={s0['total']}, S_1={s1['total']}, storage tallies ok")


def check_singularity(hodlr_py):
    bad = hodlr_py.HMatrix.leaf([[1.0, 1.0], [1.0, 1.0]])
    good = hodlr_py.HMatrix.leaf([[4.0, 1.0], [1.0, 4.0]])
    e_last = [[0.0], [1.0]]
    e_first = [[1.0], [0.0]]
    fixture = hodlr_py.HMatrix.node(bad, good, e_last, e_first, e_last, e_first)
    try:
        fixture.factorize()
    except hodlr_py.HierarchicalSingularity as e:
        assert "'0'" in str(e), f"unexpected path in {e!r}"
    else:
        raise AssertionError("singular leaf must raise HierarchicalSingularity")
    assert issubclass(hodlr_py.HierarchicalSingularity, ArithmeticError)
    print("singularity: raised with subtree path '0'")


def main():
    hodlr_py = import_module()
    check_solve(hodlr_py)
    check_json_round_trip(hodlr_py)
    check_dense_agreement(hodlr_py)
    check_ops(hodlr_py)
    check_singularity(hodlr_py)
    print("smoke test passed")


if __name__ == "__main__":
    main()
