"""Smoke test for the `hardy_node` extension module.

Build and run from the repository root:

    cargo build --release -p hardy-node-py --features extension-module
    cp target/release/libhardy_node.so python/hardy_node.so
    python3 python/smoke_test.py
"""

import json
import math
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

import hardy_node as hn  # noqa: E402


def check_loops():
    f = hn.Loop.scalar(4, [(-1, 0.5), (0, 2.0), (2, 1j)])
    assert f.m == 1 and f.n_max == 4
    plus = f.hardy_project("plus")
    assert plus.coeff(2) == [1j] and plus.coeff(-1) == [0j]
    assert abs(f.sobolev_norm(0.0) - math.sqrt(0.25 + 4.0 + 1.0)) < 1e-14
    assert hn.Loop.scalar(3, [(2, 1.0)]).winding_number(1e-9) == 2
    again = hn.Loop.from_json(f.to_json())
    assert again.coeff(0) == f.coeff(0)


def check_node():
    z = 0.3 + 0.4j
    xi_plus = hn.Loop.scalar(3, [(1, 1.0), (3, -0.5)])
    eta_plus = hn.Loop.scalar(3, [(2, 0.25j)])
    xi, eta = hn.node_chart(z, xi_plus, eta_plus, [0.7])
    assert hn.membership_residual(z, xi, eta, 1.5) < 1e-14
    assert abs(xi.coeff(-2)[0] - z**2 * 0.25j) < 1e-15
    xp, ep, lam = hn.node_chart_inverse(z, xi, eta, 1.5, 1e-12)
    assert xp.coeff(3) == [-0.5] and ep.coeff(2) == [0.25j] and lam == [0.7]
    contracted = hn.transfer(z, xi_plus)
    assert contracted.sobolev_norm(1.0) <= abs(z) * xi_plus.sobolev_norm(1.0)
    extends, _ = hn.disk_extension_test(xi_plus, 1.5, 1e-10)
    assert extends


def check_triples():
    t = hn.SubspaceTriple.coordinate(3, [0, 1], [1, 2])
    assert t.index() == (1, 0, 1)
    for m in (1, 2, 3):
        assert hn.hardy_split_triple(m, 32).index() == (m, 0, m)
    for d in range(11):
        assert hn.hardy_triple_for_line_bundle(2 * d, 64).index()[2] == 2 * d + 1
    t = hn.SubspaceTriple(2, [[1.0], [0.0]], [[1.0], [1e-3]])
    assert t.index() == (0, 0, 0)
    try:
        hn.SubspaceTriple(2, [[1.0]], [[1.0], [0.0]])
    except ValueError:
        pass
    else:
        raise AssertionError("shape mismatch accepted")


def check_formulas():
    assert hn.moduli_dimension(0, 0, 2, 3) == 2
    assert hn.moduli_dimension(0, 0, 2, 6) == 5
    assert hn.moduli_dimension(3, 0, 0, 0) == 6
    assert hn.riemann_roch_index(1, 4, 0) == 5
    assert hn.riemann_roch_index(1, 4, 0, "real") == 10
    assert hn.teichmuller_dim(2, 0) == 3
    x = hn.Loop.scalar(1, [(1, 1.0)])
    assert abs(hn.annulus_energy(x, 0.2, 0.7) - math.pi * (0.49 - 0.04)) < 1e-14


def check_scenarios():
    report = hn.run_scenario("moduli-dim", json.dumps({"rows": [{"g": 0, "n": 0, "m": 2, "c1d": 6, "expected": 5}]}))
    lines = [json.loads(line) for line in report.splitlines()]
    assert lines[-1]["summary"] and lines[-1]["status"] == "pass"
    try:
        hn.run_scenario("index", "{not json")
    except ValueError as e:
        assert "line 1" in str(e)
    else:
        raise AssertionError("malformed scenario accepted")


if __name__ == "__main__":
    for check in (check_loops, check_node, check_triples, check_formulas, check_scenarios):
        check()
        print(f"ok {check.__name__}")
    print("python smoke test passed")
