import math
import os

import pytest

import hotype


def test_grid_space_basics():
    s = hotype.grid_space(1, 1.0, 101)
    assert len(s) == 101
    assert s.total_measure == pytest.approx(2.0)
    assert s.kind == hotype.SpaceKind.Euclidean
    assert s.id == hotype.grid_space(1, 1.0, 101).id


def test_budget_and_errors_are_python_exceptions():
    opts = hotype.BuildOptions()
    opts.point_budget = 100
    with pytest.raises(hotype.BudgetExceeded):
        hotype.grid_space(2, 1.0, 20, opts)
    assert issubclass(hotype.SchemaError, hotype.Error)
    with pytest.raises(hotype.SchemaError):
        hotype.resolve_config("HOTYPE-CONFIG v1\n[run]\nsuite = nope\n")


def test_atom_is_certified():
    s = hotype.grid_space(1, 1.0, 401)
    spec = hotype.moment_spec(0.5, 1.0)
    assert spec.k == 1
    a = hotype.make_atom(s, hotype.ball(s, 200, 0.3), spec, 5)
    assert hotype.verify_atom(s, a).passed()
    x = hotype.function_from(s, lambda p: complex(p[0], 0))
    assert abs(hotype.pairing(s, x, a)) < 1e-10


def test_hilbert_commutator_with_constant_vanishes():
    s = hotype.grid_space(1, 1.0, 201)
    h = hotype.kernel("hilbert", s)
    g = hotype.function_from(s, lambda p: complex(math.sin(3 * p[0])))
    one = hotype.function_from(s, lambda p: 1.0)
    c = hotype.commutator_apply(s, h, one, g)
    assert c.sup_norm() < 1e-10


def test_bmo_of_constant_is_zero():
    s = hotype.grid_space(1, 1.0, 201)
    one = hotype.function_from(s, lambda p: 2.0)
    assert hotype.bmo_norm(s, one).value < 1e-14


def test_run_config_is_deterministic():
    text = (
        "HOTYPE-CONFIG v1\n[run]\nsuite = duality\n[space]\npoints = 401\n"
        "[params]\nnum_atoms = 40\nfunctions = smooth\n"
    )
    a = hotype.run_config(text)
    b = hotype.run_config(text)
    assert a.report_text() == b.report_text()
    assert a.passed()
    assert hotype.parse_report(a.report_text()).config_hash == a.config_hash


def test_shipped_kernel_config_passes():
    cfg = os.path.join(os.environ.get("HOTYPE_CONFIG_DIR", "configs"), "kernel-cert-grid.cfg")
    r = hotype.run_config_file(cfg)
    assert r.passed()
    assert r.constant("hilbert.C_size") == pytest.approx(2 / math.pi, abs=1e-10)
