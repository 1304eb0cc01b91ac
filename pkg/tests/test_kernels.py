import pytest

from fairdyn import _loops_py, appendix_c_dynamics
from conftest import random_contractive_affine

_loops_c = pytest.importorskip("fairdyn._loops_c")


def test_backend_labels():
    assert _loops_py.BACKEND == "python"
    assert _loops_c.BACKEND == "compiled"


def run_both(args):
    a = _loops_py.ct_loop(*args)
    b = _loops_c.ct_loop(*args)
    return a, b


def test_bit_identical_affine_fast_path(rng):
    for _ in range(15):
        dyn = random_contractive_affine(rng, slope=0.3)
        args = (
            rng.random(), rng.random(), rng.uniform(0.1, 0.9), -1.5, 1.0,
            rng.choice([0, 1, 2, 3]),
            dyn.f0, dyn.f1, dyn.affine,
            0.01, 2000, 7, 1e-10, 0.0,
        )
        a, b = run_both(args)
        assert a == b


def test_bit_identical_python_callback_path(rng):
    for _ in range(10):
        dyn = random_contractive_affine(rng, slope=0.3)
        args = (
            rng.random(), rng.random(), rng.uniform(0.1, 0.9), -1.5, 1.0,
            rng.choice([0, 1, 2, 3]),
            dyn.f0, dyn.f1, None,
            0.01, 2000, 7, 1e-10, 0.0,
        )
        a, b = run_both(args)
        assert a == b


def test_affine_fast_path_matches_generic_path(rng):
    for _ in range(10):
        dyn = random_contractive_affine(rng, slope=0.3)
        base = (
            rng.random(), rng.random(), 0.4, -1.0, 1.0, 1,
            dyn.f0, dyn.f1,
        )
        tail = (0.01, 1500, 11, 1e-10, 0.0)
        fast = _loops_c.ct_loop(*base, dyn.affine, *tail)
        generic = _loops_c.ct_loop(*base, None, *tail)
        assert fast == generic


def test_bit_identical_merge_and_stop_paths():
    dyn = appendix_c_dynamics()
    args = (
        0.9, 0.2, 0.5, -1.0, 1.0, 1,
        dyn.f0, dyn.f1, None,
        0.01, 6000, 11, 1e-10, 1e-12,
    )
    a, b = run_both(args)
    assert a == b
    assert a[2] >= 0  # merged
    assert a[3] >= 0  # stopped early
