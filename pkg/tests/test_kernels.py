import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jointruin import kernels
from jointruin.claims import Exponential, RegVaryingClaim
from jointruin.kernels import _fallback
from jointruin.simulate import generate_paths

compiled = kernels.backends().get("compiled")
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def _batch(seed, m=400, heavy=False):
    claim = RegVaryingClaim(1.5) if heavy else Exponential(1.0)
    return generate_paths(1.0, claim, 15.0, m, np.random.default_rng(seed))


def test_backend_selected():
    assert kernels.BACKEND in ("compiled", "python")
    assert "python" in kernels.backends()


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), x1=st.floats(-1, 10), gap=st.floats(0, 30), heavy=st.booleans())
def test_scan_joint_backends_agree(seed, x1, gap, heavy):
    b = _batch(seed, heavy=heavy)
    args = (b.theta, b.sigma, b.counts, x1, x1 + gap, 80.0, 40.0, 0.05)
    np.testing.assert_array_equal(compiled.scan_joint(*args), _fallback.scan_joint(*args))


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), u1=st.floats(-1, 5), u2=st.floats(-1, 15))
def test_scan_compounded_backends_agree(seed, u1, u2):
    b = _batch(seed)
    args = (b.theta, b.sigma, b.counts, u1, u2, 2.0, 1.0, 0.5, 0.5, 0.05)
    np.testing.assert_array_equal(compiled.scan_joint_compounded(*args), _fallback.scan_joint_compounded(*args))


@needs_compiled
@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), levels=st.lists(st.floats(-2, 30), min_size=1, max_size=12))
def test_first_passage_backends_agree(seed, levels):
    b = _batch(seed)
    args = (b.theta, b.sigma, b.counts, np.array(levels), 40.0, 0.05)
    np.testing.assert_array_equal(compiled.first_passage_levels(*args), _fallback.first_passage_levels(*args))


@pytest.mark.parametrize("impl", list(kernels.backends()))
def test_first_passage_matches_joint_scan_column(impl):
    mod = kernels.backends()[impl]
    b = _batch(7)
    levels = np.array([0.0, 1.5, 4.0, 9.0])
    fp = mod.first_passage_levels(b.theta, b.sigma, b.counts, levels, 40.0, 0.05)
    for j, x in enumerate(levels):
        # line 2 of a joint scan started at (x, x) is the univariate level-x problem
        joint = mod.scan_joint(b.theta, b.sigma, b.counts, x, x, 80.0, 40.0, 0.05)
        np.testing.assert_array_equal(fp[:, j], joint[:, 1])


@pytest.mark.parametrize("impl", list(kernels.backends()))
def test_empty_paths(impl):
    mod = kernels.backends()[impl]
    theta = np.zeros((3, 0))
    counts = np.zeros(3, dtype=np.int64)
    out = mod.scan_joint(theta, theta.copy(), counts, 1.0, 2.0, 80.0, 40.0, 0.05)
    assert np.all(out == kernels.NO_RUIN)
    out = mod.scan_joint(theta, theta.copy(), counts, -1.0, 2.0, 80.0, 40.0, 0.05)
    assert list(out[0]) == [0, kernels.NO_RUIN, 0, kernels.NO_RUIN]
