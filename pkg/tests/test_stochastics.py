import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ubr.errors import ParameterError
from ubr.stochastics import (
    GENERATOR_NAME,
    IRDivergentSpec,
    SeedTree,
    ir_divergent_inverse_cdf,
    sample_ir_divergent,
    uniform,
)


def test_degenerate_range_returns_bound_without_drawing():
    rng = SeedTree(3).generator()
    assert uniform(0.0, 0.0, rng) == 0.0
    # no draw consumed: the next value equals a fresh stream's first value
    assert rng.random() == SeedTree(3).generator().random()


def test_empty_range_rejected():
    with pytest.raises(ParameterError):
        uniform(1.0, -1.0, SeedTree(0).generator())


def test_uniform_mean_and_ks():
    rng = SeedTree(11).child("detune").generator()
    x = np.array([uniform(-3.0, 3.0, rng) for _ in range(100_000)])
    assert abs(x.mean()) < 0.05
    assert x.min() >= -3.0 and x.max() <= 3.0
    assert stats.kstest(x, stats.uniform(loc=-3, scale=6).cdf).pvalue > 0.01


def test_phase_draws_with_different_indices_differ():
    root = SeedTree(5)
    a = uniform(-np.pi, np.pi, root.child("source", 0).generator())
    b = uniform(-np.pi, np.pi, root.child("source", 1).generator())
    assert a != b


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), tag=st.text(min_size=1, max_size=8), index=st.integers(0, 10_000))
def test_same_path_same_stream(seed, tag, index):
    a = SeedTree(seed).child(tag, index).generator().random(8)
    b = SeedTree(seed).child(tag, index).generator().random(8)
    np.testing.assert_array_equal(a, b)


def test_sibling_streams_uncorrelated():
    root = SeedTree(0)
    a = root.child("source", 0).generator().random(100_000)
    b = root.child("source", 1).generator().random(100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_paths_are_order_sensitive():
    a = SeedTree(1).child("a", 0).child("b", 0).generator().random()
    b = SeedTree(1).child("b", 0).child("a", 0).generator().random()
    assert a != b


def test_describe_records_generator():
    d = SeedTree(9).child("rep", 2).describe()
    assert d == {"master_seed": 9, "path": [["rep", 2]], "generator": GENERATOR_NAME}


def test_inverse_cdf_at_zero():
    assert ir_divergent_inverse_cdf(0.0, 1e-5) == 0.0


def test_uniform_upper_maps_to_kappa_max():
    spec = IRDivergentSpec(1e-5, 12400.0)
    assert spec.uniform_upper == pytest.approx(np.log(1 + 12400 / 1e-5))
    assert spec.uniform_upper == pytest.approx(20.94, abs=0.005)
    assert ir_divergent_inverse_cdf(spec.uniform_upper, spec.epsilon) == pytest.approx(12400.0, rel=1e-12)


@pytest.mark.parametrize("eps,kmax", [(0.0, 1.0), (-1.0, 1.0), (1.0, 1.0), (1.0, 0.5), (1e-5, np.inf)])
def test_invalid_ir_spec(eps, kmax):
    with pytest.raises(ParameterError):
        IRDivergentSpec(eps, kmax)


@pytest.fixture(scope="module")
def ir_draws():
    spec = IRDivergentSpec(1e-5, 12400.0)
    return spec, sample_ir_divergent(spec, SeedTree(0).child("ir-test").generator(), 1_000_000)


def test_ir_bounds_and_sign(ir_draws):
    spec, k = ir_draws
    assert np.all(np.abs(k) <= spec.kappa_max)
    # fair coin: within 4 sigma of one half
    assert abs(np.mean(k > 0) - 0.5) < 4 * 0.5 / np.sqrt(k.size)


def test_ir_density_per_decade(ir_draws):
    spec, k = ir_draws
    mag = np.abs(k)
    edges = 10.0 ** np.arange(-4, 4)
    counts, _ = np.histogram(mag, edges)
    # integral of 1/(k+eps) over each decade, normalized over [0, kmax]
    expected = k.size * np.diff(np.log(edges + spec.epsilon)) / spec.uniform_upper
    np.testing.assert_allclose(counts, expected, rtol=0.05)


def test_ir_cdf_within_binomial_error(ir_draws):
    spec, k = ir_draws
    mag = np.sort(np.abs(k))
    for probe in (1e-6, 1e-4, 1e-2, 1.0, 100.0, 5000.0):
        p = float(spec.magnitude_cdf(probe))
        emp = np.searchsorted(mag, probe, side="right") / mag.size
        assert abs(emp - p) < 3 * np.sqrt(p * (1 - p) / mag.size)


def test_one_sided_when_not_symmetric():
    spec = IRDivergentSpec(1e-3, 10.0, symmetric=False)
    k = sample_ir_divergent(spec, SeedTree(2).generator(), 1000)
    assert np.all(k >= 0)
    assert isinstance(sample_ir_divergent(spec, SeedTree(2).generator()), float)
