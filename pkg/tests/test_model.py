"""Signal models, supports, sorted prefixes, and instance round-trips."""
import json
import math

import numpy as np
import pytest
from scipy import stats

from phaselim.model import (DiscreteFlat, DiscreteGeneral, GaussianIID,
                            ProblemInstance, SortedSignal, SupportSet,
                            floor_count, observe, partition_powers,
                            sample_signal_vector, sample_support)
from phaselim.densities import GaussianNoise
from phaselim.rng import sample_circular_gaussian, substream


def test_support_set_validation():
    s = SupportSet(indices=(3, 1, 2), universe=5)
    assert s.indices == (1, 2, 3)
    with pytest.raises(ValueError):
        SupportSet(indices=(1, 1, 2), universe=5)
    with pytest.raises(ValueError):
        SupportSet(indices=(0, 5), universe=5)
    with pytest.raises(ValueError):
        SupportSet(indices=(-1,), universe=5)


def test_missed_by_counts():
    a = SupportSet(indices=(0, 1, 2), universe=6)
    b = SupportSet(indices=(2, 3, 4), universe=6)
    assert a.missed_by(b) == 2
    assert b.missed_by(a) == 2
    assert a.missed_by(a) == 0


def test_floor_count_table():
    assert floor_count(0.0, 10) == 0
    assert floor_count(1.0, 10) == 10
    assert floor_count(0.29, 10) == 2
    # 0.3 * 10 lands just below 3 in binary floats; must still count 3
    assert floor_count(0.3, 10) == 3
    assert floor_count(0.1, 3) == 0
    assert floor_count(0.5, 2) == 1


def test_floor_count_range_random():
    rng = np.random.default_rng(7)
    for _ in range(300):
        a = float(rng.uniform(0, 1))
        k = int(rng.integers(1, 40))
        m = floor_count(a, k)
        assert 0 <= m <= k
        assert m <= a * k + 1e-6


def test_signal_total_power():
    assert DiscreteFlat(c_beta=2.0, k=4).total_power == 2.0
    vals = (1 + 1j, 2.0, 0.5j)
    gen = DiscreteGeneral(values=vals)
    assert gen.k == 3
    assert gen.total_power == pytest.approx(2 + 4 + 0.25)
    g = GaussianIID(c_beta=3.0, k=6)
    assert g.sigma_beta_sq == pytest.approx(0.5)
    assert g.total_power == 3.0


def test_signal_validation():
    with pytest.raises(ValueError):
        DiscreteFlat(c_beta=0.0, k=3)
    with pytest.raises(ValueError):
        GaussianIID(c_beta=1.0, k=0)
    with pytest.raises(ValueError):
        DiscreteGeneral(values=())


def test_flat_vector_deterministic():
    sig = DiscreteFlat(c_beta=1.0, k=4)
    b1 = sample_signal_vector(sig, substream(0, 1))
    b2 = sample_signal_vector(sig, substream(99, 5))
    assert np.array_equal(b1, b2)
    assert np.allclose(np.abs(b1) ** 2, 0.25)


def test_general_vector_is_permutation():
    vals = (1.0, 2.0, 3.0 + 1j, 0.25j)
    sig = DiscreteGeneral(values=vals)
    b = sample_signal_vector(sig, substream(3, 0))
    assert sorted(np.abs(b) ** 2) == pytest.approx(sorted(abs(v) ** 2 for v in vals))


def test_gaussian_vector_moments():
    sig = GaussianIID(c_beta=2.0, k=50000)
    b = sample_signal_vector(sig, substream(11, 0))
    # per-entry power c/k, circular symmetry kills the pseudo-variance
    assert np.mean(np.abs(b) ** 2) == pytest.approx(sig.sigma_beta_sq, rel=0.02)
    assert abs(np.mean(b ** 2)) < 3 * sig.sigma_beta_sq / math.sqrt(b.size)


def test_gaussian_magnitudes_exponential():
    # |CN(0, v)|^2 is exponential with mean v
    sig = GaussianIID(c_beta=1.0, k=20000)
    b = sample_signal_vector(sig, substream(13, 0))
    u = np.abs(b) ** 2 / sig.sigma_beta_sq
    d, _ = stats.kstest(u, "expon")
    assert d < 1.63 / math.sqrt(u.size)  # 1% asymptotic KS band


def test_sample_support_uniform_chi2():
    p, k, draws = 5, 2, 4000
    rng = substream(21, 0)
    counts = {}
    for _ in range(draws):
        s = sample_support(p, k, rng)
        counts[s.indices] = counts.get(s.indices, 0) + 1
    cells = math.comb(p, k)
    assert len(counts) == cells
    observed = np.array(list(counts.values()))
    chi2 = float(np.sum((observed - draws / cells) ** 2 / (draws / cells)))
    # dof = 9; 0.999 quantile ~ 27.9
    assert chi2 < 27.9


def test_sorted_signal_prefix():
    sig = SortedSignal(np.array([3.0, 1.0, 2.0j]))
    assert sig.k == 3
    assert np.allclose(sig.sq_magnitudes, [1.0, 4.0, 9.0])
    assert sig.prefix_power(0) == 0.0
    assert sig.prefix_power(2) == pytest.approx(5.0)
    assert sig.total_power == pytest.approx(14.0)
    flat = SortedSignal.flat(2.0, 8)
    assert flat.prefix_power(4) == pytest.approx(1.0)


def test_partition_modes():
    sig = SortedSignal.flat(1.0, 10)
    lo = partition_powers(sig, 0.25, mode="floor")
    assert lo.miss_count == 2
    assert lo.miss_power == pytest.approx(0.2)
    hi = partition_powers(sig, 0.25, mode="asymptotic")
    assert hi.miss_power == pytest.approx(0.25)
    assert hi.miss_power + hi.keep_power == pytest.approx(sig.total_power)
    full = partition_powers(sig, 1.0, mode="floor")
    assert full.keep_power == pytest.approx(0.0)
    with pytest.raises(ValueError):
        partition_powers(sig, 1.5)
    with pytest.raises(ValueError):
        partition_powers(sig, 0.5, mode="nope")


def test_partition_split_exact_on_battery():
    rng = np.random.default_rng(5)
    for _ in range(40):
        k = int(rng.integers(1, 30))
        sig = SortedSignal(rng.normal(size=k) + 1j * rng.normal(size=k))
        a = float(rng.uniform(0, 1))
        for mode in ("floor", "asymptotic"):
            parts = partition_powers(sig, a, mode=mode)
            assert parts.miss_power + parts.keep_power == pytest.approx(
                sig.total_power, abs=1e-12)
            assert parts.miss_power >= -1e-15
            assert parts.keep_power >= -1e-12


def test_projection_convention():
    # <x, b> conjugates the sensing row: [1, i] against [1, i] doubles
    x = np.array([[1.0, 1.0j]])
    beta = np.array([1.0, 1.0j])
    noise = GaussianNoise(1e-12)
    y = observe(x, beta, noise, substream(0, 0))
    assert y[0] == pytest.approx(4.0, abs=1e-6)


def test_observe_shape_check():
    with pytest.raises(ValueError):
        observe(np.ones((2, 3)), np.ones(2), GaussianNoise(1.0), substream(0, 0))


def test_instance_roundtrip():
    sig = GaussianIID(c_beta=1.0, k=3)
    inst = ProblemInstance.generate(p=12, k=3, n=7, signal=sig,
                                    noise=GaussianNoise(0.5), seed=42)
    assert inst.y.shape == (7,)
    text = inst.to_json()
    rec = json.loads(text)
    assert set(rec) == {"p", "k", "n", "seed", "support", "beta_re",
                        "beta_im", "y"}
    back = ProblemInstance.from_json(text)
    assert back.support.indices == inst.support.indices
    assert np.allclose(back.beta, inst.beta)
    assert np.allclose(back.y, inst.y)
    # sensing matrix regenerates from the seed alone
    assert np.array_equal(back.x, inst.x)
    assert np.allclose(back.z, inst.z, atol=1e-12)


def test_instance_determinism():
    sig = DiscreteFlat(c_beta=1.0, k=2)
    a = ProblemInstance.generate(p=6, k=2, n=4, signal=sig,
                                 noise=GaussianNoise(1.0), seed=5)
    b = ProblemInstance.generate(p=6, k=2, n=4, signal=sig,
                                 noise=GaussianNoise(1.0), seed=5)
    c = ProblemInstance.generate(p=6, k=2, n=4, signal=sig,
                                 noise=GaussianNoise(1.0), seed=6)
    assert np.array_equal(a.y, b.y)
    assert not np.array_equal(a.y, c.y)


def test_circular_gaussian_component_variance():
    rng = substream(1, 2)
    z = sample_circular_gaussian(rng, 200000, power=3.0)
    assert np.var(z.real) == pytest.approx(1.5, rel=0.02)
    assert np.var(z.imag) == pytest.approx(1.5, rel=0.02)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(3.0, rel=0.02)
