"""Frozen vectors pinning the sampling PRNG across implementations.

splitmix64 values for state 0 match the published reference outputs;
everything else is derived from the xoshiro256** stream and must never
change, or seeded runs stop being reproducible.
"""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from matchseg.rng import Xoshiro256StarStar, derive_seed, splitmix64_next

SPLITMIX64_FROM_ZERO = [
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
    0xF88BB8A8724C81EC,
]

XOSHIRO_VECTORS = {
    0: [0x99EC5F36CB75F2B4, 0xBF6E1F784956452A, 0x1A5F849D4933E6E0,
        0x6AA594F1262D2D2C, 0xBBA5AD4A1F842E59],
    1: [0xB3F2AF6D0FC710C5, 0x853B559647364CEA, 0x92F89756082A4514,
        0x642E1C7BC266A3A7, 0xB27A48E29A233673],
    42: [0x15780B2E0C2EC716, 0x6104D9866D113A7E, 0xAE17533239E499A1,
         0xECB8AD4703B360A1, 0xFDE6DC7FE2EC5E64],
}


def test_splitmix64_reference_vector():
    state = 0
    outs = []
    for _ in range(4):
        state, out = splitmix64_next(state)
        outs.append(out)
    assert outs == SPLITMIX64_FROM_ZERO


@pytest.mark.parametrize("seed,expected", sorted(XOSHIRO_VECTORS.items()))
def test_xoshiro_vectors(seed, expected):
    gen = Xoshiro256StarStar(seed)
    assert [gen.next_u64() for _ in range(5)] == expected


def test_uniform_vector():
    gen = Xoshiro256StarStar(7)
    got = [gen.uniform() for _ in range(4)]
    assert got == [0.7005764821796896, 0.2787512294737843,
                   0.8396274618764198, 0.9810977250149351]


def test_randbelow_vector():
    gen = Xoshiro256StarStar(7)
    assert [gen.randbelow(10) for _ in range(10)] == [4, 4, 8, 4, 4, 1, 6, 6, 8, 9]


def test_sample_vector():
    gen = Xoshiro256StarStar(7)
    assert gen.sample(list(range(12)), 5) == [6, 3, 10, 7, 4]


@given(st.integers(min_value=0, max_value=2**64 - 1))
def test_uniform_in_unit_interval(seed):
    gen = Xoshiro256StarStar(seed)
    for _ in range(8):
        assert 0.0 <= gen.uniform() < 1.0


@given(st.integers(min_value=0, max_value=2**64 - 1),
       st.integers(min_value=1, max_value=200))
def test_randbelow_in_range(seed, n):
    gen = Xoshiro256StarStar(seed)
    for _ in range(8):
        assert 0 <= gen.randbelow(n) < n


@given(st.integers(min_value=0, max_value=2**64 - 1),
       st.lists(st.integers(), min_size=1, max_size=30, unique=True),
       st.data())
def test_sample_is_subset_without_replacement(seed, population, data):
    k = data.draw(st.integers(min_value=0, max_value=len(population)))
    gen = Xoshiro256StarStar(seed)
    picked = gen.sample(population, k)
    assert len(picked) == k
    assert len(set(picked)) == k
    assert set(picked) <= set(population)


def test_sample_rejects_oversized_request():
    gen = Xoshiro256StarStar(0)
    with pytest.raises(ValueError):
        gen.sample([1, 2], 3)


def test_choice_weighted_respects_zero_weights():
    gen = Xoshiro256StarStar(3)
    for _ in range(50):
        assert gen.choice_weighted([0.0, 1.0, 0.0]) == 1


def test_derive_seed_is_stable_and_tag_sensitive():
    assert derive_seed(5, "kmeans") == derive_seed(5, "kmeans")
    assert derive_seed(5, "kmeans") != derive_seed(5, "sampler")
    assert derive_seed(5, "kmeans") != derive_seed(6, "kmeans")
