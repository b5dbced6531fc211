import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from flipdyn.rng import derive_seed, derive_seeds_np, key_word, keyed_uniform, keyed_uniform_np

u64 = st.integers(0, 2**64 - 1)


@given(u64, st.integers(0, 10**6), st.lists(st.integers(0, 2**40), min_size=1, max_size=20))
@settings(max_examples=60)
def test_numpy_path_is_bit_identical(seed, rnd, words):
    vec = keyed_uniform_np(seed, rnd, np.asarray(words, dtype=np.uint64))
    assert vec.tolist() == [keyed_uniform(seed, rnd, w) for w in words]


@given(u64, st.integers(1, 50))
def test_derived_seeds_match(seed, count):
    assert derive_seeds_np(seed, count).tolist() == [derive_seed(seed, i) for i in range(count)]


def test_uniforms_look_uniform():
    u = keyed_uniform_np(7, 3, np.arange(200_000, dtype=np.uint64))
    assert 0 <= u.min() and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.005
    hist, _ = np.histogram(u, bins=10, range=(0, 1))
    assert np.all(np.abs(hist - 20_000) < 800)


def test_key_word_fields_do_not_collide():
    words = {key_word(p, lo, hi, s) for p in range(4) for lo in range(1, 6) for hi in range(0, 6) for s in range(7)}
    assert len(words) == 4 * 5 * 6 * 7


def test_coins_depend_on_round_and_seed():
    w = key_word(3, 1, 2, 0)
    assert keyed_uniform(1, 0, w) != keyed_uniform(1, 1, w)
    assert keyed_uniform(1, 0, w) != keyed_uniform(2, 0, w)
