import numpy as np
import pytest

from startail.rng import WORKERS_ENV, block_rng, block_size_for, default_workers, run_blocks


def test_block_streams_are_reproducible_and_distinct():
    a = block_rng(5, 3).random(4)
    assert np.array_equal(a, block_rng(5, 3).random(4))
    assert not np.array_equal(a, block_rng(5, 4).random(4))
    assert not np.array_equal(a, block_rng(6, 3).random(4))
    assert not np.array_equal(a, block_rng(5, 3, stream=1).random(4))


def test_block_size_shrinks_with_width():
    assert block_size_for(1) == 1 << 16
    assert block_size_for(1000) < block_size_for(10)
    assert block_size_for(10**9) == 256


@pytest.mark.parametrize("workers", [1, 2, 5])
def test_run_blocks_order_and_sizes(workers):
    out = run_blocks(lambda rng, k: k, 200_001, seed=0, width=1, workers=workers)
    assert sum(out) == 200_001
    assert out[:-1] == [1 << 16] * (len(out) - 1)


def test_run_blocks_values_independent_of_workers():
    def draw(rng, k):
        return rng.random(k).sum()

    a = run_blocks(draw, 300_000, seed=11, workers=1)
    b = run_blocks(draw, 300_000, seed=11, workers=4)
    assert a == b
    with pytest.raises(ValueError):
        run_blocks(draw, 0, seed=1)


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert default_workers() == 3
    monkeypatch.setenv(WORKERS_ENV, "junk")
    assert default_workers() == 1
    monkeypatch.delenv(WORKERS_ENV)
    assert default_workers() == 1
