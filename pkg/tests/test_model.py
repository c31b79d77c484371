"""Generative model: parameter validation, determinism, and an independent
straight-line reimplementation used as an oracle."""

import numpy as np
import pytest

from unshuffle.model import (
    InfeasibleParamsError,
    ModelParams,
    ShuffledCorpus,
    apply_unshuffle,
    generate,
    make_rng,
    sample_ground_truth,
)
from unshuffle.perms import BlockStructure, coherent_block_permutation


def two_block_params(**overrides):
    base = dict(q=3, blocks=BlockStructure((4, 6)), num_messages=8,
                noise_fraction=0.3, shuffle=0.5, seed=11)
    base.update(overrides)
    return ModelParams(**base)


def test_param_validation():
    with pytest.raises(InfeasibleParamsError):
        two_block_params(q=1)
    with pytest.raises(InfeasibleParamsError):
        two_block_params(noise_fraction=1.5)
    with pytest.raises(InfeasibleParamsError):
        two_block_params(shuffle=-0.1)
    with pytest.raises(InfeasibleParamsError):
        two_block_params(num_messages=0)
    with pytest.raises(InfeasibleParamsError):
        # counts must sum to the number of messages
        two_block_params(shuffle={(0, 1): 3, (1, 0): 3})
    with pytest.raises(InfeasibleParamsError):
        # permutations must act on the right number of blocks
        two_block_params(shuffle={(0, 1, 2): 8})


def test_exact_counts():
    params = ModelParams(q=3, blocks=BlockStructure((40, 60)), num_messages=80,
                         noise_fraction=0.3, shuffle=0.3, seed=0)
    assert params.noise_count == 30
    assert params.shuffled_count == 24
    assert params.perm_counts() == {(0, 1): 56, (1, 0): 24}


def test_determinism():
    params = two_block_params()
    c1, t1 = generate(params)
    c2, t2 = generate(params)
    assert c1.same_as(c2)
    assert t1.noise_loci == t2.noise_loci
    assert t1.column_perms == t2.column_perms
    assert np.array_equal(t1.template, t2.template)


def test_different_seeds_differ():
    c1, _ = generate(two_block_params(seed=11))
    c2, _ = generate(two_block_params(seed=12))
    assert not c1.same_as(c2)


def test_ground_truth_shapes():
    params = two_block_params()
    truth = sample_ground_truth(params, make_rng(params.seed))
    assert len(truth.template) == 10
    assert len(truth.noise_loci) == params.noise_count
    assert len(truth.column_perms) == 8
    assert truth.noise_loci == tuple(sorted(truth.noise_loci))
    # exactly the configured number of swapped columns
    assert len(truth.swapped_columns) == params.shuffled_count


def test_restricted_prefix_avoids_block_starts():
    blocks = BlockStructure((3, 4, 5))
    starts = set(blocks.block_starts)
    rng = make_rng(99)
    for _ in range(1000):
        params = ModelParams(q=5, blocks=blocks, num_messages=6,
                             noise_fraction=0.5,
                             shuffle={(0, 1, 2): 6}, restricted_prefix=True)
        truth = sample_ground_truth(params, rng)
        assert not (set(truth.noise_loci) & starts)


def test_distinguished_prefix_start_values_distinct():
    blocks = BlockStructure((2, 2, 2))
    starts = list(blocks.block_starts)
    rng = make_rng(5)
    for _ in range(500):
        params = ModelParams(q=3, blocks=blocks, num_messages=3,
                             noise_fraction=0.4,
                             shuffle={(0, 1, 2): 3}, distinguished_prefix=True)
        truth = sample_ground_truth(params, rng)
        values = truth.template[starts].tolist()
        assert len(set(values)) == 3
        assert not (set(truth.noise_loci) & set(starts))


def test_noise_infeasible_when_all_positions_excluded():
    blocks = BlockStructure((1, 1, 1))
    params = ModelParams(q=7, blocks=blocks, num_messages=3, noise_fraction=1.0,
                         shuffle={(0, 1, 2): 3}, restricted_prefix=True)
    with pytest.raises(InfeasibleParamsError):
        sample_ground_truth(params, make_rng(0))


def test_generate_against_straight_line_reimplementation():
    # [DERIVED] replay the documented RNG stream (template, loci,
    # column-order shuffle, then noise column by column) with explicit loops
    # and block slicing instead of permutation machinery.
    params = ModelParams(q=3, blocks=BlockStructure((2, 4)), num_messages=4,
                         noise_fraction=0.5, shuffle=0.5, seed=77)
    corpus, truth = generate(params)

    rng = make_rng(77)
    template = rng.integers(0, 3, size=6, dtype=np.int64)
    loci = sorted(int(x) for x in rng.choice(np.arange(6), size=3, replace=False))
    pool = [(0, 1)] * 2 + [(1, 0)] * 2
    order = rng.permutation(4)
    perms = [pool[i] for i in order]
    noise = rng.integers(0, 3, size=(4, 3), dtype=np.int64)

    expected = np.empty((6, 4), dtype=np.int64)
    for col in range(4):
        noisy = template.copy()
        noisy[loci] = (noisy[loci] + noise[col]) % 3
        if perms[col] == (0, 1):
            expected[:, col] = noisy
        else:
            # swapped column: second block first
            expected[:, col] = np.concatenate([noisy[2:], noisy[:2]])

    assert np.array_equal(corpus.values, expected)
    assert np.array_equal(truth.template, template)
    assert list(truth.noise_loci) == loci
    assert list(truth.column_perms) == perms


def test_noise_values_roughly_uniform():
    params = ModelParams(q=4, blocks=BlockStructure((5, 5)), num_messages=200,
                         noise_fraction=0.8, shuffle=0.0, seed=21)
    corpus, truth = generate(params)
    # with no shuffling, noisy positions are template + uniform increments
    loci = list(truth.noise_loci)
    deltas = (corpus.values[loci] - truth.template[loci, None]) % 4
    counts = np.bincount(deltas.ravel(), minlength=4)
    expected = deltas.size / 4
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < 16.27  # chi-square 3 dof, p = 0.001


def test_corpus_validation_and_unshuffle():
    with pytest.raises(ValueError):
        ShuffledCorpus(values=np.array([[0, 5]]), q=3)
    with pytest.raises(ValueError):
        ShuffledCorpus(values=np.zeros(3, dtype=int), q=3)
    params = two_block_params()
    corpus, truth = generate(params)
    inverses = [tuple(np.argsort(cbp)) for cbp in truth.column_cbps()]
    restored = apply_unshuffle(corpus, inverses)
    # undoing the shuffle leaves noisy copies of the template
    loci = set(truth.noise_loci)
    clean = [l for l in range(10) if l not in loci]
    assert np.array_equal(restored.values[clean],
                          np.repeat(truth.template[clean, None], 8, axis=1))


def test_column_cbps_match_perms():
    params = two_block_params()
    _, truth = generate(params)
    for sigma, cbp in zip(truth.column_perms, truth.column_cbps()):
        assert cbp == coherent_block_permutation(sigma, truth.blocks)
