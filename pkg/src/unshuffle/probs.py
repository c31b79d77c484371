"""Closed-form probabilities for the two-block and prefix analyses, plus a
seeded Monte Carlo harness that checks each formula against simulation.

Count conventions: the swapped-column count and the noise-locus count are
the exact integer counts the generator realizes (ceil of fraction times
size); the closed forms are evaluated with those counts as exponents.
Powers like q**(1 - count) are computed via exp/log to avoid spurious
underflow inside differences.

The two-value formulas treat the noise membership of a position and of its
shifted image as independent events of probability lambda; the Monte Carlo
for those events simulates exactly that single-row experiment.  (A fixed
noise-locus count of ceil(lambda * L) introduces an O(1/L) dependence
between the two memberships that the formulas ignore.)  The conserved-row
and prefix events are simulated on full generated corpora, where the
formulas are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .model import ModelParams, generate, make_rng
from .partitions import row_partition
from .two_block import estimate_conserved_rows


def _qpow(q: float, exponent: float) -> float:
    """q ** exponent in log space; 0.0 on underflow."""
    try:
        return math.exp(exponent * math.log(q))
    except OverflowError:
        return math.inf


def swapped_count(n: int, fraction: float) -> int:
    return math.ceil(fraction * n)


def noise_count(length: int, fraction: float) -> int:
    return math.ceil(fraction * length)


def p_n_closed(q: int, n: int, noise_frac: float, swap_frac: float) -> float:
    """Probability that one row takes exactly two values whose inverse images
    are the swapped/unswapped column sets."""
    if q < 2:
        raise ValueError("alphabet size must be >= 2")
    n1 = swapped_count(n, swap_frac)
    n0 = n - n1
    if not 0 < n1 < n:
        raise ValueError("swapped fraction must leave both sides nonempty")
    lam = noise_frac
    lam_bar = 1.0 - lam
    body = (lam_bar ** 2
            + lam_bar * lam * (_qpow(q, 1 - n1) + _qpow(q, 1 - n0))
            + lam ** 2 * _qpow(q, 2 - n))
    return (1.0 - 1.0 / q) * body


def p2_closed(q: int, n: int, noise_frac: float, swap_frac: float) -> float:
    """Probability that one row takes exactly two values, any bipartition."""
    n1 = swapped_count(n, swap_frac)
    n0 = n - n1
    if not 0 < n1 < n:
        raise ValueError("swapped fraction must leave both sides nonempty")
    lam = noise_frac
    lam_bar = 1.0 - lam
    split1 = (2.0 ** (n1 - 1) - 1.0) * _qpow(q, 1 - n1)
    split0 = (2.0 ** (n0 - 1) - 1.0) * _qpow(q, 1 - n0)
    extra = ((lam_bar * lam + lam ** 2 * _qpow(q, 1 - n0)) * split1
             + (lam * lam_bar + lam ** 2 * _qpow(q, 1 - n1)) * split0
             + lam ** 2 * (2.0 ** (n0 - 1) - 1.0) * (2.0 ** (n1 - 1) - 1.0)
             * _qpow(q, 2 - n))
    return p_n_closed(q, n, noise_frac, swap_frac) + 2.0 * (1.0 - 1.0 / q) * extra


def gap_decay(q: int, n: int, swap_frac: float) -> float:
    """Decay scale (q/2) ** (-N * min(swap, 1 - swap)) of the excess of
    two-valued rows over correctly-bipartitioned ones."""
    if q <= 2:
        raise ValueError("decay bound is vacuous for alphabet size <= 2")
    return (q / 2.0) ** (-n * min(swap_frac, 1.0 - swap_frac))


def l_sets_exact_prob(q: int, n: int, length: int,
                      noise_frac: float, swap_frac: float) -> tuple:
    """Probabilities, given the swapped set is known exactly, that the two
    conserved-row sets identify the noise-free loci exactly."""
    n1 = swapped_count(n, swap_frac)
    n0 = n - n1
    k = noise_count(length, noise_frac)
    p0 = (1.0 - _qpow(q, 1 - n0)) ** k
    p1 = (1.0 - _qpow(q, 1 - n1)) ** k
    return p0, p1


def prefix_partition_prob(q: int, k: int) -> tuple:
    """Probability that k independently uniform symbols are pairwise
    distinct (exact birthday product), with the e**(-k^2/2q) approximation."""
    if k < 1:
        raise ValueError("need at least one realized value")
    if k > q:
        return 0.0, math.exp(-k * k / (2.0 * q))
    exact = 1.0
    for i in range(k):
        exact *= 1.0 - i / q
    return exact, math.exp(-k * k / (2.0 * q))


def stirling2(r: int, s: int) -> int:
    """Stirling number of the second kind via the standard recurrence."""
    if r < 0 or s < 0:
        raise ValueError("negative arguments")
    if s > r:
        return 0
    row = [1] + [0] * s  # S(0, 0) = 1
    for _ in range(r):
        row = [0] + [j * row[j] + row[j - 1] for j in range(1, s + 1)]
    return row[s]


@dataclass(frozen=True)
class ProbReport:
    event: str
    closed_form: float
    mc_estimate: float
    mc_stderr: float
    trials: int
    agrees: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _report(event: str, closed: float, hits: int, trials: int) -> ProbReport:
    est = hits / trials
    # Binomial standard error under the closed form (the null hypothesis);
    # the empirical rate can degenerate to exactly 0 or 1.
    p = min(max(closed, 0.0), 1.0)
    stderr = math.sqrt(max(p * (1.0 - p), 1e-12) / trials)
    return ProbReport(event=event, closed_form=closed, mc_estimate=est,
                      mc_stderr=stderr, trials=trials,
                      agrees=abs(closed - est) <= 3.0 * stderr)


def _simulate_two_value_rows(q, n, noise_frac, swap_frac, trials, rng):
    """Vectorized single-row experiment: independent noise membership for the
    position and its shifted image, exact column counts per side."""
    n1 = swapped_count(n, swap_frac)
    n0 = n - n1
    noisy0 = rng.random(trials) < noise_frac
    noisy1 = rng.random(trials) < noise_frac
    base0 = rng.integers(0, q, size=trials)
    base1 = rng.integers(0, q, size=trials)
    vals0 = np.where(noisy0[:, None],
                     (base0[:, None] + rng.integers(0, q, size=(trials, n0))) % q,
                     base0[:, None])
    vals1 = np.where(noisy1[:, None],
                     (base1[:, None] + rng.integers(0, q, size=(trials, n1))) % q,
                     base1[:, None])
    const0 = (vals0 == vals0[:, :1]).all(axis=1)
    const1 = (vals1 == vals1[:, :1]).all(axis=1)
    sides_differ = vals0[:, 0] != vals1[:, 0]
    correct = const0 & const1 & sides_differ
    row = np.sort(np.concatenate([vals0, vals1], axis=1), axis=1)
    n_distinct = 1 + np.count_nonzero(row[:, 1:] != row[:, :-1], axis=1)
    return correct, n_distinct == 2


def _mc_two_value(event, params, trials, rng):
    q, n = params.q, params.num_messages
    if event == "p_n":
        closed = p_n_closed(q, n, params.noise_fraction, float(params.shuffle))
    else:
        closed = p2_closed(q, n, params.noise_fraction, float(params.shuffle))
    correct, two_valued = _simulate_two_value_rows(
        q, n, params.noise_fraction, float(params.shuffle), trials, rng)
    hits = int(np.count_nonzero(correct if event == "p_n" else two_valued))
    return _report(event, closed, hits, trials)


def _mc_conserved_rows(event, params, trials, rng):
    length = params.blocks.total
    p0, p1 = l_sets_exact_prob(params.q, params.num_messages, length,
                               params.noise_fraction, float(params.shuffle))
    closed = p0 if event == "l0_exact" else p1
    hits = 0
    for _ in range(trials):
        corpus, truth = generate(params, rng)
        rows0, rows1 = estimate_conserved_rows(corpus, truth.swapped_columns)
        noise_free = sorted(set(range(length)) - set(truth.noise_loci))
        if event == "l0_exact":
            hits += list(rows0) == noise_free
        else:
            first_len = params.blocks.lengths[0]
            expected = sorted((l - first_len) % length for l in noise_free)
            hits += list(rows1) == expected
    return _report(event, closed, hits, trials)


def _mc_prefix_partition(event, params, trials, rng):
    starts = params.blocks.block_starts
    realized = len({s[0] for s in params.perm_counts()})
    closed, _ = prefix_partition_prob(params.q, realized)
    hits = 0
    for _ in range(trials):
        corpus, truth = generate(params, rng)
        observed = row_partition(corpus, 0).as_sets()
        by_first_block = {}
        for col, sigma in enumerate(truth.column_perms):
            by_first_block.setdefault(sigma[0], []).append(col)
        induced = frozenset(frozenset(cols) for cols in by_first_block.values())
        hits += observed == induced
    return _report(event, closed, hits, trials)


MC_EVENTS = ("p_n", "p_2", "l0_exact", "l1_exact", "prefix_partition")


def monte_carlo(event: str, params: ModelParams, trials: int,
                rng: Optional[np.random.Generator] = None) -> ProbReport:
    """Estimate the named event frequency and compare with its closed form."""
    if trials < 100:
        raise ValueError("too few trials for a meaningful standard error")
    if rng is None:
        rng = make_rng(params.seed)
    if event in ("p_n", "p_2"):
        return _mc_two_value(event, params, trials, rng)
    if event in ("l0_exact", "l1_exact"):
        return _mc_conserved_rows(event, params, trials, rng)
    if event == "prefix_partition":
        return _mc_prefix_partition(event, params, trials, rng)
    raise ValueError(f"unknown event {event!r}; expected one of {MC_EVENTS}")
