"""Empirical measures, a computable weak* surrogate metric, and separated sets.

The metric compares any two objects that expose ambient cylinder
probabilities (`cylinder_table(depth)`): empirical measures of finite words
and Markov measures alike.  It is the depth-weighted cylinder total
variation

    d(a, b) = sum_{m=1..D} 2^-m * (1/2) * sum_{|w|=m} |a[w] - b[w]|,

which metrizes weak* convergence on shift spaces and is exactly computable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InsufficientWordLengthError, WordTooShortError
from .spectral import markov_entropy
from .words import DEFAULT_WORD_BUDGET, WordSet, label_word, language


@dataclass(frozen=True)
class MetricConfig:
    """Truncation depth of the weak* surrogate metric."""

    max_depth: int = 2

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("metric depth must be >= 1")


class EmpiricalMeasure:
    """Window frequencies of a finite word over the ambient alphabet.

    At depth d the word of length N has N-d+1 windows, each weighted
    1/(N-d+1); the declared depth is the deepest cylinder the measure is
    meant to resolve, but frequencies at any shallower depth are computed
    directly from the word (not by marginalizing), matching the finite-word
    empirical statistics.
    """

    def __init__(self, word, depth, ambient_size=None):
        word = tuple(word)
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if len(word) < depth:
            raise WordTooShortError(
                f"word of length {len(word)} has no depth-{depth} windows"
            )
        self.word = word
        self.depth = depth
        self.ambient_size = (
            max(word) + 1 if ambient_size is None else int(ambient_size)
        )
        self._tables = {}

    @property
    def frequencies(self):
        """Exact window frequencies at the declared depth, as Fractions."""
        counts = {}
        n = len(self.word) - self.depth + 1
        for i in range(n):
            w = self.word[i : i + self.depth]
            counts[w] = counts.get(w, 0) + 1
        return {w: Fraction(c, n) for w, c in sorted(counts.items())}

    def cylinder_table(self, depth, budget=DEFAULT_WORD_BUDGET):
        if depth in self._tables:
            return self._tables[depth]
        if len(self.word) < depth:
            raise WordTooShortError(
                f"word of length {len(self.word)} has no depth-{depth} windows"
            )
        counts = {}
        n = len(self.word) - depth + 1
        for i in range(n):
            w = self.word[i : i + depth]
            counts[w] = counts.get(w, 0) + 1
        table = {w: c / n for w, c in counts.items()}
        self._tables[depth] = table
        return table

    def __repr__(self):
        return f"EmpiricalMeasure(len={len(self.word)}, depth={self.depth})"


def empirical_measure(word, depth, ambient_size=None):
    """Empirical measure of a word at the given window depth."""
    return EmpiricalMeasure(word, depth, ambient_size=ambient_size)


def empirical_from_windows(word, positions, depth, ambient_size=None):
    """Average of the window distributions at selected window indices.

    Positions index windows word[i : i + d]; every metric depth d <= depth
    averages over the same index set, mirroring an orbit-segment average
    restricted to those times.
    """
    word = tuple(word)
    positions = tuple(positions)
    if not positions:
        raise ValueError("need at least one window position")
    m = EmpiricalMeasure(word[:depth], depth, ambient_size=ambient_size)
    m.word = word
    tables = {}
    for d in range(1, depth + 1):
        counts = {}
        for i in positions:
            if i < 0 or i + depth > len(word):
                raise ValueError(f"window {i} out of range")
            w = word[i : i + d]
            counts[w] = counts.get(w, 0) + 1
        tables[d] = {w: c / len(positions) for w, c in counts.items()}
    m._tables = tables
    return m


def weak_star_distance(a, b, cfg):
    """Depth-weighted cylinder total variation between two measure-like objects.

    Symmetric, satisfies the triangle inequality, and vanishes exactly when
    all cylinder probabilities agree up to the configured depth.
    """
    total = 0.0
    for m in range(1, cfg.max_depth + 1):
        ta = a.cylinder_table(m)
        tb = b.cylinder_table(m)
        keys = set(ta) | set(tb)
        l1 = sum(abs(ta.get(w, 0.0) - tb.get(w, 0.0)) for w in keys)
        total += 0.5 * l1 / (1 << m)
    return total


@dataclass(frozen=True)
class KatokResult:
    """Separated word set with its entropy-count deviation."""

    words: WordSet
    deviation: float
    qualifying: int  # how many words passed the radius filter before sizing


def katok_separated_set(
    shift,
    m,
    n,
    kappa,
    radius,
    cfg,
    budget=DEFAULT_WORD_BUDGET,
):
    """Words of length n whose empirical statistics are radius-close to m.

    Returns the subset together with the deviation |log(count)/n - h(m)|.
    When the full qualifying set overshoots the deviation target it is
    trimmed deterministically (closest empirical distance first, then
    lexicographic) to the count floor(exp(n h)); when even the full set
    undershoots, InsufficientWordLengthError signals that n must grow.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    h = markov_entropy(m)
    depth = min(cfg.max_depth, n)
    scored = []
    for w in language(shift, n, budget=budget):
        lw = label_word(shift, w)
        d = weak_star_distance(
            EmpiricalMeasure(lw, depth, ambient_size=shift.ambient_size),
            m,
            MetricConfig(depth),
        )
        if d < radius:
            scored.append((d, w))
    if not scored:
        raise InsufficientWordLengthError(
            f"no word of length {n} is within radius {radius} of the measure"
        )
    count = len(scored)
    deviation = abs(math.log(count) / n - h)
    if deviation < kappa:
        chosen = sorted(w for _, w in scored)
        return KatokResult(WordSet(tuple(chosen)), deviation, count)
    if math.log(count) / n < h:  # too few words; only a larger n can help
        raise InsufficientWordLengthError(
            f"deviation {deviation:.6f} >= kappa {kappa} with all {count} "
            f"qualifying words; increase n",
            deviation=deviation,
        )
    target = max(1, math.floor(math.exp(n * h)))
    scored.sort(key=lambda t: (t[0], t[1]))
    chosen = sorted(w for _, w in scored[:target])
    deviation = abs(math.log(len(chosen)) / n - h)
    if deviation >= kappa:
        raise InsufficientWordLengthError(
            f"trimmed deviation {deviation:.6f} still >= kappa {kappa}",
            deviation=deviation,
        )
    return KatokResult(WordSet(tuple(chosen)), deviation, count)


def pigeonhole_refine(gamma, shift):
    """Largest subset of equal-length words sharing first and last symbol.

    Ties between maximal cells break toward the lexicographically smallest
    (first, last) pair.  The returned subset has size at least
    |gamma| / (number of states)^2.
    """
    words = list(gamma)
    if not words:
        raise ValueError("gamma must be nonempty")
    lengths = {len(w) for w in words}
    if len(lengths) != 1:
        raise ValueError("gamma must contain words of one length")
    cells = {}
    for w in words:
        cells.setdefault((w[0], w[-1]), []).append(w)
    best = min(cells.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    (start, end), cell = best
    return WordSet(tuple(sorted(cell))), start, end
