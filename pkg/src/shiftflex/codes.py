"""Finite codes, unique decipherability, renewal presentations, borders.

A renewal system is the shift space of free bi-infinite concatenations of a
finite word set.  Uniform-length uniquely decipherable codes are converted
to a positional vertex-shift presentation whose states are (word, offset)
pairs labeled by the symbols they read.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (
    CapacityError,
    NoLowOverlapWordError,
    NonUniformLengthError,
    NotUniquelyDecipherableError,
)
from .words import DEFAULT_WORD_BUDGET, VertexShift, label_word


@dataclass(frozen=True)
class Code:
    """Nonempty set of distinct finite words."""

    words: tuple

    def __post_init__(self):
        ws = tuple(sorted({tuple(w) for w in self.words}))
        if not ws:
            raise ValueError("code must be nonempty")
        if any(len(w) == 0 for w in ws):
            raise ValueError("code words must be nonempty")
        object.__setattr__(self, "words", ws)

    @property
    def uniform_length(self):
        lengths = {len(w) for w in self.words}
        return lengths.pop() if len(lengths) == 1 else None

    @property
    def alphabet_size(self):
        return max(max(w) for w in self.words) + 1

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


def _initial_suffixes(words):
    """Dangling suffixes from one codeword being a proper prefix of another."""
    out = []
    ordered = sorted(words)
    for i, u in enumerate(ordered):
        for v in ordered[i + 1 :]:
            if v[: len(u)] != u:
                break  # sorted: once the prefix fails it fails for the rest
            out.append((v[len(u) :], (v,), (u,)))
    return out


def ud_witness(code):
    """A string with two factorizations, or None when the code is UD.

    Returns (string, factorization_a, factorization_b) with the
    factorizations given as tuples of codewords.  Implements the dangling
    suffix iteration with breadth-first parent tracking, so the witness is
    short.
    """
    words = list(code.words)
    queue = deque()
    seen = set()
    for s, f1, f2 in _initial_suffixes(words):
        # stream(f1) = stream(f2) + s, s nonempty since words are distinct
        if s not in seen:
            seen.add(s)
            queue.append((s, f1, f2))
    while queue:
        s, f1, f2 = queue.popleft()
        for w in words:
            if w == s:
                ahead = f1
                behind = f2 + (w,)
                string = sum(ahead, ())
                return (string, ahead, behind)
            if len(w) > len(s) and w[: len(s)] == s:
                t = w[len(s) :]
                if t not in seen:
                    seen.add(t)
                    queue.append((t, f2 + (w,), f1))
            elif len(s) > len(w) and s[: len(w)] == w:
                t = s[len(w) :]
                if t not in seen:
                    seen.add(t)
                    queue.append((t, f1, f2 + (w,)))
    return None


def is_uniquely_decipherable(code):
    """Sardinas-Patterson test: every concatenation factors uniquely."""
    return ud_witness(code) is None


def renewal_to_sft(code, ambient_size=None):
    """Positional vertex shift of a uniform-length uniquely decipherable code.

    States are (word index a, offset p) in code-sorted order, with edges
    (a, p) -> (a, p+1) inside each word and (a, k-1) -> (b, 0) for every b.
    Each state is labeled by the symbol it reads, so label sequences are
    exactly the bi-infinite free concatenations.  The transition matrix has
    spectral radius |code|^(1/k).
    """
    k = code.uniform_length
    if k is None:
        raise NonUniformLengthError(
            "renewal presentation requires a uniform-length code"
        )
    witness = ud_witness(code)
    if witness is not None:
        string, fa, fb = witness
        raise NotUniquelyDecipherableError(
            f"code is not uniquely decipherable: "
            f"{_fmt_word(string)} = {_fmt_fact(fa)} = {_fmt_fact(fb)}",
            witness=witness,
        )
    t = len(code)
    n = t * k
    rows, cols = [], []
    labels = []
    for a, w in enumerate(code.words):
        for p in range(k):
            labels.append(w[p])
            if p < k - 1:
                rows.append(a * k + p)
                cols.append(a * k + p + 1)
    for a in range(t):
        for b in range(t):
            rows.append(a * k + k - 1)
            cols.append(b * k)
    mat = sp.csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n)
    )
    if ambient_size is None:
        ambient_size = code.alphabet_size
    shift = VertexShift(mat, labels=labels, ambient_size=ambient_size)
    shift.renewal = RenewalStructure(code=code, k=k)
    return shift


@dataclass(frozen=True)
class RenewalStructure:
    """Bookkeeping attached to positional renewal presentations."""

    code: Code
    k: int

    def state(self, word_index, offset):
        return word_index * self.k + offset

    def word_index(self, state):
        return state // self.k

    def offset(self, state):
        return state % self.k


def _fmt_word(w):
    return "".join(str(s) for s in w)


def _fmt_fact(f):
    return "·".join(_fmt_word(w) for w in f)


def max_self_overlap(word):
    """Length of the longest proper border (prefix equal to suffix).

    Computed with the string failure function, so linear in the length.
    """
    word = tuple(word)
    if len(word) < 1:
        raise ValueError("word must be nonempty")
    fail = [0] * (len(word) + 1)
    fail[0] = -1
    k = -1
    for i in range(1, len(word) + 1):
        while k >= 0 and word[k] != word[i - 1]:
            k = fail[k]
        k += 1
        fail[i] = k
    return fail[len(word)]


def find_low_overlap_word(shift, l, budget=DEFAULT_WORD_BUDGET):
    """First admissible word of length l whose label word has border < l/4.

    Scans internal words in lexicographic order and stops at the first
    qualifying one, so large languages are cheap when a qualifying word
    appears early.  Raises NoLowOverlapWordError after an exhaustive scan
    (the border bound needs positive entropy) and CapacityError if the scan
    passes the budget without success.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    bound = l / 4
    scanned = 0
    stack = [(s,) for s in reversed(range(shift.num_states))]
    while stack:
        w = stack.pop()
        if len(w) == l:
            scanned += 1
            if max_self_overlap(label_word(shift, w)) < bound:
                return w
            if scanned > budget:
                raise CapacityError(scanned, budget, what="scanned words")
            continue
        for s in reversed(shift.successors(w[-1])):
            stack.append(w + (s,))
    raise NoLowOverlapWordError(
        f"no admissible word of length {l} has self-overlap below {bound:g}"
    )
