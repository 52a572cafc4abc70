"""Perron eigendata, topological entropy, Markov measures and roof integrals.

All entropies are in nats (natural logarithm) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, ConvergenceError, ReducibleShiftError
from .words import (
    DEFAULT_WORD_BUDGET,
    graph_period,
    is_irreducible,
    language,
)

PERRON_TOL = 1e-12
PERRON_MAX_ITER = 10**6


@dataclass(frozen=True)
class PerronData:
    """Spectral radius with right/left eigenvectors of a 0/1 matrix.

    right is normalized to sum 1, left is scaled so left @ right = 1.
    """

    value: float
    right: np.ndarray
    left: np.ndarray
    residual_right: float
    residual_left: float
    iterations: int


def _power_vector(mat, period, tol, max_iter):
    """Positive eigenvector of an irreducible 0/1 (or stochastic) matrix.

    For aperiodic matrices iterates mat + I, which is primitive whenever mat
    is irreducible.  For period p > 1 the spectrum carries a full ring of
    eigenvalues of top modulus, so plain iteration cannot converge; instead
    mat^p is iterated (block-primitive) and the eigenvector of mat itself is
    reconstructed as sum_j mat^j w / lambda^j.
    """
    n = mat.shape[0]
    v = np.full(n, 1.0 / n)
    if period == 1:
        for it in range(1, max_iter + 1):
            w = mat @ v + v
            s = w.sum()
            w /= s
            lam = s - 1.0
            resid = np.abs(mat @ w - lam * w).max()
            v = w
            if resid <= tol and it >= 2:
                return lam, w, resid, it
        raise ConvergenceError(
            f"power iteration did not reach tol={tol} in {max_iter} iterations"
        )
    for it in range(1, max_iter + 1):
        w = v
        for _ in range(period):
            w = mat @ w
        s = w.sum()
        if s <= 0:
            raise ConvergenceError("iteration collapsed to zero vector")
        w /= s
        lam = s ** (1.0 / period)  # v is sum-normalized
        # reconstruct the eigenvector of mat from the mat^p eigenvector
        r = w.copy()
        acc = w.copy()
        for _ in range(period - 1):
            acc = (mat @ acc) / lam
            r += acc
        r /= r.sum()
        resid = np.abs(mat @ r - lam * r).max()
        v = w
        if resid <= tol:
            return lam, r, resid, it
    raise ConvergenceError(
        f"power iteration (period {period}) did not reach tol={tol}"
    )


def perron(shift, tol=PERRON_TOL, max_iter=PERRON_MAX_ITER):
    """Perron-Frobenius data of an irreducible vertex shift.

    Raises ReducibleShiftError when the graph is not strongly connected and
    ConvergenceError past the iteration cap.  Results are cached on the
    shift object.
    """
    cached = getattr(shift, "_perron_cache", None)
    if cached is not None and cached[0] <= tol:
        return cached[1]
    if not is_irreducible(shift):
        raise ReducibleShiftError("perron data requires an irreducible shift")
    p = graph_period(shift)
    mat = shift.matrix.astype(np.float64)
    lam, right, res_r, it_r = _power_vector(mat, p, tol, max_iter)
    matT = mat.T.tocsr()
    lam_l, left, res_l, it_l = _power_vector(matT, p, tol, max_iter)
    left = left / (left @ right)
    # bilinear quotient: eigenvalue error quadratic in the vector residuals
    lam = float((left @ (mat @ right)) / (left @ right))
    data = PerronData(
        value=lam,
        right=right,
        left=left,
        residual_right=float(np.abs(mat @ right - lam * right).max()),
        residual_left=float(np.abs(matT @ left - lam * left).max()),
        iterations=it_r + it_l,
    )
    shift._perron_cache = (tol, data)
    return data


def topological_entropy(shift, tol=PERRON_TOL):
    """log of the spectral radius of the transition matrix, in nats."""
    return math.log(perron(shift, tol=tol).value)


class MarkovMeasure:
    """Stationary Markov measure compatible with a vertex shift.

    pi is the stationary distribution over internal states, P the
    row-stochastic transition matrix supported on allowed edges.
    """

    def __init__(self, shift, pi, P, vtol=1e-9):
        self.shift = shift
        self.pi = np.asarray(pi, dtype=np.float64)
        self.P = sp.csr_matrix(P, dtype=np.float64)
        n = shift.num_states
        if self.pi.shape != (n,) or self.P.shape != (n, n):
            raise ValueError("measure dimensions do not match the shift")
        if self.pi.min() < -vtol or abs(self.pi.sum() - 1.0) > vtol:
            raise ValueError("pi must be a probability vector")
        rows = np.asarray(self.P.sum(axis=1)).ravel()
        if np.abs(rows - 1.0).max() > vtol:
            raise ValueError("P must be row-stochastic")
        off_support = self.P - self.P.multiply(shift.matrix)
        if off_support.nnz and np.abs(off_support.data).max() > vtol:
            raise ValueError("P supported outside the shift's edges")
        drift = np.abs(self.pi @ self.P - self.pi).max()
        if drift > max(vtol, 1e-9):
            raise ValueError(f"pi is not stationary for P (drift {drift:.2e})")
        self._tables = {}

    @property
    def ambient_size(self):
        return self.shift.ambient_size

    def label_cylinder(self, word):
        """Probability of the ambient cylinder [word] under the measure."""
        lab = np.asarray(self.shift.labels)
        x = np.where(lab == word[0], self.pi, 0.0)
        for a in word[1:]:
            x = np.where(lab == a, x @ self.P, 0.0)
        return float(x.sum())

    def cylinder_table(self, depth, budget=DEFAULT_WORD_BUDGET):
        """dict mapping each positive-probability ambient word of the given
        depth to its cylinder probability."""
        if depth in self._tables:
            return self._tables[depth]
        lab = np.asarray(self.shift.labels)
        masks = [lab == a for a in range(self.shift.ambient_size)]
        out = {}

        def rec(prefix, x):
            if len(prefix) == depth:
                out[prefix] = float(x.sum())
                if len(out) > budget:
                    raise CapacityError(len(out), budget, what="cylinders")
                return
            y = x @ self.P
            for a in range(self.shift.ambient_size):
                z = np.where(masks[a], y, 0.0)
                if z.any():
                    rec(prefix + (a,), z)

        for a in range(self.shift.ambient_size):
            x0 = np.where(masks[a], self.pi, 0.0)
            if x0.any():
                rec((a,), x0)
        self._tables[depth] = out
        return out

    def __repr__(self):
        return f"MarkovMeasure(states={self.shift.num_states})"


def cylinder_prob(m, word):
    """pi[w0] * prod P[w_i, w_i+1] for an internal word; 0 on broken support."""
    if len(word) == 0:
        raise ValueError("cylinder word must be nonempty")
    n = m.shift.num_states
    if any(s < 0 or s >= n for s in word):
        raise ValueError("symbol outside the shift's state set")
    p = float(m.pi[word[0]])
    for i in range(len(word) - 1):
        if p == 0.0:
            return 0.0
        p *= m.P[word[i], word[i + 1]]
    return float(p)


def markov_entropy(m):
    """-sum_i pi_i sum_j P_ij log P_ij with 0 log 0 = 0, in nats."""
    coo = m.P.tocoo()
    mask = coo.data > 0
    rows = coo.row[mask]
    data = coo.data[mask]
    return float(-(m.pi[rows] * data * np.log(data)).sum())


def parry_measure(shift, tol=PERRON_TOL):
    """Markov measure of maximal entropy of an irreducible shift.

    P_ij = A_ij v_j / (lambda v_i) with v the right Perron vector, and
    pi_i proportional to u_i v_i.
    """
    pd = perron(shift, tol=tol)
    lam, v, u = pd.value, pd.right, pd.left
    coo = shift.matrix.tocoo()
    data = v[coo.col] / (lam * v[coo.row])
    P = sp.csr_matrix((data, (coo.row, coo.col)), shape=shift.matrix.shape)
    rows = np.asarray(P.sum(axis=1)).ravel()
    P = sp.diags(1.0 / rows) @ P  # absorb residual drift, rows sum to 1
    pi = u * v
    pi = pi / pi.sum()
    return MarkovMeasure(shift, pi, P)


def bernoulli_measure(shift, probs):
    """IID measure with the given symbol probabilities (full-support rows)."""
    probs = np.asarray(probs, dtype=np.float64)
    n = shift.num_states
    if probs.shape != (n,):
        raise ValueError("need one probability per state")
    P = np.tile(probs, (n, 1))
    return MarkovMeasure(shift, probs, P)


def periodic_orbit_measure(shift, cycle):
    """Invariant measure of the periodic orbit through a simple state cycle.

    `cycle` lists distinct states with an edge between consecutive entries
    and from the last back to the first.  Off-cycle rows of P are filled
    deterministically so the matrix stays stochastic; they carry no mass.
    """
    cycle = tuple(cycle)
    if len(set(cycle)) != len(cycle):
        raise ValueError("cycle must visit distinct states")
    n = shift.num_states
    nxt = {}
    for i, s in enumerate(cycle):
        t = cycle[(i + 1) % len(cycle)]
        if not shift.has_edge(s, t):
            raise ValueError(f"missing edge {s}->{t} in the cycle")
        nxt[s] = t
    rows, cols = [], []
    for s in range(n):
        t = nxt.get(s)
        if t is None:
            t = shift.successors(s)[0]
        rows.append(s)
        cols.append(t)
    P = sp.csr_matrix(
        (np.ones(n), (rows, cols)), shape=(n, n)
    )
    pi = np.zeros(n)
    pi[list(cycle)] = 1.0 / len(cycle)
    return MarkovMeasure(shift, pi, P)


def stationary_distribution(shift, P, tol=1e-13, max_iter=PERRON_MAX_ITER):
    """Stationary vector of a row-stochastic matrix supported on the shift."""
    p = graph_period(shift)
    PT = sp.csr_matrix(P.T)
    lam, pi, resid, _ = _power_vector(PT, p, tol, max_iter)
    return pi / pi.sum()


def random_markov_measure(shift, rng):
    """Support-compatible random Markov measure (Dirichlet rows), stationary pi."""
    coo = shift.matrix.tocoo()
    weights = rng.gamma(1.0, 1.0, size=coo.nnz)
    P = sp.csr_matrix((weights, (coo.row, coo.col)), shape=shift.matrix.shape)
    rows = np.asarray(P.sum(axis=1)).ravel()
    P = sp.diags(1.0 / rows) @ P
    pi = stationary_distribution(shift, P)
    return MarkovMeasure(shift, pi, P)


@dataclass(frozen=True)
class RoofFunction:
    """Strictly positive locally constant roof, given on cylinders of fixed depth."""

    depth: int
    values: dict = field(compare=False)

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("roof depth must be >= 1")
        vals = {tuple(k): float(v) for k, v in self.values.items()}
        if not vals:
            raise ValueError("roof needs at least one value")
        if any(len(k) != self.depth for k in vals):
            raise ValueError("every roof key must have the declared depth")
        if min(vals.values()) <= 0:
            raise ValueError("roof must be strictly positive")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value, alphabet_size=1):
        return cls(1, {(a,): value for a in range(alphabet_size)})

    def __call__(self, word):
        return self.values[tuple(word)]

    def covers(self, shift, budget=DEFAULT_WORD_BUDGET):
        """True iff every admissible label word of the roof depth has a value."""
        from .words import label_language

        return all(
            w in self.values for w in label_language(shift, self.depth, budget=budget)
        )


def roof_integral(m, rho, budget=DEFAULT_WORD_BUDGET):
    """Exact integral of a locally constant roof against a Markov measure."""
    table = m.cylinder_table(rho.depth, budget=budget)
    total = 0.0
    for w, p in table.items():
        v = rho.values.get(w)
        if v is None:
            raise ValueError(f"roof has no value on the admissible word {w}")
        total += v * p
    return total


def abramov(h_base, roof_int):
    """Entropy of the suspension: base entropy divided by the roof integral."""
    if roof_int <= 0:
        raise ValueError("roof integral must be positive")
    return h_base / roof_int
