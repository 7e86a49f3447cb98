"""Analytic bound evaluators, exact tail oracles, and closed-form thresholds.

Also houses the deterministic greedy half cut and the variance-set
construction it feeds; both are exact combinatorial statements checked as
hard guarantees rather than probabilistic ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Tuple

import numpy as np

from .ensembles import RngStream
from .errors import DomainError, InvalidProbability, UnequalRowSums

MODELS = ("er_connectivity", "z2_gaussian", "z2_er", "sbm")


@dataclass(frozen=True)
class ThresholdQuery:
    """Model name plus its parameters for a phase-threshold evaluation."""

    model: str
    params: Mapping[str, float]


def chernoff_degree_bound(n: int, rho: float, t: float) -> float:
    """Chernoff upper bound on P[deg(i) < t * E deg(i)] for ER(n, rho log n / n).

    Equals exp(-[1 - t - t log(1/t)] * ((n-1)/n) * rho * log n) for
    0 < t <= 1.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    if rho < 0.0:
        raise DomainError("rho must be >= 0")
    if not 0.0 < t <= 1.0:
        raise DomainError("t must be in (0, 1]")
    exponent = (1.0 - t - t * math.log(1.0 / t)) * ((n - 1) / n) * rho * math.log(n)
    return math.exp(-exponent)


def bernstein_bound(t: float, m: int, var_each: float, linf_each: float) -> float:
    """Bernstein tail bound exp(-(t^2/2) / (m var + (t/3) linf)).

    Upper-bounds P[sum of m iid centered variables > t] given a per-term
    variance and sup bound.
    """
    if t < 0.0 or m < 0 or var_each < 0.0 or linf_each < 0.0:
        raise DomainError("arguments must be nonnegative")
    if t == 0.0:
        return 1.0
    denom = m * var_each + (t / 3.0) * linf_each
    if denom == 0.0:
        return 0.0
    return math.exp(-(t * t / 2.0) / denom)


def _step_probs(p: float, q: float) -> Tuple[float, float, float]:
    if not 0.0 <= p <= 1.0:
        raise InvalidProbability(f"p={p} outside [0, 1]")
    if not 0.0 <= q <= 1.0:
        raise InvalidProbability(f"q={q} outside [0, 1]")
    plus = q * (1.0 - p)
    minus = p * (1.0 - q)
    return plus, minus, 1.0 - plus - minus


def bernoulli_diff_distribution(m: int, p: float, q: float) -> np.ndarray:
    """PMF of sum_{i<=m} (Z_i - W_i) on the lattice -m..m (index offset m).

    Z_i ~ Bernoulli(q) and W_i ~ Bernoulli(p) independent; computed by
    dynamic-programming convolution of the three-point step.
    """
    if m < 0:
        raise DomainError("m must be >= 0")
    plus, minus, zero = _step_probs(p, q)
    dist = np.zeros(2 * m + 1)
    dist[m] = 1.0
    for _ in range(m):
        nxt = zero * dist
        nxt[1:] += plus * dist[:-1]
        nxt[:-1] += minus * dist[1:]
        dist = nxt
    return dist


def bernoulli_diff_tail(m: int, p: float, q: float, delta: float) -> float:
    """Exact P[sum (Z_i - W_i) >= delta]; real delta ceils to the lattice."""
    dist = bernoulli_diff_distribution(m, p, q)
    thr = math.ceil(delta)
    if thr <= -m:
        return 1.0
    if thr > m:
        return 0.0
    return float(np.sum(dist[thr + m :]))


def bernoulli_diff_tail_mc(
    m: int, p: float, q: float, delta: float, trials: int, rng: RngStream
) -> Tuple[float, float]:
    """Monte Carlo estimate of the same tail with its standard error."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    _step_probs(p, q)  # validate
    s = np.zeros(trials, dtype=np.int32)
    for _ in range(m):
        s += rng.bernoulli(q, trials)
        s -= rng.bernoulli(p, trials)
    hits = float(np.mean(s >= math.ceil(delta)))
    se = math.sqrt(hits * (1.0 - hits) / trials)
    return hits, se


def threshold_margin(query: ThresholdQuery) -> float:
    """Signed distance to the model's predicted phase boundary.

    Positive means the asymptotic theory predicts success with high
    probability. Margins: ER connectivity rho - 1; SBM sqrt(alpha) -
    sqrt(beta) - sqrt(2); Gaussian synchronization sqrt(n / (2 log n)) -
    sigma; ER synchronization (n-1)p minus the Bernstein-derived rate with
    inputs (K, delta) defaulting to the asymptotic form K = delta = 0.
    """
    params = dict(query.params)
    model = query.model
    if model == "er_connectivity":
        rho = float(params["rho"])
        if rho < 0.0:
            raise DomainError("rho must be >= 0")
        return rho - 1.0
    if model == "sbm":
        alpha, beta = float(params["alpha"]), float(params["beta"])
        if alpha < 0.0 or beta < 0.0:
            raise DomainError("alpha and beta must be >= 0")
        return math.sqrt(alpha) - math.sqrt(beta) - math.sqrt(2.0)
    if model == "z2_gaussian":
        n, sigma = int(params["n"]), float(params["sigma"])
        if n < 2:
            raise DomainError("n must be >= 2")
        if sigma < 0.0:
            raise DomainError("sigma must be >= 0")
        return math.sqrt(n / (2.0 * math.log(n))) - sigma
    if model == "z2_er":
        n = int(params["n"])
        p = float(params["p"])
        eps = float(params["eps"])
        cap = float(params.get("K", 0.0))
        delta = float(params.get("delta", 0.0))
        if n < 2:
            raise DomainError("n must be >= 2")
        if not 0.0 <= p <= 1.0:
            raise InvalidProbability(f"p={p} outside [0, 1]")
        if not 0.0 <= eps < 0.5:
            raise InvalidProbability(f"eps={eps} outside [0, 1/2)")
        logn = math.log(n)
        rate = (
            (1.0 + delta)
            * (2.0 / (1.0 - 2.0 * eps) ** 2)
            * (1.0 + cap / math.sqrt(logn) + (5.0 / 3.0) * (1.0 - 2.0 * eps))
            * logn
        )
        return (n - 1) * p - rate
    raise DomainError(f"unknown threshold model {model!r}")


def greedy_half_cut(weights) -> Tuple[np.ndarray, np.ndarray]:
    """Greedy partition cutting at least half the total edge weight.

    Nodes are assigned in index order to whichever side cuts more of their
    weight to already-placed nodes (ties cut toward the first side). The
    returned S is the larger side.
    """
    w = np.asarray(weights, dtype=np.float64)
    n = w.shape[0]
    if w.ndim != 2 or w.shape[1] != n:
        raise DomainError("weights must be square")
    if np.any(w < 0.0):
        raise DomainError("weights must be nonnegative")
    if not np.allclose(w, w.T) or np.any(np.diag(w) != 0.0):
        raise DomainError("weights must be symmetric with zero diagonal")
    in_s = np.zeros(n, dtype=bool)
    to_s = np.zeros(n)
    to_t = np.zeros(n)
    for v in range(n):
        if to_s[v] >= to_t[v]:
            in_s[v] = False
            to_t += w[v]
        else:
            in_s[v] = True
            to_s += w[v]
    if in_s.sum() * 2 < n:
        in_s = ~in_s
    s = np.flatnonzero(in_s)
    sc = np.flatnonzero(~in_s)
    return s, sc


def build_variance_sets(var_matrix, sigma2: float) -> Tuple[np.ndarray, np.ndarray]:
    """Index sets (I, J) with |I| >= n/8 and row variance into J >= sigma2/8.

    Requires every row of the variance matrix to sum to sigma2 (1e-9
    relative). J is the complement side of the greedy half cut; I collects
    the rows of S whose mass into J is at least an eighth of the row total.
    """
    w = np.asarray(var_matrix, dtype=np.float64)
    n = w.shape[0]
    row_sums = w.sum(axis=1)
    tol = 1e-9 * max(abs(sigma2), 1.0)
    if np.any(np.abs(row_sums - sigma2) > tol):
        raise UnequalRowSums("rows must all sum to sigma2")
    s, j = greedy_half_cut(w)
    into_j = w[np.ix_(s, j)].sum(axis=1)
    i = s[into_j >= sigma2 / 8.0 - tol]
    return i, j
