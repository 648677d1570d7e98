"""Independent straight-line oracles used to cross-check the package.

Everything here is written directly from the update formulas using plain
dicts and loops: no numpy, no packed bit tricks, no shared code with the
implementation under test. Deliberately slow and obvious.
"""

from __future__ import annotations

import math


def char_distance(x: str, y: str) -> int:
    """Character-wise Hamming distance (independent of any popcount path)."""
    assert len(x) == len(y)
    return sum(a != b for a, b in zip(x, y))


def reciprocal_weight(distance: int) -> float:
    return 1.0 / (distance + 1)


def poisson_pmf(k: int, lam: float) -> float:
    return lam ** k * math.exp(-lam) / math.factorial(k)


def binomial_pmf(k: int, n: int, p: float) -> float:
    if k > n:
        return 0.0
    return math.comb(n, k) * p ** k * (1.0 - p) ** (n - k)


def all_strings(n: int) -> list[str]:
    return [format(v, f"0{n}b") for v in range(2 ** n)]


# ---------------------------------------------------------------------------
# Richardson-Lucy


def rl_support(observed: dict[str, float], weight, iterations: int,
               include_self: bool = True, cutoff: int | None = None,
               tol: float | None = None):
    """Deconvolution restricted to the observed support.

    weight: callable distance -> float. Returns (normalized dict,
    unnormalized dict, l1 history). Stops early when tol is given and the
    L1 change drops below it.
    """
    keys = sorted(observed)

    def w(x: str, y: str) -> float:
        h = char_distance(x, y)
        if h == 0 and not include_self:
            return 0.0
        if cutoff is not None and h > cutoff:
            return 0.0
        return weight(h)

    u = {k: observed[k] for k in keys}
    history = []
    for _ in range(iterations):
        c = {i: sum(w(i, j) * u[j] for j in keys) for i in keys}
        u_next = {
            j: u[j] * sum(observed[i] / c[i] * w(i, j) for i in keys)
            for j in keys
        }
        history.append(sum(abs(u_next[k] - u[k]) for k in keys))
        u = u_next
        if tol is not None and history[-1] < tol:
            break
    total = sum(u.values())
    normalized = {k: v / total for k, v in u.items()}
    return normalized, u, history


def rl_dense_full_space(observed: dict[str, float], weight, iterations: int):
    """Deconvolution over the full 2^n space with zero mass off-support.

    Mathematically identical to the support-restricted run when the weight
    never vanishes between distinct strings: zero-mass nodes contribute
    nothing and stay at zero. Used to show support restriction is lossless.
    """
    n = len(next(iter(observed)))
    keys = all_strings(n)
    d = {k: observed.get(k, 0.0) for k in keys}
    u = dict(d)
    for _ in range(iterations):
        c = {
            i: sum(weight(char_distance(i, j)) * u[j] for j in keys)
            for i in keys
        }
        u_next = {}
        for j in keys:
            acc = 0.0
            for i in keys:
                if d[i] > 0.0:  # zero observations contribute nothing
                    acc += d[i] / c[i] * weight(char_distance(i, j))
            u_next[j] = u[j] * acc
        u = u_next
    total = sum(u.values())
    return {k: v / total for k, v in u.items() if v > 0.0}


# ---------------------------------------------------------------------------
# Neighborhood scoring


def hammer_reference(observed: dict[str, float]):
    """Literal evaluation of the HAMMER scoring chain.

    Returns (likelihoods, scores, chs table, weight table); the mitigation
    output is likelihoods normalized, or the input unchanged if they are
    all zero.
    """
    keys = sorted(observed)
    n = len(keys[0])
    bound = max(1, n // 2)
    chs = {}
    weights = {}
    scores = {}
    likelihoods = {}
    for x in keys:
        chs[x] = [0.0] * (bound + 1)
        for y in keys:
            h = char_distance(x, y)
            if h <= bound:
                chs[x][h] += observed[y]
        weights[x] = [
            (1.0 / c if c != 0.0 else 0.0) for c in chs[x]
        ]
        s = 0.0
        for i in range(1, bound + 1):
            shell = 0.0
            for y in keys:
                if char_distance(x, y) == i and observed[y] < observed[x]:
                    shell += observed[y]
            s += weights[x][i] * shell
        scores[x] = s
        likelihoods[x] = s * observed[x]
    return likelihoods, scores, chs, weights


def hammer_mitigate_reference(observed: dict[str, float]) -> dict[str, float]:
    likelihoods, _, _, _ = hammer_reference(observed)
    total = sum(likelihoods.values())
    if total == 0.0:
        return dict(observed)
    return {k: v / total for k, v in likelihoods.items() if v > 0.0}


def poisson_mitigate_reference(observed: dict[str, float],
                               lam: float) -> dict[str, float]:
    keys = sorted(observed)
    n = len(keys[0])
    bound = max(1, n // 2)
    likelihoods = {}
    for x in keys:
        s = 0.0
        for i in range(1, bound + 1):
            shell = 0.0
            for y in keys:
                if char_distance(x, y) == i and observed[y] < observed[x]:
                    shell += observed[y]
            s += poisson_pmf(i, lam) * shell
        likelihoods[x] = s * observed[x]
    total = sum(likelihoods.values())
    if total == 0.0:
        return dict(observed)
    return {k: v / total for k, v in likelihoods.items() if v > 0.0}


# ---------------------------------------------------------------------------
# Rank


def rank_reference(probs: dict[str, float], target: str) -> int:
    p = probs.get(target, 0.0)
    return 1 + sum(1 for v in probs.values() if v > p)
