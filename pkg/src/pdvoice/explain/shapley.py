"""Shapley attributions of a scoring function against a background sample.

The game is ``v(S) = mean_b f(x_S, b_{~S})``: features in ``S`` come from
the explained row, the rest from each background row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb, factorial

import numpy as np

EXACT_MAX_D = 15
_CHUNK_ROWS = 200_000


@dataclass(frozen=True)
class Attribution:
    base_value: float
    phi: np.ndarray
    fx: float
    x: np.ndarray = field(default=None, repr=False)
    flags: tuple = ()

    @property
    def residual(self) -> float:
        """Local-accuracy gap ``base + sum(phi) - f(x)``."""
        return float(self.base_value + self.phi.sum() - self.fx)


def _as_background(background, d):
    bg = np.atleast_2d(np.asarray(background, dtype=np.float64))
    if bg.shape[0] == 0 or bg.shape[1] != d:
        raise ValueError(f"background must be a non-empty (B, {d}) array")
    return bg


def coalition_values(f, x, background, masks) -> np.ndarray:
    """``v(S)`` for each boolean row of ``masks`` (shape (M, D))."""
    masks = np.asarray(masks, dtype=bool)
    b = background.shape[0]
    per = max(1, _CHUNK_ROWS // b)
    out = np.empty(masks.shape[0])
    for s in range(0, masks.shape[0], per):
        m = masks[s : s + per]
        rows = np.where(m[:, None, :], x[None, None, :], background[None, :, :])
        scores = np.asarray(f(rows.reshape(-1, x.size)), dtype=np.float64)
        out[s : s + per] = scores.reshape(m.shape[0], b).mean(axis=1)
    return out


def _all_masks(d):
    codes = np.arange(1 << d)
    return ((codes[:, None] >> np.arange(d)) & 1).astype(bool)


def exact_shapley(f, x, background) -> Attribution:
    """Shapley values by enumerating all ``2^D`` coalitions (``D <= 15``).

    ``phi_j = sum_{S not containing j} |S|! (D-|S|-1)! / D! * (v(S+j) - v(S))``.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    d = x.size
    if d > EXACT_MAX_D:
        raise ValueError(f"exact enumeration is limited to D <= {EXACT_MAX_D} (got {d})")
    bg = _as_background(background, d)
    masks = _all_masks(d)
    v = coalition_values(f, x, bg, masks)
    sizes = masks.sum(axis=1)
    weight = np.array([factorial(s) * factorial(d - s - 1) / factorial(d) for s in range(d)])
    codes = np.arange(1 << d)
    phi = np.empty(d)
    for j in range(d):
        without = codes[(codes >> j) & 1 == 0]
        phi[j] = np.sum(weight[sizes[without]] * (v[without | (1 << j)] - v[without]))
    return Attribution(float(v[0]), phi, float(v[-1]), x)


def shapley_kernel_weight(d: int, s: int) -> float:
    """Kernel weight ``(D-1) / (C(D,s) s (D-s))`` of a size-``s`` coalition."""
    return (d - 1) / (comb(d, s) * s * (d - s))


def _sample_coalitions(d, n_samples, rng):
    """Coalitions and their regression weights.

    Sizes are taken in complementary pairs (1 and D-1, then 2 and D-2, ...).
    While the remaining budget covers every subset of a pair of sizes they
    are enumerated with exact kernel weights; the leftover budget samples
    the remaining sizes in complementary pairs, spreading the remaining
    kernel mass uniformly over the draws.
    """
    masks, weights = [], []
    budget = n_samples
    sizes = list(range(1, d))
    kernel_mass = {s: comb(d, s) * shapley_kernel_weight(d, s) for s in sizes}
    done = set()
    for s in range(1, d // 2 + 1):
        pair = {s, d - s}
        need = sum(comb(d, t) for t in pair)
        if need > budget:
            break
        for t in sorted(pair):
            for combo in combinations(range(d), t):
                m = np.zeros(d, dtype=bool)
                m[list(combo)] = True
                masks.append(m)
                weights.append(shapley_kernel_weight(d, t))
        budget -= need
        done |= pair
    rest = [s for s in sizes if s not in done]
    if rest and budget >= 2:
        p = np.array([kernel_mass[s] for s in rest])
        total_mass = p.sum()
        n_pairs = budget // 2
        drawn_sizes = rng.choice(rest, size=n_pairs, p=p / total_mass)
        w = total_mass / (2 * n_pairs)
        for s in drawn_sizes:
            m = np.zeros(d, dtype=bool)
            m[rng.choice(d, size=s, replace=False)] = True
            masks += [m, ~m]
            weights += [w, w]
    if not masks:
        return np.zeros((0, d), dtype=bool), np.zeros(0)
    return np.array(masks), np.array(weights)


def kernel_shap(f, x, background, n_samples: int = 2048, seed=None, regularization: float = 0.0) -> Attribution:
    """Kernel SHAP: weighted least squares over coalitions with the efficiency constraint eliminated.

    With a budget of at least ``2^D - 2`` coalitions every coalition is
    enumerated and the result equals the exact Shapley values. A singular
    normal matrix falls back to a small ridge term and is flagged.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    d = x.size
    bg = _as_background(background, d)
    if n_samples < 2 * d + 2:
        raise ValueError(f"n_samples must be >= 2D + 2 = {2 * d + 2}")
    base = float(np.mean(f(bg)))
    fx = float(np.asarray(f(x[None, :]), dtype=np.float64)[0])
    if d == 1:
        return Attribution(base, np.array([fx - base]), fx, x)
    masks, w = _sample_coalitions(d, n_samples - 2, np.random.default_rng(seed))
    v = coalition_values(f, x, bg, masks)
    Z = masks.astype(np.float64)
    # phi_last = (fx - base) - sum(other phi)
    A = Z[:, :-1] - Z[:, -1:]
    t = v - base - Z[:, -1] * (fx - base)
    AtW = A.T * w
    M = AtW @ A
    rhs = AtW @ t
    flags = ()
    if regularization > 0:
        M = M + regularization * np.eye(d - 1)
    if np.linalg.cond(M) > 1e12:
        M = M + 1e-8 * max(np.trace(M) / (d - 1), 1e-12) * np.eye(d - 1)
        flags = ("kernel-shap:singular-system:ridge-fallback",)
    head = np.linalg.solve(M, rhs)
    phi = np.append(head, (fx - base) - head.sum())
    return Attribution(base, phi, fx, x, flags)
