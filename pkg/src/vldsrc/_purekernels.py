"""Pure numpy implementations of the float-lane hot kernels.

Selected by :mod:`vldsrc.backend` when the compiled extension is missing or
disabled.  Must stay semantically identical to ``_cutoffcore.pyx``.
"""

import math

import numpy as np

BACKEND_NAME = "python"


def batch_expected_cutoff(values, masses, eps_grid):
    """Retained expectation of a sorted float spectrum at many eps values.

    values/masses: ascending atoms of a probability spectrum.
    Returns E(eps) = sum_{v<eta} v*m + (1-beta)*eta*m_eta for each eps,
    evaluated through prefix sums: with i the first index whose strict-suffix
    tail is <= eps, E = pvm[i] - (eps - tail[i]) * values[i].
    """
    v = np.asarray(values, dtype=np.float64)
    m = np.asarray(masses, dtype=np.float64)
    e = np.asarray(eps_grid, dtype=np.float64)
    if v.size == 0:
        return np.zeros_like(e)
    tail = np.concatenate((np.cumsum(m[::-1])[::-1][1:], [0.0]))
    pvm = np.cumsum(v * m)
    # count of indices with tail > eps == first index with tail <= eps
    idx = np.searchsorted(-tail, -e, side="left")
    idx = np.minimum(idx, v.size - 1)
    out = pvm[idx] - (e - tail[idx]) * v[idx]
    return np.maximum(out, 0.0)


def merge_float_atoms(values, masses, tol=1e-12):
    """Sort atoms by value and merge runs whose values lie within tol."""
    v = np.asarray(values, dtype=np.float64)
    m = np.asarray(masses, dtype=np.float64)
    order = np.argsort(v, kind="stable")
    v, m = v[order], m[order]
    keep = m > 0
    v, m = v[keep], m[keep]
    if v.size == 0:
        return v, m
    # group boundaries where the gap to the previous kept value exceeds tol
    new_group = np.empty(v.size, dtype=bool)
    new_group[0] = True
    np.greater(np.diff(v), tol, out=new_group[1:])
    gid = np.cumsum(new_group) - 1
    n_groups = gid[-1] + 1
    mv = np.zeros(n_groups)
    mm = np.zeros(n_groups)
    np.add.at(mm, gid, m)
    np.add.at(mv, gid, v * m)
    return mv / mm, mm


def split_rank_classes_float(log2_likelihoods, counts, n_values):
    """Mass of floor(log2(rank)) per value j, for ranked likelihood classes.

    Classes arrive in rank order (descending likelihood); the class occupying
    ranks [s, s+c) contributes 2^log2_likelihood * overlap to each dyadic
    block [2^j, 2^{j+1}) it intersects.  Counts are float64, so exactness is
    only guaranteed below 2^53 ranks (the exact lane handles the rest).
    """
    l2 = np.asarray(log2_likelihoods, dtype=np.float64)
    c = np.asarray(counts, dtype=np.float64)
    out = np.zeros(n_values, dtype=np.float64)
    s = 1.0
    for k in range(l2.size):
        remaining = c[k]
        ll = l2[k]
        while remaining > 0:
            j = int(math.floor(math.log2(s)))
            block_end = math.ldexp(1.0, j + 1)
            if s >= block_end:  # float-boundary guard
                j += 1
                block_end = math.ldexp(1.0, j + 1)
            take = min(remaining, block_end - s)
            if take <= 0:
                s = block_end
                continue
            if j >= n_values:
                raise ValueError("rank spectrum output array too short")
            # 2^(ll + log2(take)) dodges underflow of 2^ll alone
            out[j] += 2.0 ** (ll + math.log2(take))
            s += take
            new_remaining = remaining - take
            if new_remaining >= remaining:  # float absorption: no progress
                s = block_end
                new_remaining = remaining - take
            remaining = new_remaining if new_remaining > 0 else 0.0
    return out
