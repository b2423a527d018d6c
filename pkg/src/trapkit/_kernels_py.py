"""Pure-Python kernels. Reference semantics for the compiled module."""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def independent_sets(adj: list[int], n: int, max_size: int) -> list[int]:
    """All non-empty independent sets with at most max_size members, as bitmasks.

    adj[v] is the neighbour mask of vertex v. Output is in preorder: a set
    is listed before its extensions, and extensions only add larger indices.
    """
    out: list[int] = []
    if max_size <= 0:
        return out
    # explicit preorder DFS; each frame is (mask, size, next candidate, banned)
    stack = [(0, 0, 0, 0)]
    while stack:
        mask, size, v, banned = stack.pop()
        while v < n and (banned >> v) & 1:
            v += 1
        if v >= n:
            continue
        stack.append((mask, size, v + 1, banned))
        child = mask | (1 << v)
        out.append(child)
        if size + 1 < max_size:
            stack.append((child, size + 1, v + 1, banned | adj[v] | (1 << v)))
    return out


def _g(x1, z1, x2, z2):
    # exponent of i picked up when multiplying Pauli (x1,z1) into (x2,z2)
    return np.where(
        (x1 == 1) & (z1 == 1),
        z2.astype(np.int64) - x2,
        np.where(
            (x1 == 1) & (z1 == 0),
            z2 * (2 * x2.astype(np.int64) - 1),
            np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2.astype(np.int64)), 0),
        ),
    )


def _rowsum(x: np.ndarray, z: np.ndarray, r: np.ndarray, h: int, i: int) -> None:
    total = 2 * int(r[h]) + 2 * int(r[i]) + int(_g(x[i], z[i], x[h], z[h]).sum())
    r[h] = 0 if total % 4 == 0 else 1
    x[h] ^= x[i]
    z[h] ^= z[i]


def tableau_measure(x: np.ndarray, z: np.ndarray, r: np.ndarray, n: int, a: int, bit: int) -> tuple[int, int]:
    """Measure qubit a in the Z basis on a CHP tableau with 2n+1 rows.

    bit is used as the outcome when the result is random. Returns
    (outcome, was_random).
    """
    p = -1
    for row in range(n, 2 * n):
        if x[row, a]:
            p = row
            break
    if p >= 0:
        for row in range(2 * n):
            if row != p and x[row, a]:
                _rowsum(x, z, r, row, p)
        x[p - n] = x[p]
        z[p - n] = z[p]
        r[p - n] = r[p]
        x[p] = 0
        z[p] = 0
        z[p, a] = 1
        r[p] = bit & 1
        return int(r[p]), 1
    s = 2 * n
    x[s] = 0
    z[s] = 0
    r[s] = 0
    for row in range(n):
        if x[row, a]:
            _rowsum(x, z, r, s, row + n)
    return int(r[s]), 0


def tableau_rotate_measure(
    x: np.ndarray, z: np.ndarray, r: np.ndarray, n: int, a: int, s_pow: int, pauli: int, bit: int
) -> tuple[int, int]:
    """Apply S^s_pow, then H, then a Pauli (0 I, 1 X, 2 Y, 3 Z) to qubit a and Z-measure it."""
    for _ in range(s_pow):
        r ^= x[:, a] & z[:, a]
        z[:, a] ^= x[:, a]
    xa = x[:, a].copy()
    r ^= xa & z[:, a]
    x[:, a] = z[:, a]
    z[:, a] = xa
    if pauli == 1:
        r ^= z[:, a]
    elif pauli == 2:
        r ^= x[:, a] ^ z[:, a]
    elif pauli == 3:
        r ^= x[:, a]
    return tableau_measure(x, z, r, n, a, bit)


def count_failures(
    dev_masks: np.ndarray,
    test_pos: np.ndarray,
    canvas_idx: np.ndarray,
    canvas_masks: np.ndarray,
    parity: np.ndarray,
) -> np.ndarray:
    """Failed test rounds per trial for predicate traps.

    dev_masks[t, j] is the XY-support bitmask of the deviation in round j
    of trial t. Test round k of trial t sits at position test_pos[t, k]
    and uses canvas canvas_idx[t, k]. A canvas with parity 0 fails when
    the support hits its mask; with parity 1 when the overlap is odd.
    """
    trials, s = test_pos.shape
    out = np.zeros(trials, dtype=np.int64)
    for t in range(trials):
        fails = 0
        for k in range(s):
            c = int(canvas_idx[t, k])
            hit = int(dev_masks[t, int(test_pos[t, k])]) & int(canvas_masks[c])
            if parity[c]:
                fails += bin(hit).count("1") & 1
            else:
                fails += 1 if hit else 0
        out[t] = fails
    return out
