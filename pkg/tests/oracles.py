"""Independent reference implementations used to cross-check the library.

Everything here is deliberately naive: plain-Python Gaussian elimination,
linear scans, and direct enumeration, kept free of the code paths they
verify.
"""

from __future__ import annotations



def gaussian_stationary(transitions: dict[tuple[int, int], int], probs, states) -> dict[int, float]:
    """Solve the balance equations of a finite chain by dense elimination.

    transitions maps (state, symbol) to the next state.  Builds the equations
    sum_in = pi(x) row by row, replaces the last with normalization, and runs
    textbook partial-pivot elimination on plain lists.
    """
    states = list(states)
    index = {x: i for i, x in enumerate(states)}
    n = len(states)
    a = [[0.0] * n for _ in range(n)]
    for (y, s), x in transitions.items():
        a[index[x]][index[y]] += probs[s]
    for i in range(n):
        a[i][i] -= 1.0
    rhs = [0.0] * n
    a[n - 1] = [1.0] * n
    rhs[n - 1] = 1.0
    # forward elimination with partial pivoting
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[piv][col]) < 1e-300:
            raise ValueError("singular balance system")
        a[col], a[piv] = a[piv], a[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
                rhs[r] -= f * rhs[col]
    sol = [0.0] * n
    for r in range(n - 1, -1, -1):
        acc = rhs[r] - sum(a[r][c] * sol[c] for c in range(r + 1, n))
        sol[r] = acc / a[r][r]
    return {x: sol[i] for i, x in enumerate(states)}


def count_ones_below(n: int, num: int, den: int, ceiling: bool) -> int:
    """How many positions below n carry symbol 1, by direct summation."""
    total = 0
    for x in range(n):
        if ceiling:
            hi = -(-(x + 1) * num // den)
            lo = -(-x * num // den)
        else:
            hi = (x + 1) * num // den
            lo = x * num // den
        total += hi - lo
    return total


def cycle_symbols(freqs) -> list[int]:
    """Symbol run layout of one frequency cycle, by direct construction."""
    out = []
    for s, f in enumerate(freqs):
        out.extend([s] * f)
    return out


def enumerate_appearances(freqs, limit: int) -> tuple[list[int], list[int]]:
    """Label states 0..limit-1 with (symbol, appearance index) by scanning."""
    cycle = cycle_symbols(freqs)
    m = len(cycle)
    seen = [0] * len(freqs)
    symbols = []
    indices = []
    for x in range(limit):
        s = cycle[x % m]
        symbols.append(s)
        indices.append(seen[s])
        seen[s] += 1
    return symbols, indices


def kl_bits(p, q) -> float:
    """Mismatch cost from first principles, exact rational logs via float."""
    import math

    acc = 0.0
    for ps, qs in zip(p, q):
        ps = float(ps)
        qs = float(qs)
        if ps:
            acc += ps * math.log2(ps / qs)
    return acc


def unique_digit_removal(x: int, l: int, b: int) -> int | None:
    """The unique k with x // b**k inside {l .. b*l-1}, or None."""
    hits = []
    k = 0
    y = x
    while y >= l:
        if y < b * l:
            hits.append(k)
        y //= b
        k += 1
    if len(hits) > 1:
        raise AssertionError(f"digit removal not unique for {x}")
    return hits[0] if hits else None


def every_insertion_path_hits_once(x: int, l: int, b: int) -> bool:
    """Each digit string appended to x passes through {l .. b*l-1} exactly once."""
    from itertools import product

    hi = b * l - 1
    depth = 0
    v = x
    while v <= hi:
        v *= b
        depth += 1
    for digits in product(range(b), repeat=depth):
        v = x
        hits = 0
        for d in digits:
            v = v * b + d
            if l <= v <= hi:
                hits += 1
        if hits != 1:
            return False
    return True
