"""Independent reference checks used by the tests.

Nothing here imports detector code: verdicts are recomputed from first
principles (exact sets, plain lists, explicit probability products).
"""

from __future__ import annotations

from collections import defaultdict


def duplicate_set_verdicts(deliveries):
    """Replayed iff (dest, src, ctr) was delivered before. Input: iterable of (dest, src, ctr)."""
    seen = set()
    out = []
    for key in deliveries:
        out.append("replayed" if key in seen else "fresh")
        seen.add(key)
    return out


def last_w_verdicts(items, window):
    """Replayed iff the packet equals one of the last `window` accepted packets
    from the same neighbor. Input: iterable of (neighbor, packet_bytes)."""
    accepted = defaultdict(list)
    out = []
    for neighbor, data in items:
        if data in accepted[neighbor][-window:]:
            out.append("replayed")
        else:
            out.append("fresh")
            accepted[neighbor].append(data)
    return out


def fp_occupancy_exact(m, k, n_bits):
    """Exact false-positive probability when `n_bits` uniform positions are set
    in an m-bit array and a probe checks k further uniform positions.

    Sums over the occupancy distribution: P(j distinct bits set) =
    C(m, j) * surj(n_bits, j) / m**n_bits, each contributing (j/m)**k. The
    textbook product form ignores the variance of j, so it differs slightly.
    """
    from fractions import Fraction
    from math import comb

    def surj(n, j):
        return sum((-1) ** i * comb(j, i) * (j - i) ** n for i in range(j + 1))

    total = sum(Fraction(comb(m, j) * surj(n_bits, j), m ** n_bits) * Fraction(j, m) ** k
                for j in range(min(m, n_bits) + 1))
    return float(total)
