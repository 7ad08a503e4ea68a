"""Exact cone membership via phase-one simplex (Bland's rule) over Fractions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class ConeMembership:
    member: bool
    # nonnegative weights on the generators when member
    combination: tuple[Fraction, ...] | None = None
    # linear functional phi with phi(g) >= 0 for every generator and phi(target) < 0
    separator: tuple[Fraction, ...] | None = None


def cone_membership(generators: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> ConeMembership:
    """Decide whether ``target`` is a nonnegative combination of ``generators``.

    Either a combination or a Farkas separator is always returned, both exact.
    """
    m = len(target)
    k = len(generators)
    b = [Fraction(x) for x in target]
    if all(x == 0 for x in b):
        return ConeMembership(True, combination=(Fraction(0),) * k)
    sign = [1 if x >= 0 else -1 for x in b]
    rows = []
    for i in range(m):
        row = [sign[i] * Fraction(generators[j][i]) for j in range(k)]
        row += [Fraction(1) if t == i else Fraction(0) for t in range(m)]
        row.append(sign[i] * b[i])
        rows.append(row)
    ncols = k + m
    cost = [Fraction(0)] * k + [Fraction(1)] * m
    basis = [k + i for i in range(m)]
    # reduced-cost row, kept in step with the tableau
    z = [cost[j] - sum((rows[r][j] for r in range(m)), Fraction(0)) for j in range(ncols)]
    z[k:ncols] = [Fraction(0)] * m
    z_rhs = -sum((rows[r][-1] for r in range(m)), Fraction(0))

    degenerate = 0
    while True:
        # Dantzig's rule, falling back to Bland's after a run of degenerate pivots
        candidates = [j for j in range(ncols) if z[j] < 0]
        if not candidates:
            break
        entering = candidates[0] if degenerate > 2 * m else min(candidates, key=lambda j: (z[j], j))
        leave = None
        best = None
        for r in range(m):
            a = rows[r][entering]
            if a > 0:
                ratio = rows[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    best, leave = ratio, r
        if leave is None:  # unbounded direction cannot occur in phase one
            raise RuntimeError("phase-one simplex unbounded")
        degenerate = degenerate + 1 if best == 0 else 0
        piv = rows[leave][entering]
        rows[leave] = [x / piv for x in rows[leave]]
        for r in range(m):
            if r != leave and rows[r][entering] != 0:
                factor = rows[r][entering]
                rows[r] = [x - factor * y if y else x for x, y in zip(rows[r], rows[leave])]
        factor = z[entering]
        z = [x - factor * y if y else x for x, y in zip(z, rows[leave][:-1])]
        z_rhs -= factor * rows[leave][-1]
        basis[leave] = entering

    duals = [sum((cost[basis[r]] * rows[r][k + i] for r in range(m)), Fraction(0)) for i in range(m)]
    objective = sum(cost[basis[r]] * rows[r][-1] for r in range(m))
    if objective == 0:
        weights = [Fraction(0)] * k
        for r in range(m):
            if basis[r] < k:
                weights[basis[r]] = rows[r][-1]
        return ConeMembership(True, combination=tuple(weights))
    separator = tuple(-duals[i] * sign[i] for i in range(m))
    return ConeMembership(False, separator=separator)
