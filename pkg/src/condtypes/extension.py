"""Constructive extension results on finite spaces.

* :func:`coherent_extend` appends one level to a coherent prefix using the
  recursively defined section ``psi``: ``psi^1(s) = (s, base_j)`` and
  ``psi^(n+1)(s, q) = (s, coherent_extend(q))``.
* :func:`lift_cps` pulls a CPS on ``X x Z`` back through a surjection
  ``Y -> Z`` by pushing it forward along a right inverse.  On a finite powerset
  every map is measurable and every measure is already complete, so no
  measurable-selection machinery is needed.
"""

from __future__ import annotations

from typing import Mapping

from .cps import (
    ConditioningFamily,
    Cps,
    CpsError,
    FiniteSpace,
    Measure,
    conditional_of_measure,
    cylinder_base,
    cylinder_family,
    pushforward_cps,
)
from .hierarchy import HierarchyPrefix, PrefixError, check_prefix_coherence, level_from_masses
from .structure import Frame


def canonical_base_cps(space: FiniteSpace, family: ConditioningFamily) -> Cps:
    """Uniform conditionals: ``mu(A|B) = |A & B| / |B|``."""
    return conditional_of_measure(Measure.uniform(space), family)


def base_prefix(frame: Frame, player: int) -> HierarchyPrefix:
    return HierarchyPrefix(frame, player, (canonical_base_cps(frame.space, frame.families[player]),))


def coherent_extend(p: HierarchyPrefix, frame: Frame | None = None, *, check: bool = True) -> HierarchyPrefix:
    """Order ``n+1`` prefix whose first ``n`` levels are ``p``."""
    if frame is not None and frame != p.frame:
        raise PrefixError("prefix belongs to a different frame")
    if check:
        report = check_prefix_coherence(p)
        if not report.valid:
            raise PrefixError(f"cannot extend an incoherent prefix: {report.violations[0]}")
    return _extend(p, {})


def _extend(p: HierarchyPrefix, memo: dict) -> HierarchyPrefix:
    hit = memo.get(p)
    if hit is not None:
        return hit
    frame, i = p.frame, p.player
    top = p.levels[-1]
    if p.order == 1:
        seed = base_prefix(frame, 1 - i)
        rows = [{(s, seed): v for s, v in m.items()} for m in top.conditionals]
    else:
        rows = []
        for m in top.conditionals:
            row = {}
            for (s, q), v in m.items():
                key = (s, _extend(q, memo))
                row[key] = row.get(key, 0) + v
            rows.append(row)
    new = HierarchyPrefix(frame, i, p.levels + (level_from_masses(frame, i, rows),))
    memo[p] = new
    return new


def right_inverse(f: Mapping, domain: FiniteSpace | None = None, codomain: FiniteSpace | None = None) -> dict:
    """Section ``g`` of a surjection ``f``: ``g(z)`` is the first preimage of ``z`` in domain order."""
    dom = domain.points if domain is not None else tuple(f)
    g: dict = {}
    for y in dom:
        g.setdefault(f[y], y)
    if codomain is not None:
        for z in codomain.points:
            if z not in g:
                raise CpsError(f"map is not surjective: nothing is sent to {z!r}")
        extra = [z for z in g if z not in codomain]
        if extra:
            raise CpsError(f"map sends a point to {extra[0]!r}, outside the codomain")
        return {z: g[z] for z in codomain.points}
    return g


def lift_cps(nu: Cps, f1: Mapping, domain: FiniteSpace | None = None) -> Cps:
    """A CPS ``mu`` on ``X x Y`` whose image under ``(Id_X, f1)`` is ``nu`` (on ``X x Z``)."""
    if nu.space.factors is None:
        raise CpsError("nu must live on a product space X x Z")
    x, z = nu.space.factors
    base = cylinder_base(nu.family)
    y = domain if domain is not None else FiniteSpace(tuple(f1))
    for pt in y.points:
        if pt not in f1:
            raise CpsError(f"surjection is undefined at {pt!r}")
    g = right_inverse(f1, y, z)
    target = cylinder_family(base, y)
    mu = pushforward_cps(nu, lambda p: (p[0], g[p[1]]), target)
    back = pushforward_cps(mu, lambda p: (p[0], f1[p[1]]), nu.family)
    if back != nu:
        raise AssertionError("lifted CPS does not push forward to the input")
    return mu
