"""Optimality and coverage gaps between an exact and an approximate skyline.

Each skyline owns the box [0, st of its last entry] x [0, sc of its first
entry]; its region is the part of that box no entry weakly dominates, a
staircase under the entries. Areas are exact (Fraction) in seconds x cents.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .skyline import CostVector


class EmptySkylineError(ValueError):
    pass


def _vectors(ls):
    vecs = ls.vectors if hasattr(ls, "vectors") else [CostVector(*v) for v in ls]
    if not vecs:
        raise EmptySkylineError("region of an empty skyline is undefined")
    return sorted(vecs)


@dataclass(frozen=True)
class SkylineRegion:
    """Staircase ``[(x0, x1, height), ...]`` covering [0, width]."""

    steps: tuple
    width: Fraction
    height: Fraction

    @property
    def area(self) -> Fraction:
        return sum(((x1 - x0) * h for x0, x1, h in self.steps), Fraction(0))

    def height_at(self, x):
        for x0, x1, h in self.steps:
            if x0 <= x < x1:
                return h
        return Fraction(0)


def nondominated_region(ls) -> SkylineRegion:
    vecs = _vectors(ls)
    xs = [Fraction(v.st, 1000) for v in vecs]   # seconds, exact
    ys = [Fraction(v.sc) for v in vecs]
    steps = [(Fraction(0), xs[0], ys[0])]
    for i in range(len(vecs) - 1):
        # left of the next point the region is capped by the lowest sc seen so far
        steps.append((xs[i], xs[i + 1], min(ys[: i + 1])))
    steps = tuple(s for s in steps if s[1] > s[0])
    return SkylineRegion(steps, xs[-1], ys[0])


def intersection_area(a: SkylineRegion, b: SkylineRegion) -> Fraction:
    cuts = sorted({x for s in a.steps + b.steps for x in s[:2]} | {Fraction(0)})
    limit = min(a.width, b.width)
    total = Fraction(0)
    for x0, x1 in zip(cuts, cuts[1:]):
        if x0 >= limit:
            break
        x1 = min(x1, limit)
        total += (x1 - x0) * min(a.height_at(x0), b.height_at(x0))
    return total


@dataclass(frozen=True)
class GapReport:
    a_opt: Fraction
    a_apx: Fraction
    a_cover: Fraction
    a_miss: Fraction
    optimality_gap: float
    coverage_gap: float

    CSV_HEADER = ("query_id", "a_opt", "a_apx", "a_cover", "a_miss", "opt_gap", "cov_gap")

    def to_json(self):
        return {"a_opt": _num(self.a_opt), "a_apx": _num(self.a_apx),
                "a_cover": _num(self.a_cover), "a_miss": _num(self.a_miss),
                "optimality_gap": self.optimality_gap, "coverage_gap": self.coverage_gap}

    def csv_row(self, query_id):
        return [query_id, _num(self.a_opt), _num(self.a_apx), _num(self.a_cover),
                _num(self.a_miss), f"{self.optimality_gap:.6f}", f"{self.coverage_gap:.6f}"]


def _num(f: Fraction):
    return f.numerator if f.denominator == 1 else float(f)


def _ratio(num, den):
    return round(float(num / den), 6) if den else 0.0


def gap_report(opt, apx) -> GapReport:
    r_opt = nondominated_region(opt)
    r_apx = nondominated_region(apx)
    a_opt, a_apx = r_opt.area, r_apx.area
    a_cover = intersection_area(r_opt, r_apx)
    a_miss = a_opt - a_cover
    return GapReport(a_opt, a_apx, a_cover, a_miss,
                     _ratio(a_apx - a_cover, a_apx), _ratio(a_miss, a_opt))
