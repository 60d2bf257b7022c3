"""Checkers for the quadratic A-infinity relations and strict units.

For every composable chain (a_d, ..., a_1) the relation is

    sum over 1 <= m <= d, 0 <= n <= d-m of
        (-1)^maltese(n) mu^(d-m+1)(a_d, ..., a_(n+m+1),
                                    mu^m(a_(n+m), ..., a_(n+1)),
                                    a_n, ..., a_1)  =  0,

with maltese(n) = |a_1| + ... + |a_n| - n.  Rather than looping over all
chains, the checker iterates over pairs of nonzero table entries: an
outer entry with the inner entry's output at one of its slots is exactly
one term of one relation instance.
"""

from __future__ import annotations


class ResidualReport:
    """Nonzero relation residuals: (chain key, output label, scalar)."""

    def __init__(self, entries, arity_cap, label="ainfty-relations"):
        self.entries = list(entries)
        self.arity_cap = arity_cap
        self.label = label

    @property
    def passed(self) -> bool:
        return not self.entries

    def arities(self) -> dict:
        counts: dict = {}
        for key, _, _ in self.entries:
            counts[len(key)] = counts.get(len(key), 0) + 1
        return counts

    def to_json_obj(self) -> dict:
        return {
            "check": self.label,
            "arity_cap": self.arity_cap,
            "passed": self.passed,
            "residuals": [
                [list(key), out, scalar.to_json_obj()]
                for key, out, scalar in sorted(
                    self.entries, key=lambda row: (len(row[0]), row[0], row[1])
                )
            ],
        }

    def __repr__(self):
        if self.passed:
            return "ResidualReport(%s: pass through arity %s)" % (
                self.label,
                self.arity_cap,
            )
        return "ResidualReport(%s: %d nonzero residuals, arities %s)" % (
            self.label,
            len(self.entries),
            self.arities(),
        )


def _outer_slot_index(table):
    """label -> [(outer key, slot position, output label, scalar)]."""
    index: dict = {}
    for key, outs in table.items():
        for p, label in enumerate(key):
            hits = index.setdefault(label, [])
            for out_label, scalar in outs.items():
                hits.append((key, p, out_label, scalar))
    return index


def check_ainfty_relations(cat, arity_cap=None, early_exit=False) -> ResidualReport:
    """Assemble every relation instance through arity_cap and report the
    nonzero residuals.  ``early_exit`` stops after the first arity that
    fails, which keeps mutation sweeps fast."""
    if arity_cap is None:
        arity_cap = cat.arity_cap if cat.arity_cap is not None else cat.mu_max_arity()
    if cat.arity_cap is not None and arity_cap > cat.arity_cap:
        raise ValueError(
            "tables are only declared complete through arity %d, cannot "
            "check arity %d" % (cat.arity_cap, arity_cap)
        )
    indices = {}
    entries = []
    for d in range(1, arity_cap + 1):
        residual: dict = {}
        for m in range(1, d + 1):
            do = d - m + 1
            inner = cat.mu_table(m)
            if not inner:
                continue
            if do not in indices:
                indices[do] = _outer_slot_index(cat.mu_table(do))
            index = indices[do]
            for inner_key, inner_outs in inner.items():
                for mid_label, inner_scalar in inner_outs.items():
                    for outer_key, p, out_label, outer_scalar in index.get(
                        mid_label, ()
                    ):
                        chain = outer_key[:p] + inner_key + outer_key[p + 1 :]
                        maltese = sum(cat.deg(l) - 1 for l in outer_key[p + 1 :])
                        term = outer_scalar * inner_scalar
                        if maltese % 2:
                            term = -term
                        slot = residual.setdefault((chain, out_label), [])
                        slot.append(term)
        for (chain, out_label), terms in residual.items():
            total = terms[0]
            for t in terms[1:]:
                total = total + t
            if not total.is_zero():
                entries.append((chain, out_label, total))
        if early_exit and entries:
            break
    return ResidualReport(entries, arity_cap)


def check_units(cat) -> list:
    """Strict-unit violations as human-readable strings; empty = pass.

    Rules: mu^1(e) = 0; mu^2(a, e_src) = a; mu^2(e_dst, a) = (-1)^|a| a;
    every higher mu vanishes on chains containing a unit.
    """
    problems = []
    unit_labels = set(cat.units.values())
    for obj in cat.objects:
        if obj not in cat.units:
            problems.append("object %r has no declared unit" % (obj,))
    for (src, dst), space in cat.homs.items():
        e_src = cat.units.get(src)
        e_dst = cat.units.get(dst)
        for a, degree in space.basis:
            if e_src is not None:
                got = cat.mu_entry((a, e_src))
                want_sign = 1
                if list(got) != [a] or got.get(a) is None or (
                    got[a].terms != ((0, want_sign),)
                ):
                    problems.append(
                        "mu^2(%s, unit %s) != %s (got %s)" % (a, e_src, a, got)
                    )
            if e_dst is not None:
                got = cat.mu_entry((e_dst, a))
                sign = -1 if degree % 2 else 1
                ok = (
                    list(got) == [a]
                    and got[a].terms == ((0, sign),)
                )
                if not ok:
                    problems.append(
                        "mu^2(unit %s, %s) != %+d*%s (got %s)"
                        % (e_dst, a, sign, a, got)
                    )
    for d, table in cat.mu.items():
        for key, outs in table.items():
            hit = [l for l in key if l in unit_labels]
            if not hit:
                continue
            if d == 1:
                problems.append("mu^1 does not vanish on unit %s" % (hit[0],))
            elif d >= 3:
                problems.append(
                    "mu^%d does not vanish on unit-containing chain %s" % (d, key)
                )
    return problems
