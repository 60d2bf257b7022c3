"""Sparse storage for A-infinity categories.

Composition tables are kept per arity as dicts keyed by tuples of basis
labels written in composition order: the key (a_d, ..., a_1) stands for
mu^d(a_d, ..., a_1), with a_1 the first morphism of the chain
X_0 -> X_1 -> ... -> X_d and a_d the last.  Labels are globally unique
across all hom spaces, so a key determines its object chain.
"""

from __future__ import annotations

from fractions import Fraction

from ..glinalg import GradedSpace
from ..novikov import NovikovScalar

_EMPTY = GradedSpace(())


class AInftyCategory:
    """Objects, graded hom bases, units, and sparse mu tables.

    ``arity_cap`` declares through which arity the stored tables (with
    missing arities read as zero) give the true structure maps.  ``None``
    means every absent arity is exactly zero, as in a dg category.
    """

    def __init__(self, objects, arity_cap=None):
        self.objects = list(objects)
        self._object_set = set(self.objects)
        if len(self._object_set) != len(self.objects):
            raise ValueError("duplicate object names")
        self.homs: dict = {}
        self.mu: dict = {}
        self.units: dict = {}
        self.arity_cap = arity_cap
        self._info: dict = {}  # label -> (src, dst, degree)

    # ---- structure ----------------------------------------------------

    def add_hom(self, src, dst, basis):
        """Declare hom(src, dst) with basis [(label, degree), ...]."""
        if src not in self._object_set or dst not in self._object_set:
            raise ValueError("unknown object in hom(%r, %r)" % (src, dst))
        if (src, dst) in self.homs:
            raise ValueError("hom(%r, %r) already declared" % (src, dst))
        space = GradedSpace(basis)
        for label, degree in space.basis:
            if label in self._info:
                raise ValueError("label %r reused across hom spaces" % (label,))
            self._info[label] = (src, dst, degree)
        self.homs[(src, dst)] = space
        return space

    def hom_space(self, src, dst) -> GradedSpace:
        return self.homs.get((src, dst), _EMPTY)

    def deg(self, label) -> int:
        return self._info[label][2]

    def src(self, label):
        return self._info[label][0]

    def dst(self, label):
        return self._info[label][1]

    def has_label(self, label) -> bool:
        return label in self._info

    def set_unit(self, obj, label):
        src, dst, degree = self._info[label]
        if src != obj or dst != obj or degree != 0:
            raise ValueError("unit of %r must be a degree-0 endomorphism" % (obj,))
        self.units[obj] = label

    # ---- composition tables --------------------------------------------

    def add_mu(self, key, out_label, scalar: NovikovScalar):
        """Accumulate a structure constant mu^d(key) += scalar * out_label."""
        key = tuple(key)
        d = len(key)
        if d < 1:
            raise ValueError("mu needs arity >= 1")
        for i in range(d - 1):
            if self.dst(key[i + 1]) != self.src(key[i]):
                raise ValueError(
                    "chain not composable at slot %d: %r then %r"
                    % (i, key[i + 1], key[i])
                )
        src_out, dst_out, deg_out = self._info[out_label]
        if src_out != self.src(key[-1]) or dst_out != self.dst(key[0]):
            raise ValueError("output %r does not span the chain" % (out_label,))
        expected = sum(self.deg(l) for l in key) + 2 - d
        if deg_out != expected:
            raise ValueError(
                "mu^%d must have degree %d here, output %r has degree %d"
                % (d, expected, out_label, deg_out)
            )
        table = self.mu.setdefault(d, {})
        slot = table.get(key)
        if slot is None:
            slot = {}
            table[key] = slot
        prev = slot.get(out_label)
        total = scalar if prev is None else prev + scalar
        if total.is_zero():
            slot.pop(out_label, None)
            if not slot:
                del table[key]
        else:
            slot[out_label] = total

    def mu_table(self, d: int) -> dict:
        return self.mu.get(d, {})

    def mu_entry(self, key) -> dict:
        """{output label: scalar} for mu^len(key)(key); empty dict if zero."""
        key = tuple(key)
        return self.mu.get(len(key), {}).get(key, {})

    def mu_max_arity(self) -> int:
        return max(self.mu, default=0)

    # ---- chain enumeration ----------------------------------------------

    def composable_chains(self, length: int, src=None, dst=None):
        """Yield keys (a_length, ..., a_1) of composable basis chains.

        Chains run src -> ... -> dst when those are given.  The key is in
        composition order, so a_1 starts at src and a_length ends at dst.
        """
        if length < 1:
            raise ValueError("chains have length >= 1")
        sources = [src] if src is not None else self.objects
        for start in sources:
            stack = [((), start)]
            while stack:
                partial, at = stack.pop()
                if len(partial) == length:
                    if dst is None or at == dst:
                        yield partial
                    continue
                for nxt in self.objects:
                    space = self.homs.get((at, nxt))
                    if space is None:
                        continue
                    for label, _ in space.basis:
                        # prepend: the newest arrow is applied last
                        stack.append(((label,) + partial, nxt))

    # ---- serialization ---------------------------------------------------

    def to_json_obj(self) -> dict:
        homs = []
        for (src, dst) in sorted(self.homs, key=repr):
            space = self.homs[(src, dst)]
            homs.append([src, dst, [[label, degree] for label, degree in space.basis]])
        mu = {}
        for d in sorted(self.mu):
            rows = []
            for key in sorted(self.mu[d]):
                for out_label in sorted(self.mu[d][key]):
                    rows.append(
                        [list(key), out_label, self.mu[d][key][out_label].to_json_obj()]
                    )
            mu[str(d)] = rows
        return {
            "objects": list(self.objects),
            "homs": homs,
            "units": {str(k): v for k, v in sorted(self.units.items(), key=repr)},
            "arity_cap": self.arity_cap,
            "mu": mu,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AInftyCategory":
        cat = cls(obj["objects"], arity_cap=obj.get("arity_cap"))
        for src, dst, basis in obj["homs"]:
            cat.add_hom(src, dst, [(label, degree) for label, degree in basis])
        for key, out_label, scalar in (
            row for d in sorted(obj["mu"], key=int) for row in obj["mu"][d]
        ):
            cat.add_mu(tuple(key), out_label, NovikovScalar.from_json_obj(scalar))
        for name, label in obj.get("units", {}).items():
            cat.set_unit(name, label)
        return cat

    def __repr__(self):
        dims = sum(space.dim for space in self.homs.values())
        return "AInftyCategory(%d objects, %d hom generators, arities %s)" % (
            len(self.objects),
            dims,
            sorted(self.mu),
        )
