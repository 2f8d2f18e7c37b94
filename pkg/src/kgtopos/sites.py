"""Sieves, coverage-generated Grothendieck topologies, and site checks.

Topologies are produced by fixed-point saturation over the finite sieve
lattice of each object: starting from generating families plus maximal
sieves, the covering sets are closed under pullback stability and the
local-character (transitivity) axiom until nothing changes.  All outputs
therefore satisfy the three topology axioms by construction, and
verify_topology_axioms re-checks them exhaustively.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import SizeCapError, TopologyError
from .freecat import FreeCategory, Functor, Path, compose, path_key

DEFAULT_SIEVE_CAP = 12


@dataclass(frozen=True)
class Sieve:
    """A set of morphisms into one object, closed under precomposition."""

    obj: str
    members: frozenset[Path]

    def __contains__(self, p: Path) -> bool:
        return p in self.members

    def sorted_members(self) -> list[Path]:
        return sorted(self.members, key=lambda p: (len(p.arrows), p.arrows))

    def keys(self) -> list[str]:
        return sorted(path_key(p) for p in self.members)


def is_sieve(cat: FreeCategory, sieve: Sieve) -> bool:
    """Closure check: members have the right codomain and every
    precomposition of a member is again a member."""
    for p in sieve.members:
        if p.target != sieve.obj:
            return False
        for h in cat.morphisms_into(p.source):
            if compose(h, p) not in sieve.members:
                return False
    return True


def sieve_generated_by(
    cat: FreeCategory, obj: str, family: Iterable[Path]
) -> Sieve:
    """Smallest sieve on obj containing the family (precomposition closure)."""
    members: set[Path] = set()
    for f in family:
        if f.target != obj:
            raise ValueError(f"family member {path_key(f)} does not end at {obj}")
        for h in cat.morphisms_into(f.source):
            members.add(compose(h, f))
    return Sieve(obj, frozenset(members))


def maximal_sieve(cat: FreeCategory, obj: str) -> Sieve:
    return Sieve(obj, frozenset(cat.morphisms_into(obj)))


def pullback_sieve(cat: FreeCategory, sieve: Sieve, g: Path) -> Sieve:
    """g*S: morphisms whose composite with g lands in S; a sieve on dom(g)."""
    if g.target != sieve.obj:
        raise ValueError("pullback morphism must end at the sieve's object")
    members = frozenset(
        h for h in cat.morphisms_into(g.source) if compose(h, g) in sieve.members
    )
    return Sieve(g.source, members)


def enumerate_sieves(
    cat: FreeCategory, obj: str, cap: int = DEFAULT_SIEVE_CAP
) -> list[Sieve]:
    """All sieves on obj, deterministically ordered.

    Subsets of the incoming morphisms are scanned with bitmasks and kept
    when closed under precomposition.  Raises SizeCapError when more than
    `cap` morphisms point into obj.
    """
    cat.require_complete("enumerate_sieves")
    incoming = sorted(
        cat.morphisms_into(obj), key=lambda p: (len(p.arrows), p.arrows)
    )
    if len(incoming) > cap:
        raise SizeCapError(
            f"{len(incoming)} morphisms into {obj} exceeds the sieve cap {cap}; "
            "use a smaller graph or raise the cap"
        )
    position = {p: i for i, p in enumerate(incoming)}
    # Bitmask of morphisms forced into any sieve containing morphism i.
    required = []
    for p in incoming:
        mask = 0
        for h in cat.morphisms_into(p.source):
            mask |= 1 << position[compose(h, p)]
        required.append(mask)
    sieves = []
    for mask in range(1 << len(incoming)):
        closed = True
        probe = mask
        while probe:
            low = probe & -probe
            if required[low.bit_length() - 1] & ~mask:
                closed = False
                break
            probe ^= low
        if closed:
            sieves.append(
                Sieve(
                    obj,
                    frozenset(
                        incoming[i] for i in range(len(incoming)) if mask >> i & 1
                    ),
                )
            )
    return sieves


def literal_path_cover(cat: FreeCategory, obj: str, family: Iterable[Path]) -> bool:
    """Literal reachability reading of the covering condition.

    True iff every entity reachable from obj by a nonempty path is also
    reachable from some family member's source by a path factoring
    through obj.  Composing a family member with the outgoing path always
    provides such a factoring, so any nonempty family covers; an empty
    family covers only objects with no outgoing nonempty paths.
    """
    members = list(family)
    for f in members:
        if f.target != obj:
            raise ValueError(f"family member {path_key(f)} does not end at {obj}")
    reachable = {
        b
        for (a, b), paths in cat.hom_sets.items()
        if a == obj and any(not p.is_identity for p in paths)
    }
    if not reachable:
        return True
    # For any reachable entity, compose(f, outgoing path) witnesses the
    # factoring for every family member f, so a nonempty family covers.
    return bool(members)


@dataclass(frozen=True)
class Topology:
    """Per-object sets of covering sieves."""

    covering: dict[str, frozenset[Sieve]]

    def objects(self) -> tuple[str, ...]:
        return tuple(self.covering.keys())

    def covers(self, sieve: Sieve) -> bool:
        return sieve in self.covering.get(sieve.obj, frozenset())

    def covering_sieves(self, obj: str) -> list[Sieve]:
        return sorted(
            self.covering[obj], key=lambda s: (len(s.members), s.keys())
        )

    def min_covering_sieve(self, obj: str) -> Sieve:
        """Intersection of all covering sieves; in a saturated topology it
        is itself covering."""
        sieves = list(self.covering[obj])
        if not sieves:
            raise TopologyError(f"no covering sieves on {obj}")
        members = frozenset.intersection(*(s.members for s in sieves))
        minimum = Sieve(obj, members)
        if not self.covers(minimum):
            raise TopologyError(
                f"topology on {obj} is not closed under intersection; saturate first"
            )
        return minimum


@dataclass(frozen=True)
class Site:
    category: FreeCategory
    topology: Topology

    def __post_init__(self):
        if set(self.topology.covering.keys()) != set(self.category.objects):
            raise TopologyError("topology objects differ from category objects")


def generate_topology(
    cat: FreeCategory,
    coverage: Mapping[str, Iterable[Iterable[Path]]],
    sieve_cap: int = DEFAULT_SIEVE_CAP,
) -> Topology:
    """Smallest topology whose covering sieves include those generated by
    the coverage, computed by saturation over the finite sieve lattice.

    Empty generating families are rejected; unknown objects in the
    coverage are an error.
    """
    cat.require_complete("generate_topology")
    for obj in coverage:
        if obj not in set(cat.objects):
            raise TopologyError(f"coverage mentions unknown object {obj}")
    lattice = {obj: enumerate_sieves(cat, obj, sieve_cap) for obj in cat.objects}
    covering: dict[str, set[Sieve]] = {
        obj: {maximal_sieve(cat, obj)} for obj in cat.objects
    }
    for obj, families in coverage.items():
        for family in families:
            members = list(family)
            if not members:
                raise TopologyError(
                    f"empty generating family on {obj} is not admitted"
                )
            covering[obj].add(sieve_generated_by(cat, obj, members))

    changed = True
    while changed:
        changed = False
        # Stability: pull every covering sieve back along every morphism.
        for obj in cat.objects:
            for sieve in list(covering[obj]):
                for g in cat.morphisms_into(obj):
                    pulled = pullback_sieve(cat, sieve, g)
                    if pulled not in covering[g.source]:
                        covering[g.source].add(pulled)
                        changed = True
        # Local character: a sieve whose pullbacks along some covering
        # sieve are all covering is itself covering.
        for obj in cat.objects:
            for candidate in lattice[obj]:
                if candidate in covering[obj]:
                    continue
                for sieve in covering[obj]:
                    if all(
                        pullback_sieve(cat, candidate, g) in covering[g.source]
                        for g in sieve.members
                    ):
                        covering[obj].add(candidate)
                        changed = True
                        break
    return Topology({obj: frozenset(covering[obj]) for obj in cat.objects})


def isomorphisms_into(cat: FreeCategory, obj: str) -> list[Path]:
    """Morphisms into obj admitting a two-sided inverse."""
    isos = []
    for p in cat.morphisms_into(obj):
        for q in cat.hom(p.target, p.source):
            if (
                compose(p, q) == cat.identity(p.source)
                and compose(q, p) == cat.identity(p.target)
            ):
                isos.append(p)
                break
    return isos


def atomic_topology(
    cat: FreeCategory, sieve_cap: int = DEFAULT_SIEVE_CAP
) -> Topology:
    """Topology generated by isomorphism-only covering families.

    On the free category of an acyclic graph the only isomorphisms are
    identities, so exactly the maximal sieves cover.
    """
    coverage = {
        obj: [[iso] for iso in isomorphisms_into(cat, obj)] for obj in cat.objects
    }
    return generate_topology(cat, coverage, sieve_cap)


def path_coverage(cat: FreeCategory) -> dict[str, list[list[Path]]]:
    """One generating family per object: all generating triples into it."""
    coverage: dict[str, list[list[Path]]] = {}
    for obj in cat.objects:
        incoming = [
            cat.generator_path(i)
            for i, t in enumerate(cat.kg.triples)
            if t.tail == obj
        ]
        if incoming:
            coverage[obj] = [incoming]
    return coverage


def literal_coverage(cat: FreeCategory) -> dict[str, list[list[Path]]]:
    """Every nonempty family of incoming morphisms, per the literal
    reachability reading (each one passes literal_path_cover).  Its
    generated topology is degenerate whenever an object is reached from
    two different sources: pulling a single-source sieve back along the
    other source forces the empty sieve to cover."""
    coverage: dict[str, list[list[Path]]] = {}
    for obj in cat.objects:
        incoming = [p for p in cat.morphisms_into(obj) if not p.is_identity]
        families = [
            [p]
            for p in sorted(incoming, key=lambda p: (len(p.arrows), p.arrows))
        ]
        if incoming:
            families.append(sorted(incoming, key=lambda p: (len(p.arrows), p.arrows)))
        if families:
            coverage[obj] = families
    return coverage


def path_topology(
    cat: FreeCategory,
    sieve_cap: int = DEFAULT_SIEVE_CAP,
    *,
    literal: bool = False,
) -> Topology:
    """Topology of relational propagation along incoming paths.

    By default each object with incoming triples gets the single
    generating family of all of them, so the minimal covering sieve at an
    object collects every nonidentity path into it.  literal=True instead
    admits every nonempty family as a generator (see literal_coverage).
    """
    coverage = literal_coverage(cat) if literal else path_coverage(cat)
    return generate_topology(cat, coverage, sieve_cap)


def build_site(
    kg,
    topology: str = "path",
    max_path_length: int | None = None,
    sieve_cap: int = DEFAULT_SIEVE_CAP,
) -> Site:
    """Convenience: free category plus a named topology ('path' or 'atomic')."""
    from .freecat import build_free_category

    cat = build_free_category(kg, max_path_length)
    if topology == "path":
        top = path_topology(cat, sieve_cap)
    elif topology == "atomic":
        top = atomic_topology(cat, sieve_cap)
    else:
        raise ValueError(f"unknown topology {topology!r}; use 'path' or 'atomic'")
    return Site(cat, top)


@dataclass(frozen=True)
class TopologyReport:
    passed: bool
    violations: tuple[str, ...] = field(default_factory=tuple)


def verify_topology_axioms(
    site: Site, sieve_cap: int = DEFAULT_SIEVE_CAP
) -> TopologyReport:
    """Exhaustively check maximality, pullback stability and transitivity
    over all objects, covering sieves and morphisms."""
    cat, topology = site.category, site.topology
    violations: list[str] = []
    for obj in cat.objects:
        if not topology.covers(maximal_sieve(cat, obj)):
            violations.append(f"maximality fails at {obj}")
    for obj in cat.objects:
        for sieve in topology.covering_sieves(obj):
            for g in cat.morphisms_into(obj):
                if not topology.covers(pullback_sieve(cat, sieve, g)):
                    violations.append(
                        f"stability fails: pullback of a covering sieve on {obj} "
                        f"along {path_key(g)} is not covering"
                    )
    for obj in cat.objects:
        for candidate in enumerate_sieves(cat, obj, sieve_cap):
            if topology.covers(candidate):
                continue
            for sieve in topology.covering_sieves(obj):
                if all(
                    topology.covers(pullback_sieve(cat, candidate, g))
                    for g in sieve.members
                ):
                    violations.append(
                        f"transitivity fails: sieve {candidate.keys()} on {obj} "
                        "is locally covering but not covering"
                    )
                    break
    return TopologyReport(not violations, tuple(violations))


def check_inclusion(inner: Topology, outer: Topology) -> bool:
    """True iff every covering sieve of `inner` also covers in `outer`;
    both must live on the same objects."""
    if set(inner.covering.keys()) != set(outer.covering.keys()):
        raise TopologyError("topologies live on different object sets")
    return all(
        inner.covering[obj] <= outer.covering[obj] for obj in inner.covering
    )


@dataclass(frozen=True)
class SiteMorphismReport:
    passed: bool
    violations: tuple[str, ...] = field(default_factory=tuple)


def check_site_morphism(
    functor: Functor, source_site: Site, target_site: Site
) -> SiteMorphismReport:
    """Check that the functor sends covering sieves to families generating
    covering sieves in the target."""
    violations: list[str] = []
    target_cat = target_site.category
    for obj in source_site.category.objects:
        for sieve in source_site.topology.covering_sieves(obj):
            image_obj = functor.object_map[obj]
            image = [functor.morphism_map[p] for p in sieve.sorted_members()]
            generated = sieve_generated_by(target_cat, image_obj, image)
            if not target_site.topology.covers(generated):
                violations.append(
                    f"image of covering sieve {sieve.keys()} on {obj} "
                    f"generates a non-covering sieve on {image_obj}"
                )
    return SiteMorphismReport(not violations, tuple(violations))


def topology_to_dict(site: Site, name: str | None = None) -> dict:
    data = {
        "objects": list(site.category.objects),
        "covering": {
            obj: [sieve.keys() for sieve in site.topology.covering_sieves(obj)]
            for obj in site.category.objects
        },
    }
    if name is not None:
        data["topology"] = name
    return data


def topology_to_json(site: Site, name: str | None = None) -> str:
    return json.dumps(topology_to_dict(site, name), indent=2) + "\n"
