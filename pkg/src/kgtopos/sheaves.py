"""Finite presheaves on a site: the sheaf condition via matching
families, gluing, plus-construction sheafification, the subobject
classifier, and the adjunction between the path and atomic topoi.

The sheaf condition is phrased with matching families on covering
sieves, which needs no pullbacks in the underlying category: a matching
family assigns a section to every member of a sieve compatibly with all
precompositions, and a sheaf admits exactly one amalgamation per family.

Sheafification applies the plus construction twice.  On a finite
saturated topology the covering sieves on an object are closed under
intersection, so the colimit defining the plus construction is simply
the set of matching families on the minimum covering sieve; that is how
it is computed here, with deterministically ordered representatives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping

from .errors import (
    GluingError,
    NaturalityError,
    PresheafError,
    SchemaError,
    SizeCapError,
    UniquenessError,
)
from .freecat import FreeCategory, Path, compose, path_key
from .sites import Sieve, Site, pullback_sieve, enumerate_sieves

DEFAULT_SECTION_CAP = 3


@dataclass(frozen=True)
class Presheaf:
    """Finite section sets per object plus restriction maps per generator.

    `restrictions[i]` sends sections at the tail of triple i to sections
    at its head (restriction runs against the arrows).  Restriction along
    a general path composes the generator maps; optional explicit maps
    for composite paths may be supplied in `path_restrictions` and are
    checked against the composites on construction, pinpointing the
    offending decomposition on failure.
    """

    cat: FreeCategory
    sections: dict[str, tuple[str, ...]]
    restrictions: dict[int, dict[str, str]]
    path_restrictions: dict[tuple[int, ...], dict[str, str]] | None = None

    def __post_init__(self):
        self.cat.require_complete("Presheaf construction")
        for obj in self.cat.objects:
            if obj not in self.sections:
                raise SchemaError(f"no section set for object {obj}")
            labels = self.sections[obj]
            if len(set(labels)) != len(labels):
                raise SchemaError(f"duplicate section labels at {obj}")
        for i, t in enumerate(self.cat.kg.triples):
            mapping = self.restrictions.get(i)
            if mapping is None:
                raise SchemaError(f"no restriction map for triple {i} ({t})")
            cod_labels = set(self.sections[t.tail])
            dom_labels = set(self.sections[t.head])
            if set(mapping.keys()) != cod_labels:
                raise SchemaError(
                    f"restriction for triple {i} ({t}) is not total on "
                    f"the sections at {t.tail}"
                )
            bad = [v for v in mapping.values() if v not in dom_labels]
            if bad:
                raise SchemaError(
                    f"restriction for triple {i} ({t}) maps outside the "
                    f"sections at {t.head}: {bad}"
                )
        self._check_functoriality()

    def _check_functoriality(self) -> None:
        for p in self.cat.morphisms():
            table = self._lookup(p)
            for split in range(1, len(p.arrows)):
                left = Path(
                    p.source,
                    self.cat.kg.triples[p.arrows[split - 1]].tail,
                    p.arrows[:split],
                )
                right = Path(left.target, p.target, p.arrows[split:])
                left_table = self._lookup(left)
                right_table = self._lookup(right)
                for s in self.sections[p.target]:
                    if table[s] != left_table[right_table[s]]:
                        raise PresheafError(
                            f"restriction along {path_key(p)} disagrees with the "
                            f"composite through ({path_key(left)}, {path_key(right)}) "
                            f"on section {s!r}"
                        )

    def _lookup(self, p: Path) -> dict[str, str]:
        if self.path_restrictions is not None and p.arrows in self.path_restrictions:
            table = self.path_restrictions[p.arrows]
            if set(table.keys()) != set(self.sections[p.target]):
                raise SchemaError(
                    f"explicit restriction for {path_key(p)} is not total"
                )
            return table
        return self._derived(p)

    def _derived(self, p: Path) -> dict[str, str]:
        table = {s: s for s in self.sections[p.target]}
        for arrow in reversed(p.arrows):
            gen = self.restrictions[arrow]
            table = {s: gen[v] for s, v in table.items()}
        return table

    def to_dict(self) -> dict:
        return {
            "sections": {obj: list(self.sections[obj]) for obj in self.cat.objects},
            "restrictions": {
                str(t): dict(self.restrictions[i])
                for i, t in enumerate(self.cat.kg.triples)
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def restrict(presheaf: Presheaf, p: Path) -> dict[str, str]:
    """Restriction map along a path, from sections at its target to
    sections at its source."""
    return presheaf._derived(p)


def load_presheaf(cat: FreeCategory, data: Mapping) -> Presheaf:
    """Build a presheaf from its JSON document.

    Sections are keyed by object name; restriction maps are keyed by the
    triple rendered as 'head predicate tail'.
    """
    try:
        raw_sections = data["sections"]
        raw_restrictions = data["restrictions"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"presheaf document lacks {exc}") from exc
    sections = {}
    for obj in cat.objects:
        if obj not in raw_sections:
            raise SchemaError(f"no section set for object {obj}")
        sections[obj] = tuple(str(s) for s in raw_sections[obj])
    restrictions = {}
    for i, t in enumerate(cat.kg.triples):
        key = str(t)
        if key not in raw_restrictions:
            raise SchemaError(f"no restriction map for triple '{key}'")
        restrictions[i] = {
            str(k): str(v) for k, v in raw_restrictions[key].items()
        }
    return Presheaf(cat, sections, restrictions)


def constant_presheaf(cat: FreeCategory, labels: Iterable[str] = ("*",)) -> Presheaf:
    """Same section set everywhere, identity restrictions."""
    labels = tuple(labels)
    return Presheaf(
        cat,
        {obj: labels for obj in cat.objects},
        {i: {s: s for s in labels} for i in range(cat.kg.triple_count)},
    )


def terminal_presheaf(cat: FreeCategory) -> Presheaf:
    return constant_presheaf(cat, ("*",))


def product_presheaf(f: Presheaf, g: Presheaf) -> Presheaf:
    """Objectwise cartesian product with componentwise restrictions."""
    if f.cat is not g.cat and f.cat != g.cat:
        raise ValueError("presheaves live on different categories")
    cat = f.cat

    def pair(a: str, b: str) -> str:
        return f"({a},{b})"

    sections = {
        obj: tuple(
            pair(a, b) for a in f.sections[obj] for b in g.sections[obj]
        )
        for obj in cat.objects
    }
    restrictions = {}
    for i in range(cat.kg.triple_count):
        t = cat.kg.triples[i]
        restrictions[i] = {
            pair(a, b): pair(f.restrictions[i][a], g.restrictions[i][b])
            for a in f.sections[t.tail]
            for b in g.sections[t.tail]
        }
    return Presheaf(cat, sections, restrictions)


@dataclass(frozen=True)
class MatchingFamily:
    """A compatible assignment of sections to every member of a sieve."""

    sieve: Sieve
    assignment: dict[Path, str]

    def canonical_key(self) -> tuple[tuple[str, str], ...]:
        return tuple(
            sorted((path_key(p), v) for p, v in self.assignment.items())
        )


def is_matching_family(presheaf: Presheaf, family: MatchingFamily) -> bool:
    """Compatibility: the assignment commutes with every precomposition."""
    if set(family.assignment.keys()) != set(family.sieve.members):
        return False
    cat = presheaf.cat
    for f in family.sieve.members:
        if family.assignment[f] not in presheaf.sections[f.source]:
            return False
        for h in cat.morphisms_into(f.source):
            value = restrict(presheaf, h)[family.assignment[f]]
            if family.assignment[compose(h, f)] != value:
                return False
    return True


def enumerate_matching_families(
    presheaf: Presheaf, sieve: Sieve
) -> list[MatchingFamily]:
    """All matching families on a sieve, in a deterministic order.

    Members are assigned shortest-first; a member that factors as
    (prefix, shorter member) has its value forced by compatibility, so
    the search only branches on members with no proper factorization
    inside the sieve.
    """
    members = sieve.sorted_members()
    member_set = sieve.members
    restrict_cache: dict[tuple[int, ...], dict[str, str]] = {}

    def restriction(h: Path) -> dict[str, str]:
        if h.arrows not in restrict_cache:
            restrict_cache[h.arrows] = restrict(presheaf, h)
        return restrict_cache[h.arrows]

    kg = presheaf.cat.kg
    constraints: list[list[tuple[Path, Path]]] = []
    for g in members:
        pairs = []
        for split in range(1, len(g.arrows) + 1):
            mid = kg.triples[g.arrows[split - 1]].tail
            suffix = Path(mid, g.target, g.arrows[split:])
            if suffix in member_set:
                prefix = Path(g.source, mid, g.arrows[:split])
                pairs.append((suffix, prefix))
        constraints.append(pairs)

    results: list[MatchingFamily] = []
    assignment: dict[Path, str] = {}

    def search(i: int) -> None:
        if i == len(members):
            results.append(MatchingFamily(sieve, dict(assignment)))
            return
        g = members[i]
        forced: str | None = None
        for suffix, prefix in constraints[i]:
            value = restriction(prefix)[assignment[suffix]]
            if forced is None:
                forced = value
            elif forced != value:
                return
        candidates = (
            [forced] if forced is not None else list(presheaf.sections[g.source])
        )
        for value in candidates:
            assignment[g] = value
            search(i + 1)
            del assignment[g]

    search(0)
    return results


def amalgamations(
    presheaf: Presheaf, family: MatchingFamily
) -> list[str]:
    """Sections at the sieve's object restricting to the family."""
    obj = family.sieve.obj
    members = family.sieve.sorted_members()
    tables = {f: restrict(presheaf, f) for f in members}
    return [
        s
        for s in presheaf.sections[obj]
        if all(tables[f][s] == family.assignment[f] for f in members)
    ]


@dataclass(frozen=True)
class SheafCheck:
    is_sheaf: bool
    counterexample: dict | None = None

    def __bool__(self) -> bool:
        return self.is_sheaf


def is_sheaf(presheaf: Presheaf, site: Site) -> SheafCheck:
    """Exactly one amalgamation for every matching family on every
    covering sieve; the first failure is reported with its witnesses."""
    for obj in site.category.objects:
        for sieve in site.topology.covering_sieves(obj):
            for family in enumerate_matching_families(presheaf, sieve):
                glued = amalgamations(presheaf, family)
                if len(glued) != 1:
                    return SheafCheck(
                        False,
                        {
                            "object": obj,
                            "sieve": sieve.keys(),
                            "family": {
                                path_key(p): v for p, v in family.assignment.items()
                            },
                            "amalgamations": glued,
                        },
                    )
    return SheafCheck(True)


def glue(presheaf: Presheaf, family: MatchingFamily) -> str:
    """The unique amalgamation of a matching family.

    Raises GluingError when none exists and UniquenessError when several
    do; either means the presheaf is not a sheaf for any topology in
    which the family's sieve covers.
    """
    if not is_matching_family(presheaf, family):
        raise GluingError("assignment is not a matching family")
    glued = amalgamations(presheaf, family)
    if not glued:
        raise GluingError(
            f"no amalgamation at {family.sieve.obj} for family "
            f"{{{', '.join(sorted(path_key(p) for p in family.assignment))}}}"
        )
    if len(glued) > 1:
        raise UniquenessError(
            f"{len(glued)} amalgamations at {family.sieve.obj}; sections {glued}"
        )
    return glued[0]


def global_sections(presheaf: Presheaf) -> list[dict[str, str]]:
    """All object-indexed families of sections commuting with every
    restriction, in deterministic order."""
    cat = presheaf.cat
    objects = list(cat.objects)
    generators_by_object: dict[str, list[int]] = {obj: [] for obj in objects}
    for i, t in enumerate(cat.kg.triples):
        generators_by_object[t.head].append(i)
        generators_by_object[t.tail].append(i)
    order = {obj: k for k, obj in enumerate(objects)}
    results: list[dict[str, str]] = []
    chosen: dict[str, str] = {}

    def consistent(obj: str) -> bool:
        for i in generators_by_object[obj]:
            t = cat.kg.triples[i]
            if t.head in chosen and t.tail in chosen:
                if presheaf.restrictions[i][chosen[t.tail]] != chosen[t.head]:
                    return False
        return True

    def search(k: int) -> None:
        if k == len(objects):
            results.append(dict(chosen))
            return
        obj = objects[k]
        for s in presheaf.sections[obj]:
            chosen[obj] = s
            if consistent(obj):
                search(k + 1)
            del chosen[obj]

    search(0)
    return results


@dataclass(frozen=True)
class NatTransformation:
    """Componentwise map between presheaves on the same category."""

    source: Presheaf
    target: Presheaf
    components: dict[str, dict[str, str]]

    def __post_init__(self):
        cat = self.source.cat
        for obj in cat.objects:
            comp = self.components.get(obj)
            if comp is None or set(comp.keys()) != set(self.source.sections[obj]):
                raise NaturalityError(f"component at {obj} is missing or not total")
            if any(v not in self.target.sections[obj] for v in comp.values()):
                raise NaturalityError(f"component at {obj} maps outside the target")
        for i, t in enumerate(cat.kg.triples):
            f_res = self.source.restrictions[i]
            g_res = self.target.restrictions[i]
            for s in self.source.sections[t.tail]:
                if self.components[t.head][f_res[s]] != g_res[
                    self.components[t.tail][s]
                ]:
                    raise NaturalityError(
                        f"naturality fails at triple {i} ({t}) on section {s!r}"
                    )

    def canonical_key(self) -> tuple:
        return tuple(
            (obj, tuple(sorted(self.components[obj].items())))
            for obj in self.source.cat.objects
        )


def compose_components(
    outer: Mapping[str, Mapping[str, str]], inner: Mapping[str, Mapping[str, str]]
) -> dict[str, dict[str, str]]:
    """Objectwise composition outer(inner(-))."""
    return {
        obj: {s: outer[obj][v] for s, v in inner[obj].items()} for obj in inner
    }


def enumerate_nat_transformations(
    f: Presheaf, g: Presheaf, section_cap: int = DEFAULT_SECTION_CAP
) -> list[NatTransformation]:
    """All natural families of maps f -> g, by backtracking over objects.

    Raises SizeCapError when a section set of either presheaf exceeds the
    cap; the enumeration is exponential in section counts.
    """
    cat = f.cat
    for obj in cat.objects:
        if len(f.sections[obj]) > section_cap or len(g.sections[obj]) > section_cap:
            raise SizeCapError(
                f"section set at {obj} exceeds the cap {section_cap}"
            )
    objects = list(cat.objects)
    generators_by_object: dict[str, list[int]] = {obj: [] for obj in objects}
    for i, t in enumerate(cat.kg.triples):
        generators_by_object[t.head].append(i)
        generators_by_object[t.tail].append(i)

    results: list[NatTransformation] = []
    components: dict[str, dict[str, str]] = {}

    def natural_so_far(obj: str) -> bool:
        for i in generators_by_object[obj]:
            t = cat.kg.triples[i]
            if t.head in components and t.tail in components:
                f_res, g_res = f.restrictions[i], g.restrictions[i]
                for s in f.sections[t.tail]:
                    if components[t.head][f_res[s]] != g_res[
                        components[t.tail][s]
                    ]:
                        return False
        return True

    def candidate_maps(obj: str) -> Iterable[dict[str, str]]:
        domain = f.sections[obj]
        codomain = g.sections[obj]
        if not domain:
            yield {}
            return
        for values in product(codomain, repeat=len(domain)):
            yield dict(zip(domain, values))

    def search(k: int) -> None:
        if k == len(objects):
            results.append(
                NatTransformation(f, g, {o: dict(c) for o, c in components.items()})
            )
            return
        obj = objects[k]
        for comp in candidate_maps(obj):
            components[obj] = comp
            if natural_so_far(obj):
                search(k + 1)
            del components[obj]

    search(0)
    return results


@dataclass(frozen=True)
class SheafificationResult:
    sheaf: Presheaf
    unit: NatTransformation


def _plus(
    presheaf: Presheaf, site: Site
) -> tuple[Presheaf, dict[str, dict[str, str]]]:
    """One plus-construction step evaluated at minimum covering sieves.

    Returns the new presheaf and the components of the canonical map from
    the input into it.  Section labels are m0, m1, ... per object in the
    order of the families' canonical keys.
    """
    cat = presheaf.cat
    minimum = {obj: site.topology.min_covering_sieve(obj) for obj in cat.objects}
    families: dict[str, list[MatchingFamily]] = {}
    labels: dict[str, dict[tuple, str]] = {}
    sections: dict[str, tuple[str, ...]] = {}
    for obj in cat.objects:
        fams = sorted(
            enumerate_matching_families(presheaf, minimum[obj]),
            key=lambda fam: fam.canonical_key(),
        )
        families[obj] = fams
        labels[obj] = {fam.canonical_key(): f"m{k}" for k, fam in enumerate(fams)}
        sections[obj] = tuple(f"m{k}" for k in range(len(fams)))

    restrictions: dict[int, dict[str, str]] = {}
    for i, t in enumerate(cat.kg.triples):
        gen = cat.generator_path(i)
        table: dict[str, str] = {}
        for k, fam in enumerate(families[t.tail]):
            pulled = {}
            for h in minimum[t.head].sorted_members():
                composite = compose(h, gen)
                # Stability puts the pullback of the minimum sieve at the
                # tail above the minimum sieve at the head.
                pulled[h] = fam.assignment[composite]
            key = MatchingFamily(minimum[t.head], pulled).canonical_key()
            table[f"m{k}"] = labels[t.head][key]
        restrictions[i] = table
    plus_presheaf = Presheaf(cat, sections, restrictions)

    unit_components: dict[str, dict[str, str]] = {}
    for obj in cat.objects:
        comp = {}
        for s in presheaf.sections[obj]:
            induced = {
                f: restrict(presheaf, f)[s] for f in minimum[obj].members
            }
            key = MatchingFamily(minimum[obj], induced).canonical_key()
            comp[s] = labels[obj][key]
        unit_components[obj] = comp
    return plus_presheaf, unit_components


def sheafify(presheaf: Presheaf, site: Site) -> SheafificationResult:
    """Plus construction applied twice, with the canonical map into the
    result.  The output satisfies the sheaf condition for the site; when
    the input already does, the canonical map is objectwise bijective."""
    once, unit1 = _plus(presheaf, site)
    twice, unit2 = _plus(once, site)
    unit = NatTransformation(presheaf, twice, compose_components(unit2, unit1))
    return SheafificationResult(twice, unit)


def direct_image(presheaf: Presheaf) -> Presheaf:
    """Transport from the path site to the atomic site on the same
    category: the underlying data is unchanged, and the result satisfies
    the atomic sheaf condition, where only maximal sieves cover."""
    return presheaf


def inverse_image(presheaf: Presheaf, path_site: Site) -> Presheaf:
    """Transport from the atomic site to the path site: sheafification of
    the same underlying data with respect to the path topology."""
    return sheafify(presheaf, path_site).sheaf


@dataclass(frozen=True)
class AdjunctionReport:
    passed: bool
    left_count: int
    right_count: int
    bijective: bool
    details: tuple[str, ...] = field(default_factory=tuple)


def check_adjunction(
    atomic_presheaf: Presheaf,
    path_sheaf: Presheaf,
    path_site: Site,
    section_cap: int = DEFAULT_SECTION_CAP,
) -> AdjunctionReport:
    """Hom-set comparison witnessing the adjunction between the transports.

    Counts Hom(inverse_image(F), G) against Hom(F, direct_image(G)) and
    checks that precomposition with the canonical map F -> inverse_image(F)
    is a bijection between them.  G must satisfy the path-site sheaf
    condition for the counts to agree.
    """
    for presheaf in (atomic_presheaf, path_sheaf):
        for obj, labels in presheaf.sections.items():
            if len(labels) > section_cap:
                raise SizeCapError(
                    f"section set at {obj} exceeds the cap {section_cap}"
                )
    details: list[str] = []
    sheaf_check = is_sheaf(path_sheaf, path_site)
    if not sheaf_check:
        details.append("second argument is not a sheaf for the path site")
    result = sheafify(atomic_presheaf, path_site)
    # The sheafified side is derived data; widen the enumeration bound to fit it.
    cap = max(
        section_cap,
        max((len(v) for v in result.sheaf.sections.values()), default=0),
    )
    left = enumerate_nat_transformations(result.sheaf, path_sheaf, cap)
    right = enumerate_nat_transformations(atomic_presheaf, path_sheaf, cap)
    mapped_keys = []
    for phi in left:
        composed = compose_components(phi.components, result.unit.components)
        transformed = NatTransformation(atomic_presheaf, path_sheaf, composed)
        mapped_keys.append(transformed.canonical_key())
    injective = len(set(mapped_keys)) == len(mapped_keys)
    surjective = set(mapped_keys) == {t.canonical_key() for t in right}
    bijective = injective and surjective
    if not injective:
        details.append("unit precomposition is not injective")
    if not surjective:
        details.append("unit precomposition is not surjective")
    passed = bijective and len(left) == len(right) and not details
    return AdjunctionReport(passed, len(left), len(right), bijective, tuple(details))


def sieve_label(sieve: Sieve) -> str:
    return "{" + ";".join(sieve.keys()) + "}"


def is_closed_sieve(site: Site, sieve: Sieve) -> bool:
    """J-closed: any morphism whose pullback of the sieve covers already
    belongs to the sieve."""
    cat = site.category
    for g in cat.morphisms_into(sieve.obj):
        if g not in sieve.members and site.topology.covers(
            pullback_sieve(cat, sieve, g)
        ):
            return False
    return True


def omega(site: Site, sieve_cap: int = 12) -> Presheaf:
    """Subobject classifier: closed sieves with pullback as restriction."""
    cat = site.category
    closed: dict[str, list[Sieve]] = {}
    for obj in cat.objects:
        closed[obj] = [
            s
            for s in enumerate_sieves(cat, obj, sieve_cap)
            if is_closed_sieve(site, s)
        ]
        closed[obj].sort(key=lambda s: (len(s.members), s.keys()))
    sections = {
        obj: tuple(sieve_label(s) for s in closed[obj]) for obj in cat.objects
    }
    restrictions: dict[int, dict[str, str]] = {}
    for i, t in enumerate(cat.kg.triples):
        gen = cat.generator_path(i)
        table = {}
        for s in closed[t.tail]:
            pulled = pullback_sieve(cat, s, gen)
            table[sieve_label(s)] = sieve_label(pulled)
        known = set(sections[t.head])
        missing = [v for v in table.values() if v not in known]
        if missing:
            raise PresheafError(
                f"pullback along triple {i} left the closed-sieve lattice: {missing}"
            )
        restrictions[i] = table
    return Presheaf(cat, sections, restrictions)


def enumerate_subpresheaves(presheaf: Presheaf) -> list[Presheaf]:
    """All subpresheaves: objectwise section subsets closed under every
    restriction map.  Exponential in section counts; intended for tiny
    instances."""
    cat = presheaf.cat
    objects = list(cat.objects)
    subsets_per_object = []
    for obj in objects:
        labels = presheaf.sections[obj]
        masks = []
        for mask in range(1 << len(labels)):
            masks.append(
                tuple(labels[i] for i in range(len(labels)) if mask >> i & 1)
            )
        subsets_per_object.append(masks)
    results = []
    for choice in product(*subsets_per_object):
        chosen = dict(zip(objects, choice))
        ok = True
        for i, t in enumerate(cat.kg.triples):
            mapping = presheaf.restrictions[i]
            if any(mapping[s] not in set(chosen[t.head]) for s in chosen[t.tail]):
                ok = False
                break
        if not ok:
            continue
        restrictions = {
            i: {
                s: presheaf.restrictions[i][s]
                for s in chosen[cat.kg.triples[i].tail]
            }
            for i in range(cat.kg.triple_count)
        }
        results.append(Presheaf(cat, chosen, restrictions))
    return results


def count_subsheaves(presheaf: Presheaf, site: Site) -> int:
    """Brute-force count of subpresheaves satisfying the sheaf condition."""
    return sum(
        1 for sub in enumerate_subpresheaves(presheaf) if is_sheaf(sub, site)
    )
