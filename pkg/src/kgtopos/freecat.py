"""Free categories of knowledge graphs with explicit finite hom-sets.

Objects are entities, generating morphisms are triples, and general
morphisms are composable paths of triples composed diagrammatically
(left to right).  Hom-sets are enumerated exhaustively, which requires
the entity digraph to be acyclic or an explicit length bound.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping

from .errors import (
    CategoryLawError,
    CategoryNotClosedError,
    CompositionError,
    InfiniteCategoryError,
    TypingError,
)
from .kg import KgHomomorphism, KnowledgeGraph, check_hom, entity_successors, find_entity_cycle


@dataclass(frozen=True)
class Path:
    """A composable sequence of triple indices from source to target.

    The empty sequence is the identity at an object.  Arrows are listed
    in diagrammatic order: arrows[k] ends where arrows[k+1] starts.
    """

    source: str
    target: str
    arrows: tuple[int, ...]

    def __post_init__(self):
        if not self.arrows and self.source != self.target:
            raise ValueError("empty path must start and end at the same object")

    @property
    def is_identity(self) -> bool:
        return not self.arrows

    def __len__(self) -> int:
        return len(self.arrows)


def path_key(path: Path) -> str:
    """Stable textual key: 'id@obj' for identities, dotted arrow indices else."""
    if path.is_identity:
        return f"id@{path.source}"
    return ".".join(str(a) for a in path.arrows)


def compose(p: Path, q: Path) -> Path:
    """Concatenation p-then-q; requires target(p) == source(q)."""
    if p.target != q.source:
        raise CompositionError(
            f"cannot compose: first path ends at {p.target}, second starts at {q.source}"
        )
    return Path(p.source, q.target, p.arrows + q.arrows)


@dataclass(frozen=True)
class FreeCategory:
    """Explicitly enumerated path category of a knowledge graph.

    `complete` records whether the hom-sets are closed under composition;
    it is False exactly when a length bound truncated the enumeration.
    Operations that rely on closure refuse incomplete categories.
    """

    kg: KnowledgeGraph
    hom_sets: dict[tuple[str, str], tuple[Path, ...]]
    max_length: int | None
    complete: bool

    @property
    def objects(self) -> tuple[str, ...]:
        return self.kg.entities

    @property
    def generators(self):
        return self.kg.triples

    def identity(self, obj: str) -> Path:
        return Path(obj, obj, ())

    def generator_path(self, index: int) -> Path:
        t = self.kg.triples[index]
        return Path(t.head, t.tail, (index,))

    def hom(self, a: str, b: str) -> tuple[Path, ...]:
        return self.hom_sets.get((a, b), ())

    def morphisms(self) -> Iterable[Path]:
        for a in self.objects:
            for b in self.objects:
                yield from self.hom(a, b)

    @cached_property
    def morphism_set(self) -> frozenset[Path]:
        return frozenset(self.morphisms())

    @cached_property
    def total_morphisms(self) -> int:
        return sum(len(paths) for paths in self.hom_sets.values())

    @cached_property
    def _into(self) -> dict[str, tuple[Path, ...]]:
        table: dict[str, list[Path]] = {obj: [] for obj in self.objects}
        for p in self.morphisms():
            table[p.target].append(p)
        return {obj: tuple(ps) for obj, ps in table.items()}

    def morphisms_into(self, obj: str) -> tuple[Path, ...]:
        return self._into[obj]

    # Duck-typed category surface shared with FiniteCategory.
    def dom(self, p: Path) -> str:
        return p.source

    def cod(self, p: Path) -> str:
        return p.target

    def compose(self, p: Path, q: Path) -> Path:
        return compose(p, q)

    def has_morphism(self, p: Path) -> bool:
        return p in self.morphism_set

    def require_complete(self, operation: str) -> None:
        if not self.complete:
            raise CategoryNotClosedError(
                f"{operation} needs composition-closed hom-sets; "
                f"the length bound {self.max_length} truncated enumeration"
            )

    def to_dict(self) -> dict:
        homs = {}
        for a in self.objects:
            for b in self.objects:
                paths = self.hom(a, b)
                if paths:
                    homs[f"{a}->{b}"] = [list(p.arrows) for p in paths]
        return {
            "objects": list(self.objects),
            "generators": [[t.head, t.predicate, t.tail] for t in self.generators],
            "max_length": self.max_length,
            "complete": self.complete,
            "hom_sets": homs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def build_free_category(
    kg: KnowledgeGraph, max_length: int | None = None
) -> FreeCategory:
    """Enumerate all composable paths, exhaustively or up to max_length.

    Raises InfiniteCategoryError (with a cycle witness) for a cyclic
    entity digraph when no bound is supplied.
    """
    if max_length is None:
        cycle = find_entity_cycle(kg)
        if cycle is not None:
            raise InfiniteCategoryError(cycle)
    elif max_length < 0:
        raise ValueError("max_length must be non-negative")

    successors = entity_successors(kg)
    hom: dict[tuple[str, str], list[Path]] = {}
    complete = True

    def add(path: Path) -> None:
        hom.setdefault((path.source, path.target), []).append(path)

    queue: deque[Path] = deque()
    for e in kg.entities:
        identity = Path(e, e, ())
        add(identity)
        queue.append(identity)
    while queue:
        path = queue.popleft()
        extensions = successors[path.target]
        if max_length is not None and len(path) >= max_length:
            if extensions:
                complete = False
            continue
        for j in extensions:
            extended = Path(path.source, kg.triples[j].tail, path.arrows + (j,))
            add(extended)
            queue.append(extended)

    hom_sets = {
        key: tuple(sorted(paths, key=lambda p: p.arrows))
        for key, paths in hom.items()
    }
    return FreeCategory(kg, hom_sets, max_length, complete)


def fibres(
    kg: KnowledgeGraph,
) -> tuple[dict[str, tuple[int, ...]], dict[str, tuple[int, ...]]]:
    """Domain and codomain fibres: triples headed by / ending at each entity."""
    by_head: dict[str, list[int]] = {e: [] for e in kg.entities}
    by_tail: dict[str, list[int]] = {e: [] for e in kg.entities}
    for i, t in enumerate(kg.triples):
        by_head[t.head].append(i)
        by_tail[t.tail].append(i)
    return (
        {e: tuple(v) for e, v in by_head.items()},
        {e: tuple(v) for e, v in by_tail.items()},
    )


@dataclass(frozen=True)
class FiniteCategory:
    """A category given by an explicit composition table.

    The category laws (typing, identities, associativity) are validated
    exhaustively on construction.
    """

    objects: tuple[Hashable, ...]
    morphisms: tuple[Hashable, ...]
    dom_map: dict
    cod_map: dict
    identities: dict
    composition: dict

    def __post_init__(self):
        self._validate()

    def _validate(self) -> None:
        morphs = set(self.morphisms)
        for m in self.morphisms:
            if m not in self.dom_map or m not in self.cod_map:
                raise CategoryLawError(f"morphism {m!r} lacks dom or cod")
        for obj in self.objects:
            i = self.identities.get(obj)
            if i is None or i not in morphs:
                raise CategoryLawError(f"object {obj!r} lacks an identity morphism")
            if self.dom_map[i] != obj or self.cod_map[i] != obj:
                raise CategoryLawError(f"identity of {obj!r} has wrong endpoints")
        for f in self.morphisms:
            for g in self.morphisms:
                composable = self.cod_map[f] == self.dom_map[g]
                present = (f, g) in self.composition
                if composable and not present:
                    raise CategoryLawError(f"missing composite for {f!r};{g!r}")
                if not composable and present:
                    raise CategoryLawError(f"composite of non-composable {f!r};{g!r}")
                if present:
                    h = self.composition[(f, g)]
                    if h not in morphs:
                        raise CategoryLawError(f"composite {h!r} is not a morphism")
                    if (
                        self.dom_map[h] != self.dom_map[f]
                        or self.cod_map[h] != self.cod_map[g]
                    ):
                        raise CategoryLawError(f"composite {f!r};{g!r} mistyped")
        for m in self.morphisms:
            left = self.composition[(self.identities[self.dom_map[m]], m)]
            right = self.composition[(m, self.identities[self.cod_map[m]])]
            if left != m or right != m:
                raise CategoryLawError(f"identity law fails at {m!r}")
        for f in self.morphisms:
            for g in self.morphisms:
                if self.cod_map[f] != self.dom_map[g]:
                    continue
                fg = self.composition[(f, g)]
                for h in self.morphisms:
                    if self.cod_map[g] != self.dom_map[h]:
                        continue
                    if self.composition[(fg, h)] != self.composition[
                        (f, self.composition[(g, h)])
                    ]:
                        raise CategoryLawError(
                            f"associativity fails on {f!r};{g!r};{h!r}"
                        )

    def identity(self, obj) -> Hashable:
        return self.identities[obj]

    def dom(self, m) -> Hashable:
        return self.dom_map[m]

    def cod(self, m) -> Hashable:
        return self.cod_map[m]

    def compose(self, f, g) -> Hashable:
        if (f, g) not in self.composition:
            raise CompositionError(f"{f!r} and {g!r} do not compose")
        return self.composition[(f, g)]

    def has_morphism(self, m) -> bool:
        return m in set(self.morphisms)

    def hom(self, a, b) -> tuple:
        return tuple(
            m
            for m in self.morphisms
            if self.dom_map[m] == a and self.cod_map[m] == b
        )

    @classmethod
    def from_free_category(cls, cat: FreeCategory) -> "FiniteCategory":
        cat.require_complete("FiniteCategory.from_free_category")
        morphisms = tuple(cat.morphisms())
        composition = {
            (p, q): compose(p, q)
            for p in morphisms
            for q in morphisms
            if p.target == q.source
        }
        return cls(
            objects=cat.objects,
            morphisms=morphisms,
            dom_map={p: p.source for p in morphisms},
            cod_map={p: p.target for p in morphisms},
            identities={obj: cat.identity(obj) for obj in cat.objects},
            composition=composition,
        )

    @classmethod
    def indiscrete(cls, objects: Iterable[Hashable]) -> "FiniteCategory":
        """Exactly one morphism between every ordered pair of objects."""
        objs = tuple(objects)
        morphisms = tuple((a, b) for a in objs for b in objs)
        return cls(
            objects=objs,
            morphisms=morphisms,
            dom_map={m: m[0] for m in morphisms},
            cod_map={m: m[1] for m in morphisms},
            identities={o: (o, o) for o in objs},
            composition={
                (f, g): (f[0], g[1])
                for f in morphisms
                for g in morphisms
                if f[1] == g[0]
            },
        )


@dataclass(frozen=True)
class Functor:
    """Structure-preserving map out of a free category.

    Validated exhaustively on construction: identities, endpoints and all
    enumerated compositions are preserved.
    """

    source: FreeCategory
    target: object  # FreeCategory or FiniteCategory
    object_map: dict
    morphism_map: dict

    def __post_init__(self):
        self.source.require_complete("Functor validation")
        failures = self.law_failures()
        if failures:
            raise CategoryLawError("; ".join(failures[:3]))

    def law_failures(self) -> list[str]:
        failures: list[str] = []
        tgt = self.target
        for obj in self.source.objects:
            image = self.morphism_map.get(self.source.identity(obj))
            if image != tgt.identity(self.object_map[obj]):
                failures.append(f"identity at {obj} not preserved")
        for p in self.source.morphisms():
            image = self.morphism_map.get(p)
            if image is None:
                failures.append(f"no image for path {path_key(p)}")
                continue
            if tgt.dom(image) != self.object_map[p.source] or tgt.cod(
                image
            ) != self.object_map[p.target]:
                failures.append(f"endpoints of {path_key(p)} not preserved")
        for (_, b), paths in self.source.hom_sets.items():
            for p in paths:
                for c in self.source.objects:
                    for q in self.source.hom(b, c):
                        want = tgt.compose(self.morphism_map[p], self.morphism_map[q])
                        if self.morphism_map.get(compose(p, q)) != want:
                            failures.append(
                                f"composition {path_key(p)};{path_key(q)} not preserved"
                            )
        return failures

    def apply_object(self, obj):
        return self.object_map[obj]

    def apply(self, p: Path):
        return self.morphism_map[p]


def extend_functor(
    cat: FreeCategory,
    object_assignment: Mapping,
    generator_assignment: Mapping[int, Hashable],
    target,
) -> Functor:
    """The unique functor extending assignments on objects and generators.

    Each enumerated path maps to the left-to-right composite of its
    generators' images.  Raises TypingError when a generator image has
    endpoints that disagree with the object assignment.
    """
    cat.require_complete("extend_functor")
    kg = cat.kg
    for obj in cat.objects:
        if obj not in object_assignment:
            raise TypingError(f"no object assignment for {obj}")
    for i, t in enumerate(kg.triples):
        if i not in generator_assignment:
            raise TypingError(f"no generator assignment for triple {i} ({t})")
        image = generator_assignment[i]
        if target.dom(image) != object_assignment[t.head]:
            raise TypingError(f"generator {i} image has wrong domain")
        if target.cod(image) != object_assignment[t.tail]:
            raise TypingError(f"generator {i} image has wrong codomain")
    morphism_map = {}
    for p in cat.morphisms():
        image = target.identity(object_assignment[p.source])
        for arrow in p.arrows:
            image = target.compose(image, generator_assignment[arrow])
        morphism_map[p] = image
    return Functor(cat, target, dict(object_assignment), morphism_map)


def identity_functor(cat: FreeCategory) -> Functor:
    return Functor(
        cat,
        cat,
        {obj: obj for obj in cat.objects},
        {p: p for p in cat.morphisms()},
    )


def induced_functor(
    f: KgHomomorphism,
    source_cat: FreeCategory | None = None,
    target_cat: FreeCategory | None = None,
) -> Functor:
    """Functor between free categories induced by a graph homomorphism:
    objects map by the entity map, paths arrowwise by the triple map."""
    result = check_hom(f)
    if not result:
        raise TypingError(
            f"not a homomorphism; {len(result.violations)} source triples "
            "have no image triple"
        )
    if source_cat is None:
        source_cat = build_free_category(f.source)
    if target_cat is None:
        target_cat = build_free_category(f.target)
    source_cat.require_complete("induced_functor")
    triple_map = [
        f.target.triple_index[f.apply_triple(t)] for t in f.source.triples
    ]
    object_map = {e: f.entity_map[e] for e in f.source.entities}
    morphism_map = {
        p: Path(
            object_map[p.source],
            object_map[p.target],
            tuple(triple_map[a] for a in p.arrows),
        )
        for p in source_cat.morphisms()
    }
    return Functor(source_cat, target_cat, object_map, morphism_map)


def compose_functors(g: Functor, f: Functor) -> Functor:
    """Composite g after f; both must be functors between free categories."""
    if f.target is not g.source and f.target != g.source:
        raise CompositionError("functor targets and sources do not match")
    return Functor(
        f.source,
        g.target,
        {obj: g.object_map[v] for obj, v in f.object_map.items()},
        {p: g.morphism_map[image] for p, image in f.morphism_map.items()},
    )
