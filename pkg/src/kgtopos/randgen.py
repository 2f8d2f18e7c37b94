"""Seeded random knowledge graphs, homomorphisms and presheaves.

Everything here is driven by an explicit random.Random instance so that
property suites and the CLI verifier are reproducible bit for bit.
"""

from __future__ import annotations

from random import Random

from .freecat import FreeCategory, build_free_category
from .kg import KgHomomorphism, KnowledgeGraph, Triple, find_entity_cycle
from .sheaves import Presheaf
from .sites import DEFAULT_SIEVE_CAP


def random_kg(
    rng: Random,
    max_entities: int = 20,
    max_triples: int = 60,
    acyclic: bool = False,
) -> KnowledgeGraph:
    """A random multigraph; with acyclic=True triples only point from
    lower to higher entity index, so the entity digraph is a DAG."""
    n = rng.randint(1, max_entities)
    entities = tuple(f"e{i}" for i in range(n))
    predicates = tuple(f"p{i}" for i in range(rng.randint(1, 4)))
    target_m = rng.randint(0, max_triples)
    triples: list[Triple] = []
    seen: set[Triple] = set()
    for _ in range(target_m * 3):
        if len(triples) >= target_m:
            break
        if acyclic:
            if n < 2:
                break
            i = rng.randrange(0, n - 1)
            j = rng.randrange(i + 1, n)
        else:
            i = rng.randrange(n)
            j = rng.randrange(n)
        t = Triple(entities[i], rng.choice(predicates), entities[j])
        if t not in seen:
            seen.add(t)
            triples.append(t)
    return KnowledgeGraph(entities, predicates, tuple(triples))


def random_acyclic_kg(
    rng: Random, max_entities: int = 10, max_triples: int = 12
) -> KnowledgeGraph:
    return random_kg(rng, max_entities, max_triples, acyclic=True)


def random_small_category(
    rng: Random,
    max_entities: int = 8,
    max_triples: int = 10,
    max_morphisms: int = 300,
    sieve_cap: int = DEFAULT_SIEVE_CAP,
    max_attempts: int = 200,
) -> FreeCategory:
    """A random acyclic free category kept within enumeration caps: total
    morphism count bounded and at most sieve_cap morphisms into any object."""
    for _ in range(max_attempts):
        kg = random_acyclic_kg(rng, max_entities, max_triples)
        cat = build_free_category(kg)
        if cat.total_morphisms > max_morphisms:
            continue
        if all(
            len(cat.morphisms_into(obj)) <= sieve_cap for obj in cat.objects
        ):
            return cat
    raise RuntimeError("could not sample a category within the caps")


def random_hom(rng: Random, source: KnowledgeGraph) -> KgHomomorphism:
    """A random homomorphism out of `source`, valid by construction: the
    target is the image of the source under random entity and predicate
    fusions, plus occasional extra triples."""
    n_buckets = rng.randint(1, max(1, source.entity_count))
    entity_map = {e: f"E{rng.randrange(n_buckets)}" for e in source.entities}
    p_buckets = rng.randint(1, max(1, len(source.predicates)))
    predicate_map = {p: f"P{rng.randrange(p_buckets)}" for p in source.predicates}

    entities: list[str] = []
    for e in source.entities:
        if entity_map[e] not in entities:
            entities.append(entity_map[e])
    predicates: list[str] = []
    for p in source.predicates:
        if predicate_map[p] not in predicates:
            predicates.append(predicate_map[p])
    triples: list[Triple] = []
    seen: set[Triple] = set()
    for t in source.triples:
        image = Triple(entity_map[t.head], predicate_map[t.predicate], entity_map[t.tail])
        if image not in seen:
            seen.add(image)
            triples.append(image)
    for _ in range(rng.randint(0, 2)):
        if not entities:
            break
        extra = Triple(
            rng.choice(entities), rng.choice(predicates), rng.choice(entities)
        )
        if extra not in seen:
            seen.add(extra)
            triples.append(extra)
    target = KnowledgeGraph(tuple(entities), tuple(predicates), tuple(triples))
    return KgHomomorphism(source, target, entity_map, predicate_map)


def random_hom_chain(
    rng: Random, source: KnowledgeGraph, length: int = 2
) -> list[KgHomomorphism]:
    """Composable homomorphisms f1, f2, ... starting at `source`."""
    chain: list[KgHomomorphism] = []
    current = source
    for _ in range(length):
        hom = random_hom(rng, current)
        chain.append(hom)
        current = hom.target
    return chain


def random_acyclic_hom(rng: Random, source: KnowledgeGraph) -> KgHomomorphism:
    """A homomorphism whose target stays acyclic: entity fusion is
    order-respecting (bucket index never decreases along a triple)."""
    n = source.entity_count
    # Monotone bucket assignment over the entity order preserves the DAG.
    buckets = sorted(rng.randrange(max(1, n)) for _ in range(n))
    entity_map = {e: f"E{buckets[i]}" for i, e in enumerate(source.entities)}
    p_buckets = rng.randint(1, max(1, len(source.predicates)))
    predicate_map = {p: f"P{rng.randrange(p_buckets)}" for p in source.predicates}
    entities: list[str] = []
    for e in source.entities:
        if entity_map[e] not in entities:
            entities.append(entity_map[e])
    predicates: list[str] = []
    for p in source.predicates:
        if predicate_map[p] not in predicates:
            predicates.append(predicate_map[p])
    triples: list[Triple] = []
    seen: set[Triple] = set()
    reflexive: set[Triple] = set()
    for t in source.triples:
        image = Triple(entity_map[t.head], predicate_map[t.predicate], entity_map[t.tail])
        if image.head == image.tail:
            # Fusing both endpoints would create a loop; drop the image.
            reflexive.add(image)
            continue
        if image not in seen:
            seen.add(image)
            triples.append(image)
    if reflexive:
        # Dropped images would break triple preservation; retry without fusion.
        return random_acyclic_hom_identity(rng, source)
    target = KnowledgeGraph(tuple(entities), tuple(predicates), tuple(triples))
    if find_entity_cycle(target) is not None:
        # Happens only when the source entity order was not topological.
        return random_acyclic_hom_identity(rng, source)
    return KgHomomorphism(source, target, entity_map, predicate_map)


def random_acyclic_hom_identity(rng: Random, source: KnowledgeGraph) -> KgHomomorphism:
    """Fallback: rename predicates only, keep entities fixed."""
    p_buckets = rng.randint(1, max(1, len(source.predicates)))
    predicate_map = {p: f"P{rng.randrange(p_buckets)}" for p in source.predicates}
    predicates: list[str] = []
    for p in source.predicates:
        if predicate_map[p] not in predicates:
            predicates.append(predicate_map[p])
    triples: list[Triple] = []
    seen: set[Triple] = set()
    for t in source.triples:
        image = Triple(t.head, predicate_map[t.predicate], t.tail)
        if image not in seen:
            seen.add(image)
            triples.append(image)
    target = KnowledgeGraph(source.entities, tuple(predicates), tuple(triples))
    return KgHomomorphism(
        source, target, {e: e for e in source.entities}, predicate_map
    )


def random_presheaf(
    rng: Random,
    cat: FreeCategory,
    max_sections: int = 3,
    min_sections: int = 1,
) -> Presheaf:
    """A random presheaf on a free category; always valid, since any
    generator assignment extends functorially.

    With min_sections=0 an empty section set forces every object mapping
    into it (along some triple) to be empty too, since no function from a
    nonempty set into the empty set exists.
    """
    counts = {
        obj: rng.randint(min_sections, max_sections) for obj in cat.objects
    }
    changed = True
    while changed:
        changed = False
        for t in cat.kg.triples:
            if counts[t.head] == 0 and counts[t.tail] > 0:
                counts[t.tail] = 0
                changed = True
    sections = {
        obj: tuple(f"{obj}s{k}" for k in range(counts[obj])) for obj in cat.objects
    }
    restrictions = {}
    for i, t in enumerate(cat.kg.triples):
        dom_labels = sections[t.head]
        restrictions[i] = {
            s: rng.choice(dom_labels) for s in sections[t.tail]
        }
    return Presheaf(cat, sections, restrictions)
