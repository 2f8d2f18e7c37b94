import json
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgtopos import (
    CategoryLawError,
    CategoryNotClosedError,
    CompositionError,
    FiniteCategory,
    InfiniteCategoryError,
    Path,
    TypingError,
    build_free_category,
    compose,
    extend_functor,
    fibres,
    head_partition,
    identity_hom,
    induced_functor,
    parse_kg,
    tail_partition,
)
from kgtopos.freecat import compose_functors, identity_functor
from kgtopos.kg import compose_homs
from kgtopos.randgen import random_acyclic_hom, random_small_category
from kgtopos.verify import expected_morphism_count

from helpers import swap_hom


class TestBuild:
    def test_fan_shape(self, fan_cat):
        assert fan_cat.objects == ("A", "B", "C", "D")
        assert len(fan_cat.generators) == 4
        # No triple ends where another starts, so the only morphisms are
        # the four identities and the four generators.
        assert fan_cat.total_morphisms == 8
        assert all(
            len(p.arrows) <= 1 for p in fan_cat.morphisms()
        )

    def test_empty_graph(self):
        cat = build_free_category(parse_kg(""))
        assert cat.objects == () and cat.total_morphisms == 0

    def test_chain_two_path(self):
        cat = build_free_category(parse_kg("A r B\nB s C\n"))
        # Hand enumeration: ids, r, s, and the concatenation r.s.
        assert [p.arrows for p in cat.hom("A", "C")] == [(0, 1)]
        assert cat.total_morphisms == 6

    def test_cycle_without_bound_raises(self):
        with pytest.raises(InfiniteCategoryError) as exc:
            build_free_category(parse_kg("A r B\nB s A\n"))
        assert len(exc.value.cycle) >= 2

    def test_self_loop_witness(self):
        with pytest.raises(InfiniteCategoryError) as exc:
            build_free_category(parse_kg("X r X\n"))
        assert exc.value.cycle == ["X", "X"]

    def test_bounded_cycle_is_incomplete(self):
        cat = build_free_category(parse_kg("A r B\nB s A\n"), max_length=3)
        assert not cat.complete
        assert any(len(p.arrows) == 3 for p in cat.morphisms())

    def test_bound_larger_than_longest_path_is_complete(self):
        cat = build_free_category(parse_kg("A r B\nB s C\n"), max_length=5)
        assert cat.complete

    def test_hom_sets_sorted_lexicographically(self):
        kg = parse_kg("A r B\nA s B\n")
        cat = build_free_category(kg)
        assert [p.arrows for p in cat.hom("A", "B")] == [(0,), (1,)]

    def test_json_export_round_trip_shape(self, fan_cat):
        data = json.loads(fan_cat.to_json())
        assert data["objects"] == ["A", "B", "C", "D"]
        assert data["hom_sets"]["A->B"] == [[0]]
        assert data["complete"] is True


class TestCompose:
    def test_identity_neutral(self, fan_cat):
        generator = fan_cat.generator_path(0)
        assert compose(fan_cat.identity("A"), generator) == generator
        assert compose(generator, fan_cat.identity("B")) == generator

    def test_two_step(self):
        cat = build_free_category(parse_kg("A r B\nB s C\n"))
        combined = compose(cat.generator_path(0), cat.generator_path(1))
        assert combined == Path("A", "C", (0, 1))

    def test_non_composable_rejected(self, fan_cat):
        with pytest.raises(CompositionError):
            compose(fan_cat.generator_path(0), fan_cat.generator_path(1))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**9))
    def test_associative(self, seed):
        rng = Random(seed)
        cat = random_small_category(rng, max_entities=6, max_triples=8)
        triples = []
        for p in cat.morphisms():
            for q in cat.hom(p.target, rng.choice(cat.objects)):
                for r in cat.hom(q.target, rng.choice(cat.objects)):
                    triples.append((p, q, r))
        for p, q, r in triples[:50]:
            assert compose(compose(p, q), r) == compose(p, compose(q, r))


class TestFibres:
    def test_fan_fibres(self, fan_kg):
        by_head, by_tail = fibres(fan_kg)
        assert by_head == {"A": (0, 1), "B": (), "C": (), "D": (2, 3)}
        assert by_tail == {"A": (), "B": (0, 2), "C": (1, 3), "D": ()}

    def test_single_triple(self):
        by_head, by_tail = fibres(parse_kg("A r B\n"))
        assert by_head == {"A": (0,), "B": ()}
        assert by_tail == {"A": (), "B": (0,)}

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**9))
    def test_fibres_match_line_partitions(self, seed):
        from kgtopos.randgen import random_kg

        kg = random_kg(Random(seed), max_entities=10, max_triples=20)
        by_head, by_tail = fibres(kg)
        assert {frozenset(v) for v in by_head.values() if v} == head_partition(
            kg
        ).as_sets()
        assert {frozenset(v) for v in by_tail.values() if v} == tail_partition(
            kg
        ).as_sets()


class TestDomCod:
    def test_generator_endpoints(self, fan_cat):
        for i, t in enumerate(fan_cat.kg.triples):
            p = fan_cat.generator_path(i)
            assert (p.source, p.target) == (t.head, t.tail)

    def test_identity_in_every_hom(self, fan_cat):
        for obj in fan_cat.objects:
            assert fan_cat.identity(obj) in fan_cat.hom(obj, obj)

    def test_acyclic_endo_homs_are_trivial(self, fan_cat):
        for obj in fan_cat.objects:
            assert fan_cat.hom(obj, obj) == (fan_cat.identity(obj),)


class TestFiniteCategory:
    def test_indiscrete_laws(self):
        cat = FiniteCategory.indiscrete(["X", "Y"])
        assert cat.compose(("X", "Y"), ("Y", "X")) == ("X", "X")

    def test_from_free_category(self, fan_cat):
        finite = FiniteCategory.from_free_category(fan_cat)
        assert len(finite.morphisms) == 8

    def test_broken_composition_rejected(self):
        with pytest.raises(CategoryLawError):
            FiniteCategory(
                objects=("X",),
                morphisms=("id", "f"),
                dom_map={"id": "X", "f": "X"},
                cod_map={"id": "X", "f": "X"},
                identities={"X": "id"},
                composition={
                    ("id", "id"): "id",
                    ("id", "f"): "f",
                    ("f", "id"): "id",  # violates the identity law
                    ("f", "f"): "f",
                },
            )


class TestExtendFunctor:
    def test_identity_assignment_gives_identity_functor(self, fan_cat):
        functor = extend_functor(
            fan_cat,
            {obj: obj for obj in fan_cat.objects},
            {i: fan_cat.generator_path(i) for i in range(4)},
            fan_cat,
        )
        assert functor.morphism_map == identity_functor(fan_cat).morphism_map

    def test_collapse_to_two_objects(self, fan_cat):
        # All four generators land on the unique arrow X -> Y; checking the
        # four generator images by hand fixes the whole functor.
        target = FiniteCategory.indiscrete(["X", "Y"])
        functor = extend_functor(
            fan_cat,
            {"A": "X", "D": "X", "B": "Y", "C": "Y"},
            {i: ("X", "Y") for i in range(4)},
            target,
        )
        for i in range(4):
            assert functor.apply(fan_cat.generator_path(i)) == ("X", "Y")

    def test_typing_error(self, fan_cat):
        target = FiniteCategory.indiscrete(["X", "Y"])
        with pytest.raises(TypingError):
            extend_functor(
                fan_cat,
                {"A": "X", "D": "X", "B": "Y", "C": "Y"},
                {0: ("Y", "X"), 1: ("X", "Y"), 2: ("X", "Y"), 3: ("X", "Y")},
                target,
            )

    def test_truncated_source_refused(self):
        cat = build_free_category(parse_kg("A r B\nB s A\n"), max_length=2)
        with pytest.raises(CategoryNotClosedError):
            extend_functor(
                cat,
                {obj: "X" for obj in cat.objects},
                {i: ("X", "X") for i in range(2)},
                FiniteCategory.indiscrete(["X"]),
            )

    def test_uniqueness_against_right_fold(self):
        rng = Random(7)
        cat = random_small_category(rng, max_entities=6, max_triples=8)
        k = 3
        target = FiniteCategory.indiscrete([f"X{i}" for i in range(k)])
        object_map = {obj: f"X{rng.randrange(k)}" for obj in cat.objects}
        generator_map = {
            i: (object_map[t.head], object_map[t.tail])
            for i, t in enumerate(cat.kg.triples)
        }
        functor = extend_functor(cat, object_map, generator_map, target)
        for p in cat.morphisms():
            image = target.identity(object_map[p.target])
            for arrow in reversed(p.arrows):
                image = target.compose(generator_map[arrow], image)
            assert functor.apply(p) == image

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**9))
    def test_random_consistent_assignments_validate(self, seed):
        rng = Random(seed)
        cat = random_small_category(rng, max_entities=5, max_triples=6)
        k = rng.randint(1, 3)
        target = FiniteCategory.indiscrete([f"X{i}" for i in range(k)])
        object_map = {obj: f"X{rng.randrange(k)}" for obj in cat.objects}
        generator_map = {
            i: (object_map[t.head], object_map[t.tail])
            for i, t in enumerate(cat.kg.triples)
        }
        functor = extend_functor(cat, object_map, generator_map, target)
        assert functor.law_failures() == []


class TestInducedFunctor:
    def test_identity_hom(self, fan_kg, fan_cat):
        functor = induced_functor(identity_hom(fan_kg), fan_cat, fan_cat)
        assert functor.morphism_map == identity_functor(fan_cat).morphism_map

    def test_fan_swap(self, fan_kg, fan_cat):
        functor = induced_functor(swap_hom(fan_kg), fan_cat, fan_cat)
        assert functor.object_map == {"A": "D", "D": "A", "B": "B", "C": "C"}
        assert functor.apply(fan_cat.generator_path(0)) == fan_cat.generator_path(2)
        assert functor.apply(fan_cat.generator_path(1)) == fan_cat.generator_path(3)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**9))
    def test_functoriality_over_composition(self, seed):
        rng = Random(seed)
        cat = random_small_category(rng, max_entities=6, max_triples=7)
        f = random_acyclic_hom(rng, cat.kg)
        g = random_acyclic_hom(rng, f.target)
        cat_m = build_free_category(f.target)
        cat_n = build_free_category(g.target)
        lhs = induced_functor(compose_homs(g, f), cat, cat_n)
        rhs = compose_functors(
            induced_functor(g, cat_m, cat_n), induced_functor(f, cat, cat_m)
        )
        assert lhs.object_map == rhs.object_map
        assert lhs.morphism_map == rhs.morphism_map


class TestWalkCountOracle:
    def test_fan(self, fan_kg, fan_cat):
        assert expected_morphism_count(fan_kg) == fan_cat.total_morphisms == 8

    def test_chain(self):
        kg = parse_kg("A r B\nB s C\n")
        assert expected_morphism_count(kg) == build_free_category(kg).total_morphisms

    def test_parallel_edges_counted_separately(self):
        kg = parse_kg("A r B\nA s B\nB t C\n")
        cat = build_free_category(kg)
        # Walks: 3 identities + r, s, t, r.t, s.t = 5 walks.
        assert cat.total_morphisms == expected_morphism_count(kg) == 8

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**9))
    def test_random_acyclic(self, seed):
        cat = random_small_category(Random(seed), max_entities=7, max_triples=9)
        assert cat.total_morphisms == expected_morphism_count(cat.kg)
