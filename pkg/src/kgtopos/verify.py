"""Machine checks for every structural statement the library implements.

Each check compares an implementation against an independent route:
matrix identities against direct recomputation from triples, component
partitions against fibre grouping, spectra against a dense eigensolver,
morphism counts against walk counting by matrix powers, hom-set
cardinalities against brute-force enumeration, and so on.  Checks are
seeded and deterministic; size-gated checks report 'skipped' with a
reason instead of silently passing.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from random import Random

from . import matrices as mx
from . import linegraph as lg
from .errors import InfiniteCategoryError, SizeCapError
from .freecat import (
    FiniteCategory,
    FreeCategory,
    build_free_category,
    compose_functors,
    extend_functor,
    fibres,
    identity_functor,
    induced_functor,
)
from .kg import (
    KnowledgeGraph,
    compose_homs,
    entity_adjacency_counts,
    kg_from_json,
    serialize_kg,
)
from .randgen import (
    random_acyclic_hom,
    random_kg,
    random_presheaf,
    random_small_category,
)
from .sheaves import (
    check_adjunction,
    count_subsheaves,
    enumerate_nat_transformations,
    is_sheaf,
    omega,
    sheafify,
    terminal_presheaf,
)
from .sites import (
    Site,
    atomic_topology,
    check_inclusion,
    generate_topology,
    path_topology,
    verify_topology_axioms,
)

SPECTRUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # pass | fail | skipped
    detail: str
    seconds: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "detail": self.detail,
            "seconds": round(self.seconds, 6),
        }


@dataclass(frozen=True)
class VerifyReport:
    seed: int
    checks: tuple[CheckResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _run(name: str, fn) -> CheckResult:
    """Run one check; fn returns a list of failure strings."""
    start = time.perf_counter()
    try:
        failures = fn()
        status = "pass" if not failures else "fail"
        detail = "" if not failures else "; ".join(failures[:5])
    except SizeCapError as exc:
        status, detail = "skipped", f"size cap: {exc}"
    elapsed = time.perf_counter() - start
    return CheckResult(name, status, detail, elapsed)


def _case_rng(suite: str, seed: int, case: int) -> Random:
    return Random(f"{suite}:{seed}:{case}")


# --- single-graph structural checks -----------------------------------


def _direct_line_adjacency(kg: KnowledgeGraph, use_tails: bool) -> list[list[int]]:
    """Recompute the line adjacency straight from the triples."""
    m = kg.triple_count
    key = kg.tails if use_tails else kg.heads
    return [
        [1 if i != j and key[i] == key[j] else 0 for j in range(m)]
        for i in range(m)
    ]


def check_roundtrip(kg: KnowledgeGraph) -> list[str]:
    reparsed = kg_from_json(serialize_kg(kg))
    return [] if reparsed == kg else ["serialization round trip changed the graph"]


def check_column_sums(kg: KnowledgeGraph) -> list[str]:
    failures = []
    for name, matrix in (
        ("head", mx.head_incidence(kg)),
        ("tail", mx.tail_incidence(kg)),
    ):
        for j in range(matrix.cols):
            total = sum(matrix.get(i, j) for i in range(matrix.rows))
            if total != 1:
                failures.append(f"{name} incidence column {j} sums to {total}")
    return failures


def check_gram(kg: KnowledgeGraph) -> list[str]:
    failures = []
    for name, gram in (("out", mx.gram_out(kg)), ("in", mx.gram_in(kg))):
        if not gram.is_symmetric():
            failures.append(f"gram_{name} is not symmetric")
        if any(x not in (0, 1) for x in gram.entries):
            failures.append(f"gram_{name} has entries outside 0/1")
        if any(gram.get(i, i) != 1 for i in range(gram.rows)):
            failures.append(f"gram_{name} diagonal is not all ones")
    return failures


def check_line_operator_identity(kg: KnowledgeGraph) -> list[str]:
    failures = []
    m = kg.triple_count
    for name, computed, use_tails in (
        ("out", mx.line_adjacency_out(kg), False),
        ("in", mx.line_adjacency_in(kg), True),
    ):
        direct = mx.IntMatrix.from_rows(_direct_line_adjacency(kg, use_tails)) \
            if m else mx.IntMatrix.zeros(0, 0)
        if computed != direct:
            failures.append(f"line adjacency ({name}) differs from direct recomputation")
        gram = mx.gram_in(kg) if use_tails else mx.gram_out(kg)
        if computed != gram - mx.IntMatrix.identity(m):
            failures.append(f"line adjacency ({name}) != gram - identity")
    return failures


def check_rank(kg: KnowledgeGraph) -> list[str]:
    failures = []
    heads = len(set(kg.heads))
    tails = len(set(kg.tails))
    got_h = mx.rank_exact(mx.head_incidence(kg))
    got_t = mx.rank_exact(mx.tail_incidence(kg))
    if got_h != heads:
        failures.append(f"rank of head incidence {got_h} != distinct heads {heads}")
    if got_t != tails:
        failures.append(f"rank of tail incidence {got_t} != distinct tails {tails}")
    return failures


def check_spectrum(kg: KnowledgeGraph) -> list[str]:
    failures = []
    for use_tails in (False, True):
        report = mx.spectrum_report(kg, use_tails=use_tails)
        if report.max_deviation >= SPECTRUM_TOLERANCE:
            side = "in" if use_tails else "out"
            failures.append(
                f"spectrum ({side}) deviation {report.max_deviation:.3e} "
                f">= {SPECTRUM_TOLERANCE}"
            )
    return failures


def check_scc_theorem(kg: KnowledgeGraph) -> list[str]:
    report = lg.verify_scc_theorem(kg)
    return list(report.failures)


def check_line_digraph_consistency(kg: KnowledgeGraph) -> list[str]:
    failures = []
    for name, build, matrix in (
        ("out", lg.build_out_line(kg), mx.line_adjacency_out(kg)),
        ("in", lg.build_in_line(kg), mx.line_adjacency_in(kg)),
    ):
        for i in range(kg.triple_count):
            row = set(build.adjacency[i])
            from_matrix = {
                j for j in range(kg.triple_count) if matrix.get(i, j) == 1
            }
            if row != from_matrix:
                failures.append(f"{name}-line digraph row {i} differs from matrix")
    return failures


def expected_morphism_count(kg: KnowledgeGraph) -> int:
    """Identity count plus walk counts from powers of the multigraph
    adjacency; independent of the path enumeration."""
    n = kg.entity_count
    if n == 0:
        return 0
    adjacency = mx.IntMatrix.from_rows(entity_adjacency_counts(kg))
    total = n
    power = adjacency
    while any(power.entries):
        total += sum(power.entries)
        power = power @ adjacency
    return total


def check_walk_count(cat: FreeCategory) -> list[str]:
    expected = expected_morphism_count(cat.kg)
    if cat.total_morphisms != expected:
        return [
            f"enumerated {cat.total_morphisms} morphisms, walk oracle says {expected}"
        ]
    return []


def check_fibres_match_partitions(kg: KnowledgeGraph) -> list[str]:
    failures = []
    by_head, by_tail = fibres(kg)
    head_blocks = {frozenset(v) for v in by_head.values() if v}
    tail_blocks = {frozenset(v) for v in by_tail.values() if v}
    if head_blocks != lg.head_partition(kg).as_sets():
        failures.append("head fibres differ from head partition")
    if tail_blocks != lg.tail_partition(kg).as_sets():
        failures.append("tail fibres differ from tail partition")
    return failures


def _right_fold(cat: FreeCategory, target, object_map, generator_map, p):
    image = target.identity(object_map[p.target])
    for arrow in reversed(p.arrows):
        image = target.compose(generator_map[arrow], image)
    return image


def check_extend_functor(cat: FreeCategory, rng: Random) -> list[str]:
    """Functor extension into an indiscrete target: construction validates
    the laws; uniqueness is checked against an independent right fold."""
    failures = []
    k = rng.randint(1, 3)
    target = FiniteCategory.indiscrete([f"X{i}" for i in range(k)])
    object_map = {obj: f"X{rng.randrange(k)}" for obj in cat.objects}
    generator_map = {
        i: (object_map[t.head], object_map[t.tail])
        for i, t in enumerate(cat.kg.triples)
    }
    functor = extend_functor(cat, object_map, generator_map, target)
    for p in cat.morphisms():
        if functor.morphism_map[p] != _right_fold(
            cat, target, object_map, generator_map, p
        ):
            failures.append("left and right folds disagree; extension not unique")
            break
    identity = extend_functor(
        cat,
        {obj: obj for obj in cat.objects},
        {i: cat.generator_path(i) for i in range(cat.kg.triple_count)},
        cat,
    )
    if identity.morphism_map != identity_functor(cat).morphism_map:
        failures.append("identity assignments did not extend to the identity functor")
    return failures


def check_functoriality_of_homs(kg: KnowledgeGraph, rng: Random) -> list[str]:
    """C(g o f) = C(g) o C(f) and the same for the line-digraph maps."""
    failures = []
    f = random_acyclic_hom(rng, kg)
    g = random_acyclic_hom(rng, f.target)
    gf = compose_homs(g, f)
    cat_k = build_free_category(kg)
    cat_m = build_free_category(f.target)
    cat_n = build_free_category(g.target)
    functor_f = induced_functor(f, cat_k, cat_m)
    functor_g = induced_functor(g, cat_m, cat_n)
    direct = induced_functor(gf, cat_k, cat_n)
    composite = compose_functors(functor_g, functor_f)
    if direct.object_map != composite.object_map:
        failures.append("induced functor object maps disagree with composition")
    if direct.morphism_map != composite.morphism_map:
        failures.append("induced functor morphism maps disagree with composition")
    map_f = lg.induced_line_map(f)
    map_g = lg.induced_line_map(g)
    map_gf = lg.induced_line_map(gf)
    if not (map_f.passed and map_g.passed and map_gf.passed):
        failures.append("an induced line map failed its edge check")
    composed = tuple(map_g.vertex_map[v] for v in map_f.vertex_map)
    if composed != map_gf.vertex_map:
        failures.append("line maps do not compose functorially")
    return failures


# --- random property suites -------------------------------------------


def suite_incidence_line(
    seed: int, cases: int = 200, max_entities: int = 20, max_triples: int = 60
) -> list[CheckResult]:
    def body() -> list[str]:
        failures = []
        for case in range(cases):
            rng = _case_rng("incidence", seed, case)
            kg = random_kg(rng, max_entities, max_triples)
            for check in (
                check_column_sums,
                check_gram,
                check_line_operator_identity,
                check_rank,
                check_spectrum,
                check_scc_theorem,
                check_line_digraph_consistency,
            ):
                for failure in check(kg):
                    failures.append(f"case {case}: {failure}")
        return failures

    return [_run(f"suite.incidence_line[{cases}]", body)]


def suite_categories(seed: int, cases: int = 100) -> list[CheckResult]:
    def body() -> list[str]:
        failures = []
        for case in range(cases):
            rng = _case_rng("categories", seed, case)
            cat = random_small_category(
                rng, max_entities=8, max_triples=10, max_morphisms=250
            )
            for failure in check_walk_count(cat):
                failures.append(f"case {case}: {failure}")
            for failure in check_fibres_match_partitions(cat.kg):
                failures.append(f"case {case}: {failure}")
            for failure in check_extend_functor(cat, rng):
                failures.append(f"case {case}: {failure}")
            for failure in check_functoriality_of_homs(cat.kg, rng):
                failures.append(f"case {case}: {failure}")
        return failures

    return [_run(f"suite.categories[{cases}]", body)]


def suite_topologies(seed: int, cases: int = 50, sieve_cap: int = 12) -> list[CheckResult]:
    def body() -> list[str]:
        failures = []
        for case in range(cases):
            rng = _case_rng("topologies", seed, case)
            cat = random_small_category(
                rng,
                max_entities=6,
                max_triples=7,
                max_morphisms=60,
                sieve_cap=min(10, sieve_cap),
            )
            path = path_topology(cat, sieve_cap)
            atomic = atomic_topology(cat, sieve_cap)
            for name, topology in (("path", path), ("atomic", atomic)):
                report = verify_topology_axioms(Site(cat, topology), sieve_cap)
                for violation in report.violations:
                    failures.append(f"case {case} ({name}): {violation}")
            if not check_inclusion(atomic, path):
                failures.append(f"case {case}: atomic topology not inside path topology")
            regenerated = generate_topology(
                cat,
                {
                    obj: [s.sorted_members() for s in path.covering_sieves(obj)]
                    for obj in cat.objects
                    if path.covering_sieves(obj)
                },
                sieve_cap,
            )
            if regenerated != path:
                failures.append(f"case {case}: saturation is not idempotent")
        return failures

    return [_run(f"suite.topologies[{cases}]", body)]


def _tiny_site(rng: Random, sieve_cap: int = 12) -> Site:
    cat = random_small_category(
        rng, max_entities=4, max_triples=4, max_morphisms=30, sieve_cap=8
    )
    return Site(cat, path_topology(cat, sieve_cap))


def suite_sheafification(seed: int, cases: int = 30) -> list[CheckResult]:
    def body() -> list[str]:
        failures = []
        for case in range(cases):
            rng = _case_rng("sheafification", seed, case)
            site = _tiny_site(rng)
            presheaf = random_presheaf(rng, site.category, max_sections=3)
            result = sheafify(presheaf, site)
            if not is_sheaf(result.sheaf, site):
                failures.append(f"case {case}: sheafified presheaf fails the sheaf condition")
            again = sheafify(result.sheaf, site)
            counts = {o: len(s) for o, s in result.sheaf.sections.items()}
            counts_again = {o: len(s) for o, s in again.sheaf.sections.items()}
            if counts != counts_again:
                failures.append(f"case {case}: sheafification not idempotent on counts")
            if is_sheaf(presheaf, site):
                for obj in site.category.objects:
                    component = result.unit.components[obj]
                    if len(set(component.values())) != len(
                        presheaf.sections[obj]
                    ) or len(component) != len(result.sheaf.sections[obj]):
                        failures.append(
                            f"case {case}: unit not bijective at {obj} on a sheaf"
                        )
        return failures

    return [_run(f"suite.sheafification[{cases}]", body)]


def _small_path_sheaf(rng: Random, site: Site, section_cap: int = 2):
    """A sheaf for the path site whose section sets respect the cap,
    obtained by sheafifying random presheaves until one fits."""
    for _ in range(40):
        candidate = sheafify(
            random_presheaf(rng, site.category, max_sections=section_cap), site
        ).sheaf
        if all(len(v) <= section_cap for v in candidate.sections.values()):
            return candidate
    return sheafify(terminal_presheaf(site.category), site).sheaf


def suite_adjunction(seed: int, cases: int = 20) -> list[CheckResult]:
    def body() -> list[str]:
        failures = []
        for case in range(cases):
            rng = _case_rng("adjunction", seed, case)
            site = _tiny_site(rng)
            atomic_side = random_presheaf(rng, site.category, max_sections=2)
            path_side = _small_path_sheaf(rng, site, section_cap=2)
            report = check_adjunction(atomic_side, path_side, site, section_cap=2)
            if not report.passed:
                failures.append(
                    f"case {case}: hom counts {report.left_count} vs "
                    f"{report.right_count}, bijective={report.bijective}, "
                    f"{'; '.join(report.details)}"
                )
        return failures

    return [_run(f"suite.adjunction[{cases}]", body)]


def suite_omega(seed: int, cases: int = 10) -> list[CheckResult]:
    def body() -> list[str]:
        failures = []
        for case in range(cases):
            rng = _case_rng("omega", seed, case)
            cat = random_small_category(
                rng, max_entities=4, max_triples=3, max_morphisms=20, sieve_cap=6
            )
            for name, topology in (
                ("path", path_topology(cat)),
                ("atomic", atomic_topology(cat)),
            ):
                site = Site(cat, topology)
                classifier = omega(site)
                if not is_sheaf(classifier, site):
                    failures.append(f"case {case}: omega ({name}) is not a sheaf")
                terminal = terminal_presheaf(cat)
                subsheaves = count_subsheaves(terminal, site)
                cap = max(
                    (len(v) for v in classifier.sections.values()), default=1
                )
                homs = enumerate_nat_transformations(terminal, classifier, cap)
                if subsheaves != len(homs):
                    failures.append(
                        f"case {case}: {subsheaves} subsheaves of the terminal "
                        f"({name}) but {len(homs)} maps into omega"
                    )
        return failures

    return [_run(f"suite.omega[{cases}]", body)]


# --- whole-graph verification -----------------------------------------


def graph_checks(
    kg: KnowledgeGraph,
    max_path_length: int | None = None,
    sieve_cap: int = 12,
    section_cap: int = 3,
    max_size_for_sites: int = 40,
) -> list[CheckResult]:
    """Every applicable structural check on one graph, size-gated."""
    results = [
        _run("kg.roundtrip", lambda: check_roundtrip(kg)),
        _run("incidence.column_sums", lambda: check_column_sums(kg)),
        _run("incidence.gram", lambda: check_gram(kg)),
        _run(
            "incidence.line_operator_identity",
            lambda: check_line_operator_identity(kg),
        ),
        _run("incidence.rank", lambda: check_rank(kg)),
        _run("incidence.spectrum", lambda: check_spectrum(kg)),
        _run("line.scc_theorem", lambda: check_scc_theorem(kg)),
        _run("line.matrix_consistency", lambda: check_line_digraph_consistency(kg)),
    ]
    cat = None
    start = time.perf_counter()
    try:
        cat = build_free_category(kg, max_path_length)
    except InfiniteCategoryError as exc:
        results.append(
            CheckResult(
                "freecat.walk_count",
                "skipped",
                f"free category unavailable: {exc}",
                time.perf_counter() - start,
            )
        )
    if cat is not None:
        if cat.complete:
            results.append(
                _run("freecat.walk_count", lambda: check_walk_count(cat))
            )
        else:
            results.append(
                CheckResult(
                    "freecat.walk_count",
                    "skipped",
                    "hom-sets truncated by the length bound",
                    0.0,
                )
            )
        results.append(
            _run(
                "freecat.fibres",
                lambda: check_fibres_match_partitions(kg),
            )
        )
    if cat is None or not cat.complete:
        reason = "free category unavailable or truncated"
        for name in ("sites.axioms", "sites.inclusion", "sheaf.omega", "sheaf.adjunction"):
            results.append(CheckResult(name, "skipped", reason, 0.0))
        return results
    if cat.total_morphisms > max_size_for_sites or any(
        len(cat.morphisms_into(obj)) > sieve_cap for obj in cat.objects
    ):
        reason = (
            f"category has {cat.total_morphisms} morphisms; site and sheaf "
            f"checks are gated at {max_size_for_sites} and sieve cap {sieve_cap}"
        )
        for name in ("sites.axioms", "sites.inclusion", "sheaf.omega", "sheaf.adjunction"):
            results.append(CheckResult(name, "skipped", reason, 0.0))
        return results

    path = path_topology(cat, sieve_cap)
    atomic = atomic_topology(cat, sieve_cap)
    path_site, atomic_site = Site(cat, path), Site(cat, atomic)

    def axioms() -> list[str]:
        failures = []
        for name, site in (("path", path_site), ("atomic", atomic_site)):
            failures.extend(
                f"{name}: {v}"
                for v in verify_topology_axioms(site, sieve_cap).violations
            )
        return failures

    results.append(_run("sites.axioms", axioms))
    results.append(
        _run(
            "sites.inclusion",
            lambda: []
            if check_inclusion(atomic, path)
            else ["atomic covering sieves are not all path-covering"],
        )
    )

    def omega_check() -> list[str]:
        failures = []
        for name, site in (("path", path_site), ("atomic", atomic_site)):
            if not is_sheaf(omega(site, sieve_cap), site):
                failures.append(f"omega on the {name} site fails the sheaf condition")
        return failures

    results.append(_run("sheaf.omega", omega_check))

    def adjunction_check() -> list[str]:
        rng = Random(f"graph-adjunction:{kg.triple_count}")
        atomic_side = random_presheaf(rng, cat, max_sections=2)
        path_side = _small_path_sheaf(rng, path_site, section_cap=max(2, section_cap))
        report = check_adjunction(
            atomic_side, path_side, path_site, max(2, section_cap)
        )
        if report.passed:
            return []
        return [
            f"hom counts {report.left_count} vs {report.right_count}: "
            + "; ".join(report.details)
        ]

    results.append(_run("sheaf.adjunction", adjunction_check))
    return results


def run_verification(
    kg: KnowledgeGraph | None = None,
    random_mode: bool = False,
    cases: int = 200,
    seed: int = 0,
    max_size: int = 60,
    max_path_length: int | None = None,
    sieve_cap: int = 12,
    section_cap: int = 3,
) -> VerifyReport:
    """Graph checks for `kg` and/or the seeded random suites.

    `max_size` bounds the triple count of the random graphs in the
    incidence/line suite; the later suites use smaller built-in bounds so
    that saturation and brute-force enumeration stay tractable.
    """
    checks: list[CheckResult] = []
    if kg is not None:
        checks.extend(
            graph_checks(kg, max_path_length, sieve_cap, section_cap)
        )
    if random_mode:
        checks.extend(
            suite_incidence_line(
                seed,
                cases,
                max_entities=max(1, min(20, max_size // 3)),
                max_triples=max(1, max_size),
            )
        )
        checks.extend(suite_categories(seed, max(1, cases // 2)))
        checks.extend(suite_topologies(seed, max(1, cases // 4), sieve_cap))
        checks.extend(suite_sheafification(seed, max(1, (3 * cases) // 20)))
        checks.extend(suite_adjunction(seed, max(1, cases // 10)))
        checks.extend(suite_omega(seed, max(1, cases // 20)))
    return VerifyReport(seed, tuple(checks))
