"""Command-line interface.

Exit codes: 0 success, 1 check failure, 2 input error, 3 size-cap abort.
All randomness is seeded; --seed falls back to the KGTOPOS_SEED
environment variable and then to 0, and the seed used is always echoed
in verification reports.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path as FilePath

import click

from . import matrices as mx
from . import linegraph as lg
from .errors import KgToposError, SchemaError, SizeCapError
from .freecat import Path, build_free_category, path_key
from .kg import KnowledgeGraph, parse_kg
from .sheaves import (
    MatchingFamily,
    check_adjunction,
    glue as glue_family,
    global_sections,
    is_sheaf,
    load_presheaf,
    omega as build_omega,
    restrict,
    sheafify,
)
from .sites import build_site, sieve_generated_by, topology_to_dict
from .verify import run_verification

INPUT_ERROR, SIZE_ERROR = 2, 3


def _read_graph(path: str) -> KnowledgeGraph:
    return parse_kg(FilePath(path).read_text(encoding="utf-8"))


def _read_json(path: str) -> dict:
    try:
        return json.loads(FilePath(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc


def _emit_json(data: dict) -> None:
    sys.stdout.write(json.dumps(data, indent=2) + "\n")


def _fail(exc: KgToposError) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(SIZE_ERROR if isinstance(exc, SizeCapError) else INPUT_ERROR)


@click.group()
def main() -> None:
    """Exact constructions and machine checks on finite knowledge graphs."""


MATRIX_BUILDERS = {
    "head": mx.head_incidence,
    "tail": mx.tail_incidence,
    "gram-out": mx.gram_out,
    "gram-in": mx.gram_in,
    "adjacency-out": mx.line_adjacency_out,
    "adjacency-in": mx.line_adjacency_in,
}


@main.command()
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--head", "selected", flag_value="head", help="Head incidence matrix.")
@click.option("--tail", "selected", flag_value="tail", help="Tail incidence matrix.")
@click.option("--gram-out", "selected", flag_value="gram-out", help="Shared-head products.")
@click.option("--gram-in", "selected", flag_value="gram-in", help="Shared-tail products.")
@click.option("--adjacency-out", "selected", flag_value="adjacency-out",
              help="Out-line adjacency matrix.")
@click.option("--adjacency-in", "selected", flag_value="adjacency-in",
              help="In-line adjacency matrix.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def matrices(graph: str, selected: str | None, fmt: str) -> None:
    """Emit incidence and line-operator matrices of GRAPH."""
    try:
        kg = _read_graph(graph)
    except KgToposError as exc:
        _fail(exc)
    names = [selected] if selected else list(MATRIX_BUILDERS)
    if fmt == "json":
        _emit_json(
            {name.replace("-", "_"): MATRIX_BUILDERS[name](kg).to_rows() for name in names}
        )
        return
    for k, name in enumerate(names):
        if len(names) > 1:
            if k:
                sys.stdout.write("\n")
            sys.stdout.write(f"# {name}\n")
        sys.stdout.write(MATRIX_BUILDERS[name](kg).to_csv())


@main.command()
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--direction", type=click.Choice(["out", "in"]), default="out")
@click.option("--format", "fmt", type=click.Choice(["dot", "csv", "json"]), default="dot")
def line(graph: str, direction: str, fmt: str) -> None:
    """Emit the out- or in-line digraph of GRAPH."""
    try:
        kg = _read_graph(graph)
    except KgToposError as exc:
        _fail(exc)
    digraph = lg.build_out_line(kg) if direction == "out" else lg.build_in_line(kg)
    if fmt == "dot":
        sys.stdout.write(lg.to_dot(digraph, kg, name=f"{direction}_line"))
    elif fmt == "csv":
        matrix = (
            mx.line_adjacency_out(kg) if direction == "out" else mx.line_adjacency_in(kg)
        )
        sys.stdout.write(matrix.to_csv())
    else:
        _emit_json(
            {
                "direction": direction,
                "vertices": [str(t) for t in kg.triples],
                "adjacency": [list(row) for row in digraph.adjacency],
                "components": [list(b) for b in lg.scc(digraph).blocks],
            }
        )


@main.command()
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-path-length", type=int, default=None)
def freecat(graph: str, max_path_length: int | None) -> None:
    """Emit the path category of GRAPH as JSON."""
    try:
        kg = _read_graph(graph)
        cat = build_free_category(kg, max_path_length)
    except KgToposError as exc:
        _fail(exc)
    sys.stdout.write(cat.to_json())


@main.command()
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--topology", type=click.Choice(["path", "atomic"]), default="path")
@click.option("--max-path-length", type=int, default=None)
@click.option("--sieve-cap", type=int, default=12)
def covers(graph: str, topology: str, max_path_length: int | None, sieve_cap: int) -> None:
    """Emit the covering sieves of GRAPH's site as JSON."""
    try:
        kg = _read_graph(graph)
        site = build_site(kg, topology, max_path_length, sieve_cap)
    except KgToposError as exc:
        _fail(exc)
    _emit_json(topology_to_dict(site, topology))


@main.group()
def sheaf() -> None:
    """Sheaf workflows on a site built from a graph."""


def _load_site_and_presheaf(
    graph: str,
    presheaf_path: str,
    topology: str,
    max_path_length: int | None,
    sieve_cap: int,
):
    kg = _read_graph(graph)
    site = build_site(kg, topology, max_path_length, sieve_cap)
    presheaf = load_presheaf(site.category, _read_json(presheaf_path))
    return site, presheaf


SITE_OPTIONS = [
    click.option("--topology", type=click.Choice(["path", "atomic"]), default="path"),
    click.option("--max-path-length", type=int, default=None),
    click.option("--sieve-cap", type=int, default=12),
]


def site_options(fn):
    for option in reversed(SITE_OPTIONS):
        fn = option(fn)
    return fn


@sheaf.command()
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.argument("presheaf", type=click.Path(exists=True, dir_okay=False))
@site_options
def check(graph, presheaf, topology, max_path_length, sieve_cap) -> None:
    """Report whether PRESHEAF satisfies the sheaf condition."""
    try:
        site, data = _load_site_and_presheaf(
            graph, presheaf, topology, max_path_length, sieve_cap
        )
    except KgToposError as exc:
        _fail(exc)
    result = is_sheaf(data, site)
    payload = {"is_sheaf": result.is_sheaf}
    if result.counterexample:
        payload["counterexample"] = result.counterexample
    _emit_json(payload)
    sys.exit(0 if result.is_sheaf else 1)


@sheaf.command(name="glue")
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.argument("presheaf", type=click.Path(exists=True, dir_okay=False))
@click.option("--family", "family_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON {object, assignment: {path key: section}}.")
@site_options
def glue_cmd(graph, presheaf, family_path, topology, max_path_length, sieve_cap) -> None:
    """Glue a matching family to its unique section."""
    try:
        site, data = _load_site_and_presheaf(
            graph, presheaf, topology, max_path_length, sieve_cap
        )
        family_doc = _read_json(family_path)
        obj = family_doc["object"]
        raw = family_doc["assignment"]
        keyed = {
            path_key(p): p for p in site.category.morphisms_into(obj)
        }
        try:
            generators = [keyed[k] for k in raw]
        except KeyError as exc:
            raise SchemaError(f"unknown path key {exc} into {obj}") from exc
        sieve = sieve_generated_by(site.category, obj, generators)
        assignment = {}
        for p in sieve.sorted_members():
            key = path_key(p)
            if key in raw:
                assignment[p] = str(raw[key])
        for p in sieve.sorted_members():
            if p not in assignment:
                # Values on closure members are forced by compatibility.
                for key, base in raw.items():
                    member = keyed[key]
                    arrows = member.arrows
                    if p.arrows[len(p.arrows) - len(arrows):] == arrows:
                        prefix = p.arrows[: len(p.arrows) - len(arrows)]
                        hpath = Path(p.source, member.source, prefix)
                        assignment[p] = restrict(data, hpath)[str(base)]
                        break
        family = MatchingFamily(sieve, assignment)
        if not site.topology.covers(sieve):
            raise SchemaError(f"the given family does not generate a covering sieve on {obj}")
        section = glue_family(data, family)
    except (KeyError, TypeError) as exc:
        _fail(SchemaError(f"malformed family document: {exc}"))
    except KgToposError as exc:
        _fail(exc)
    _emit_json({"object": obj, "section": section})


@sheaf.command(name="sheafify")
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.argument("presheaf", type=click.Path(exists=True, dir_okay=False))
@site_options
def sheafify_cmd(graph, presheaf, topology, max_path_length, sieve_cap) -> None:
    """Sheafify PRESHEAF and report per-object section counts."""
    try:
        site, data = _load_site_and_presheaf(
            graph, presheaf, topology, max_path_length, sieve_cap
        )
        result = sheafify(data, site)
    except KgToposError as exc:
        _fail(exc)
    _emit_json(
        {
            "section_counts": {
                obj: len(result.sheaf.sections[obj]) for obj in site.category.objects
            },
            "is_sheaf": bool(is_sheaf(result.sheaf, site)),
            "sheaf": result.sheaf.to_dict(),
        }
    )


@sheaf.command(name="global")
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.argument("presheaf", type=click.Path(exists=True, dir_okay=False))
@site_options
def global_cmd(graph, presheaf, topology, max_path_length, sieve_cap) -> None:
    """Enumerate compatible families of sections across all objects."""
    try:
        site, data = _load_site_and_presheaf(
            graph, presheaf, topology, max_path_length, sieve_cap
        )
    except KgToposError as exc:
        _fail(exc)
    sections = global_sections(data)
    _emit_json({"count": len(sections), "sections": sections})


@sheaf.command(name="omega")
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@site_options
def omega_cmd(graph, topology, max_path_length, sieve_cap) -> None:
    """Emit the subobject classifier of the site."""
    try:
        kg = _read_graph(graph)
        site = build_site(kg, topology, max_path_length, sieve_cap)
        classifier = build_omega(site, sieve_cap)
    except KgToposError as exc:
        _fail(exc)
    _emit_json(
        {
            "section_counts": {
                obj: len(classifier.sections[obj]) for obj in site.category.objects
            },
            "is_sheaf": bool(is_sheaf(classifier, site)),
            "omega": classifier.to_dict(),
        }
    )


@sheaf.command(name="adjoint")
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.argument("presheaf", type=click.Path(exists=True, dir_okay=False))
@click.option("--other", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Presheaf JSON for the path-site side.")
@click.option("--section-cap", type=int, default=3)
@click.option("--max-path-length", type=int, default=None)
@click.option("--sieve-cap", type=int, default=12)
def adjoint_cmd(graph, presheaf, other, section_cap, max_path_length, sieve_cap) -> None:
    """Compare hom-set cardinalities across the two transports."""
    try:
        kg = _read_graph(graph)
        site = build_site(kg, "path", max_path_length, sieve_cap)
        atomic_side = load_presheaf(site.category, _read_json(presheaf))
        path_side = load_presheaf(site.category, _read_json(other))
        report = check_adjunction(atomic_side, path_side, site, section_cap)
    except KgToposError as exc:
        _fail(exc)
    _emit_json(
        {
            "passed": report.passed,
            "hom_into_path_sheaf": report.left_count,
            "hom_from_atomic_presheaf": report.right_count,
            "bijective": report.bijective,
            "details": list(report.details),
        }
    )
    sys.exit(0 if report.passed else 1)


@main.command()
@click.argument("graph", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--random", "random_mode", is_flag=True, help="Run the seeded property suites.")
@click.option("--cases", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=None, help="Defaults to $KGTOPOS_SEED, then 0.")
@click.option("--max-size", type=int, default=60, show_default=True,
              help="Largest random graph (triples) in the property suites.")
@click.option("--max-path-length", type=int, default=None)
@click.option("--sieve-cap", type=int, default=12)
@click.option("--section-cap", type=int, default=3)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def verify(
    graph, random_mode, cases, seed, max_size, max_path_length, sieve_cap, section_cap, fmt
) -> None:
    """Run every applicable structural check on GRAPH and/or random cases."""
    if seed is None:
        seed = int(os.environ.get("KGTOPOS_SEED", "0"))
    kg = None
    if graph is not None:
        try:
            kg = _read_graph(graph)
        except KgToposError as exc:
            _fail(exc)
    if kg is None and not random_mode:
        click.echo("error: give a graph file, --random, or both", err=True)
        sys.exit(INPUT_ERROR)
    report = run_verification(
        kg,
        random_mode=random_mode,
        cases=cases,
        seed=seed,
        max_size=max_size,
        max_path_length=max_path_length,
        sieve_cap=sieve_cap,
        section_cap=section_cap,
    )
    if fmt == "json":
        _emit_json(report.to_dict())
    else:
        for result in report.checks:
            line = f"{result.status.upper():7s} {result.name} ({result.seconds:.3f}s)"
            if result.detail:
                line += f" -- {result.detail}"
            sys.stdout.write(line + "\n")
        summary = "all checks passed" if report.passed else "CHECK FAILURES"
        sys.stdout.write(f"seed={report.seed} {summary}\n")
    sys.exit(report.exit_code)


if __name__ == "__main__":
    main()
