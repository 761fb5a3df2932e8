"""Command line entry point: ``python -m vdims``."""

import logging
import sys
from pathlib import Path

import click

from vdims.config import get_settings, configure_logging

logger = logging.getLogger(__name__)

SKELETONS = ["round", "long", "descending"]
R23_CHOICES = ["standard", "braid", "r2only"]
R1_CHOICES = ["mod", "no"]


def _case(skeleton: str, r23: str, r1: str):
    from vdims.services.weight_relations import CaseSpec

    return CaseSpec.parse(f"{skeleton}/{r23}/{r1}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"Wrote {out}")
    else:
        click.echo(text, nl=False)


def _render(reports, fmt: str) -> str:
    from vdims.services.runner import render_csv, render_json, render_markdown

    return {"markdown": render_markdown, "csv": render_csv, "json": render_json}[fmt](reports)


@click.group()
@click.option("--log-level", default=None, help="Override LOG_LEVEL")
def main(log_level: str | None):
    """Dimensions of finite type invariants and weight systems of virtual knots."""
    settings = get_settings()
    if log_level:
        settings = settings.model_copy(update={"log_level": log_level})
    configure_logging(settings)


@main.command()
@click.option("--skeleton", type=click.Choice(SKELETONS), help="Skeleton (omit with --all)")
@click.option("--r23", type=click.Choice(R23_CHOICES), default="standard", show_default=True)
@click.option("--r1", type=click.Choice(R1_CHOICES), default="mod", show_default=True)
@click.option("--all", "run_grid", is_flag=True, help="Run all 18 cases")
@click.option("--max-degree", type=int, default=None, help="Defaults to DEFAULT_MAX_DEGREE")
@click.option("--space", type=click.Choice(["w", "v", "both"]), default="both", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["markdown", "csv", "json"]), default="markdown", show_default=True)
@click.option("--out", default=None, help="Write the report to a file")
def run(skeleton, r23, r1, run_grid, max_degree, space, fmt, out):
    """Compute dim W_n and/or dim V_{n/n-1} for n = 0..max-degree."""
    from vdims.services.runner import RunnerError, parse_spaces, run_all, run_case
    from vdims.services.linalg import LinalgError
    from vdims.services.polyak import PolyakError

    settings = get_settings()
    n_max = settings.default_max_degree if max_degree is None else max_degree
    spaces = parse_spaces(space)
    try:
        if run_grid:
            reports = run_all(n_max, spaces, settings=settings)
        elif skeleton is None:
            raise click.UsageError("Give --skeleton or --all")
        else:
            reports = [run_case(_case(skeleton, r23, r1), n_max, spaces, settings)]
    except (RunnerError, LinalgError, PolyakError) as e:
        raise click.ClickException(str(e))
    _emit(_render(reports, fmt), out)
    failures = [f for r in reports for f in r.failures]
    for failure in failures:
        click.echo(f"FAILED {failure.case}: {failure.error}", err=True)
    if failures:
        sys.exit(1)


@main.command()
@click.option("--max-degree", type=int, default=None, help="Defaults to DEFAULT_MAX_DEGREE")
@click.option("--out", default=None, help="Also write the JSON reports here")
def verify(max_degree, out):
    """Run the whole grid and compare with the published tables (exit 1 on any FAIL)."""
    from vdims.services.runner import RunnerError, render_json, render_verdict, run_all, verify_against_golden

    settings = get_settings()
    n_max = settings.default_max_degree if max_degree is None else max_degree
    try:
        reports = run_all(n_max, settings=settings)
    except RunnerError as e:
        raise click.ClickException(str(e))
    verdict = verify_against_golden(reports, n_max)
    if out:
        _emit(render_json(reports), out)
    click.echo(render_verdict(verdict), nl=False)
    if not verdict.ok:
        sys.exit(1)


@main.command("export-matrix")
@click.option("--case", "case_label", default=None, help="Case label such as long/braid/no")
@click.option("--skeleton", type=click.Choice(SKELETONS), help="Skeleton (omit with --case)")
@click.option("--r23", type=click.Choice(R23_CHOICES), default="standard", show_default=True)
@click.option("--r1", type=click.Choice(R1_CHOICES), default="mod", show_default=True)
@click.option("--degree", type=int, required=True)
@click.option("--space", type=click.Choice(["w", "p"]), default="w", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["sms", "mtx"]), default="sms", show_default=True)
@click.option("--out", required=True, help="Destination file")
def export_matrix(case_label, skeleton, r23, r1, degree, space, fmt, out):
    """Write a relation matrix for third-party rank engines."""
    from vdims.services.matrix_io import export_mtx, export_sms
    from vdims.services.polyak import polyak_matrix
    from vdims.services.weight_relations import CaseSpec, weight_matrix

    if degree < 0:
        raise click.BadParameter("degree must be non-negative")
    if case_label:
        try:
            case = CaseSpec.parse(case_label)
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--case")
    elif skeleton is None:
        raise click.UsageError("Give --case or --skeleton")
    else:
        case = _case(skeleton, r23, r1)
    matrix = weight_matrix(case, degree) if space == "w" else polyak_matrix(case, degree)
    if fmt == "sms":
        export_sms(matrix, out)
    else:
        export_mtx(matrix, out)
    click.echo(f"{case.label} n={degree} {space}: {matrix.n_rows}x{matrix.n_cols}, nnz {matrix.nnz} -> {out}")


@main.command("dump-diagrams")
@click.option("--skeleton", type=click.Choice(SKELETONS), required=True)
@click.option("--degree", type=int, required=True)
@click.option("--signed", is_flag=True, help="Attach sign assignments")
def dump_diagrams(skeleton, degree, signed):
    """Print the diagram basis, one diagram per line."""
    from vdims.services.diagrams import SkeletonKind, enumerate_diagrams, format_diagram

    if degree < 0:
        raise click.BadParameter("degree must be non-negative")
    for d in enumerate_diagrams(SkeletonKind(skeleton), degree, signed):
        click.echo(format_diagram(d))


@main.command()
@click.option("--skeleton", type=click.Choice(SKELETONS), required=True)
@click.option("--r23", type=click.Choice(R23_CHOICES), default="standard", show_default=True)
@click.option("--r1", type=click.Choice(R1_CHOICES), default="mod", show_default=True)
@click.option("--degree", type=int, required=True)
@click.option("--mode", type=click.Choice(["signed", "positive"]), default=None)
def manifest(skeleton, r23, r1, degree, mode):
    """Basis sizes and row counts per move configuration, for diffing."""
    from vdims.services.polyak import PolyakError, PolyakMode, polyak_manifest

    try:
        text = polyak_manifest(_case(skeleton, r23, r1), degree, PolyakMode(mode) if mode else None)
    except PolyakError as e:
        raise click.ClickException(str(e))
    click.echo(text, nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Serve the report endpoints with uvicorn."""
    import uvicorn

    uvicorn.run("vdims.main:app", host=host, port=port, log_level=get_settings().log_level.lower())


if __name__ == "__main__":
    main()
