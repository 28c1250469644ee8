"""Operator command line: ingest, validate, analyze, serve, fixture.

Exit codes: 0 success, 1 validation errors, 2 environment problems
(unreadable input, parse failure, port in use). With --json every command
prints one machine-parseable JSON report to stdout.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .artifacts import PRODUCTS, AnalysisParams, write_products
from .canonical import canonical_serialize, load_document, save_document
from .collab import SessionService
from .ingest import IngestError, SourceBundle, default_detectors, ingest, run_detectors
from .validation import validate

DATA_DIR_ENV = "AUTOVIS_DATA_DIR"


def _echo(payload: dict, as_json: bool, human: str) -> None:
    if as_json:
        click.echo(json.dumps(payload, sort_keys=True))
    else:
        click.echo(human)


def _load_settings(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.exceptions.Exit(2) from exc


@click.group()
def main() -> None:
    """Headless analytics and collaborative replay for driving-study recordings."""


@main.command("ingest")
@click.option("--manifest", required=True, type=click.Path(), help="Source bundle manifest.json")
@click.option("--out", required=True, type=click.Path(), help="Output config document path")
@click.option("--detectors/--no-detectors", "use_detectors", default=True,
              help="Run the baseline event detectors after ingestion")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report on stdout")
def cmd_ingest(manifest: str, out: str, use_detectors: bool, as_json: bool) -> None:
    """Convert a raw source bundle into one canonical config document."""
    try:
        bundle = SourceBundle.load(manifest)
        doc, report = ingest(bundle)
        if use_detectors:
            doc = run_detectors(doc, default_detectors())
    except IngestError as exc:
        _echo({"ok": False, "stage": "ingest", "error": str(exc)}, as_json, f"ingest failed: {exc}")
        sys.exit(2)
    except OSError as exc:
        _echo({"ok": False, "stage": "io", "error": str(exc)}, as_json, f"cannot read bundle: {exc}")
        sys.exit(2)

    validation = validate(doc)
    try:
        save_document(doc, out)
    except OSError as exc:
        _echo({"ok": False, "stage": "io", "error": str(exc)}, as_json, f"cannot write {out}: {exc}")
        sys.exit(2)

    payload = {
        "ok": validation.ok,
        "out": str(out),
        "ingest": report.to_json(),
        "validation": validation.to_json(),
    }
    lines = [f"wrote {out}", f"ingest warnings: {len(report.warnings)}",
             f"validation: {len(validation.errors)} errors, {len(validation.warnings)} warnings"]
    for f in validation.findings[:20]:
        lines.append(f"  [{f.severity}] {f.path}: {f.message}")
    _echo(payload, as_json, "\n".join(lines))
    sys.exit(0 if validation.ok else 1)


@main.command("validate")
@click.option("--config", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def cmd_validate(config: str, as_json: bool) -> None:
    """Validate an existing config document."""
    try:
        doc = load_document(config)
    except (OSError, ValueError) as exc:
        _echo({"ok": False, "error": str(exc)}, as_json, f"cannot parse {config}: {exc}")
        sys.exit(2)
    report = validate(doc)
    lines = [f"{len(report.errors)} errors, {len(report.warnings)} warnings"]
    lines += [f"  [{f.severity}] {f.path}: {f.message}" for f in report.findings[:50]]
    _echo(report.to_json(), as_json, "\n".join(lines))
    sys.exit(0 if report.ok else 1)


@main.command("analyze")
@click.option("--config", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Artifact output directory")
@click.option("--products", default=",".join(PRODUCTS), show_default=True,
              help="Comma-separated subset of: " + ", ".join(PRODUCTS))
@click.option("--sigma-interior", type=float, default=None, help="Kernel sigma on interior surfaces [m]")
@click.option("--sigma-environment", type=float, default=None, help="Kernel sigma on environment meshes [m]")
@click.option("--heatmap-res", type=int, default=None, help="Texels per mesh edge (default 256)")
@click.option("--epsilon", type=float, default=None, help="Trajectory simplification tolerance [m]")
@click.option("--gazetteer", type=click.Path(), default=None, help="Offline place index JSON")
@click.option("--settings", type=click.Path(), default=None, help="JSON settings file (flags win)")
@click.option("--json", "as_json", is_flag=True)
def cmd_analyze(config, out_dir, products, sigma_interior, sigma_environment, heatmap_res,
                epsilon, gazetteer, settings, as_json) -> None:
    """Compute analysis artifacts headlessly (deterministic across runs)."""
    try:
        doc = load_document(config)
    except (OSError, ValueError) as exc:
        _echo({"ok": False, "error": str(exc)}, as_json, f"cannot parse {config}: {exc}")
        sys.exit(2)

    merged = _load_settings(settings)
    for key, value in (
        ("sigma_interior", sigma_interior),
        ("sigma_environment", sigma_environment),
        ("heatmap_res", heatmap_res),
        ("epsilon", epsilon),
        ("gazetteer", gazetteer),
    ):
        if value is not None:
            merged[key] = value
    params = AnalysisParams.from_settings(merged)

    wanted = [p for p in products.split(",") if p]
    try:
        manifest = write_products(doc, wanted, out_dir, params)
    except KeyError as exc:
        _echo({"ok": False, "error": str(exc)}, as_json, f"unknown product: {exc}")
        sys.exit(2)
    payload = {"ok": True, **manifest}
    files = [f for lst in manifest["written"].values() for f in lst]
    _echo(payload, as_json, f"wrote {len(files)} artifact file(s) to {out_dir}")
    sys.exit(0)


@main.command("serve")
@click.option("--config", type=click.Path(), default=None, help="Config document to host as one session")
@click.option("--data-dir", type=click.Path(), default=None,
              help=f"Session persistence root (default ${DATA_DIR_ENV})")
@click.option("--bind", default="127.0.0.1:8000", show_default=True, help="host:port")
@click.option("--console", "console_dir", type=click.Path(), default=None,
              help="Directory of built console assets to serve at /")
@click.option("--json", "as_json", is_flag=True)
def cmd_serve(config, data_dir, bind, console_dir, as_json) -> None:
    """Host sessions over HTTP + WebSocket sync; restores persisted ones."""
    import uvicorn

    from .collab.http import create_app

    root = data_dir or os.environ.get(DATA_DIR_ENV)
    service = SessionService(root=root)
    restored = service.restore()

    hosted = None
    if config:
        try:
            doc = load_document(config)
            session = service.host(doc)
            hosted = session.id
        except Exception as exc:  # noqa: BLE001 - any hosting failure is fatal here
            _echo({"ok": False, "error": str(exc)}, as_json, f"cannot host {config}: {exc}")
            sys.exit(1 if "validation" in str(exc) else 2)

    host, _, port_text = bind.rpartition(":")
    try:
        port = int(port_text)
    except ValueError:
        _echo({"ok": False, "error": f"bad bind address {bind!r}"}, as_json, f"bad bind address {bind!r}")
        sys.exit(2)

    _echo(
        {"ok": True, "restored": restored, "hosted": hosted, "bind": bind},
        as_json,
        f"serving on {bind} (restored {restored} session(s)"
        + (f", hosting {hosted})" if hosted else ")"),
    )
    app = create_app(service, console_dir=console_dir)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=port, log_level="warning")
    except SystemExit as exc:
        if exc.code not in (0, None):  # uvicorn startup failure (e.g. port in use)
            sys.exit(2)
        raise
    except OSError as exc:
        _echo({"ok": False, "error": str(exc)}, as_json, f"cannot bind {bind}: {exc}")
        sys.exit(2)


@main.command("fixture")
@click.option("--out", required=True, type=click.Path(), help="Directory for the synthetic fixture")
@click.option("--kind", type=click.Choice(["bundle", "config", "driveact", "gazetteer"]), default="config")
@click.option("--json", "as_json", is_flag=True)
def cmd_fixture(out, kind, as_json) -> None:
    """Write the bundled synthetic study fixture."""
    from . import fixtures

    out_path = Path(out)
    if kind == "bundle":
        written = fixtures.write_source_bundle(out_path)
    elif kind == "driveact":
        written = fixtures.write_driveact_sample(out_path)
    elif kind == "gazetteer":
        out_path.parent.mkdir(parents=True, exist_ok=True)
        written = fixtures.write_gazetteer(out_path)
    else:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        doc = fixtures.build_study_document()
        save_document(doc, out_path)
        written = out_path
    _echo({"ok": True, "written": str(written)}, as_json, f"wrote {written}")
    sys.exit(0)


if __name__ == "__main__":
    main()
