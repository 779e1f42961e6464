"""Command-line entry point: serve the backend, simulate booths, generate the
demo dataset, run analytics, and move archives around.

Configuration precedence for shared settings: command-line flag, then
environment variable (PROTOBOOTH_DATA_DIR, PROTOBOOTH_BIND), then config
file (plain `key = value` lines), then built-in default.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from . import analytics as an
from . import figures as rd
from .archive import export_archive, import_archive
from .clock import SimulatedClock, SystemClock
from .fixture import install_fixture, synthesize_case_fixture
from .model import ModelError
from .node import (
    CaptureNode,
    FlakyUplink,
    HttpUplink,
    MockCameraRig,
    ServiceUplink,
    Spool,
    drain_spool,
)
from .service import BoothService, ServiceError
from .store import Repository, StorageFault

DEFAULT_DATA_DIR = "protobooth-data"
DEFAULT_BIND = "127.0.0.1:8787"

FIGURE_NAMES = {
    "fig3": "weekday",
    "weekday": "weekday",
    "fig4": "timeline",
    "timeline": "timeline",
    "fig5": "cumulative",
    "cumulative": "cumulative",
    "matrix": "matrix",
    "graph": "graph",
    "bulk": "bulk",
}


def _load_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    config_path = Path(path)
    if not config_path.exists():
        _fail([f"config file not found: {path}"])
    values = {}
    for raw_line in config_path.read_text().splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            _fail([f"config line is not key=value: {line!r}"])
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _fail(violations: list[str], code: int = 1):
    click.echo(json.dumps({"violations": violations}), err=True)
    sys.exit(code)


def _open_service(ctx: click.Context) -> BoothService:
    data_dir = ctx.obj["data_dir"]
    try:
        repo = Repository(Path(data_dir))
    except OSError as exc:
        _fail([f"data directory unusable: {data_dir}: {exc}"], code=2)
    return BoothService(repo)


@click.group()
@click.option("--config", "config_path", default=None, help="Key=value config file.")
@click.option(
    "--data-dir",
    envvar="PROTOBOOTH_DATA_DIR",
    default=None,
    help="Repository directory (default ./protobooth-data).",
)
@click.option(
    "--bind",
    envvar="PROTOBOOTH_BIND",
    default=None,
    help="host:port for serve (default 127.0.0.1:8787).",
)
@click.pass_context
def main(ctx, config_path, data_dir, bind):
    """Prototype capture system: booth daemon, backend and analytics."""
    config = _load_config(config_path)
    ctx.obj = {
        "data_dir": data_dir or config.get("data_dir") or DEFAULT_DATA_DIR,
        "bind": bind or config.get("bind") or DEFAULT_BIND,
        "config": config,
    }


def _setting(ctx: click.Context, flag_value, key: str, fallback):
    """Flag beats config file beats built-in default (env is handled by click)."""
    if flag_value is not None:
        return flag_value
    return ctx.obj["config"].get(key, fallback)


@main.command()
@click.option("--static", "static_dir", default=None, help="Directory of web assets to serve at /.")
@click.pass_context
def serve(ctx, static_dir):
    """Run the backend wire API until interrupted."""
    import uvicorn

    from .api import create_app

    bind = ctx.obj["bind"]
    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        _fail([f"bind address must be host:port, got {bind!r}"], code=2)
    service = _open_service(ctx)
    static = Path(static_dir) if static_dir else None
    if static is not None and not static.is_dir():
        _fail([f"static directory not found: {static_dir}"], code=2)
    app = create_app(service, static_dir=static)
    click.echo(f"serving on http://{host}:{port_text} (data: {ctx.obj['data_dir']})")
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    except OSError as exc:
        _fail([f"cannot bind {bind}: {exc}"], code=2)


def _load_swipes(path: str) -> list[dict]:
    try:
        events = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        _fail([f"swipe script unreadable: {exc}"], code=2)
    if not isinstance(events, list):
        _fail(["swipe script must be a JSON list"], code=2)
    for event in events:
        if not isinstance(event, dict) or "card_id" not in event:
            _fail([f"swipe event needs card_id: {event!r}"], code=2)
        event.setdefault("offset_seconds", 0)
    return sorted(events, key=lambda e: float(e["offset_seconds"]))


@main.command()
@click.option("--simulate", is_flag=True, help="Run with the mock camera rig.")
@click.option("--swipes", "swipes_path", required=True, help="JSON swipe script.")
@click.option("--booth-id", default=None, help="Booth identity (default booth-01).")
@click.option("--spool-dir", default=None, help="Spool directory (default <data-dir>/spool-<booth>).")
@click.option("--server", default=None, help="Backend URL; omit to deliver into --data-dir directly.")
@click.option("--base-time", type=int, default=1_600_000_000, show_default=True)
@click.option("--frame-latency", type=float, default=None, help="Seconds per frame (default 1.28).")
@click.option("--notify-interval", type=float, default=None, help="Done-blink seconds (default 5).")
@click.option("--fail-rate", type=float, default=0.0, help="Injected uplink failure rate.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--flush-rounds", type=int, default=8, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.pass_context
def node(ctx, simulate, swipes_path, booth_id, spool_dir, server, base_time,
         frame_latency, notify_interval, fail_rate, seed, flush_rounds, fmt):
    """Simulate one booth running a swipe script, then deliver the spool."""
    if not simulate:
        _fail(["no camera hardware drivers present; run with --simulate"], code=2)
    events = _load_swipes(swipes_path)
    booth_id = str(_setting(ctx, booth_id, "booth_id", "booth-01"))
    server = _setting(ctx, server, "server", None)
    frame_latency = float(_setting(ctx, frame_latency, "frame_latency", 1.28))
    notify_interval = float(_setting(ctx, notify_interval, "notify_interval", 5.0))
    spool_dir = _setting(ctx, spool_dir, "spool_dir", None)
    clock = SimulatedClock(start=float(base_time))
    spool_path = Path(spool_dir) if spool_dir else Path(ctx.obj["data_dir"]) / f"spool-{booth_id}"

    outcomes: list[dict] = []
    pending = list(events)

    def run_due_swipes():
        while pending and float(pending[0]["offset_seconds"]) + base_time <= clock.now():
            event = pending.pop(0)
            outcome = node_obj.swipe(str(event["card_id"]))
            outcomes.append(
                {
                    "offset_seconds": event["offset_seconds"],
                    "card_id": event["card_id"],
                    "status": outcome.status,
                    "capture_id": outcome.record.capture_id if outcome.record else None,
                    "reason": outcome.reason,
                }
            )

    # Swipes that land while a sequence is in flight fire from the rig's
    # frame hook, so the debounce path is exercised exactly as scripted.
    rig = MockCameraRig(
        booth_id, clock=clock, frame_latency=frame_latency,
        after_frame=lambda angle: run_due_swipes(),
    )
    node_obj = CaptureNode(
        booth_id, rig, Spool(spool_path), clock=clock, notify_interval=notify_interval
    )
    while pending:
        target = float(pending[0]["offset_seconds"]) + base_time
        if target > clock.now():
            clock.advance(target - clock.now())
        run_due_swipes()

    outcomes.sort(key=lambda o: float(o["offset_seconds"]))
    captured = sum(1 for o in outcomes if o["status"] == "captured")
    ignored = sum(1 for o in outcomes if o["status"] == "ignored")
    faults = sum(1 for o in outcomes if o["status"] == "fault")

    if server is not None:
        client = httpx.Client(timeout=5.0)
        uplink = HttpUplink(client, server)
    else:
        uplink = ServiceUplink(_open_service(ctx))
    if fail_rate > 0:
        uplink = FlakyUplink(uplink, fail_rate, seed=seed)
    report = drain_spool(node_obj, uplink, max_rounds=flush_rounds)

    summary = {
        "booth_id": booth_id,
        "events": len(events),
        "captured": captured,
        "ignored": ignored,
        "faults": faults,
        "delivered": report.delivered,
        "deferred": report.deferred,
        "outcomes": outcomes,
    }
    if fmt == "json":
        click.echo(json.dumps(summary, indent=2))
    else:
        for o in outcomes:
            line = f"t+{o['offset_seconds']}s card {o['card_id']}: {o['status']}"
            if o["capture_id"]:
                line += f" ({o['capture_id']})"
            if o["reason"]:
                line += f" [{o['reason']}]"
            click.echo(line)
        click.echo(
            f"captured {captured}, ignored {ignored}, faults {faults}; "
            f"delivered {report.delivered}, still spooled {report.deferred}"
        )
    # A dead server is not a failure: captures stay spooled for a later run.
    sys.exit(0)


@main.command()
@click.option("--card", "card_id", required=True)
@click.option("--booth-id", default=None, help="Booth identity (default booth-01).")
@click.option("--spool-dir", default=None)
@click.option("--server", default=None)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.pass_context
def swipe(ctx, card_id, booth_id, spool_dir, server, fmt):
    """One simulated swipe: capture, spool, and attempt delivery."""
    booth_id = str(_setting(ctx, booth_id, "booth_id", "booth-01"))
    server = _setting(ctx, server, "server", None)
    spool_dir = _setting(ctx, spool_dir, "spool_dir", None)
    spool_path = Path(spool_dir) if spool_dir else Path(ctx.obj["data_dir"]) / f"spool-{booth_id}"
    clock = SystemClock()
    rig = MockCameraRig(booth_id, clock=clock, frame_latency=0.0)
    node_obj = CaptureNode(booth_id, rig, Spool(spool_path), clock=clock)
    outcome = node_obj.swipe(card_id)
    if server is not None:
        uplink = HttpUplink(httpx.Client(timeout=5.0), server)
    else:
        uplink = ServiceUplink(_open_service(ctx))
    report = node_obj.flush_spool(uplink)
    result = {
        "status": outcome.status,
        "capture_id": outcome.record.capture_id if outcome.record else None,
        "delivered": report.delivered,
        "deferred": report.deferred,
    }
    if fmt == "json":
        click.echo(json.dumps(result))
    else:
        click.echo(
            f"{result['status']} {result['capture_id'] or ''}: "
            f"delivered {report.delivered}, still spooled {report.deferred}"
        )


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.pass_context
def fixture(ctx, seed, fmt):
    """Install the demo project (82 linked, coded captures) into the repository."""
    service = _open_service(ctx)
    data = synthesize_case_fixture(seed)
    try:
        summary = install_fixture(service, data)
    except (ServiceError, ModelError) as exc:
        _fail([f"fixture install failed: {exc}"])
    if fmt == "json":
        click.echo(json.dumps(summary))
    else:
        click.echo(
            f"installed {summary['captures']} captures as {summary['project_id']} "
            f"(user {summary['user_id']}, schemes: {', '.join(summary['schemes'])})"
        )


@main.command()
@click.argument("figure", type=click.Choice(sorted(FIGURE_NAMES)))
@click.option("--project", default=None)
@click.option("--scheme", default=None, help="Scheme id for cumulative/matrix figures.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tz", default="UTC", show_default=True, help="Timezone for the weekday figure.")
@click.option("--mode", type=click.Choice(["distinct", "summed"]), default="distinct")
@click.option("--window", type=int, default=1800, show_default=True)
@click.option("--threshold", type=int, default=20, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["svg", "csv", "json"]), default="svg")
@click.option("--out", "out_path", default=None, help="Output file ('-' for stdout).")
@click.pass_context
def analyze(ctx, figure, project, scheme, seed, tz, mode, window, threshold, fmt, out_path):
    """Compute a figure from repository data and write it to a file."""
    kind = FIGURE_NAMES[figure]
    service = _open_service(ctx)
    try:
        payload = _analyze_bytes(service, kind, project, scheme, seed, tz, mode,
                                 window, threshold, fmt)
    except (ServiceError, ModelError, an.AnalyticsError, ValueError) as exc:
        _fail([str(exc)])
    if out_path == "-":
        sys.stdout.buffer.write(payload)
        return
    target = Path(out_path) if out_path else Path(f"{kind}.{fmt}")
    target.write_bytes(payload)
    click.echo(f"wrote {target} ({len(payload)} bytes)")


def _analyze_bytes(service, kind, project, scheme, seed, tz, mode, window, threshold, fmt):
    if project is not None:
        service.get_project(project)
        captures = service.query_captures(project=project)
    else:
        captures = service.query_captures()

    if kind == "weekday":
        points = an.weekday_scatter(captures, seed=seed, tz=tz, projects=service.list_projects())
        if fmt == "json":
            return _json_bytes({"points": [p.to_doc() for p in points]})
        return rd.render(points, fmt, scatter_kind="weekday")
    if kind == "timeline":
        points = an.project_timeline(captures, seed=seed)
        if fmt == "json":
            return _json_bytes({"points": [p.to_doc() for p in points]})
        return rd.render(points, fmt, scatter_kind="timeline")
    if kind == "cumulative":
        if scheme is None:
            raise ValueError("cumulative figure needs --scheme")
        scheme_obj = service.get_scheme(scheme)
        assignments = service.assignments_for_scheme(scheme, [r.capture_id for r in captures])
        series = an.cumulative_usage(captures, assignments, scheme_obj, mode=mode)
        return _json_bytes(series.to_doc()) if fmt == "json" else rd.render(series, fmt)
    if kind == "matrix":
        if scheme is None:
            raise ValueError("matrix figure needs --scheme")
        scheme_obj = service.get_scheme(scheme)
        assignments = service.assignments_for_scheme(scheme, [r.capture_id for r in captures])
        matrix = an.category_matrix(captures, assignments, scheme_obj)
        return _json_bytes(matrix.to_doc()) if fmt == "json" else rd.render(matrix, fmt)
    if kind == "graph":
        if project is None:
            raise ValueError("graph figure needs --project")
        layout = an.layout_graph(service.get_graph(project), captures, seed=seed)
        return _json_bytes(layout.to_doc()) if fmt == "json" else rd.render(layout, fmt)
    if kind == "bulk":
        sessions = an.detect_bulk(captures, window_seconds=window, threshold=threshold)
        if fmt == "json":
            return rd.bulk_report_json(sessions)
        if fmt == "csv":
            return rd.bulk_report_csv(sessions)
        raise ValueError("bulk report supports json or csv output")
    raise ValueError(f"unknown figure {kind!r}")


def _json_bytes(doc) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


@main.command()
@click.option("--project", default=None)
@click.option("--out", "out_path", default="export.zip", show_default=True)
@click.pass_context
def export(ctx, project, out_path):
    """Write a self-contained archive (zip, or a directory tree)."""
    service = _open_service(ctx)
    try:
        count = export_archive(service, Path(out_path), project_id=project)
    except ServiceError as exc:
        _fail([str(exc)])
    click.echo(f"exported {count} entries to {out_path}")


@main.command(name="import")
@click.argument("archive", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.pass_context
def import_cmd(ctx, archive, fmt):
    """Load an archive into the repository (existing ids are kept, not overwritten)."""
    service = _open_service(ctx)
    try:
        counts = import_archive(service, Path(archive))
    except (ServiceError, ModelError, StorageFault, ValueError) as exc:
        _fail([f"import failed: {exc}"])
    if fmt == "json":
        click.echo(json.dumps(counts))
    else:
        click.echo(", ".join(f"{key}: {value}" for key, value in sorted(counts.items())))


@main.command()
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.pass_context
def verify(ctx, fmt):
    """Integrity scan: blobs, references, invariants. Nonzero exit on damage."""
    service = _open_service(ctx)
    flags = service.verify()
    if fmt == "json":
        click.echo(json.dumps({"violations": flags, "count": len(flags)}))
    else:
        for flag in flags:
            click.echo(f"{flag['kind']}: {flag['subject']}: {flag['detail']}")
        click.echo(f"{len(flags)} violation(s)")
    sys.exit(1 if flags else 0)


if __name__ == "__main__":
    main()
