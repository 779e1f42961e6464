"""Wire API over the backend service.

Every error body is a machine-readable violation list: {"violations": [...]}.
Image payloads travel as multipart form uploads on ingest and as raw bytes on
retrieval; everything else is JSON.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from . import analytics as an
from . import figures as rd
from .analytics import AnalyticsError
from .archive import archive_bytes, export_entries, import_archive
from .model import (
    CaptureRecord,
    LinkGraph,
    ModelError,
    NodeClass,
    angle_from_name,
)
from .service import (
    BoothService,
    CardConflictError,
    ServiceError,
    UnknownEntityError,
    ValidationRejected,
)
from .store import StorageFault


def create_app(service: BoothService, static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="prototype capture backend", docs_url=None, redoc_url=None)

    @app.exception_handler(ValidationRejected)
    def _rejected(request: Request, exc: ValidationRejected):
        return JSONResponse({"violations": exc.violations}, status_code=422)

    @app.exception_handler(UnknownEntityError)
    def _unknown(request: Request, exc: UnknownEntityError):
        return JSONResponse({"violations": [str(exc)]}, status_code=404)

    @app.exception_handler(CardConflictError)
    def _conflict(request: Request, exc: CardConflictError):
        return JSONResponse({"violations": [str(exc)]}, status_code=409)

    @app.exception_handler(ServiceError)
    def _service_error(request: Request, exc: ServiceError):
        return JSONResponse({"violations": [str(exc)]}, status_code=422)

    @app.exception_handler(ModelError)
    def _model_error(request: Request, exc: ModelError):
        return JSONResponse({"violations": [str(exc)]}, status_code=422)

    @app.exception_handler(AnalyticsError)
    def _analytics_error(request: Request, exc: AnalyticsError):
        return JSONResponse({"violations": [str(exc)]}, status_code=422)

    @app.exception_handler(StorageFault)
    def _storage_fault(request: Request, exc: StorageFault):
        return JSONResponse({"violations": [str(exc)]}, status_code=503)

    @app.exception_handler(RequestValidationError)
    def _request_invalid(request: Request, exc: RequestValidationError):
        violations = [
            ".".join(str(part) for part in err["loc"]) + ": " + err["msg"]
            for err in exc.errors()
        ]
        return JSONResponse({"violations": violations}, status_code=422)

    # -- captures -----------------------------------------------------------

    @app.post("/api/captures")
    async def ingest_capture(request: Request):
        form = await request.form()
        manifest = form.get("manifest")
        if not isinstance(manifest, str):
            raise ValidationRejected(["manifest form field missing"])
        try:
            doc = json.loads(manifest)
        except json.JSONDecodeError as exc:
            raise ValidationRejected([f"manifest is not valid JSON: {exc}"]) from None
        try:
            record = CaptureRecord.from_doc(doc)
        except Exception as exc:
            raise ValidationRejected([f"manifest malformed: {exc}"]) from None
        images = {}
        for key, value in form.multi_items():
            if key == "manifest":
                continue
            if isinstance(value, str):
                raise ValidationRejected([f"expected a file for form field {key!r}"])
            images[angle_from_name(key)] = await value.read()
        receipt = service.ingest_capture(record, images)
        return JSONResponse(receipt.to_doc(), status_code=201 if receipt.created else 200)

    def _capture_doc(record: CaptureRecord) -> dict:
        doc = record.to_doc()
        doc["capturer"] = service.capturer_label(record)
        return doc

    @app.get("/api/captures")
    def list_captures(
        user: str | None = None,
        booth: str | None = None,
        project: str | None = None,
        from_ts: int | None = Query(default=None, alias="from"),
        to_ts: int | None = Query(default=None, alias="to"),
    ):
        time_range = (from_ts, to_ts) if from_ts is not None or to_ts is not None else None
        records = service.query_captures(
            user=user, booth=booth, project=project, time_range=time_range
        )
        return {"captures": [_capture_doc(r) for r in records]}

    @app.get("/api/captures/{capture_id}")
    def get_capture(capture_id: str):
        return _capture_doc(service.get_capture(capture_id))

    @app.get("/api/captures/{capture_id}/views/{angle}")
    def get_view(capture_id: str, angle: str):
        data, media_type = service.get_view_image(capture_id, angle_from_name(angle))
        return Response(content=data, media_type=media_type)

    @app.patch("/api/captures/{capture_id}")
    async def patch_annotation(capture_id: str, request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            raise ValidationRejected(["annotation body must be an object"])
        allowed = {"title", "description", "intent"}
        unknown = sorted(set(body) - allowed)
        if unknown:
            raise ValidationRejected([f"unknown annotation field: {name}" for name in unknown])
        for name, value in body.items():
            if value is not None and not isinstance(value, str):
                raise ValidationRejected([f"annotation field must be text or null: {name}"])
        return _capture_doc(service.annotate(capture_id, **body))

    @app.post("/api/captures/{capture_id}/timestamp")
    async def correct_timestamp(capture_id: str, request: Request):
        body = await request.json()
        if not isinstance(body, dict) or not isinstance(body.get("timestamp"), int):
            raise ValidationRejected(["timestamp correction needs an integer 'timestamp'"])
        note = body.get("note", "")
        if not isinstance(note, str):
            raise ValidationRejected(["audit note must be text"])
        return _capture_doc(
            service.correct_timestamp(capture_id, body["timestamp"], note)
        )

    @app.get("/api/captures/{capture_id}/audit")
    def get_audit(capture_id: str):
        service.get_capture(capture_id)
        return {"capture_id": capture_id, "entries": service.audit_log(capture_id)}

    # -- users, cards, projects ----------------------------------------------

    @app.post("/api/users")
    async def create_user(request: Request):
        body = await request.json()
        name = body.get("display_name") if isinstance(body, dict) else None
        if not isinstance(name, str) or not name:
            raise ValidationRejected(["user needs a nonempty 'display_name'"])
        user = service.create_user(name, user_id=body.get("user_id"))
        return JSONResponse(user.to_doc(), status_code=201)

    @app.get("/api/users")
    def list_users():
        return {"users": [u.to_doc() for u in service.list_users()]}

    @app.get("/api/users/{user_id}")
    def get_user(user_id: str):
        return service.get_user(user_id).to_doc()

    @app.post("/api/cards")
    async def register_card(request: Request):
        body = await request.json()
        card_id = body.get("card_id") if isinstance(body, dict) else None
        user_id = body.get("user_id") if isinstance(body, dict) else None
        if not isinstance(card_id, str) or not isinstance(user_id, str):
            raise ValidationRejected(["card registration needs 'card_id' and 'user_id'"])
        return service.register_card(card_id, user_id).to_doc()

    @app.post("/api/projects")
    async def create_project(request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            raise ValidationRejected(["project body must be an object"])
        title = body.get("title")
        creator = body.get("creator")
        if not isinstance(title, str) or not title or not isinstance(creator, str):
            raise ValidationRejected(["project needs 'title' and 'creator'"])
        project = service.create_project(
            title,
            body.get("description", ""),
            creator,
            project_id=body.get("project_id"),
        )
        return JSONResponse(project.to_doc(), status_code=201)

    @app.get("/api/projects")
    def list_projects():
        return {"projects": [p.to_doc() for p in service.list_projects()]}

    @app.get("/api/projects/{project_id}")
    def get_project(project_id: str):
        return service.get_project(project_id).to_doc()

    @app.post("/api/projects/{project_id}/contributors")
    async def add_contributor(project_id: str, request: Request):
        body = await request.json()
        user_id = body.get("user_id") if isinstance(body, dict) else None
        if not isinstance(user_id, str):
            raise ValidationRejected(["contributor body needs 'user_id'"])
        return service.add_contributor(project_id, user_id).to_doc()

    @app.post("/api/projects/{project_id}/members")
    async def add_members(project_id: str, request: Request):
        body = await request.json()
        ids = body.get("capture_ids") if isinstance(body, dict) else None
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise ValidationRejected(["member body needs 'capture_ids' as a list of ids"])
        return service.assign_to_project(project_id, ids).to_doc()

    # -- coding schemes and assignments ---------------------------------------

    @app.get("/api/schemes")
    def list_schemes():
        return {"schemes": [s.to_doc() for s in service.list_schemes()]}

    @app.post("/api/schemes")
    async def create_scheme(request: Request):
        body = await request.json()
        name = body.get("name") if isinstance(body, dict) else None
        categories = body.get("categories") if isinstance(body, dict) else None
        if not isinstance(name, str) or not isinstance(categories, list):
            raise ValidationRejected(["scheme needs 'name' and 'categories'"])
        scheme = service.create_scheme(name, categories, scheme_id=body.get("scheme_id"))
        return JSONResponse(scheme.to_doc(), status_code=201)

    @app.get("/api/schemes/{scheme_id}")
    def get_scheme(scheme_id: str):
        return service.get_scheme(scheme_id).to_doc()

    @app.put("/api/captures/{capture_id}/codes/{scheme_id}")
    async def put_codes(capture_id: str, scheme_id: str, request: Request):
        body = await request.json()
        categories = body.get("categories") if isinstance(body, dict) else None
        if not isinstance(categories, list):
            raise ValidationRejected(["code body needs 'categories' as a list"])
        assignment = service.set_codes(capture_id, scheme_id, categories)
        return {
            "capture_id": assignment.capture_id,
            "scheme_id": assignment.scheme_id,
            "categories": list(assignment.categories),
        }

    @app.get("/api/captures/{capture_id}/codes")
    def get_codes(capture_id: str):
        service.get_capture(capture_id)
        return {"capture_id": capture_id, "codes": service.get_codes(capture_id)}

    # -- link graphs -----------------------------------------------------------

    @app.get("/api/projects/{project_id}/links")
    def get_links(project_id: str):
        return service.get_graph(project_id).to_doc()

    @app.put("/api/projects/{project_id}/links")
    async def put_links(project_id: str, request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            raise ValidationRejected(["graph body must be an object"])
        try:
            node_classes = {
                cid: NodeClass(value)
                for cid, value in dict(body.get("node_classes", {})).items()
            }
            edges = {(src, dst) for src, dst in body.get("edges", [])}
        except (TypeError, ValueError) as exc:
            raise ValidationRejected([f"graph body malformed: {exc}"]) from None
        graph = LinkGraph(project_id, node_classes, edges)
        return service.put_graph(graph).to_doc()

    # -- archive, analytics, integrity ----------------------------------------

    @app.get("/api/export")
    def export(project: str | None = None):
        entries = export_entries(service, project_id=project)
        payload = archive_bytes(entries)
        name = f"{project}.zip" if project else "repository.zip"
        return Response(
            content=payload,
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{name}"'},
        )

    @app.post("/api/import")
    async def import_endpoint(request: Request):
        form = await request.form()
        upload = form.get("archive")
        if upload is None or isinstance(upload, str):
            raise ValidationRejected(["import needs an 'archive' file field"])
        counts = import_archive(service, await upload.read())
        return counts

    def _analytics_captures(project: str | None):
        if project is not None:
            service.get_project(project)
            return service.query_captures(project=project)
        return service.query_captures()

    def _figure_response(figure, fmt: str, scatter_kind: str = "weekday"):
        if fmt == "svg":
            return Response(
                content=rd.render(figure, "svg", scatter_kind=scatter_kind),
                media_type="image/svg+xml",
            )
        if fmt == "csv":
            return Response(
                content=rd.render(figure, "csv", scatter_kind=scatter_kind),
                media_type="text/csv; charset=utf-8",
            )
        raise ValidationRejected([f"unsupported format {fmt!r}"])

    @app.get("/api/analytics/weekday")
    def analytics_weekday(
        project: str | None = None,
        seed: int = 0,
        tz: str = "UTC",
        format: str = "json",
    ):
        captures = _analytics_captures(project)
        points = an.weekday_scatter(captures, seed=seed, tz=tz, projects=service.list_projects())
        if format == "json":
            return {"points": [p.to_doc() for p in points]}
        return _figure_response(points, format, scatter_kind="weekday")

    @app.get("/api/analytics/timeline")
    def analytics_timeline(project: str | None = None, seed: int = 0, format: str = "json"):
        points = an.project_timeline(_analytics_captures(project), seed=seed)
        if format == "json":
            return {"points": [p.to_doc() for p in points]}
        return _figure_response(points, format, scatter_kind="timeline")

    @app.get("/api/analytics/cumulative")
    def analytics_cumulative(
        scheme: str,
        project: str | None = None,
        mode: str = "distinct",
        format: str = "json",
    ):
        captures = _analytics_captures(project)
        scheme_obj = service.get_scheme(scheme)
        assignments = service.assignments_for_scheme(
            scheme, [r.capture_id for r in captures]
        )
        series = an.cumulative_usage(captures, assignments, scheme_obj, mode=mode)
        if format == "json":
            return series.to_doc()
        return _figure_response(series, format)

    @app.get("/api/analytics/matrix")
    def analytics_matrix(scheme: str, project: str | None = None, format: str = "json"):
        captures = _analytics_captures(project)
        scheme_obj = service.get_scheme(scheme)
        assignments = service.assignments_for_scheme(
            scheme, [r.capture_id for r in captures]
        )
        matrix = an.category_matrix(captures, assignments, scheme_obj)
        if format == "json":
            return matrix.to_doc()
        return _figure_response(matrix, format)

    @app.get("/api/analytics/graph")
    def analytics_graph(project: str, seed: int = 0, format: str = "json"):
        captures = _analytics_captures(project)
        layout = an.layout_graph(service.get_graph(project), captures, seed=seed)
        if format == "json":
            return layout.to_doc()
        return _figure_response(layout, format)

    @app.get("/api/analytics/bulk")
    def analytics_bulk(
        project: str | None = None,
        window: int = 1800,
        threshold: int = 20,
        format: str = "json",
    ):
        sessions = an.detect_bulk(
            _analytics_captures(project), window_seconds=window, threshold=threshold
        )
        if format == "json":
            return {"sessions": [s.to_doc() for s in sessions]}
        if format == "csv":
            return Response(
                content=rd.bulk_report_csv(sessions), media_type="text/csv; charset=utf-8"
            )
        raise ValidationRejected([f"unsupported format {format!r}"])

    @app.get("/api/verify")
    def verify():
        flags = service.verify()
        return {"violations": flags, "count": len(flags)}

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app
