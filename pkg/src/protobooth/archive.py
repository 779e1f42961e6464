"""Raw-data export and import: a self-contained, deterministic archive of repository state."""

from __future__ import annotations

import hashlib
import io
import json
import zipfile
from pathlib import Path

from .images import ext_for_media
from .model import CaptureRecord
from .service import BoothService, ValidationRejected
from .store import canonical_json

ARCHIVE_FORMAT = "protobooth-archive"
ARCHIVE_VERSION = 1

_DOC_COLLECTIONS = ("users", "projects", "schemes", "assignments", "graphs", "audit")

# Fixed zip member timestamp; archive bytes must depend only on content.
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


def export_entries(service: BoothService, project_id: str | None = None) -> dict[str, bytes]:
    """Collect archive members as path -> bytes.

    A project export is restricted to member captures, their blobs, and the
    documents needed to make the subset self-contained.
    """
    repo = service.repo
    with repo.lock:
        if project_id is None:
            capture_ids = repo.captures.ids()
            user_ids = repo.users.ids()
            project_ids = repo.projects.ids()
            scheme_ids = repo.schemes.ids()
            graph_ids = repo.graphs.ids()
        else:
            project = service.get_project(project_id)
            capture_ids = sorted(cid for cid in project.members if repo.captures.exists(cid))
            user_ids = sorted(project.contributors)
            project_ids = [project_id]
            graph_ids = [project_id] if repo.graphs.exists(project_id) else []
            scheme_ids = sorted(
                {
                    scheme_id
                    for cid in capture_ids
                    for scheme_id in (repo.assignments.get(cid) or {}).get("codes", {})
                }
            )

        entries: dict[str, bytes] = {}
        for cid in capture_ids:
            doc = repo.captures.get(cid)
            entries[f"captures/{cid}/meta.json"] = canonical_json(doc)
            record = CaptureRecord.from_doc(doc)
            for angle, ref in record.views.items():
                ext = ext_for_media(ref.media_type)
                entries[f"captures/{cid}/{angle.value}.{ext}"] = repo.blobs.get(ref.content_hash)
            audit_doc = repo.audit.get(cid)
            if audit_doc is not None:
                entries[f"audit/{cid}.json"] = canonical_json(audit_doc)
            assignment_doc = repo.assignments.get(cid)
            if assignment_doc is not None:
                entries[f"assignments/{cid}.json"] = canonical_json(assignment_doc)
        for uid in user_ids:
            entries[f"users/{uid}.json"] = canonical_json(repo.users.get(uid))
        for pid in project_ids:
            entries[f"projects/{pid}.json"] = canonical_json(repo.projects.get(pid))
        for sid in scheme_ids:
            entries[f"schemes/{sid}.json"] = canonical_json(repo.schemes.get(sid))
        for gid in graph_ids:
            entries[f"graphs/{gid}.json"] = canonical_json(repo.graphs.get(gid))

    manifest = {
        "format": ARCHIVE_FORMAT,
        "version": ARCHIVE_VERSION,
        "entries": [
            {"path": path, "sha256": hashlib.sha256(data).hexdigest()}
            for path, data in sorted(entries.items())
        ],
    }
    entries["manifest.json"] = canonical_json(manifest)
    return entries


def archive_bytes(entries: dict[str, bytes]) -> bytes:
    """Pack entries into a byte-deterministic (stored, fixed-date) zip."""
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", compression=zipfile.ZIP_STORED) as zf:
        for path in sorted(entries):
            info = zipfile.ZipInfo(path, date_time=_ZIP_EPOCH)
            info.external_attr = 0o644 << 16
            zf.writestr(info, entries[path])
    return buffer.getvalue()


def export_archive(service: BoothService, out_path: Path, project_id: str | None = None) -> int:
    """Write the archive to `out_path` (.zip file, or a directory tree otherwise)."""
    entries = export_entries(service, project_id)
    out_path = Path(out_path)
    if out_path.suffix == ".zip":
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_bytes(archive_bytes(entries))
    else:
        for path, data in entries.items():
            target = out_path / path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
    return len(entries)


def read_archive(source: Path | bytes) -> dict[str, bytes]:
    if isinstance(source, bytes):
        with zipfile.ZipFile(io.BytesIO(source)) as zf:
            return {name: zf.read(name) for name in zf.namelist()}
    source = Path(source)
    if source.is_dir():
        return {
            str(p.relative_to(source)).replace("\\", "/"): p.read_bytes()
            for p in sorted(source.rglob("*"))
            if p.is_file()
        }
    with zipfile.ZipFile(source) as zf:
        return {name: zf.read(name) for name in zf.namelist()}


def import_archive(service: BoothService, source: Path | bytes) -> dict[str, int]:
    """Restore an archive; already-present ids are skipped, so import is idempotent."""
    entries = read_archive(source)
    if "manifest.json" not in entries:
        raise ValidationRejected(["archive has no manifest.json"])
    manifest = json.loads(entries["manifest.json"])
    if manifest.get("format") != ARCHIVE_FORMAT:
        raise ValidationRejected([f"not a {ARCHIVE_FORMAT} archive"])
    for item in manifest["entries"]:
        data = entries.get(item["path"])
        if data is None:
            raise ValidationRejected([f"archive member missing: {item['path']}"])
        if hashlib.sha256(data).hexdigest() != item["sha256"]:
            raise ValidationRejected([f"archive member corrupt: {item['path']}"])

    repo = service.repo
    counts = {"captures": 0, "blobs": 0, "documents": 0}
    with repo.lock:
        # Blobs first so capture metadata never lands without its images.
        for path, data in sorted(entries.items()):
            parts = path.split("/")
            if parts[0] == "captures" and not path.endswith("meta.json"):
                repo.blobs.put(data)
                counts["blobs"] += 1
        for path, data in sorted(entries.items()):
            if path == "manifest.json":
                continue
            parts = path.split("/")
            doc = None
            if parts[0] == "captures" and path.endswith("/meta.json"):
                doc = json.loads(data)
                record = CaptureRecord.from_doc(doc)
                for ref in record.views.values():
                    if not repo.blobs.exists(ref.content_hash):
                        raise ValidationRejected(
                            [f"archive lacks blob for capture {record.capture_id!r}"]
                        )
                if not repo.captures.exists(record.capture_id):
                    repo.captures.put(record.capture_id, doc)
                    counts["captures"] += 1
            elif len(parts) == 2 and parts[0] in _DOC_COLLECTIONS:
                collection = getattr(repo, parts[0])
                doc_id = parts[1].removesuffix(".json")
                if not collection.exists(doc_id):
                    collection.put(doc_id, json.loads(data))
                    counts["documents"] += 1
    return counts
