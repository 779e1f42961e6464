import json
import zipfile

import pytest

from protobooth.archive import (
    archive_bytes,
    export_archive,
    export_entries,
    import_archive,
    read_archive,
)
from protobooth.model import LinkGraph, NodeClass
from protobooth.service import BoothService, ValidationRejected
from protobooth.store import Repository
from support import make_capture


@pytest.fixture
def rich_service(service):
    for capture_id, ts, card in [("cap-1", 100, "card-a"), ("cap-2", 200, "card-a"), ("cap-3", 300, "card-b")]:
        record, images = make_capture(capture_id, timestamp=ts, card_id=card)
        service.ingest_capture(record, images)
    user = service.create_user("Ada", user_id="user-ada")
    service.register_card("card-a", user.user_id)
    project = service.create_project("Case", "d", user.user_id, project_id="proj-1")
    service.assign_to_project(project.project_id, ["cap-1", "cap-2"])
    service.set_codes("cap-1", "materials", ["wood"])
    service.annotate("cap-2", title="second")
    service.correct_timestamp("cap-3", 250, "drift")
    service.put_graph(
        LinkGraph("proj-1", {"cap-2": NodeClass.FINAL_CONCEPT}, {("cap-1", "cap-2")})
    )
    return service


class TestExport:
    def test_entries_cover_every_collection(self, rich_service):
        entries = export_entries(rich_service)
        assert "manifest.json" in entries
        assert "captures/cap-1/meta.json" in entries
        assert "captures/cap-1/front.bmp" in entries
        assert "users/user-ada.json" in entries
        assert "projects/proj-1.json" in entries
        assert "schemes/materials.json" in entries
        assert "assignments/cap-1.json" in entries
        assert "graphs/proj-1.json" in entries
        assert "audit/cap-3.json" in entries

    def test_manifest_hashes_match_members(self, rich_service):
        entries = export_entries(rich_service)
        manifest = json.loads(entries["manifest.json"])
        assert manifest["format"] == "protobooth-archive"
        import hashlib

        for item in manifest["entries"]:
            assert hashlib.sha256(entries[item["path"]]).hexdigest() == item["sha256"]

    def test_archive_bytes_deterministic(self, rich_service):
        first = archive_bytes(export_entries(rich_service))
        second = archive_bytes(export_entries(rich_service))
        assert first == second
        with zipfile.ZipFile(__import__("io").BytesIO(first)) as zf:
            assert all(info.date_time == (1980, 1, 1, 0, 0, 0) for info in zf.infolist())
            assert all(info.compress_type == zipfile.ZIP_STORED for info in zf.infolist())

    def test_project_export_is_self_contained_subset(self, rich_service):
        entries = export_entries(rich_service, project_id="proj-1")
        paths = set(entries)
        assert "captures/cap-1/meta.json" in paths
        assert "captures/cap-3/meta.json" not in paths
        assert "projects/proj-1.json" in paths
        assert "schemes/materials.json" in paths
        assert "users/user-ada.json" in paths

    def test_directory_export(self, rich_service, tmp_path):
        count = export_archive(rich_service, tmp_path / "tree")
        assert count == len(export_entries(rich_service))
        assert (tmp_path / "tree" / "manifest.json").is_file()
        assert read_archive(tmp_path / "tree") == export_entries(rich_service)


class TestImport:
    def test_round_trip_restores_identical_state(self, rich_service, tmp_path):
        payload = archive_bytes(export_entries(rich_service))
        fresh = BoothService(Repository(tmp_path / "fresh"))
        counts = import_archive(fresh, payload)
        assert counts["captures"] == 3
        assert counts["blobs"] == 21
        assert fresh.repo.snapshot() == rich_service.repo.snapshot()
        assert fresh.verify() == []

    def test_reimport_is_idempotent(self, rich_service, tmp_path):
        payload = archive_bytes(export_entries(rich_service))
        fresh = BoothService(Repository(tmp_path / "fresh"))
        import_archive(fresh, payload)
        before = fresh.repo.snapshot()
        counts = import_archive(fresh, payload)
        assert counts == {"captures": 0, "blobs": 21, "documents": 0}
        assert fresh.repo.snapshot() == before

    def test_zip_file_round_trip(self, rich_service, tmp_path):
        export_archive(rich_service, tmp_path / "out.zip")
        fresh = BoothService(Repository(tmp_path / "fresh"))
        import_archive(fresh, tmp_path / "out.zip")
        assert fresh.repo.snapshot() == rich_service.repo.snapshot()

    def test_rejects_archive_without_manifest(self, service, tmp_path):
        payload = archive_bytes({"stray.json": b"{}"})
        with pytest.raises(ValidationRejected, match="manifest"):
            import_archive(service, payload)

    def test_rejects_corrupt_member(self, rich_service, tmp_path):
        entries = export_entries(rich_service)
        entries["captures/cap-1/front.bmp"] = b"tampered"
        payload = archive_bytes(entries)
        fresh = BoothService(Repository(tmp_path / "fresh"))
        with pytest.raises(ValidationRejected, match="corrupt"):
            import_archive(fresh, payload)
        assert len(fresh.query_captures()) == 0

    def test_rejects_foreign_zip(self, service):
        import io

        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w") as zf:
            zf.writestr("manifest.json", json.dumps({"format": "other", "entries": []}))
        with pytest.raises(ValidationRejected, match="not a protobooth-archive"):
            import_archive(service, buffer.getvalue())
