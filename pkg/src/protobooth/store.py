"""Embedded file-backed document collections and a content-addressed blob store."""

from __future__ import annotations

import hashlib
import json
import os
import threading
from pathlib import Path
from typing import Iterator


def canonical_json(doc: dict) -> bytes:
    """Stable byte encoding used for documents on disk and equality checks."""
    return (json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n").encode()


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class StorageFault(Exception):
    """Retriable storage-layer failure."""


class DocumentCollection:
    """One directory of `<doc_id>.json` files with atomic replace-on-write."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, doc_id: str) -> Path:
        return self.root / f"{doc_id}.json"

    def put(self, doc_id: str, doc: dict) -> None:
        _atomic_write(self.path_for(doc_id), canonical_json(doc))

    def get(self, doc_id: str) -> dict | None:
        path = self.path_for(doc_id)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def delete(self, doc_id: str) -> None:
        path = self.path_for(doc_id)
        if path.exists():
            path.unlink()

    def exists(self, doc_id: str) -> bool:
        return self.path_for(doc_id).exists()

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))

    def items(self) -> Iterator[tuple[str, dict]]:
        for doc_id in self.ids():
            doc = self.get(doc_id)
            if doc is not None:
                yield doc_id, doc

    def __len__(self) -> int:
        return len(self.ids())


class BlobStore:
    """Content-addressed blobs sharded as `<hash[:2]>/<hash>`."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, digest: str) -> Path:
        return self.root / digest[:2] / digest

    def put(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        path = self.path_for(digest)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            _atomic_write(path, data)
        return digest

    def get(self, digest: str) -> bytes:
        path = self.path_for(digest)
        if not path.exists():
            raise StorageFault(f"blob missing: {digest}")
        return path.read_bytes()

    def exists(self, digest: str) -> bool:
        return self.path_for(digest).exists()

    def delete(self, digest: str) -> None:
        path = self.path_for(digest)
        if path.exists():
            path.unlink()

    def digests(self) -> list[str]:
        return sorted(p.name for p in self.root.glob("??/*") if p.is_file())

    def __len__(self) -> int:
        return len(self.digests())


class Repository:
    """All persistent state of one deployment, rooted at a single directory.

    Mutations from concurrent booths and curation sessions are serialised by
    `lock`; individual document writes are atomic on their own.
    """

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.captures = DocumentCollection(self.data_dir / "captures")
        self.users = DocumentCollection(self.data_dir / "users")
        self.projects = DocumentCollection(self.data_dir / "projects")
        self.schemes = DocumentCollection(self.data_dir / "schemes")
        self.assignments = DocumentCollection(self.data_dir / "assignments")
        self.graphs = DocumentCollection(self.data_dir / "graphs")
        self.audit = DocumentCollection(self.data_dir / "audit")
        self.blobs = BlobStore(self.data_dir / "blobs")
        self.lock = threading.RLock()

    COLLECTION_NAMES = (
        "captures",
        "users",
        "projects",
        "schemes",
        "assignments",
        "graphs",
        "audit",
    )

    def collections(self) -> dict[str, DocumentCollection]:
        return {name: getattr(self, name) for name in self.COLLECTION_NAMES}

    def snapshot(self) -> dict[str, bytes]:
        """Canonical bytes of every document and blob, keyed by logical path.

        Two repositories are equal as data exactly when their snapshots are.
        """
        with self.lock:
            out: dict[str, bytes] = {}
            for name, collection in self.collections().items():
                for doc_id, doc in collection.items():
                    out[f"{name}/{doc_id}"] = canonical_json(doc)
            for digest in self.blobs.digests():
                out[f"blobs/{digest}"] = self.blobs.get(digest)
            return out
