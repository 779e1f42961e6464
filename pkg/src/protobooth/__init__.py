"""RFID-triggered multi-view prototype capture: booth daemon, ingestion
backend, and deterministic analytics over the captured metadata."""

from .analytics import (
    AnalyticsError,
    BulkSession,
    CategoryMatrix,
    CumulativeSeries,
    GraphLayout,
    ScatterPoint,
    category_matrix,
    cumulative_usage,
    detect_bulk,
    jitter,
    layout_graph,
    project_timeline,
    weekday_scatter,
)
from .archive import export_archive, import_archive, read_archive
from .clock import Clock, SimulatedClock, SystemClock
from .fixture import CaseFixture, install_fixture, synthesize_case_fixture
from .model import (
    CAPTURE_ORDER,
    Annotation,
    CaptureRecord,
    CodeAssignment,
    CodingScheme,
    ImageRef,
    LinkGraph,
    ModelError,
    NodeClass,
    Project,
    User,
    ViewAngle,
    assign_codes,
    builtin_schemes,
    canonical_order,
    reachability,
    validate_capture,
    validate_graph,
)
from .node import (
    CaptureNode,
    DeliveryReport,
    FlakyUplink,
    HttpUplink,
    LedPattern,
    MockCameraRig,
    NodeState,
    ServiceUplink,
    Spool,
    SwipeOutcome,
    UplinkError,
    drain_spool,
    led_pattern,
)
from .figures import render
from .service import (
    BoothService,
    CardConflictError,
    IngestReceipt,
    ServiceError,
    UnknownEntityError,
    ValidationRejected,
)
from .store import BlobStore, DocumentCollection, Repository, StorageFault

__version__ = "0.1.0"

__all__ = [
    "AnalyticsError",
    "Annotation",
    "BlobStore",
    "BoothService",
    "BulkSession",
    "CAPTURE_ORDER",
    "CaptureNode",
    "CaptureRecord",
    "CardConflictError",
    "CaseFixture",
    "CategoryMatrix",
    "Clock",
    "CodeAssignment",
    "CodingScheme",
    "CumulativeSeries",
    "DeliveryReport",
    "DocumentCollection",
    "FlakyUplink",
    "GraphLayout",
    "HttpUplink",
    "ImageRef",
    "IngestReceipt",
    "LedPattern",
    "LinkGraph",
    "MockCameraRig",
    "ModelError",
    "NodeClass",
    "NodeState",
    "Project",
    "Repository",
    "ScatterPoint",
    "ServiceError",
    "ServiceUplink",
    "SimulatedClock",
    "Spool",
    "StorageFault",
    "SwipeOutcome",
    "SystemClock",
    "UnknownEntityError",
    "UplinkError",
    "User",
    "ValidationRejected",
    "ViewAngle",
    "assign_codes",
    "builtin_schemes",
    "canonical_order",
    "category_matrix",
    "cumulative_usage",
    "detect_bulk",
    "drain_spool",
    "export_archive",
    "import_archive",
    "install_fixture",
    "jitter",
    "layout_graph",
    "led_pattern",
    "project_timeline",
    "reachability",
    "read_archive",
    "render",
    "synthesize_case_fixture",
    "validate_capture",
    "validate_graph",
    "weekday_scatter",
]
