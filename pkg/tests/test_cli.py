import json
import socket
import subprocess
import sys
import time
import zipfile
from pathlib import Path

import httpx
import pytest
from click.testing import CliRunner

from protobooth.cli import main
from protobooth.model import ViewAngle


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def data_dir(tmp_path):
    return tmp_path / "data"


def run(runner, data_dir, *args, **kwargs):
    return runner.invoke(main, ["--data-dir", str(data_dir), *args], **kwargs)


@pytest.fixture
def installed(runner, data_dir):
    result = run(runner, data_dir, "fixture", "--format", "json")
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


class TestFixtureCommand:
    def test_installs_demo_project(self, runner, data_dir, installed):
        assert installed["captures"] == 82
        assert installed["project_id"] == "project-case"
        assert (data_dir / "captures").is_dir()

    def test_text_summary(self, runner, data_dir):
        result = run(runner, data_dir, "fixture")
        assert result.exit_code == 0
        assert "installed 82 captures as project-case" in result.output


class TestAnalyzeCommand:
    def test_weekday_svg_to_file(self, runner, data_dir, installed, tmp_path):
        out = tmp_path / "weekday.svg"
        result = run(runner, data_dir, "analyze", "fig3", "--out", str(out))
        assert result.exit_code == 0, result.stderr
        assert out.read_bytes().startswith(b"<svg")

    def test_alias_matches_numbered_name(self, runner, data_dir, installed, tmp_path):
        by_number = run(
            runner, data_dir, "analyze", "fig5", "--scheme", "materials",
            "--format", "csv", "--out", "-",
        )
        by_name = run(
            runner, data_dir, "analyze", "cumulative", "--scheme", "materials",
            "--format", "csv", "--out", "-",
        )
        assert by_number.exit_code == 0
        assert by_number.output == by_name.output
        assert by_number.output.splitlines()[0] == "k,distinct_count"

    def test_stdout_output(self, runner, data_dir, installed):
        result = run(
            runner, data_dir, "analyze", "fig4", "--format", "csv", "--out", "-"
        )
        assert result.exit_code == 0
        assert result.output.splitlines()[0] == "capture_id,timestamp,jitter"
        assert len(result.output.splitlines()) == 83

    def test_graph_needs_project(self, runner, data_dir, installed):
        result = run(runner, data_dir, "analyze", "graph", "--out", "-")
        assert result.exit_code == 1
        assert "needs --project" in json.loads(result.stderr)["violations"][0]

    def test_graph_json(self, runner, data_dir, installed):
        result = run(
            runner, data_dir, "analyze", "graph", "--project", "project-case",
            "--format", "json", "--out", "-",
        )
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert len(doc["nodes"]) == 82

    def test_matrix_requires_scheme(self, runner, data_dir, installed):
        result = run(runner, data_dir, "analyze", "matrix", "--out", "-")
        assert result.exit_code == 1
        assert "needs --scheme" in json.loads(result.stderr)["violations"][0]

    def test_bulk_refuses_svg(self, runner, data_dir, installed):
        result = run(runner, data_dir, "analyze", "bulk", "--format", "svg", "--out", "-")
        assert result.exit_code == 1
        assert "json or csv" in json.loads(result.stderr)["violations"][0]

    def test_unknown_figure_name(self, runner, data_dir, installed):
        result = run(runner, data_dir, "analyze", "fig12", "--out", "-")
        assert result.exit_code == 2

    def test_default_output_name(self, runner, data_dir, installed, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        result = run(runner, data_dir, "analyze", "fig3")
        assert result.exit_code == 0
        assert (tmp_path / "weekday.svg").is_file()


class TestNodeCommand:
    def write_script(self, tmp_path, events):
        path = tmp_path / "swipes.json"
        path.write_text(json.dumps(events))
        return path

    def test_requires_simulate_flag(self, runner, data_dir, tmp_path):
        script = self.write_script(tmp_path, [{"card_id": "card-1"}])
        result = run(runner, data_dir, "node", "--swipes", str(script))
        assert result.exit_code == 2
        assert "--simulate" in json.loads(result.stderr)["violations"][0]

    def test_swipe_script_delivers_locally(self, runner, data_dir, tmp_path):
        script = self.write_script(
            tmp_path,
            [
                {"offset_seconds": 0, "card_id": "card-1"},
                {"offset_seconds": 30, "card_id": "card-2"},
            ],
        )
        result = run(
            runner, data_dir, "node", "--simulate", "--swipes", str(script),
            "--format", "json",
        )
        assert result.exit_code == 0, result.stderr
        summary = json.loads(result.output)
        assert summary["captured"] == 2
        assert summary["delivered"] == 2
        assert summary["deferred"] == 0
        listing = run(runner, data_dir, "verify")
        assert listing.exit_code == 0

    def test_mid_sequence_swipe_is_debounced(self, runner, data_dir, tmp_path):
        script = self.write_script(
            tmp_path,
            [
                {"offset_seconds": 0, "card_id": "card-1"},
                {"offset_seconds": 3, "card_id": "card-2"},
            ],
        )
        result = run(
            runner, data_dir, "node", "--simulate", "--swipes", str(script),
            "--format", "json",
        )
        summary = json.loads(result.output)
        assert summary["captured"] == 1
        assert summary["ignored"] == 1
        assert summary["outcomes"][1]["reason"] == "busy: capturing"

    def test_unreachable_server_defers_with_exit_zero(self, runner, data_dir, tmp_path):
        script = self.write_script(tmp_path, [{"card_id": "card-1"}])
        result = run(
            runner, data_dir, "node", "--simulate", "--swipes", str(script),
            "--server", "http://127.0.0.1:9", "--flush-rounds", "2",
            "--format", "json",
        )
        assert result.exit_code == 0
        summary = json.loads(result.output)
        assert summary["captured"] == 1
        assert summary["deferred"] == 1
        spool = data_dir / "spool-booth-01"
        assert len(list(spool.glob("*/meta.json"))) == 1

    def test_flaky_uplink_drains_with_retries(self, runner, data_dir, tmp_path):
        script = self.write_script(
            tmp_path,
            [{"offset_seconds": i * 20, "card_id": f"card-{i}"} for i in range(5)],
        )
        result = run(
            runner, data_dir, "node", "--simulate", "--swipes", str(script),
            "--fail-rate", "0.4", "--seed", "7", "--flush-rounds", "40",
            "--format", "json",
        )
        summary = json.loads(result.output)
        assert summary["delivered"] == 5
        assert summary["deferred"] == 0

    def test_config_file_supplies_booth_settings(self, runner, data_dir, tmp_path):
        config = tmp_path / "booth.conf"
        config.write_text(
            "\n".join(
                [
                    "# booth settings",
                    f"data_dir = {data_dir}",
                    "booth_id = booth-07",
                    "frame_latency = 0.0",
                    f"spool_dir = {tmp_path / 'spool-x'}",
                ]
            )
        )
        script = self.write_script(tmp_path, [{"card_id": "card-1"}])
        result = runner.invoke(
            main,
            ["--config", str(config), "node", "--simulate", "--swipes", str(script),
             "--format", "json"],
        )
        assert result.exit_code == 0, result.stderr
        summary = json.loads(result.output)
        assert summary["booth_id"] == "booth-07"
        assert summary["outcomes"][0]["capture_id"].endswith("-booth-07-000001")
        assert (tmp_path / "spool-x").is_dir()

    def test_flag_overrides_config(self, runner, data_dir, tmp_path):
        config = tmp_path / "booth.conf"
        config.write_text(f"data_dir = {data_dir}\nbooth_id = booth-07\n")
        script = self.write_script(tmp_path, [{"card_id": "card-1"}])
        result = runner.invoke(
            main,
            ["--config", str(config), "node", "--simulate", "--swipes", str(script),
             "--booth-id", "booth-42", "--format", "json"],
        )
        assert json.loads(result.output)["booth_id"] == "booth-42"

    def test_env_var_sets_data_dir(self, runner, tmp_path):
        script = self.write_script(tmp_path, [{"card_id": "card-1"}])
        env_dir = tmp_path / "env-data"
        result = runner.invoke(
            main,
            ["node", "--simulate", "--swipes", str(script), "--format", "json"],
            env={"PROTOBOOTH_DATA_DIR": str(env_dir)},
        )
        assert result.exit_code == 0
        assert (env_dir / "captures").is_dir()

    def test_missing_script_fails_cleanly(self, runner, data_dir):
        result = run(runner, data_dir, "node", "--simulate", "--swipes", "missing.json")
        assert result.exit_code == 2
        assert "swipe script unreadable" in json.loads(result.stderr)["violations"][0]


class TestSwipeCommand:
    def test_one_shot_capture(self, runner, data_dir):
        result = run(runner, data_dir, "swipe", "--card", "card-9", "--format", "json")
        assert result.exit_code == 0
        body = json.loads(result.output)
        assert body["status"] == "captured"
        assert body["delivered"] == 1


class TestArchiveCommands:
    def test_export_import_cycle(self, runner, data_dir, installed, tmp_path):
        archive = tmp_path / "case.zip"
        result = run(runner, data_dir, "export", "--out", str(archive))
        assert result.exit_code == 0
        assert zipfile.is_zipfile(archive)

        second = tmp_path / "second"
        imported = runner.invoke(
            main, ["--data-dir", str(second), "import", str(archive), "--format", "json"]
        )
        assert imported.exit_code == 0
        assert json.loads(imported.output)["captures"] == 82
        verify = runner.invoke(main, ["--data-dir", str(second), "verify", "--format", "json"])
        assert verify.exit_code == 0
        assert json.loads(verify.output) == {"violations": [], "count": 0}

    def test_project_scoped_export(self, runner, data_dir, installed, tmp_path):
        archive = tmp_path / "proj.zip"
        result = run(
            runner, data_dir, "export", "--project", "project-case", "--out", str(archive)
        )
        assert result.exit_code == 0
        names = zipfile.ZipFile(archive).namelist()
        assert "projects/project-case.json" in names

    def test_import_missing_file(self, runner, data_dir):
        result = run(runner, data_dir, "import", "absent.zip")
        assert result.exit_code == 2


class TestVerifyCommand:
    def test_damage_yields_nonzero_exit(self, runner, data_dir, installed):
        blob = next((data_dir / "blobs").rglob("*"))
        while blob.is_dir():
            blob = next(blob.iterdir())
        blob.write_bytes(b"scribble")
        result = run(runner, data_dir, "verify", "--format", "json")
        assert result.exit_code == 1
        body = json.loads(result.output)
        assert body["count"] >= 1

    def test_text_format(self, runner, data_dir, installed):
        result = run(runner, data_dir, "verify")
        assert result.exit_code == 0
        assert "0 violation(s)" in result.output


class TestServeCommand:
    def test_rejects_bad_bind(self, runner, data_dir):
        result = runner.invoke(
            main, ["--data-dir", str(data_dir), "--bind", "nonsense", "serve"]
        )
        assert result.exit_code == 2
        assert "host:port" in json.loads(result.stderr)["violations"][0]

    def test_rejects_missing_static_dir(self, runner, data_dir):
        result = run(runner, data_dir, "serve", "--static", "no-such-dir")
        assert result.exit_code == 2

    def test_serves_http_end_to_end(self, tmp_path):
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        data = tmp_path / "served"
        process = subprocess.Popen(
            [
                sys.executable, "-m", "protobooth.cli",
                "--data-dir", str(data), "--bind", f"127.0.0.1:{port}", "serve",
            ],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
            cwd=str(Path(__file__).parent.parent),
        )
        try:
            base = f"http://127.0.0.1:{port}"
            deadline = time.time() + 15
            last_error = None
            while time.time() < deadline:
                try:
                    response = httpx.get(f"{base}/api/verify", timeout=1.0)
                    break
                except httpx.HTTPError as exc:
                    last_error = exc
                    time.sleep(0.2)
            else:
                pytest.fail(f"server never came up: {last_error}")
            assert response.json() == {"violations": [], "count": 0}
            schemes = httpx.get(f"{base}/api/schemes", timeout=2.0).json()["schemes"]
            assert {s["scheme_id"] for s in schemes} == {"materials", "tools", "disciplines"}
        finally:
            process.terminate()
            process.wait(timeout=10)
