"""JSONL 저장소 / 실행 매니페스트 테스트."""

from __future__ import annotations

import json

import pytest

from src.lsa_toolkit import __version__
from src.lsa_toolkit.models.base import sha256_file
from src.lsa_toolkit.storage.jsonl import (
    JsonlError,
    load_instances,
    load_predictions,
    read_json,
    read_jsonl,
    save_instances,
    save_predictions,
    write_jsonl,
)
from src.lsa_toolkit.storage.manifest import (
    RunManifest,
    manifest_path,
    read_manifest,
    write_manifest,
)


class TestJsonl:
    """JSONL 입출력."""

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "items.jsonl"
        path.write_text('{"a": 1}\n\n{"a": 2}\n', encoding="utf-8")

        assert read_jsonl(path) == [{"a": 1}, {"a": 2}]

    def test_syntax_error_reports_line(self, tmp_path):
        path = tmp_path / "items.jsonl"
        path.write_text('{"a": 1}\n{"a": \n', encoding="utf-8")

        with pytest.raises(JsonlError) as exc_info:
            read_jsonl(path)
        assert exc_info.value.line_no == 2

    def test_non_object_line(self, tmp_path):
        path = tmp_path / "items.jsonl"
        path.write_text("[1, 2]\n", encoding="utf-8")

        with pytest.raises(JsonlError) as exc_info:
            read_jsonl(path)
        assert exc_info.value.line_no == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_jsonl(tmp_path / "none.jsonl")

    def test_write_creates_parent(self, tmp_path):
        path = tmp_path / "nested" / "out.jsonl"

        assert write_jsonl(path, [{"b": 1, "a": 2}]) == 1
        assert path.read_text(encoding="utf-8") == '{"a": 2, "b": 1}\n'

    def test_read_json_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{\n oops", encoding="utf-8")

        with pytest.raises(JsonlError):
            read_json(path)


class TestRecords:
    """벤치마크/예측 파일."""

    def test_instances(self, tmp_path, broom_instance):
        path = tmp_path / "bench.jsonl"

        save_instances(path, [broom_instance])

        assert load_instances(path) == [broom_instance]

    def test_predictions(self, tmp_path, ootsm_record):
        path = tmp_path / "preds.jsonl"

        save_predictions(path, [ootsm_record])
        loaded = load_predictions(path)

        assert loaded[0].future == ootsm_record.future
        assert loaded[0].goa_objects == ootsm_record.goa_objects

    def test_schema_error_reports_line(self, tmp_path, broom_instance):
        path = tmp_path / "bench.jsonl"
        good = json.dumps(broom_instance.to_dict())
        path.write_text(good + "\n" + json.dumps({"video_id": "x"}) + "\n", encoding="utf-8")

        with pytest.raises(JsonlError) as exc_info:
            load_instances(path)
        assert exc_info.value.line_no == 2

    def test_unordered_frames_error(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        item = {
            "video_id": "v", "fraction": 0.5,
            "observed": [{"frame_id": 2, "objects": []}, {"frame_id": 1, "objects": []}],
            "future": [],
        }
        path.write_text(json.dumps(item) + "\n", encoding="utf-8")

        with pytest.raises(JsonlError):
            load_instances(path)


class TestManifest:
    """실행 매니페스트."""

    def test_write_and_read(self, tmp_path):
        corpus = tmp_path / "corpus.json"
        corpus.write_text("{}", encoding="utf-8")
        output = tmp_path / "preds.jsonl"
        manifest = RunManifest(command="run anticipate", argv=["run", "anticipate"],
                               config_hash="abc")
        manifest.add_input(corpus)
        manifest.add_input(None)

        path = write_manifest(output, manifest)
        restored = read_manifest(output)

        assert path == manifest_path(output)
        assert path.name == "preds.jsonl.manifest.json"
        assert restored.inputs == {str(corpus): sha256_file(corpus)}
        assert restored.outputs == [str(output)]
        assert restored.version == __version__
        assert restored.created_at

    def test_tool_name(self, tmp_path):
        data = RunManifest(command="bench build", argv=[], config_hash="h").to_dict()

        assert data["tool"] == "lsa-toolkit"
        assert data["created_at"]
