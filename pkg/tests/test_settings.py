"""Settings 클래스 단위 테스트."""

from __future__ import annotations

import os
from unittest.mock import patch

import pytest
import yaml
from pydantic import ValidationError

from src.lsa_toolkit.config.settings import DecodeConfig, LossConfig, Settings, get_settings

API_KEY = "sk-test-0123456789abcdef"


@pytest.fixture(autouse=True)
def _isolated(clean_env):
    """환경 변수와 .env 파일 영향 제거."""
    return clean_env


class TestSettings:
    """Settings 기본 동작 테스트."""

    def test_default_values(self) -> None:
        """기본값 확인."""
        with patch.dict(os.environ, {}, clear=True):
            settings = Settings()

        assert settings.fractions == [0.3, 0.5, 0.7, 0.9]
        assert settings.k_values == [10, 20, 50]
        assert settings.mode == "with_goa"
        assert settings.token_budget == 2000
        assert settings.decode.model == "gpt-4o-mini"
        assert settings.decode.temperature == 0.7
        assert settings.decode.top_p == 0.4
        assert settings.loss.beta == 0.5
        assert settings.loss.lambda_ == 0.03
        assert settings.training.lora_rank == 32
        assert not settings.has_api_key

    def test_env_prefix(self) -> None:
        """환경 변수 PREFIX (LSA_) 와 중첩 구분자 확인."""
        env = {
            "LSA_API_KEY": API_KEY,
            "LSA_MODE": "without_goa",
            "LSA_DECODE__MODEL": "gpt-4o",
            "LSA_DECODE__MAX_RETRIES": "5",
            "LSA_LOSS__TAU": "0.1",
        }
        with patch.dict(os.environ, env, clear=True):
            settings = Settings()

        assert settings.api_key == API_KEY
        assert settings.mode == "without_goa"
        assert settings.decode.model == "gpt-4o"
        assert settings.decode.max_retries == 5
        assert settings.loss.tau == 0.1

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"fractions": []},
            {"fractions": [0.0, 0.5]},
            {"k_values": [0]},
            {"log_level": "LOUD"},
            {"mode": "oracle"},
            {"mock": "fixture"},
            {"parallelism": 0},
        ],
    )
    def test_validation(self, kwargs) -> None:
        with patch.dict(os.environ, {}, clear=True), pytest.raises(ValidationError):
            Settings(**kwargs)

    def test_log_level_normalized(self) -> None:
        with patch.dict(os.environ, {}, clear=True):
            assert Settings(log_level="debug").log_level == "DEBUG"


class TestYaml:
    """YAML 설정 파일."""

    def test_file_overrides_env(self, tmp_path) -> None:
        path = tmp_path / "run.yaml"
        path.write_text("mode: without_goa\ndecode:\n  model: deepseek-v3\n", encoding="utf-8")

        with patch.dict(os.environ, {"LSA_MODE": "with_goa"}, clear=True):
            settings = Settings.from_yaml(path)

        assert settings.mode == "without_goa"
        assert settings.decode.model == "deepseek-v3"

    def test_api_key_in_file_ignored(self, tmp_path) -> None:
        path = tmp_path / "run.yaml"
        path.write_text("api_key: sk-from-file\n", encoding="utf-8")

        with patch.dict(os.environ, {}, clear=True):
            settings = Settings.from_yaml(path)

        assert settings.api_key == ""

    def test_round_trip_without_key(self, tmp_path) -> None:
        with patch.dict(os.environ, {"LSA_API_KEY": API_KEY}, clear=True):
            settings = Settings(one_shot=True, k_values=[5])
            path = tmp_path / "run.yaml"
            path.write_text(settings.to_yaml(), encoding="utf-8")
            restored = Settings.from_yaml(path)

        assert API_KEY not in path.read_text(encoding="utf-8")
        assert "api_key" not in yaml.safe_load(path.read_text(encoding="utf-8"))
        assert restored.file_dict() == settings.file_dict()
        assert yaml.safe_load(path.read_text(encoding="utf-8"))["loss"]["lambda"] == 0.03

    def test_overrides_win(self, tmp_path) -> None:
        path = tmp_path / "run.yaml"
        path.write_text("one_shot: false\n", encoding="utf-8")

        with patch.dict(os.environ, {}, clear=True):
            settings = get_settings(str(path), one_shot=True, mode=None)

        assert settings.one_shot is True
        assert settings.mode == "with_goa"

    def test_non_mapping(self, tmp_path) -> None:
        path = tmp_path / "run.yaml"
        path.write_text("- a\n- b\n", encoding="utf-8")

        with pytest.raises(ValueError):
            Settings.from_yaml(path)

    def test_missing_file(self, tmp_path) -> None:
        with pytest.raises(FileNotFoundError):
            Settings.from_yaml(tmp_path / "none.yaml")


class TestSecrets:
    """API 키 마스킹과 설정 해시."""

    def test_masked(self) -> None:
        with patch.dict(os.environ, {"LSA_API_KEY": API_KEY}, clear=True):
            data = Settings().to_dict()

        assert data["api_key"] == "sk-tes...cdef"
        assert API_KEY not in str(data)

    def test_short_key_fully_masked(self) -> None:
        with patch.dict(os.environ, {"LSA_API_KEY": "short"}, clear=True):
            assert Settings().to_dict()["api_key"] == "***"

    def test_config_hash_excludes_key(self) -> None:
        with patch.dict(os.environ, {"LSA_API_KEY": API_KEY}, clear=True):
            with_key = Settings().config_hash()
        with patch.dict(os.environ, {}, clear=True):
            without_key = Settings().config_hash()
            changed = Settings(one_shot=True).config_hash()

        assert with_key == without_key
        assert changed != without_key
        assert len(with_key) == 64


class TestNestedConfigs:
    """DecodeConfig / LossConfig."""

    def test_frozen(self) -> None:
        with pytest.raises(ValidationError):
            DecodeConfig().top_p = 0.9

    @pytest.mark.parametrize("kwargs", [{"top_p": 0.0}, {"max_retries": -1}, {"timeout": 0}])
    def test_decode_bounds(self, kwargs) -> None:
        with pytest.raises(ValidationError):
            DecodeConfig(**kwargs)

    def test_loss_lambda_alias(self) -> None:
        assert LossConfig(**{"lambda": 0.1}).lambda_ == 0.1
        assert LossConfig(lambda_=0.2).lambda_ == 0.2
