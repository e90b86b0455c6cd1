"""설정 패키지."""

from src.lsa_toolkit.config.settings import (
    DecodeConfig,
    LossConfig,
    Settings,
    TrainingDefaults,
    get_settings,
)

__all__ = ["DecodeConfig", "LossConfig", "Settings", "TrainingDefaults", "get_settings"]
