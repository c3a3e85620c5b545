"""Configuration, presets, study drivers and artifact writers."""

from .config import Config, StudyKind, dump, parse_config, parse_text
from .presets import PRESETS, preset
from .studies import run_study

__all__ = ["Config", "StudyKind", "dump", "parse_config", "parse_text", "PRESETS", "preset",
           "run_study"]
