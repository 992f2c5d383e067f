"""Command-line interface for the web analysis toolkit."""

from ui.cli import run_cli

__all__ = ["run_cli"]
