"""
Main entry point for the web geometry toolkit.

Usage:
    python main.py analyze --web data/webs/affine_group.web --point 1,0,1,0
    python main.py verify --web data/webs/generic_cubic.web --point 0.3,0.2,0.5,0.4 --seeds 5
    python main.py characters --scenario all
"""

import sys
from pathlib import Path

# Add project root to Python path
sys.path.insert(0, str(Path(__file__).parent))

from webgeom.base.shared_utils import setup_logging, load_config
from webgeom.base.analysis_config import load_config_from_yaml, set_default_config
from webgeom.base.errors import WebGeometryError
from ui.cli import run_cli


def main():
    """Load settings, configure logging and dispatch to the CLI."""
    try:
        settings = load_config()
    except ValueError as e:
        print(f"error: [CONFIG_ERROR] {e}", file=sys.stderr)
        sys.exit(64)

    # Root package logger; records go to stderr
    logger = setup_logging("webgeom", level=settings["log_level"])
    setup_logging("pipeline", level=settings["log_level"])
    setup_logging("ui", level=settings["log_level"])

    try:
        config = load_config_from_yaml(str(settings["config_path"]))
        config.max_workers = settings["max_workers"]
        set_default_config(config)
        logger.info(f"Configuration loaded from {settings['config_path']}")
    except WebGeometryError as e:
        print(f"error: {e}", file=sys.stderr)
        sys.exit(e.exit_code)

    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
