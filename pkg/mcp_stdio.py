"""
MCP stdio launcher - 以 stdio 傳輸啟動 Hyperroute 工具

Settings are loaded before the server module is imported so tools see the
configured seed, workers and output directory. Logging goes to stderr; stdout
carries only JSON-RPC.
"""

import os
import sys
from contextlib import contextmanager
from typing import Optional

import click

from routing_config import configure_logging, load_settings, set_settings
from routing_errors import ConfigError


@contextmanager
def quiet_import():
    """Send stray prints to devnull while tool modules load."""
    with open(os.devnull, "w") as devnull:
        saved = sys.stdout, sys.stderr
        sys.stdout = sys.stderr = devnull
        try:
            yield
        finally:
            sys.stdout, sys.stderr = saved


@click.command()
@click.option("--config", "config_path", default=None, help="key = value settings file")
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
def main(config_path: Optional[str], log_level: Optional[str]) -> None:
    """Serve the hyperroute tools over stdio."""
    try:
        settings = load_settings(config_path, {"log_level": log_level})
    except ConfigError as e:
        click.echo(f"❌ {e}", err=True)
        sys.exit(2)
    set_settings(settings)
    configure_logging(settings.log_level)

    with quiet_import():
        from server import mcp

    mcp.run(transport="stdio")


if __name__ == "__main__":
    main()
