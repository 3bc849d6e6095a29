"""
Table Writer - 實驗表格輸出

Writes experiment rows as CSV, JSON or markdown with a provenance header
(experiment id, seed, parameters, commit, run id) so every table can be
traced back to the inputs that produced it.
"""

import csv
import hashlib
import io
import json
import logging
import os
import subprocess
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from routing_errors import ParameterError

logger = logging.getLogger("TableWriter")

EXTENSIONS = {"csv": ".csv", "json": ".json", "markdown": ".md"}


def current_commit() -> Optional[str]:
    """Short git revision of the working directory, if there is one."""
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True, text=True, timeout=5, check=False,
        )
    except (OSError, subprocess.SubprocessError):
        return None
    return out.stdout.strip() or None


def run_id(experiment_id: str, seed: int, params: Dict[str, Any]) -> str:
    """Stable id of (experiment, seed, parameters)."""
    content = json.dumps({"id": experiment_id, "seed": seed, "params": params}, sort_keys=True, default=str)
    return hashlib.md5(content.encode("utf-8")).hexdigest()[:12]


def provenance(experiment_id: str, seed: int, params: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "experiment": experiment_id,
        "seed": seed,
        "params": params,
        "commit": current_commit(),
        "run_id": run_id(experiment_id, seed, params),
        "timestamp": datetime.now().isoformat(timespec="seconds"),
    }


def _columns(rows: Sequence[Dict[str, Any]]) -> List[str]:
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, default=str)
    return "" if value is None else str(value)


def format_csv(rows: Sequence[Dict[str, Any]], header: Dict[str, Any]) -> str:
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True, default=str)}\n")
    columns = _columns(rows)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def format_json(rows: Sequence[Dict[str, Any]], header: Dict[str, Any]) -> str:
    return json.dumps({**header, "rows": list(rows)}, ensure_ascii=False, indent=2, default=str) + "\n"


def format_markdown(rows: Sequence[Dict[str, Any]], header: Dict[str, Any]) -> str:
    lines = [f"<!-- {key}: {json.dumps(value, sort_keys=True, default=str)} -->" for key, value in header.items()]
    columns = _columns(rows)
    lines.append("| " + " | ".join(columns) + " |")
    lines.append("|" + "---|" * len(columns))
    for row in rows:
        lines.append("| " + " | ".join(_cell(row.get(c)) for c in columns) + " |")
    return "\n".join(lines) + "\n"


FORMATTERS = {"csv": format_csv, "json": format_json, "markdown": format_markdown}


def render_table(rows: Sequence[Dict[str, Any]], header: Dict[str, Any], fmt: str = "csv") -> str:
    if fmt not in FORMATTERS:
        raise ParameterError(f"Unknown output format '{fmt}', expected one of {sorted(FORMATTERS)}")
    return FORMATTERS[fmt](rows, header)


def write_table(
    rows: Sequence[Dict[str, Any]],
    header: Dict[str, Any],
    fmt: str = "csv",
    path: Optional[str] = None,
    output_dir: Optional[str] = None,
) -> Path:
    """
    Write a table and return its path. Without `path` the file is
    <output_dir>/<experiment><ext>.
    """
    text = render_table(rows, header, fmt)
    if path is None:
        if output_dir is None:
            from routing_config import get_settings
            output_dir = get_settings().output_dir
        path = os.path.join(output_dir, f"{header.get('experiment', 'table')}{EXTENSIONS[fmt]}")
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as exc:
        raise ParameterError(f"Cannot write table to {target}: {exc}") from exc
    logger.info(f"Wrote {len(rows)} rows to {target}")
    return target
