"""
Run artifacts on disk: report.json, metadata.json, summary.txt and tables/.
"""
import csv
import io
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import structlog
from pydantic import BaseModel

logger = structlog.get_logger(__name__)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


def scalars(result: Dict[str, Any], prefix: str = "") -> List[Tuple[str, Any]]:
    """Scalar leaves of a result, one level of nesting deep, for the summary"""
    found: List[Tuple[str, Any]] = []
    for key, value in result.items():
        name = f"{prefix}{key}"
        if isinstance(value, (bool, int, float, str)) or value is None:
            found.append((name, value))
        elif isinstance(value, dict) and not prefix:
            found.extend(scalars(value, prefix=f"{name}."))
    return found


def write_run(out_dir: Path, report: BaseModel, metadata: BaseModel, summary: str,
              tables: Dict[str, str]) -> Path:
    """Write one run; report.json carries no timestamps so reruns compare byte for byte"""
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    (out_dir / "metadata.json").write_text(metadata.model_dump_json(indent=2) + "\n", encoding="utf-8")
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8")
    if tables:
        table_dir = out_dir / "tables"
        table_dir.mkdir(exist_ok=True)
        for name, content in tables.items():
            (table_dir / name).write_text(content, encoding="utf-8")
    logger.info("Run written", path=str(out_dir), tables=sorted(tables))
    return out_dir
