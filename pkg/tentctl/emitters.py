"""
Text emitters for command output: JSON lines and CSV
Output is assembled as a string first so it can be digested for the run manifest.
"""
import csv
import io
import json
from typing import Any, Dict, Iterable, Sequence


def to_jsonl(records: Iterable[Dict[str, Any]]) -> str:
    lines = [json.dumps(record, separators=(",", ":"), ensure_ascii=False) for record in records]
    return "".join(line + "\n" for line in lines)


def to_json(document: Any) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([str(value) for value in row])
    return buffer.getvalue()


def cycle_csv_rows(records: Iterable[Dict[str, Any]]) -> Iterable[Sequence[Any]]:
    """Flatten ExactCycle records to (T, symbols, sign, index, point) rows"""
    for record in records:
        for index, point in enumerate(record["points"]):
            yield (record["T"], record["symbols"], record["sign"], index, point)


CYCLE_CSV_HEADER = ("T", "symbols", "sign", "index", "point")
GRAPH_CSV_HEADER = ("x", "f", "fT", "zeta", "F")
TRACE_CSV_HEADER = ("n", "x", "U", "Uhat")
HISTOGRAM_CSV_HEADER = ("bin_left", "bin_right", "count", "density")
