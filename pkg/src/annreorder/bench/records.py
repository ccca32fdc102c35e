"""
BenchRecord files.

CSV has a mandatory header and fixed column order; 'timings' holds the raw
per-trial seconds joined by ';'.  The JSON mirror carries the same records
plus the run manifest.
"""
import csv
import json
import os
import platform
from typing import Dict, List, Sequence, Tuple

import numpy as np

from annreorder.bench.harness import BenchRecord
from annreorder.exceptions import FormatError

COLUMNS = BenchRecord._fields

SPEEDUP_PAIRING = "equal-L"


def host_info() -> str:
    return (
        f"{platform.node()} {platform.system()} {platform.release()} {platform.machine()}, "
        f"{os.cpu_count()} cpus, python {platform.python_version()}, numpy {np.__version__}"
    )


def _to_row(r: BenchRecord) -> Dict[str, str]:
    row = {}
    for name, value in r._asdict().items():
        if name == "timings":
            row[name] = ";".join(repr(float(t)) for t in value)
        elif name == "timer_warning":
            row[name] = "1" if value else "0"
        elif isinstance(value, float):
            row[name] = repr(value)
        else:
            row[name] = str(value)
    return row


def _from_row(row: Dict[str, str], path, line: int) -> BenchRecord:
    try:
        return BenchRecord(
            index=row["index"],
            dataset=row["dataset"],
            reorder=row["reorder"],
            L=int(row["L"]),
            k=int(row["k"]),
            recall=float(row["recall"]),
            qps=float(row["qps"]),
            qps_std=float(row["qps_std"]),
            speedup=float(row["speedup"]),
            trials=int(row["trials"]),
            mean_latency=float(row["mean_latency"]),
            mean_hops=float(row["mean_hops"]),
            mean_distance_evals=float(row["mean_distance_evals"]),
            timer_warning=row["timer_warning"] == "1",
            timings=tuple(float(t) for t in row["timings"].split(";") if t),
        )
    except (KeyError, ValueError) as e:
        raise FormatError(f"bad record: {e}", path=path, line=line)


def write_csv(path, records: Sequence[BenchRecord]):
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=COLUMNS)
        w.writeheader()
        for r in records:
            w.writerow(_to_row(r))


def read_csv(path) -> List[BenchRecord]:
    with open(path, "r", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise FormatError(f"unexpected header {reader.fieldnames}", path=path, line=1)
        return [_from_row(row, path, i) for i, row in enumerate(reader, start=2)]


def record_to_dict(r: BenchRecord) -> dict:
    d = r._asdict()
    d["timings"] = list(r.timings)
    return d


def record_from_dict(d: dict) -> BenchRecord:
    d = dict(d)
    d["timings"] = tuple(d["timings"])
    return BenchRecord(**d)


def write_json(path, records: Sequence[BenchRecord], manifest: dict):
    manifest = dict(manifest)
    manifest.setdefault("speedup_pairing", SPEEDUP_PAIRING)
    manifest.setdefault("host", host_info())
    with open(path, "w") as f:
        json.dump({"manifest": manifest, "records": [record_to_dict(r) for r in records]}, f, indent=2)


def read_json(path) -> Tuple[List[BenchRecord], dict]:
    with open(path, "r") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise FormatError(e.msg, path=path, line=e.lineno)
    try:
        return [record_from_dict(r) for r in doc["records"]], doc["manifest"]
    except (KeyError, TypeError) as e:
        raise FormatError(f"bad records document: {e}", path=path)
