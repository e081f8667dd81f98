"""CSV/JSON emission and the run manifest.

All CSV output is RFC-4180 (comma separated, CRLF line endings) with floats
printed at 17 significant digits so every value round-trips bit-exactly.
Each data file gets a JSON sidecar with its metadata; a run manifest lists
every emitted file with its content hash.  Timings live in a separate
"runtime" block so the deterministic part of the manifest is reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from pathlib import Path

from . import __version__


def fmt_float(x) -> str:
    return format(float(x), ".17g")


def format_cell(x) -> str:
    if isinstance(x, float):
        return fmt_float(x)
    return str(x)


def write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(x) for x in row])
    return path


def write_json(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class ManifestBuilder:
    """Collects output files and cache statistics for one experiment run."""

    def __init__(self, config_snapshot: dict, out_dir: Path):
        self.config_snapshot = config_snapshot
        self.out_dir = Path(out_dir)
        self.outputs: list[dict] = []
        self.cache_stats: dict = {}
        self.notes: list[str] = []
        self._t0 = time.perf_counter()
        self._phases: dict[str, float] = {}

    def add_output(self, path: Path) -> Path:
        path = Path(path)
        self.outputs.append({
            "path": str(path.relative_to(self.out_dir)) if path.is_relative_to(self.out_dir) else str(path),
            "sha256": sha256_file(path),
            "bytes": path.stat().st_size,
        })
        return path

    def add_phase(self, name: str, seconds: float):
        self._phases[name] = self._phases.get(name, 0.0) + seconds

    def set_cache_stats(self, hits: int, misses: int, keys: list[str] | None = None):
        self.cache_stats = {"hits": hits, "misses": misses}
        if keys is not None:
            self.cache_stats["entries"] = sorted(keys)

    def note(self, message: str):
        self.notes.append(message)

    def write(self, path: Path | None = None) -> Path:
        if path is None:
            path = self.out_dir / "manifest.json"
        manifest = {
            "results": {
                "code_version": __version__,
                "config": self.config_snapshot,
                "outputs": sorted(self.outputs, key=lambda o: o["path"]),
                "cache": self.cache_stats,
                "notes": self.notes,
            },
            "runtime": {
                "wall_s": time.perf_counter() - self._t0,
                "phases_s": self._phases,
                "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            },
        }
        return write_json(Path(path), manifest)
