"""Input bundle: a harness output directory with manifest-verified CSVs."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path


class BundleError(RuntimeError):
    pass


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def read_rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


class ReportBundle:
    """Verified view of a run directory.

    Refuses to operate if the sha256 of an indexed CSV disagrees with the
    manifest, so figures can never silently mix runs.
    """

    HOLDER = "holder_lags.csv"
    DECAY = "moment_decay.csv"
    FIELD = "field_snapshots.csv"
    LADDER = "diagnostic_ladder.csv"

    def __init__(self, input_dir: str | Path):
        self.root = Path(input_dir)
        mpath = self.root / "manifest.json"
        if not mpath.exists():
            raise BundleError(f"no manifest.json in {self.root}")
        with open(mpath, encoding="utf-8") as fh:
            self.manifest = json.load(fh)
        self._verify()
        self.verdicts = {}
        vpath = self.root / "verdicts.json"
        if vpath.exists():
            with open(vpath, encoding="utf-8") as fh:
                self.verdicts = json.load(fh).get("checks", {})

    def _verify(self) -> None:
        for rel, digest in self.manifest.get("outputs", {}).items():
            path = self.root / rel
            if not path.exists():
                raise BundleError(f"manifest indexes missing file {rel}")
            actual = _sha256(path)
            if actual != digest:
                raise BundleError(
                    f"hash mismatch for {rel}: manifest {digest[:12]}.., file {actual[:12]}.."
                )

    def csv_path(self, name: str) -> Path:
        path = self.root / name
        if not path.exists():
            raise BundleError(f"{name} not found in {self.root}")
        return path

    def config_value(self, key: str, default=None):
        entry = self.manifest.get("config", {}).get(key)
        return default if entry is None else entry.get("value", default)

    def verdict_statistic(self, check: str, key: str, default=None):
        stats = self.verdicts.get(check, {}).get("statistic", {})
        return stats.get(key, default)
