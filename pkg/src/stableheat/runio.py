"""Run manifests and delimited output.

Every run directory is namespaced by the config hash and carries a
manifest recording each key with its provenance (default / file /
override), the seed, the scheme and the sha256 of every file written, so
any random draw in a run is reproducible from the manifest alone.
CSV output is UTF-8 with '\n' line endings and '.' decimals.
"""

from __future__ import annotations

import csv
import hashlib
import json
import subprocess
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__

SCHEME = "splitting:diffuse-react-jump-clamp"


def config_hash(items: Mapping[str, object]) -> str:
    canon = "\n".join(f"{k}={items[k]}" for k in sorted(items))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def git_describe() -> str | None:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5, check=False,
        )
        return out.stdout.strip() or None
    except OSError:
        return None


def write_csv(path: Path, rows: Sequence[Mapping[str, object]], columns: Sequence[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([row[c] for c in columns])


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    out_dir: Path,
    config_items: Mapping[str, Mapping[str, object]],
    seed: int,
    chash: str,
    outputs: Sequence[Path],
    extra: Mapping[str, object] | None = None,
) -> Path:
    manifest = {
        "version": __version__,
        "scheme": SCHEME,
        "git": git_describe(),
        "seed": seed,
        "config_hash": chash,
        "config": {k: dict(v) for k, v in config_items.items()},
        "outputs": {str(p.relative_to(out_dir)): sha256_file(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def snapshot_rows(traj) -> list[dict]:
    rows = []
    grid = traj.snapshots[0].grid
    for snap in traj.snapshots:
        for x, v in zip(grid.centers, snap.values):
            rows.append(dict(t=float(snap.t), x=float(x), value=float(v)))
    return rows
