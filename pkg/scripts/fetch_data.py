#!/usr/bin/env python3
"""Download the corpus and benchmark files listed in data/datasets.json.

Each dataset has one or more sources, tried in order: a URL (optionally a
member of a zip archive) or a pip requirement whose wheel holds the file.
Files with a recorded sha256 are verified; text8 has only a size check.
"""

import argparse
import hashlib
import io
import json
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def from_url(src):
    with urllib.request.urlopen(src["url"], timeout=60) as r:
        data = r.read()
    if "member" in src:
        data = zipfile.ZipFile(io.BytesIO(data)).read(src["member"])
    return data


def from_pip(src):
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, src["pip"]],
            check=True,
        )
        wheel = next(Path(tmp).glob("*.whl"))
        return zipfile.ZipFile(wheel).read(src["member"])


def fetch(name, entry, force=False):
    dest = ROOT / entry["dest"]
    if dest.exists() and not force:
        print(f"{name}: present at {dest}")
        return True
    for src in entry["sources"]:
        try:
            data = from_pip(src) if "pip" in src else from_url(src)
        except Exception as e:  # try the next source
            print(f"{name}: {src.get('url') or src.get('pip')} failed: {e}")
            continue
        digest = hashlib.sha256(data).hexdigest()
        if entry.get("sha256") and digest != entry["sha256"]:
            print(f"{name}: checksum mismatch ({digest})")
            continue
        if entry.get("size") and len(data) != entry["size"]:
            print(f"{name}: size {len(data)} != {entry['size']}")
            continue
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(data)
        print(f"{name}: wrote {dest} sha256={digest}")
        return True
    return False


def main():
    manifest = json.loads((ROOT / "data" / "datasets.json").read_text())
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", help=f"subset of {sorted(manifest)}")
    ap.add_argument("--force", action="store_true")
    args = ap.parse_args()
    ok = all(fetch(n, manifest[n], args.force) for n in (args.names or manifest))
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
