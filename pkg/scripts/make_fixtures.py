#!/usr/bin/env python3
"""Write the built-in surfaces as JSON documents into a directory."""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from veertrack.fixtures import BUILDERS
from veertrack.surface import serialize_surface


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="fixtures", help="output directory")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, build in BUILDERS.items():
        path = out / f"{name}.json"
        path.write_text(serialize_surface(build()) + "\n", encoding="utf-8")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
