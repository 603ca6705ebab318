#!/usr/bin/env python3
"""Download the benchmark MPS instances the experiment harness was tuned for.

The full-scale experiments behind the presets ran on public MIPLIB problems;
this script fetches those files so the pipeline can be pointed at real
benchmark data. It tries the MIPLIB 2017 collection first and falls back to
the MIPLIB 3 archive for the older names. Files land as plain .mps next to
the bundled desk instances.

Usage:
    python3 scripts/fetch_miplib.py [--dest DIR] [--set training|testing|all]
                                    [--only name,name,...]

Needs network access; the bundled test suite never calls this.
"""

import argparse
import gzip
import sys
import urllib.error
import urllib.request
from pathlib import Path

TRAINING = [
    "air03", "bell5", "dcmulti", "fiber", "fixnet6", "gen", "gesa3", "gt2",
    "khb05250", "l152lav", "misc03", "misc06", "mod008", "mod010", "p0033",
    "p0201", "p0548", "pp08a", "pp08aCUTS", "qnet1_o", "qnet1", "rgn",
    "set1ch", "stein27", "stein45", "vpm1", "vpm2",
]

TESTING = [
    "23588", "bppc8-02", "exp-1-500-5-5", "mtest4ma", "neos-1425699",
    "neos17", "nexp-50-20-1-1", "sp150x300d",
]

URL_PATTERNS = (
    "https://miplib.zib.de/WebData/instances/{name}.mps.gz",
    "https://miplib2010.zib.de/miplib3/miplib3/{name}.mps.gz",
)


def fetch(name: str, dest: Path, timeout: float) -> bool:
    target = dest / f"{name}.mps"
    if target.exists():
        print(f"  {name}: already present")
        return True
    for pattern in URL_PATTERNS:
        url = pattern.format(name=name)
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                blob = resp.read()
        except (urllib.error.URLError, OSError) as exc:
            print(f"  {name}: {url} -> {exc}")
            continue
        if url.endswith(".gz"):
            try:
                blob = gzip.decompress(blob)
            except OSError as exc:
                print(f"  {name}: bad gzip payload from {url} ({exc})")
                continue
        target.write_bytes(blob)
        print(f"  {name}: wrote {target} ({len(blob)} bytes)")
        return True
    return False


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default="instances/miplib",
                        help="download directory (default instances/miplib)")
    parser.add_argument("--set", dest="which", default="all",
                        choices=["training", "testing", "all"],
                        help="which benchmark list to fetch")
    parser.add_argument("--only", default=None,
                        help="comma-separated subset of names to fetch")
    parser.add_argument("--timeout", type=float, default=30.0,
                        help="per-request timeout in seconds")
    args = parser.parse_args(argv)

    names = {"training": TRAINING, "testing": TESTING,
             "all": TRAINING + TESTING}[args.which]
    if args.only:
        wanted = {tok.strip() for tok in args.only.split(",") if tok.strip()}
        unknown = wanted - set(TRAINING + TESTING)
        if unknown:
            parser.error(f"unknown instance names: {', '.join(sorted(unknown))}")
        names = [n for n in names if n in wanted]

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    print(f"fetching {len(names)} instances into {dest}/")
    misses = [name for name in names if not fetch(name, dest, args.timeout)]
    if misses:
        print(f"failed to fetch: {', '.join(misses)}", file=sys.stderr)
        return 1
    print("done")
    return 0


if __name__ == "__main__":
    sys.exit(main())
