"""Run the full conformance report and write it as JSON.

    python3 scripts/run_report.py --output report.json
"""

import argparse
import json
import sys
import time

from grwhittaker.conformance import build_report


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--output", default="report.json")
    ap.add_argument("--only", help="comma-separated check ids")
    args = ap.parse_args()
    only = args.only.split(",") if args.only else None
    t0 = time.perf_counter()
    rep = build_report(only=only)
    with open(args.output, "w") as fh:
        json.dump(rep.to_json(), fh, indent=2, default=str)
    for c in rep.checks:
        print(f"{c.check_id:15s} {c.status:15s} {c.location}")
    print(f"{time.perf_counter() - t0:.1f} s, written to {args.output}")
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
