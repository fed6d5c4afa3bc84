#!/usr/bin/env python3
"""Run the full verification suite and write a JSON report.

Usage: python scripts/run_verify.py [report.json] [--threads K]
"""

import json
import sys

from normlab.experiments import verify


def main() -> int:
    args = sys.argv[1:]
    threads = 1
    if "--threads" in args:
        i = args.index("--threads")
        threads = int(args[i + 1])
        del args[i : i + 2]
    out = args[0] if args else "verify-report.json"
    reports = verify(threads=threads)
    for rep in reports:
        print("\n".join(rep.summary_lines()))
    with open(out, "w") as fh:
        json.dump([r.as_dict() for r in reports], fh, indent=2)
    failed = [r.name for r in reports if not r.passed]
    print(f"\nwrote {out}; {len(reports) - len(failed)}/{len(reports)} passed")
    if failed:
        print("failed:", ", ".join(failed))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
