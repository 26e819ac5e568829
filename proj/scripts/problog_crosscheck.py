#!/usr/bin/env python3
"""Compare `nsl classify` output against ProbLog on the exported programs.

Usage: problog_crosscheck.py CLASSIFY_JSONL PROBLOG_DIR [--tol 1e-9] [--limit N]

Only records classified exactly are compared. Each exported program gets one
query per reported label; binary tasks compare the positive label, multiclass
tasks are not supported (their label probabilities are exclusive, not marginals).
Requires `pip install problog`.
"""
import argparse
import json
import pathlib
import re
import sys

from problog import get_evaluatable
from problog.program import PrologString


def file_name(record):
    stem = re.sub(r"[^A-Za-z0-9_.-]", "_", record["id"])
    return stem + ("_perturbed" if record["perturbed"] else "") + ".pl"


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("classified")
    parser.add_argument("problog_dir")
    parser.add_argument("--label", default="invalid", help="positive label of a binary task")
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--limit", type=int, default=0)
    args = parser.parse_args()

    checked = failed = 0
    for line in pathlib.Path(args.classified).read_text().splitlines():
        record = json.loads(line)
        if not record["exact"]:
            continue
        program = (pathlib.Path(args.problog_dir) / file_name(record)).read_text()
        program += f"query({args.label}).\n"
        result = get_evaluatable().create_from(PrologString(program)).evaluate()
        theirs = next(iter(result.values()), 0.0)
        ours = record["probs"][args.label]
        ok = abs(theirs - ours) <= args.tol
        checked += 1
        failed += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {record['id']} nsl={ours:.12f} problog={theirs:.12f}")
        if args.limit and checked >= args.limit:
            break
    print(f"{checked} compared, {failed} outside {args.tol}")
    return 1 if failed or not checked else 0


if __name__ == "__main__":
    sys.exit(main())
