#!/usr/bin/env python3
"""Validate a benchmark report against schema/report.schema.json."""
import json
import sys

import jsonschema


def main() -> int:
    if len(sys.argv) != 3:
        print("usage: validate_report.py SCHEMA REPORT", file=sys.stderr)
        return 2
    with open(sys.argv[1]) as f:
        schema = json.load(f)
    with open(sys.argv[2]) as f:
        report = json.load(f)
    try:
        jsonschema.validate(report, schema, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as e:
        print(f"invalid report: {e.message} at {list(e.absolute_path)}", file=sys.stderr)
        return 1
    print("report is valid")
    return 0


if __name__ == "__main__":
    sys.exit(main())
