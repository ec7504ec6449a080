#!/usr/bin/env python3
"""Validates dumped API responses against the endpoint schemas.

Fixture files are named <schema>[.<variant>].json; e.g. density.empty.json is
checked against density.schema.json.
"""

import json
import sys
from pathlib import Path

from jsonschema import Draft202012Validator
from referencing import Registry, Resource


def main():
    schema_dir, fixture_dir = Path(sys.argv[1]), Path(sys.argv[2])
    resources = []
    for path in schema_dir.glob("*.schema.json"):
        schema = json.loads(path.read_text())
        Draft202012Validator.check_schema(schema)
        resources.append((path.name, Resource.from_contents(schema)))
    registry = Registry().with_resources(resources)

    fixtures = sorted(fixture_dir.glob("*.json"))
    if not fixtures:
        print(f"no fixtures in {fixture_dir}")
        return 1
    failures = 0
    for path in fixtures:
        name = path.name.split(".")[0]
        schema = registry.contents(f"{name}.schema.json")
        validator = Draft202012Validator(schema, registry=registry)
        errors = list(validator.iter_errors(json.loads(path.read_text())))
        for e in errors[:5]:
            print(f"FAIL {path.name}: {'/'.join(map(str, e.absolute_path))}: {e.message[:200]}")
        failures += bool(errors)
        if not errors:
            print(f"ok   {path.name}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
