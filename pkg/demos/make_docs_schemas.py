"""Regenerate docs/schemas/*.json from the in-package schema dicts."""

import json
import pathlib

from pressmat.schemas import ALL_SCHEMAS

docs = pathlib.Path(__file__).resolve().parent.parent / "docs" / "schemas"
docs.mkdir(parents=True, exist_ok=True)
for name, schema in ALL_SCHEMAS.items():
    path = docs / name
    path.write_text(json.dumps(schema, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path}")
