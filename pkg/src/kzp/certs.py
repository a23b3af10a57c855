"""Check certificates and their canonical serialization.

A certificate records one check outcome.  The canonical JSON form is
bit-stable for a fixed configuration and seed: keys are sorted, field
elements are rendered through their canonical strings, and volatile
data (wall-clock timing) is excluded.  Timings are kept on the object
for console reporting only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"
ERROR = "error"


@dataclass
class Certificate:
    name: str
    params: dict = field(default_factory=dict)
    status: str = PASS
    witness: Any = None
    seed: str | None = None
    timing: float | None = None

    @property
    def ok(self) -> bool:
        return self.status in (PASS, NOT_APPLICABLE)

    def canonical_dict(self) -> dict:
        out = {
            "check": self.name,
            "params": _jsonable(self.params),
            "status": self.status,
        }
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def to_json(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (int, str, float, bool)) or x is None:
        return x
    return str(x)


def write_ndjson(certs: list[Certificate], path: str) -> None:
    with open(path, "w") as fh:
        for c in certs:
            fh.write(c.to_json())
            fh.write("\n")
