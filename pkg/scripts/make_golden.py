"""Freeze XYZ/POSCAR exports of every structurally complete fixture entry.

Writes tests/golden/structures.json (auid -> {"xyz": ..., "poscar": ...}).
Run after regenerating fixtures; review the diff before committing.
"""

import json
from pathlib import Path

from aflux.errors import IncompleteStructureError
from aflux.results import search
from aflux.simulator import bundled_dataset, running
from aflux.transport import Transport

ROOT = Path(__file__).resolve().parents[1]


def main():
    out = {}
    with running(bundled_dataset()) as server:
        q = search(server.root, 200, transport=Transport()).select("auid").orderby("auid")
        for entry in q:
            try:
                out[entry.auid] = {"xyz": entry.export("xyz"), "poscar": entry.export("poscar")}
            except IncompleteStructureError:
                continue
    path = ROOT / "tests" / "golden" / "structures.json"
    path.parent.mkdir(exist_ok=True)
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(out)} structures to {path}")


if __name__ == "__main__":
    main()
