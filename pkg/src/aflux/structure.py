"""Atomic structures built from entry properties, with XYZ/POSCAR writers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, IncompleteStructureError, UsageError

STRUCTURE_KEYWORDS = ("geometry", "species", "composition", "positions_cartesian")


@dataclass(frozen=True, eq=False)
class AtomicStructure:
    cell: np.ndarray          # rows are lattice vectors, angstrom
    species: tuple[str, ...]  # one symbol per atom
    positions: np.ndarray     # N x 3 Cartesian, angstrom
    comment: str = ""

    def __post_init__(self):
        cell = np.asarray(self.cell, dtype=float)
        positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        if cell.shape != (3, 3):
            raise ConsistencyError(f"cell must be 3x3, got {cell.shape}")
        if len(positions) != len(self.species):
            raise ConsistencyError(f"{len(positions)} positions for {len(self.species)} species labels")
        object.__setattr__(self, "cell", cell)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "species", tuple(self.species))

    def __len__(self):
        return len(self.species)

    def lattice_parameters(self) -> tuple[float, ...]:
        return lattice_parameters(self.cell)


def cell_from_parameters(a, b, c, alpha, beta, gamma) -> np.ndarray:
    """Lattice vectors (rows) with ``a`` along x and ``b`` in the xy plane; angles in degrees."""
    al, be, ga = (math.radians(x) for x in (alpha, beta, gamma))
    ca, cb, cg = math.cos(al), math.cos(be), math.cos(ga)
    sg = math.sin(ga)
    volume_term = 1 - ca * ca - cb * cb - cg * cg + 2 * ca * cb * cg
    if volume_term <= 0 or sg == 0:
        raise ConsistencyError(f"angles ({alpha}, {beta}, {gamma}) do not form a cell")
    return np.array([
        [a, 0.0, 0.0],
        [b * cg, b * sg, 0.0],
        [c * cb, c * (ca - cb * cg) / sg, c * math.sqrt(volume_term) / sg],
    ])


def lattice_parameters(cell) -> tuple[float, ...]:
    """Inverse of :func:`cell_from_parameters` (lengths, then angles in degrees)."""
    va, vb, vc = np.asarray(cell, dtype=float)
    la, lb, lc = (float(np.linalg.norm(v)) for v in (va, vb, vc))

    def angle(u, v, lu, lv):
        return math.degrees(math.acos(max(-1.0, min(1.0, float(np.dot(u, v)) / (lu * lv)))))

    return la, lb, lc, angle(vb, vc, lb, lc), angle(va, vc, la, lc), angle(va, vb, la, lb)


def to_structure(entry) -> AtomicStructure:
    """Build the structure of an entry, fetching missing properties lazily."""
    missing = [k for k in STRUCTURE_KEYWORDS if not entry.has(k)]
    if missing:
        raise IncompleteStructureError(missing)
    geometry = entry.value("geometry").values
    if len(geometry) != 6:
        raise ConsistencyError(f"geometry needs 6 lattice parameters, got {len(geometry)}")
    symbols = entry.value("species").values
    counts = entry.value("composition").values
    positions = entry.value("positions_cartesian")
    if len(symbols) != len(counts):
        raise ConsistencyError(f"{len(symbols)} species but {len(counts)} composition counts")
    if any(n < 0 or n != int(n) for n in counts):
        raise ConsistencyError(f"composition counts must be whole numbers, got {counts}")
    expanded = [s for s, n in zip(symbols, counts) for _ in range(int(n))]
    if positions.shape[1] != 3 or len(expanded) != positions.shape[0]:
        raise ConsistencyError(
            f"composition totals {len(expanded)} atoms but positions_cartesian has "
            f"{positions.shape[0]} rows of {positions.shape[1]}")
    compound = entry.raw.get("compound", "")
    return AtomicStructure(cell_from_parameters(*geometry), tuple(expanded),
                           positions.native, comment=compound)


def _fmt(x: float) -> str:
    return f"{round(float(x), 6) + 0.0:.6f}"


def to_xyz(s: AtomicStructure) -> str:
    lattice = " ".join(_fmt(x) for x in s.cell.reshape(-1))
    lines = [str(len(s)), f'Lattice="{lattice}"']
    lines += [f"{sym} {_fmt(x)} {_fmt(y)} {_fmt(z)}" for sym, (x, y, z) in zip(s.species, s.positions)]
    return "\n".join(lines) + "\n"


def to_poscar(s: AtomicStructure) -> str:
    # POSCAR lists each species once, so atoms are grouped by first appearance
    order = list(dict.fromkeys(s.species))
    lines = [s.comment or " ".join(order), "1.0"]
    lines += [" ".join(_fmt(x) for x in row) for row in s.cell]
    lines.append(" ".join(order))
    lines.append(" ".join(str(s.species.count(sym)) for sym in order))
    lines.append("Cartesian")
    for sym in order:
        for label, (x, y, z) in zip(s.species, s.positions):
            if label == sym:
                lines.append(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}")
    return "\n".join(lines) + "\n"


def export(s: AtomicStructure, format: str) -> str:
    writers = {"xyz": to_xyz, "poscar": to_poscar}
    try:
        return writers[format.lower()](s)
    except KeyError:
        raise UsageError(f"unknown export format {format!r}; choose xyz or poscar") from None
