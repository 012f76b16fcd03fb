"""Regenerate src/aflux/data/fixtures.json.

Deterministic: every value is drawn from a seeded RNG and rendered with
aflux.serialization.encode, so the file always decodes under the schema.
The record at position 55 of the band-gap/conductivity example query
(Egap > 6, conductivity descending) carries the three-atom positions used
throughout the tests.
"""

import json
import math
import random
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from aflux.schema import Kind, bundled_registry  # noqa: E402
from aflux.serialization import Kpoints, Matrix, Number, NumberList, Text, TextList, encode  # noqa: E402
from aflux.structure import cell_from_parameters  # noqa: E402

N_RECORDS = 200
SEED = 20170926
DESIGNATED_INDEX = 55
DESIGNATED_POSITIONS = ((0.0, 0.0, -0.0), (1.5691, 1.5691, 1.5691), (4.7073, 4.7073, 4.7073))

ELEMENTS = ["H", "Li", "Be", "B", "C", "N", "O", "F", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
            "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge",
            "As", "Se", "Br", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Ag", "Cd", "In", "Sn", "Sb",
            "Te", "I", "Cs", "Ba", "La", "Hf", "Ta", "W", "Pt", "Au", "Pb", "Bi"]
AUTHORS = ["curtarolo", "Curtarolo", "stefano_curtarolo", "curtarolo_group", "curtarolo.s",
           "hart", "rose", "toher", "oses", "rosenbrock", "levy", "xcurtaroloy"]
SYSTEMS = {
    "cubic": lambda r: (lambda a: (a, a, a, 90, 90, 90))(r.uniform(3, 7)),
    "hexagonal": lambda r: (lambda a: (a, a, r.uniform(3, 9), 90, 90, 120))(r.uniform(2.5, 5)),
    "tetragonal": lambda r: (lambda a: (a, a, r.uniform(3, 9), 90, 90, 90))(r.uniform(3, 6)),
    "orthorhombic": lambda r: (r.uniform(3, 7), r.uniform(3, 7), r.uniform(3, 9), 90, 90, 90),
    "monoclinic": lambda r: (r.uniform(3, 7), r.uniform(3, 7), r.uniform(3, 9), 90, r.uniform(95, 120), 90),
    "triclinic": lambda r: (r.uniform(3, 7), r.uniform(3, 7), r.uniform(3, 9),
                            r.uniform(70, 110), r.uniform(70, 110), r.uniform(70, 110)),
    "rhombohedral": lambda r: (lambda a, t: (a, a, a, t, t, t))(r.uniform(3, 6), r.uniform(50, 100)),
}
SPACEGROUPS = {"cubic": [221, 225, 227, 216], "hexagonal": [194, 186, 187], "tetragonal": [139, 129, 123],
               "orthorhombic": [62, 63, 59], "monoclinic": [12, 14, 11], "triclinic": [2, 1],
               "rhombohedral": [166, 160]}
PATHS = {"cubic": ["G-X", "X-M", "M-G", "G-R"], "hexagonal": ["G-M", "M-K", "K-G", "G-A"],
         "tetragonal": ["G-X", "X-M", "M-G", "G-Z"], "orthorhombic": ["G-X", "X-S", "S-Y", "Y-G"],
         "monoclinic": ["G-Y", "Y-H", "H-C"], "triclinic": ["X-G", "G-Y", "L-G"],
         "rhombohedral": ["G-L", "L-B1", "B-Z", "Z-G"]}
PROTOTYPES = ["A1", "A2", "A3", "B1", "B2", "B3", "B4", "C1", "C15", "L1_2", "D0_3", "AB_hP4"]


def rnd(x, n=4):
    return round(float(x), n) + 0.0


def band_gap(r, i):
    # fixed boundary cases exercise strict comparisons, the rest cover
    # the windows (0,2) and (5,7) and a large-gap tail
    fixed = {0: 2.0, 1: 5.0, 2: 6.0, 3: 7.0, 4: 0.0}
    if i in fixed:
        return fixed[i]
    u = r.random()
    if u < 0.18:
        return 0.0
    if u < 0.33:
        return rnd(r.uniform(0.01, 1.99))
    if u < 0.43:
        return rnd(r.uniform(2.01, 4.99))
    if u < 0.55:
        return rnd(r.uniform(5.01, 6.99))
    return rnd(r.uniform(6.01, 9.5))


def make_record(r, i, conductivities):
    kinds = {kw.name: kw.kind for kw in bundled_registry().values()}
    nspecies = r.choice([1, 2, 2, 2, 3, 3])
    species = sorted(r.sample(ELEMENTS, nspecies))
    composition = [r.choice([1, 1, 1, 2, 3]) for _ in species]
    natoms = sum(composition)
    system = r.choice(sorted(SYSTEMS))
    geometry = tuple(rnd(x) for x in SYSTEMS[system](r))
    cell = cell_from_parameters(*geometry)
    frac = np.array([[r.random() for _ in range(3)] for _ in range(natoms)])
    if natoms:
        frac[0] = 0.0
    positions = tuple(tuple(rnd(v) for v in row) for row in frac @ cell)
    compound = "".join(f"{s}{n}" for s, n in zip(species, composition))
    egap = band_gap(r, i)
    volume = abs(float(np.linalg.det(cell)))

    props = {
        "Egap": Number(egap),
        "Egap_type": Text("metal" if egap == 0 else r.choice(["insulator-direct", "insulator-indirect"])),
        "agl_thermal_conductivity_300K": Number(conductivities[i]),
        "natoms": Number(natoms),
        "nspecies": Number(nspecies),
        "species": TextList(species),
        "composition": NumberList(composition),
        "stoichiometry": NumberList([rnd(n / natoms) for n in composition]),
        "geometry": NumberList(geometry),
        "positions_cartesian": Matrix(positions),
        "lattice_system_relax": Text(system),
        "spacegroup_relax": Number(r.choice(SPACEGROUPS[system])),
        "prototype": Text(r.choice(PROTOTYPES)),
        "volume_cell": Number(rnd(volume)),
        "volume_atom": Number(rnd(volume / natoms)),
        "density": Number(rnd(r.uniform(1.5, 15))),
        "energy_atom": Number(rnd(r.uniform(-9, -1))),
        "enthalpy_formation_atom": Number(rnd(r.uniform(-3, 0.5))),
        "species_pp": TextList([s if r.random() < 0.6 else f"{s}_pv" for s in species]),
        "files": TextList(["CONTCAR.relax", "OUTCAR.relax.xz", "EIGENVAL.bands.xz"][: r.randint(1, 3)]),
        "dft_type": TextList(["PAW_PBE"]),
    }
    if r.random() < 0.92:
        props["author"] = Text(r.choice(AUTHORS))
    if r.random() < 0.6:
        grid = r.choice([6, 8, 10, 12])
        static = (grid + 4,) * 3 if r.random() < 0.8 else None
        props["kpoints"] = Kpoints((grid,) * 3, static, PATHS[system][: r.randint(2, 4)], r.choice([20, 40, 128]))
    if r.random() < 0.4:
        props["stress_tensor"] = Matrix([[rnd(r.uniform(-5, 5), 2) for _ in range(3)] for _ in range(3)])
    if r.random() < 0.3:
        props["spinD"] = NumberList([rnd(r.uniform(-3, 3), 3) for _ in range(natoms)])
    if r.random() < 0.05:
        # incomplete structural data
        del props["positions_cartesian"]

    auid = f"aflow:{r.getrandbits(64):016x}"
    aurl = f"aflowlib.duke.edu:AFLOWDATA/LIB{nspecies}_RAW/{''.join(species)}/{PROTOTYPES[i % len(PROTOTYPES)]}.{i:03d}"
    return {
        "auid": auid,
        "aurl": aurl,
        "compound": compound,
        "properties": {k: encode(kinds[k], v) for k, v in props.items()},
    }


def designate(records):
    """Give the three-atom reference structure to rank 56 of the band-gap example query."""
    def value(rec, key):
        return float(rec["properties"][key])

    hits = [rec for rec in records if value(rec, "Egap") > 6]
    hits.sort(key=lambda rec: -value(rec, "agl_thermal_conductivity_300K"))
    rec = hits[DESIGNATED_INDEX]
    species = ["Li", "Mg", "N"]
    props = rec["properties"]
    props.update({
        "species": encode(Kind.STRING_LIST, TextList(species)),
        "composition": encode(Kind.NUMBER_LIST, NumberList([1, 1, 1])),
        "stoichiometry": "0.3333,0.3333,0.3333",
        "natoms": "3",
        "nspecies": "3",
        "geometry": encode(Kind.NUMBER_LIST, NumberList([4.4381, 4.4381, 4.4381, 60, 60, 60])),
        "positions_cartesian": encode(Kind.MATRIX, Matrix(DESIGNATED_POSITIONS)),
        "lattice_system_relax": "cubic",
        "spacegroup_relax": "216",
        "species_pp": "Li_sv,Mg_pv,N",
    })
    rec["compound"] = "Li1Mg1N1"
    rec["aurl"] = "aflowlib.duke.edu:AFLOWDATA/LIB3_RAW/LiMgN/T0001.ABC"
    return rec


def main():
    r = random.Random(SEED)
    conductivities = set()
    while len(conductivities) < N_RECORDS:
        conductivities.add(rnd(math.exp(r.uniform(math.log(0.1), math.log(2000))), 3))
    conductivities = r.sample(sorted(conductivities), N_RECORDS)
    records = [make_record(r, i, conductivities) for i in range(N_RECORDS)]
    rec = designate(records)
    out = ROOT / "src" / "aflux" / "data" / "fixtures.json"
    out.write_text(json.dumps(records, indent=1) + "\n")
    print(f"wrote {len(records)} records to {out}; designated entry {rec['auid']}")


if __name__ == "__main__":
    main()
