"""Writes the combinatorial .smi fixtures under crates/core/tests/fixtures.

Molecules are assembled from scaffold templates and substituent strings,
so no chemistry toolkit is needed. Output is deterministic.
"""
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"

SUBS = [
    "C", "CC", "F", "Cl", "Br", "OC", "OCC", "N", "NC", "N(C)C", "C#N", "C(=O)O",
    "C(=O)C", "O", "SC", "C(F)(F)F", "C(C)C", "c2ccccc2", "C2CC2", "S(=O)(=O)C",
    "C(=O)N", "N2CCOCC2", "OC(F)F",
]

# substituents that also occur in the generator's pattern pool; every
# synthesis source carries at least one so that some edit applies
POOL_SUBS = set(SUBS) - {"C(F)(F)F", "C2CC2", "C(=O)N", "N2CCOCC2", "OC(F)F"}

SCAFFOLDS = [
    "c1({a})ccc({b})cc1",
    "c1({a})cccc({b})c1",
    "c1({a})ccccc1{b}",
    "c1({a})ccc({b})nc1",
    "c1({a})cnc({b})nc1",
    "c1({a})ccc({b})s1",
    "O=C({a})Nc1ccc({b})cc1",
    "c1({a})ccc(CN3CCN(C)CC3)cc1{b}",
    "c1({a})ccc(OCC(=O)N)c({b})c1",
    "c1ccc(CC{a})cc1{b}",
    "c1({a})ccc4[nH]cc({b})c4c1",
    "c1({a})ccc(C(=O)N3CCCC3)cc1{b}",
    "c1({a})ccc(-c3ccncc3)cc1{b}",
    "c1({a})cc({b})n(C)n1",
]

# templates where swapping a and b gives the same molecule
SYMMETRIC = {0, 1, 2, 5}

# small molecules (at most 12 heavy atoms) for exhaustive isomorphism checks
SMALL_CORES = [
    "c1ccccc1{a}", "c1cc({a})ccn1", "c1c({a})cccn1", "o1cccc1{a}", "s1cccc1{a}",
    "C1CCCCC1{a}", "C1COCC1{a}", "C1CNCCC1{a}", "[nH]1ccnc1{a}", "OC(=O)C{a}",
    "NCC{a}", "OCC(C){a}",
]
SMALL_SUBS = ["C", "CC", "F", "Cl", "Br", "O", "N", "OC", "C#N", "C(=O)O", "C=O", "S"]

SPECIAL = [
    "c1ccc2ccccc2c1", "c1ccc2[nH]ccc2c1", "c1ccc2ncccc2c1", "c1ncc2nc[nH]c2n1",
    "O=c1cc[nH]cc1", "Cn1cnc2c1c(=O)n(C)c(=O)n2C", "C[N+](C)(C)C", "CC(=O)[O-]",
    "[NH4+]", "O=[N+]([O-])c1ccccc1", "[13CH4]", "[2H]C([2H])([2H])O", "C1CC1",
    "C1CCC1", "C1=CC=C(C=C1)C(F)(F)F", "C#CC", "C=CC=C", "OC1=CC=C(C=C1)S(N)(=O)=O", "N#N", "O=C=O",
    "CS(C)=O", "OP(O)(O)=O", "FC(F)(F)F", "ClC(Cl)Cl", "c1ccoc1", "c1cc[se]c1",
    "B(O)O", "CC[Si](C)C", "C1CC2CCC1C2", "C12CC(C1)C2", "c1ccc2c(c1)ccc1ccccc12",
    "CC(C)(C)c1ccccc1", "OCC(O)CO", "NC(=O)N", "C1COCCO1", "c1cnccn1", "c1ccnnc1",
    "c1cn[nH]c1", "c1csc(n1)N", "O=C1CCCCC1", "CC1=CC(=O)C=CC1=O", "c1ccc2occc2c1",
    "C[S+](C)C", "[O-]c1ccccc1", "CC(N)C(=O)O", "NCCCCC(N)C(=O)O", "OC(=O)CC(O)(CC(O)=O)C(O)=O",
    "C1CCC2(CC1)CCCC2", "c1cc2ccc3cccc4ccc(c1)c2c34", "Oc1ccc2ccccc2c1",
]


def main() -> None:
    rng = random.Random(20240917)
    combos = [(k, a, b) for k in range(len(SCAFFOLDS)) for a in SUBS for b in SUBS]
    rng.shuffle(combos)
    seen = set()
    large = []
    for k, a, b in combos:
        key = (k, min(a, b), max(a, b)) if k in SYMMETRIC else (k, a, b)
        if key in seen or not ({a, b} & POOL_SUBS):
            continue
        seen.add(key)
        large.append(SCAFFOLDS[k].format(a=a, b=b))
        if len(large) == 1000:
            break
    (OUT / "synth_sources.smi").write_text(
        "".join(f"{smi}\tM{i + 1:04d}\n" for i, smi in enumerate(large))
    )

    small = [c.format(a=x) for c in SMALL_CORES for x in SMALL_SUBS]
    rng.shuffle(small)
    parser = SPECIAL + small + large[: 500 - len(SPECIAL) - len(small)]
    (OUT / "parser_molecules.smi").write_text(
        "".join(f"{smi}\tP{i + 1:03d}\n" for i, smi in enumerate(parser))
    )


if __name__ == "__main__":
    main()
