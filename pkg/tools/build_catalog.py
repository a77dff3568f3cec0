"""Regenerate catalog.json and the certificate files under src/pircodes/data.

Transcribed matrices are read as-is; derived entries are rebuilt from their
recipes.  Every entry must pass decide_k_pir and the distance check before
anything is written.
"""

import json
import sys
from pathlib import Path

from pircodes.constructions import lengthen_search, remove_lines
from pircodes.gf2core import min_distance, parse_matrix
from pircodes.recovery import (
    RecoveryCertificate,
    decide_k_pir,
    search_certificate,
    validate_certificate,
)

DATA = Path(__file__).resolve().parents[1] / "src" / "pircodes" / "data"

TRANSCRIBED = [
    ("s4k4_n9", 4, "4x9 matrix attaining P(4,4)=9"),
    ("s6k8_n19_nonsystematic", 8, "optimal non-systematic (6,8) matrix of length 19"),
    ("s6k8_n20_systematic", 8, "systematic (6,8) matrix of length 20"),
    ("s9k10_n28", 10, "9x28 matrix used in the lengthening example"),
    ("s5k8_n18", 8, "dimension-five exact values: 5x18 matrix"),
    ("s5k10_n22", 10, "dimension-five exact values: 5x22 matrix"),
    ("s5k12_n25", 12, "dimension-five exact values: 5x25 matrix"),
    ("s5k14_n28", 14, "dimension-five exact values: 5x28 matrix"),
]

FIXTURES = [
    ("code_17_5_8", "the [17,5,8] code excluded as an 8-PIR code"),
    ("len17_code1_16_4", "[16,4,8] code from the length-17 exclusion argument"),
    ("len17_code2_17_4", "[17,4,8] code from the length-17 exclusion argument"),
    ("len17_code3_17_4", "[17,4,8] code from the length-17 exclusion argument"),
    ("len17_code4_17_4", "[17,4,8] code from the length-17 exclusion argument"),
]

# (6,6) at length 15: randomized hill-climb (tools/random_search.py 6 6 15 --seed 1)
S6K6_N15 = """\
100000001111100
010000100011101
001000011100011
000100110010110
000010010111010
000001010110101
"""

# printed recovery sets for e_4 of the 4x9 matrix (0-based columns)
PRINTED_E4 = ((3,), (0, 6), (5, 8), (1, 2, 4, 7))


def read(name):
    return parse_matrix((DATA / "catalog" / f"{name}.txt").read_text())


def certify(G, k):
    dec = decide_k_pir(G, k)
    if dec.answer != "yes":
        raise SystemExit(f"catalog matrix {G.s}x{G.n} is not {k}-PIR: {dec.reason}")
    return dec.certificate


def derived():
    """Entries found with the in-repo search tools."""
    out = []
    G = read("s4k4_n9")
    a = lengthen_search(G, certify(G, 4), 1)[0]
    out.append(("s5k4_n10", a.matrix, a.certificate, "lengthening search: the 4x9 matrix, t=1"))
    b = [x for y in lengthen_search(G, certify(G, 4), 1, limit=50)
         for x in lengthen_search(y.matrix, y.certificate, 1)][0]
    out.append(("s6k4_n11", b.matrix, b.certificate, "lengthening search applied twice from the 4x9 matrix, t=1"))
    G, cert = remove_lines(4, 1)
    c = lengthen_search(G, cert, 2)[0]
    out.append(("s5k6_n14", c.matrix, c.certificate, "lengthening search: simplex s=4 minus one line, t=2"))
    H = parse_matrix(S6K6_N15)
    out.append(("s6k6_n15", H, certify(H, 6), "randomized hill-climb with exact certificate search"))
    G = read("s9k10_n28")
    d = lengthen_search(G, certify(G, 10), 3)[0]
    out.append(("s10k10_n31", d.matrix, d.certificate, "lengthening search: 9x28 matrix, t=3"))
    return out


def main():
    entries = []
    for name, k, prov in TRANSCRIBED:
        G = read(name)
        if name == "s4k4_n9":
            base = certify(G, k)
            sets = list(base.sets)
            sets[3] = PRINTED_E4
            cert = RecoveryCertificate(G.s, G.n, k, tuple(sets))
        else:
            cert = certify(G, k)
        entries.append((name, G, cert, prov))
    for name, G, cert, prov in derived():
        (DATA / "catalog" / f"{name}.txt").write_text(G.to_text() + "\n")
        entries.append((name, G, cert, prov))
    index = {"entries": [], "fixtures": []}
    for name, G, cert, prov in entries:
        if not validate_certificate(G, cert.k, cert):
            raise SystemExit(f"{name}: certificate does not validate")
        d = min_distance(G)
        if d < cert.k:
            raise SystemExit(f"{name}: distance {d} below k={cert.k}")
        (DATA / "catalog" / f"{name}.cert.json").write_text(cert.to_json() + "\n")
        index["entries"].append({"id": name, "s": G.s, "k": cert.k, "n": G.n, "provenance": prov})
        print(f"{name}: s={G.s} k={cert.k} n={G.n} d={d} " + " | ".join(cert.profile_str(i) for i in range(G.s)))
    for name, prov in FIXTURES:
        G = parse_matrix((DATA / "fixtures" / f"{name}.txt").read_text())
        index["fixtures"].append({"id": name, "s": G.s, "n": G.n, "provenance": prov})
    (DATA / "catalog.json").write_text(json.dumps(index, indent=1) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
