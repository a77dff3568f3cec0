"""Randomized hill-climb for k-PIR codes of a target length.

Draws systematic matrices, climbs on minimum distance, then asks
decide_k_pir for a certificate.  Used offline to seed catalog entries.
"""

import argparse
import random
import sys
import time

from pircodes.gf2core import GeneratorMatrix, codeword_weights
from pircodes.recovery import decide_k_pir


def climb(s, k, n, rng, steps=400):
    cols = [1 << i for i in range(s)] + [rng.randrange(1, 1 << s) for _ in range(n - s)]
    w = codeword_weights(GeneratorMatrix(s, tuple(cols)))
    for _ in range(steps):
        d = int(w[1:].min())
        if d >= k:
            break
        j = rng.randrange(s, n)
        old = cols[j]
        cols[j] = rng.randrange(1, 1 << s)
        w2 = codeword_weights(GeneratorMatrix(s, tuple(cols)))
        if int(w2[1:].min()) >= d:
            w = w2
        else:
            cols[j] = old
    return GeneratorMatrix(s, tuple(cols)), int(w[1:].min())


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("s", type=int)
    ap.add_argument("k", type=int)
    ap.add_argument("n", type=int)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--seconds", type=float, default=600)
    ap.add_argument("--budget", type=int, default=200_000)
    ap.add_argument("--out")
    a = ap.parse_args(argv)
    rng = random.Random(a.seed)
    t0 = time.time()
    tried = 0
    while time.time() - t0 < a.seconds:
        G, d = climb(a.s, a.k, a.n, rng)
        if d < a.k:
            continue
        tried += 1
        dec = decide_k_pir(G, a.k, budget=a.budget)
        if dec.answer == "yes":
            print(f"found after {tried} candidates, {time.time() - t0:.1f}s", file=sys.stderr)
            if a.out:
                with open(a.out, "w") as fh:
                    fh.write(G.to_text() + "\n")
            print(G.to_text())
            return 0
    print(f"nothing within {a.seconds}s ({tried} candidates)", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
