"""Regenerates the synthetic molecule corpus.

All shifts and couplings are invented, chosen only to look like typical
organic 1H (and 31P) values. None of them come from measured data.

    python3 molecules/generate.py
"""

import json
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent


class Builder:
    def __init__(self):
        self.nuclei = []
        self.groups = []
        self.couplings = {}

    def group(self, label, size, shift, isotope="1H"):
        start = len(self.nuclei)
        for k in range(size):
            name = label if size == 1 else f"{label}{k + 1}"
            self.nuclei.append({"label": name, "isotope": isotope, "shift_ppm": round(shift, 4)})
        self.groups.append(list(range(start, start + size)))
        return len(self.groups) - 1

    def couple(self, a, b, j_hz):
        """Same J from every member of group a to every member of group b."""
        for i in self.groups[a]:
            for j in self.groups[b]:
                self.couplings[(min(i, j), max(i, j))] = round(j_hz, 3)

    def couple_within(self, a, j_hz):
        g = self.groups[a]
        for x in range(len(g)):
            for y in range(x + 1, len(g)):
                self.couplings[(g[x], g[y])] = round(j_hz, 3)

    def extend(self, other):
        """Appends an uncoupled copy of another builder."""
        offset = len(self.nuclei)
        self.nuclei += [dict(n) for n in other.nuclei]
        self.groups += [[i + offset for i in g] for g in other.groups]
        for (i, j), v in other.couplings.items():
            self.couplings[(i + offset, j + offset)] = v

    def write(self, name, description):
        doc = {
            "version": 1,
            "description": description + " Invented parameters.",
            "nuclei": self.nuclei,
            "couplings": [
                {"i": i, "j": j, "j_hz": v} for (i, j), v in sorted(self.couplings.items()) if v != 0.0
            ],
        }
        (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")
        return len(self.nuclei)


def single_proton():
    b = Builder()
    b.group("H", 1, 2.0)
    return b


def ax_pair():
    b = Builder()
    a = b.group("Ha", 1, 1.5)
    x = b.group("Hx", 1, 4.5)
    b.couple(a, x, 7.0)
    return b


def uncoupled(n, rng):
    b = Builder()
    for k in range(n):
        b.group(f"H{k + 1}", 1, rng.uniform(0.5, 8.5))
    return b


def ethyl_fragment():
    b = Builder()
    me = b.group("CH3-", 3, 1.21)
    ch2 = b.group("CH2-", 2, 3.48)
    b.couple(me, ch2, 7.0)
    return b


def propyl():
    b = Builder()
    me = b.group("CH3-", 3, 0.93)
    c2 = b.group("C2H-", 2, 1.58)
    c1 = b.group("C1H-", 2, 3.37)
    b.couple(me, c2, 7.3)
    b.couple(c2, c1, 6.8)
    b.couple(me, c1, 0.3)
    return b


def butanone():
    b = Builder()
    acetyl = b.group("COCH3-", 3, 2.14)
    ch2 = b.group("CH2-", 2, 2.44)
    me = b.group("CH3-", 3, 1.05)
    b.couple(ch2, me, 7.3)
    b.couple(acetyl, ch2, 0.2)
    return b


def isobutyl():
    b = Builder()
    me = b.group("CH3-", 6, 0.92)
    ch = b.group("CH-", 1, 1.87)
    ch2 = b.group("CH2-", 2, 3.31)
    b.couple(me, ch, 6.7)
    b.couple(ch, ch2, 6.5)
    return b


def tbutyl_analogue():
    b = Builder()
    b.group("tBu-", 9, 1.60)
    return b


def tbutyl_alkyne():
    b = Builder()
    tbu = b.group("tBu-", 9, 1.24)
    h = b.group("CCH", 1, 2.07)
    b.couple(tbu, h, 0.4)
    return b


def methyl_ether_tbutyl():
    b = Builder()
    b.group("tBu-", 9, 1.19)
    b.group("OCH3-", 3, 3.22)
    return b


def toluene_like():
    b = Builder()
    o1 = b.group("Ho1", 1, 7.17)
    m1 = b.group("Hm1", 1, 7.25)
    p = b.group("Hp", 1, 7.14)
    m2 = b.group("Hm2", 1, 7.26)
    o2 = b.group("Ho2", 1, 7.19)
    me = b.group("CH3-", 3, 2.34)
    ring = [o1, m1, p, m2, o2]
    for k in range(4):
        b.couple(ring[k], ring[k + 1], 7.6)
    for a, c in [(o1, p), (m1, m2), (p, o2), (o1, m2), (m1, o2)]:
        b.couple(a, c, 1.4)
    b.couple(o1, o2, 1.9)
    b.couple(m1, p, 7.4)
    b.couple(me, o1, 0.6)
    b.couple(me, o2, 0.6)
    return b


def cumene_like():
    b = Builder()
    ring = [b.group(f"Har{k + 1}", 1, s) for k, s in enumerate([7.21, 7.29, 7.18, 7.30, 7.22])]
    for k in range(4):
        b.couple(ring[k], ring[k + 1], 7.7)
    b.couple(ring[0], ring[2], 1.3)
    b.couple(ring[2], ring[4], 1.3)
    b.couple(ring[1], ring[3], 1.6)
    ch = b.group("CH-", 1, 2.90)
    me = b.group("CH3-", 6, 1.25)
    b.couple(ch, me, 6.9)
    b.couple(ch, ring[0], 0.5)
    b.couple(ch, ring[4], 0.5)
    return b


def diethyl_ether():
    b = Builder()
    me1 = b.group("CH3a-", 3, 1.18)
    c1 = b.group("CH2a-", 2, 3.46)
    c2 = b.group("CH2b-", 2, 3.50)
    me2 = b.group("CH3b-", 3, 1.20)
    b.couple(me1, c1, 7.0)
    b.couple(me2, c2, 7.1)
    return b


def random_chain(n, rng, methyls):
    """Backbone of single protons with random shifts and vicinal / geminal
    couplings, capped by `methyls` methyl groups."""
    b = Builder()
    backbone = [b.group(f"H{k + 1}", 1, rng.uniform(1.0, 6.5)) for k in range(n - 3 * methyls)]
    for k in range(len(backbone) - 1):
        b.couple(backbone[k], backbone[k + 1], rng.uniform(-14.0, 12.0))
    for k in range(len(backbone) - 2):
        if rng.random() < 0.5:
            b.couple(backbone[k], backbone[k + 2], rng.uniform(-2.0, 2.0))
    for m in range(methyls):
        me = b.group(f"Me{m + 1}-", 3, rng.uniform(0.8, 2.3))
        b.couple(me, backbone[rng.randrange(len(backbone))], rng.uniform(6.0, 7.5))
    return b


def diphosphane_analogue():
    b = Builder()
    p1 = b.group("P1", 1, -62.0, "31P")
    p2 = b.group("P2", 1, -62.0, "31P")
    h1 = b.group("HP1", 1, 3.05)
    h2 = b.group("HP2", 1, 3.05)
    t1 = b.group("tBu1-", 9, 1.17)
    t2 = b.group("tBu2-", 9, 1.17)
    b.couple(p1, p2, -210.0)
    b.couple(p1, h1, 192.0)
    b.couple(p2, h2, 192.0)
    b.couple(p1, h2, 14.0)
    b.couple(p2, h1, 14.0)
    b.couple(h1, h2, 11.5)
    b.couple(t1, p1, 11.8)
    b.couple(t2, p2, 11.8)
    b.couple(t1, p2, 0.9)
    b.couple(t2, p1, 0.9)
    b.couple(t1, h1, 0.6)
    b.couple(t2, h2, 0.6)
    return b


def main():
    rng = random.Random(20240917)
    entries = [
        ("single_proton", single_proton(), "One isolated proton."),
        ("ax_pair", ax_pair(), "Weakly coupled two-proton AX system."),
        ("ethyl_fragment", ethyl_fragment(), "Ethyl-like CH3-CH2 fragment."),
        ("uncoupled_six", uncoupled(6, rng), "Six protons without couplings."),
        ("propyl", propyl(), "Propyl-like chain."),
        ("butanone_like", butanone(), "Butanone-like acetyl plus ethyl."),
        ("toluene_like", toluene_like(), "Toluene-like ring with a methyl."),
        ("isobutyl", isobutyl(), "Isobutyl-like fragment with six equivalent methyl protons."),
        ("tbutyl_analogue", tbutyl_analogue(), "Nine equivalent protons, tert-butyl-like."),
        ("tbutyl_alkyne", tbutyl_alkyne(), "tert-Butyl group with a weakly coupled alkyne proton."),
        ("diethyl_ether_like", diethyl_ether(), "Two ethyl fragments separated by a heteroatom."),
        ("methyl_tbutyl_ether_like", methyl_ether_tbutyl(), "tert-Butyl and methoxy singlets."),
        ("chain_8", random_chain(8, rng, 1), "Random proton chain with one methyl."),
        ("chain_10", random_chain(10, rng, 1), "Random proton chain with one methyl."),
        ("chain_11", random_chain(11, rng, 2), "Random proton chain with two methyls."),
        ("cumene_like", cumene_like(), "Cumene-like ring with an isopropyl group."),
        ("chain_12", random_chain(12, rng, 2), "Random proton chain with two methyls."),
        ("chain_16", random_chain(16, rng, 2), "Random sixteen-proton chain with two methyls."),
        ("chain_20", random_chain(20, rng, 3), "Random twenty-proton chain with three methyls."),
        ("diphosphane_analogue", diphosphane_analogue(),
         "Two 31P, two P-bound protons and two tert-butyl groups (tBu-PH-PH-tBu-like)."),
    ]
    fragment = random_chain(8, rng, 1)
    entries.append(("fragment_x1", fragment, "Eight-spin fragment for scaling runs."))
    doubled = Builder()
    doubled.extend(fragment)
    doubled.extend(fragment)
    entries.append(("fragment_x2", doubled, "Two uncoupled copies of fragment_x1."))
    quadrupled = Builder()
    quadrupled.extend(doubled)
    quadrupled.extend(doubled)
    entries.append(("fragment_x4", quadrupled, "Four uncoupled copies of fragment_x1."))

    for name, builder, description in entries:
        n = builder.write(name, description)
        print(f"{name}: {n} spins")


if __name__ == "__main__":
    main()
