#!/usr/bin/env python3
"""Generate the bundled synthetic English segmentation fixture.

Writes two files under crates/core/data/:
  en_synth_lexicon.tsv  surface<TAB>morph|morph|...
  en_synth_counts.tsv   surface<TAB>count

Words are built concatenatively from real English roots and affixes
(no orthographic alternations), with Zipf-distributed counts.
"""
import random
from pathlib import Path

SEED = 20250214
N_WORDS = 30000

ROOTS = """
work play help kind dark teach read walk talk jump paint build think power
hope care light play sing bank farm hunt fish cook clean print post mark
form act test point start turn rest want need look pay count load lock
own spell list cover paint plant print shift sort spend stand stick
trust wash watch wish yield burn call cast charge claim climb close coach
crack cross dress drink drop fill fight find fold frame gain grant grip
guard harm head hold hurt join keep kick kill land last lead lend lift
link mail match melt mind miss mix nail open order pack park pass pick
pitch press pull pump push reach ring rock roll rush sail seal search
sell send shock shoot show sign sink sleep slip smell snow speak spill
spring stamp steam step stop storm stream stress strike swing tail tell
tend thank thrill throw touch track train trick twist view vote wait warn
weigh wind wonder word wrap yell bless blend bond boost bound brush
cheer chill claim cloud comfort command conduct consult contain content
convert correct credit depend detect direct doubt earn employ enjoy
equip escort expect explain export fear field flash float flood flow
follow forest found frost fund govern grasp greet ground guess harden
heat hint honor hover hum insert insist instruct invent invest jolt
kneel lack laugh learn limit listen loan lurk master mention mount
obtain offer paint perform permit plot pour praise pray prevent profit
protect punish quest record reflect reform refresh remark remind rent
repair report respect return reveal reward rhythm rust screen season
seat shelter shorten sketch skill slant soften spoil sprint stain
start steer stretch succeed suggest support surf swallow swear sweat
thirst thread toast toll tow trap treat trust tutor unlock vent visit
walk wander warm weed whisper wilt wrest yawn
""".split()

PREFIXES = [("un", 6), ("re", 8), ("dis", 3), ("mis", 3), ("pre", 3),
            ("over", 3), ("under", 2), ("out", 2), ("non", 2), ("anti", 1),
            ("sub", 1), ("inter", 1), ("co", 1), ("de", 2)]

# (suffix chain, weight); chains are ordered morpheme lists
SUFFIXES = [((), 30), (("s",), 14), (("ing",), 14), (("ed",), 12),
            (("er",), 8), (("er", "s"), 6), (("able",), 4), (("less",), 3),
            (("less", "ness"), 2), (("ful",), 3), (("ful", "ly"), 2),
            (("ment",), 3), (("ment", "s"), 2), (("ist",), 1), (("ism",), 1),
            (("ly",), 2), (("ness",), 2), (("able", "ness"), 1),
            (("ing", "s"), 2), (("er", "ship"), 1), (("wise",), 1)]


def weighted(rng, items):
    total = sum(w for _, w in items)
    x = rng.uniform(0, total)
    acc = 0.0
    for item, w in items:
        acc += w
        if x <= acc:
            return item
    return items[-1][0]


def main():
    rng = random.Random(SEED)
    roots = list(dict.fromkeys(ROOTS))
    rng.shuffle(roots)
    root_weight = {r: 1.0 / (i + 1) ** 0.8 for i, r in enumerate(roots)}

    words = {}
    attempts = 0
    while len(words) < N_WORDS and attempts < 2_000_000:
        attempts += 1
        root = rng.choices(roots, weights=[root_weight[r] for r in roots])[0]
        morphs = []
        w = root_weight[root]
        if rng.random() < 0.3:
            p = weighted(rng, PREFIXES)
            morphs.append(p)
            w *= 0.3
        morphs.append(root)
        sfx = weighted(rng, SUFFIXES)
        morphs.extend(sfx)
        if sfx:
            w *= 0.5 ** len(sfx)
        surface = "".join(morphs)
        if surface in words:
            continue
        words[surface] = (morphs, w)

    out = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"
    out.mkdir(parents=True, exist_ok=True)
    ordered = sorted(words.items(), key=lambda kv: (-kv[1][1], kv[0]))
    counts = {}
    with open(out / "en_synth_counts.tsv", "w", encoding="utf-8") as f:
        for rank, (surface, (morphs, w)) in enumerate(ordered):
            count = max(1, int(round(2000.0 * w / (1 + rank) ** 0.35)))
            counts[surface] = count
            f.write(f"{surface}\t{count}\n")
    with open(out / "en_synth_lexicon.tsv", "w", encoding="utf-8") as f:
        for surface, (morphs, _) in sorted(words.items()):
            f.write(f"{surface}\t{'|'.join(morphs)}\n")
    print(len(words), "word types,", sum(counts.values()), "tokens")


if __name__ == "__main__":
    main()
