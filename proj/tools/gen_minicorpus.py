#!/usr/bin/env python3
"""Generates the synthetic test corpus: captions with gold UD parses.

Writes <out>/minicorpus.conllu, <out>/minicorpus.jsonl (caption records) and
<out>/coco_sample.json (the first captions in COCO annotation layout).
Output is a pure function of --seed.
"""

import argparse
import json
import os
import random

NOUNS = [
    "man", "woman", "boy", "girl", "dog", "cat", "horse", "bird", "bench",
    "table", "car", "truck", "bike", "tree", "street", "field", "beach",
    "river", "kitchen", "window", "chair", "umbrella", "kite", "ball",
    "plate", "train", "bus", "boat", "giraffe", "elephant", "sheep", "cow",
    "player", "skateboard", "surfboard", "fence", "building", "road", "park",
    "couch",
]
ADJS = [
    "small", "large", "old", "young", "red", "blue", "green", "white",
    "black", "brown", "wooden", "tall", "empty", "busy", "wet", "yellow",
    "happy", "little", "big", "dirty", "shiny", "quiet", "crowded", "open",
]
ADVS = ["very", "rather", "quite"]
INTRANS = [
    ("sitting", "sit"), ("standing", "stand"), ("running", "run"),
    ("walking", "walk"), ("sleeping", "sleep"), ("playing", "play"),
    ("lying", "lie"), ("waiting", "wait"), ("jumping", "jump"),
    ("resting", "rest"), ("looking", "look"),
]
TRANS = [
    ("holds", "hold"), ("rides", "ride"), ("eats", "eat"),
    ("watches", "watch"), ("carries", "carry"), ("chases", "chase"),
    ("pulls", "pull"), ("pushes", "push"), ("throws", "throw"),
    ("catches", "catch"), ("follows", "follow"), ("passes", "pass"),
]
ANIMATE = ["man", "woman", "boy", "girl", "dog", "cat", "horse", "bird",
           "giraffe", "elephant", "sheep", "cow", "player"]
PREPS = ["on", "in", "near", "under", "beside", "behind", "across", "along",
         "with", "by", "at", "over", "inside", "outside"]
NUMS = ["two", "three", "four"]


def plural(noun):
    if noun in ("sheep",):
        return noun
    if noun.endswith(("ch", "sh")):
        return noun + "es"
    if noun == "bus":
        return "buses"
    if noun.endswith("man"):
        return noun[:-3] + "men"
    return noun + "s"


class Sentence:
    def __init__(self):
        self.tokens = []

    def add(self, form, lemma, upos, deprel, head=None):
        tok = {"form": form, "lemma": lemma, "upos": upos, "deprel": deprel,
               "head": head, "space": True}
        self.tokens.append(tok)
        return tok


class Picker:
    """Draws without repetition inside one caption so that two units of a
    type never share a surface."""

    def __init__(self, rng):
        self.rng = rng
        self.used = set()

    def pick(self, pool):
        choices = [x for x in pool if (id(pool), str(x)) not in self.used]
        x = self.rng.choice(choices)
        self.used.add((id(pool), str(x)))
        return x

    def pick_noun(self, pool):
        x = self.rng.choice([n for n in pool if n not in self.used])
        self.used.add(x)
        return x


def noun_phrase(s, rng, pick, plural_ok=True, adj_p=0.6, pool=NOUNS):
    """Appends determiner, adjectives and noun; returns the noun token."""
    noun = pick.pick_noun(pool)
    is_plural = plural_ok and rng.random() < 0.2
    pending = []
    if is_plural:
        if rng.random() < 0.6:
            pending.append(("num", pick.pick(NUMS)))
        else:
            pending.append(("det", "the"))
    else:
        pending.append(("det", rng.choice(["a", "the", "a", "this"])))
    if rng.random() < adj_p:
        adv = pick.pick(ADVS) if rng.random() < 0.25 else None
        pending.append(("adj", pick.pick(ADJS), adv))
        if rng.random() < 0.15:
            pending.append(("adj", pick.pick(ADJS), None))
    made = []
    for item in pending:
        if item[0] == "det":
            form = item[1]
            made.append(s.add(form, form, "DET", "det"))
        elif item[0] == "num":
            made.append(s.add(item[1], item[1], "NUM", "nummod"))
        else:
            if item[2]:
                adv = s.add(item[2], item[2], "ADV", "advmod")
            else:
                adv = None
            adj = s.add(item[1], item[1], "ADJ", "amod")
            if adv:
                adv["head"] = adj
            made.append(adj)
    form = plural(noun) if is_plural else noun
    head = s.add(form, noun, "NOUN", None)
    for tok in made:
        tok["head"] = head
    # "a" before a vowel-initial word.
    idx = s.tokens.index(made[0]) if made else None
    if idx is not None and made[0]["form"] == "a":
        nxt = s.tokens[idx + 1]["form"]
        if nxt[0] in "aeiou":
            made[0]["form"] = "an"
    return head, is_plural


def prep_phrase(s, rng, pick, attach, deprel):
    prep = pick.pick(PREPS)
    case = s.add(prep, prep, "ADP", "case")
    noun, _ = noun_phrase(s, rng, pick, adj_p=0.45)
    noun["deprel"] = deprel
    noun["head"] = attach
    case["head"] = noun
    return noun


def caption(rng):
    s = Sentence()
    pick = Picker(rng)
    pattern = rng.choices(["prog", "trans", "coord", "np"], [4, 3, 1, 2])[0]
    subj, is_plural = noun_phrase(s, rng, pick,
                                  pool=NOUNS if pattern == "np" else ANIMATE)
    if pattern in ("prog", "coord"):
        aux = s.add("are" if is_plural else "is", "be", "AUX", "aux")
        form, lemma = pick.pick(INTRANS)
        verb = s.add(form, lemma, "VERB", "root")
        aux["head"] = verb
        subj["deprel"], subj["head"] = "nsubj", verb
        if pattern == "coord":
            cc = s.add("and", "and", "CCONJ", "cc")
            form2, lemma2 = pick.pick(INTRANS)
            verb2 = s.add(form2, lemma2, "VERB", "conj", verb)
            cc["head"] = verb2
        prep_phrase(s, rng, pick, verb, "obl")
        root = verb
    elif pattern == "trans":
        form, lemma = pick.pick(TRANS)
        if is_plural:
            form = lemma
        verb = s.add(form, lemma, "VERB", "root")
        subj["deprel"], subj["head"] = "nsubj", verb
        obj, _ = noun_phrase(s, rng, pick, adj_p=0.5)
        obj["deprel"], obj["head"] = "obj", verb
        root = verb
        if rng.random() < 0.6:
            prep_phrase(s, rng, pick, verb, "obl")
    else:
        subj["deprel"], subj["head"] = "root", None
        prep_phrase(s, rng, pick, subj, "nmod")
        root = subj
    if pattern != "np" and rng.random() < 0.35:
        prep_phrase(s, rng, pick, root, "obl")
    if rng.random() < 0.85:
        s.tokens[-1]["space"] = False
        s.add(".", ".", "PUNCT", "punct", root)
    s.tokens[0]["form"] = s.tokens[0]["form"].capitalize()
    for tok in s.tokens:
        if tok["deprel"] == "root":
            tok["head"] = None
    return s.tokens


def render(tokens):
    out = []
    for i, t in enumerate(tokens):
        out.append(t["form"])
        if t["space"] and i + 1 < len(tokens):
            out.append(" ")
    return "".join(out)


def to_conllu(tokens, dataset, caption_id):
    index = {id(t): i + 1 for i, t in enumerate(tokens)}
    lines = [f"# caption_id = {caption_id}", f"# dataset = {dataset}",
             f"# text = {render(tokens)}"]
    for i, t in enumerate(tokens, 1):
        head = 0 if t["head"] is None else index[id(t["head"])]
        misc = "_" if t["space"] or i == len(tokens) else "SpaceAfter=No"
        lines.append("\t".join([str(i), t["form"], t["lemma"], t["upos"], "_",
                                "_", str(head), t["deprel"], "_", misc]))
    return "\n".join(lines) + "\n\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20240607)
    ap.add_argument("--captions", type=int, default=1000)
    ap.add_argument("--out", default=os.path.join(
        os.path.dirname(__file__), "..", "tests", "data"))
    args = ap.parse_args()
    rng = random.Random(args.seed)
    conllu, records = [], []
    for n in range(args.captions):
        dataset = "coco" if n < args.captions * 4 // 5 else "vg"
        caption_id = str(100000 + n)
        image_id = str(5000 + n // 5)
        tokens = caption(rng)
        conllu.append(to_conllu(tokens, dataset, caption_id))
        records.append({"dataset": dataset, "image_id": image_id,
                        "caption_id": caption_id, "caption": render(tokens)})
    with open(os.path.join(args.out, "minicorpus.conllu"), "w") as f:
        f.write("".join(conllu))
    with open(os.path.join(args.out, "minicorpus.jsonl"), "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")
    coco = {"annotations": [
        {"image_id": int(r["image_id"]), "id": int(r["caption_id"]),
         "caption": r["caption"]} for r in records[:25]]}
    with open(os.path.join(args.out, "coco_sample.json"), "w") as f:
        json.dump(coco, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
