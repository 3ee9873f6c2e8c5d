#!/usr/bin/env python3
"""Generate the synthetic smoke-test corpus shipped in data/smoke_corpus.txt.

Documents draw a topic, then emit function words, topic words and general
words from Zipf-shaped distributions. The output is one line of lowercase
space-separated tokens, like text8.
"""

import argparse

import numpy as np

SYLLABLES = [c + v for c in "bdfgklmnprstvz" for v in "aeiou"]


def pseudo_words(count, rng):
    seen = set()
    out = []
    while len(out) < count:
        w = "".join(rng.choice(SYLLABLES, size=rng.integers(2, 4)))
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


def zipf(n, s=1.0):
    p = 1.0 / np.arange(1, n + 1) ** s
    return p / p.sum()


def generate(tokens=100_000, topics=25, topic_size=80, general=1500, function=40, seed=7):
    rng = np.random.default_rng(seed)
    words = pseudo_words(function + general + topics * topic_size, rng)
    func, rest = words[:function], words[function:]
    gen, top = rest[:general], rest[general:]
    topic_words = [top[t * topic_size : (t + 1) * topic_size] for t in range(topics)]
    p_func, p_gen, p_top = zipf(function), zipf(general), zipf(topic_size, 0.9)
    out = []
    while len(out) < tokens:
        t = rng.integers(topics)
        for _ in range(rng.integers(100, 300)):
            u = rng.random()
            if u < 0.35:
                out.append(func[rng.choice(function, p=p_func)])
            elif u < 0.75:
                out.append(topic_words[t][rng.choice(topic_size, p=p_top)])
            else:
                out.append(gen[rng.choice(general, p=p_gen)])
    return out[:tokens]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("--tokens", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    toks = generate(args.tokens, seed=args.seed)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        f.write(" ".join(toks) + "\n")


if __name__ == "__main__":
    main()
