"""Hashed bag-of-words cosine scores for the few-shot similarity fixture."""
import math
import re


def embed(text, dim=256):
    v = [0.0] * dim
    toks = re.findall(r"[A-Za-z0-9]+", text)
    for t in toks:
        h = 14695981039346656037
        for c in t.lower().encode():
            h ^= c
            h = (h * 1099511628211) % (1 << 64)
        v[h % dim] += 1
    if not toks:
        v[0] = 1.0
    return v


def cos(a, b):
    d = sum(x * y for x, y in zip(a, b))
    return d / math.sqrt(sum(x * x for x in a) * sum(y * y for y in b))


q = "Sorting drops the last element."
for s in ["Parser crashes on empty input", "Sorting drops the last element.", "Unicode names are mangled",
          "Sorting is unstable for ties", "Timeout ignored"]:
    print(f"{cos(embed(q), embed(s)):.6f}", s)
