"""Writes golden_buckets.tsv: text -> first 8 n-gram bucket indices.

Independent re-implementation of the encoder's tokenizer and FNV-1a hashing,
used as the oracle for the C++ feature hasher. Regenerate only together with
a feature hash version bump.
"""

N_BUCKETS = 4096
MIN_TOKENS_FOR_BIGRAMS = 3

TEXTS = [
    "The cat sat. The cat ran.",
    "hello",
    "Hello, world!",
    "It's a well-known fact; isn't it?",
    "Été à Paris, naïve café.",
    "one two three four five six seven eight nine",
]


def fnv1a64(data: bytes, state: int = 0xCBF29CE484222325) -> int:
    for b in data:
        state ^= b
        state = (state * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return state


def tokenize(text: str) -> list[bytes]:
    tokens, cur = [], bytearray()
    for b in text.encode("utf-8"):
        c = chr(b)
        if b >= 0x80 or c.isascii() and (c.isalnum() or c == "'"):
            cur.append(ord(c.lower()) if b < 0x80 else b)
            continue
        if cur:
            tokens.append(bytes(cur))
            cur = bytearray()
        if c not in " \t\n\r\v\f":
            tokens.append(bytes([b]))
    if cur:
        tokens.append(bytes(cur))
    return tokens


def buckets(text: str) -> list[int]:
    toks = tokenize(text)
    out = [fnv1a64(t) % N_BUCKETS for t in toks]
    if len(toks) >= MIN_TOKENS_FOR_BIGRAMS:
        out += [fnv1a64(b + b" " + a) % N_BUCKETS for b, a in zip(toks, toks[1:])]
    return out


if __name__ == "__main__":
    with open("golden_buckets.tsv", "w", encoding="utf-8") as f:
        for t in TEXTS:
            f.write(t + "\t" + " ".join(str(b) for b in buckets(t)[:8]) + "\n")
