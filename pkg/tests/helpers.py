"""Synthetic LIAR-shaped corpora for tests that cannot use the real files."""

from __future__ import annotations

import numpy as np

from liarcred.corpus import LabelSix, Record
from liarcred.text import EmbeddingTable

NEUTRAL = [f"word{i}" for i in range(40)]
# each six-way class owns a small pool of cue words
CUES = {label: [f"cue{int(label)}x{j}" for j in range(6)] for label in LabelSix}
SPEAKERS = [f"speaker-{i}" for i in range(12)]
PARTIES = ["republican", "democrat", "none"]
STATES = ["Texas", "Ohio", "Florida", ""]


def make_table(dim: int = 8, seed: int = 0) -> EmbeddingTable:
    rng = np.random.default_rng(seed)
    vectors = {}
    centres = {label: rng.normal(0, 1, dim) for label in LabelSix}
    for label, words in CUES.items():
        for w in words:
            vectors[w] = centres[label] + rng.normal(0, 0.3, dim)
    for w in NEUTRAL:
        vectors[w] = rng.normal(0, 1, dim)
    return EmbeddingTable.from_dict(vectors, dim)


def make_records(n: int, seed: int = 0, justification: bool = True, cue_rate: float = 0.35,
                 just_cue_rate: float = 0.7) -> list[Record]:
    """Records whose statement, justification and counts carry label signal.

    Justifications carry stronger cues than statements so models that read
    them have something to gain.
    """
    rng = np.random.default_rng(seed)
    labels = list(LabelSix)
    out = []
    for i in range(n):
        label = labels[i % 6] if i < 6 else labels[rng.integers(6)]

        def text(length, rate):
            words = []
            for _ in range(length):
                if rng.random() < rate:
                    words.append(str(rng.choice(CUES[label])))
                else:
                    words.append(str(rng.choice(NEUTRAL)))
            return " ".join(words)

        fakeness = 1.0 - int(label) / 5.0
        counts = rng.poisson(1 + 6 * np.array([0.5, fakeness, 0.5, 1 - fakeness, fakeness**2]))
        speaker = SPEAKERS[(int(label) * 2 + int(rng.integers(2))) % len(SPEAKERS)]
        out.append(
            Record(
                id=f"{i}.json",
                label=label,
                statement="The " + text(int(rng.integers(4, 10)), cue_rate) + ".",
                subject=tuple(sorted({str(s) for s in rng.choice(["economy", "taxes", "health", "jobs"], 2)})),
                speaker=speaker,
                job=None if rng.random() < 0.3 else "senator",
                state=str(rng.choice(STATES)) or None,
                party=str(rng.choice(PARTIES)),
                counts=tuple(int(c) for c in counts),
                context=str(rng.choice(["a speech", "a tweet", "an interview"])),
                justification=text(int(rng.integers(8, 16)), just_cue_rate) if justification else None,
            )
        )
    return out


def write_glove(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(1, len(table) + 1):
            fh.write(table.token(i) + " " + " ".join(repr(float(v)) for v in table.vectors[i]) + "\n")
