"""IBM Model 1 word alignment with EM, symmetrization and phrase extraction.

Replaces the external alignment tool at desk scale: the EM training yields a
lexical translation table t(target | source) with a NULL source token, Viterbi
alignment links every target word to its argmax source word, and consistent
phrase pairs are extracted from a (symmetrized) link set.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

NULL = "<null>"


class EmptyBitextError(ValueError):
    pass


@dataclass
class AlignmentModel:
    #: t(target_word | source_word); source side includes NULL.
    table: dict[str, dict[str, float]]
    iterations: int
    log_likelihood: list[float] = field(default_factory=list)


@dataclass(frozen=True, order=True)
class PhrasePair:
    src_start: int
    src_end: int
    tgt_start: int
    tgt_end: int


def em_train(bitext: list[tuple[list[str], list[str]]], iterations: int) -> AlignmentModel:
    """EM training of t(t|s); log-likelihood is non-decreasing per iteration."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    bitext = [(list(s), list(t)) for s, t in bitext]
    if not bitext:
        raise EmptyBitextError("cannot train aligner on empty bitext")

    # initialize uniformly over co-occurring target words
    cooc: dict[str, set[str]] = defaultdict(set)
    for src, tgt in bitext:
        for s in src + [NULL]:
            cooc[s].update(tgt)
    table = {s: {t: 1.0 / len(ts) for t in ts} for s, ts in cooc.items() if ts}

    history = []
    for _ in range(iterations):
        counts: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
        loglik = 0.0
        for src, tgt in bitext:
            sources = src + [NULL]
            for t in tgt:
                total = sum(table[s].get(t, 0.0) for s in sources)
                if total > 0:
                    loglik += math.log(total / len(sources))
                    for s in sources:
                        p = table[s].get(t, 0.0)
                        if p > 0:
                            counts[s][t] += p / total
        history.append(loglik)
        table = {
            s: {t: c / sum(ts.values()) for t, c in ts.items()}
            for s, ts in counts.items()
        }
    return AlignmentModel(table=table, iterations=iterations, log_likelihood=history)


def viterbi_align(model: AlignmentModel, src: list[str], tgt: list[str]) -> set[tuple[int, int]]:
    """Link each target position to its argmax source position.

    Ties go to the lowest source index; NULL wins only on a strictly higher
    probability, and NULL links are omitted from the returned set.
    """
    links = set()
    for j, t in enumerate(tgt):
        best_i = None
        best_p = -1.0
        for i, s in enumerate(src):
            p = model.table.get(s, {}).get(t, 0.0)
            if p > best_p:
                best_p = p
                best_i = i
        null_p = model.table.get(NULL, {}).get(t, 0.0)
        if null_p > best_p:
            continue
        if best_i is not None:
            links.add((best_i, j))
    return links


def symmetrize(
    links_fwd: set[tuple[int, int]],
    links_rev: set[tuple[int, int]],
    src_len: int,
    tgt_len: int,
    mode: str = "grow-diag-final-and",
) -> set[tuple[int, int]]:
    """Combine two directional link sets (both in (src, tgt) index space)."""
    inter = links_fwd & links_rev
    union = links_fwd | links_rev
    if mode == "intersection":
        return set(inter)
    if mode == "union":
        return set(union)
    if mode not in ("grow-diag", "grow-diag-final", "grow-diag-final-and"):
        raise ValueError(f"unknown symmetrization mode {mode!r}")

    links = set(inter)
    neighbors = [(-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)]

    def aligned_src(i):
        return any(l[0] == i for l in links)

    def aligned_tgt(j):
        return any(l[1] == j for l in links)

    grew = True
    while grew:
        grew = False
        for i, j in sorted(links):
            for di, dj in neighbors:
                ni, nj = i + di, j + dj
                if (ni, nj) in union and (ni, nj) not in links:
                    if not aligned_src(ni) or not aligned_tgt(nj):
                        links.add((ni, nj))
                        grew = True

    if mode in ("grow-diag-final", "grow-diag-final-and"):
        for directional in (links_fwd, links_rev):
            for i, j in sorted(directional):
                if (i, j) in links:
                    continue
                if mode == "grow-diag-final-and":
                    ok = not aligned_src(i) and not aligned_tgt(j)
                else:
                    ok = not aligned_src(i) or not aligned_tgt(j)
                if ok:
                    links.add((i, j))
    return links


def extract_phrases(
    links: set[tuple[int, int]],
    src_len: int,
    tgt_len: int,
    max_len: int = 6,
) -> list[PhrasePair]:
    """All consistent phrase pairs up to ``max_len`` on each side.

    Consistency: at least one link inside the box and no link with exactly
    one endpoint inside.
    """
    pairs = set()
    if not links:
        return []
    for i in range(src_len):
        for j in range(i + 1, min(src_len, i + max_len) + 1):
            inside = [(s, t) for s, t in links if i <= s < j]
            if not inside:
                continue
            t_min = min(t for _, t in inside)
            t_max = max(t for _, t in inside)
            # consistency of the tightest target span
            if any(t_min <= t <= t_max and not (i <= s < j) for s, t in links):
                continue
            # extend over unaligned target boundary words
            aligned_t = {t for _, t in links}
            a = t_min
            while True:
                b = t_max + 1
                while True:
                    if b - a <= max_len:
                        pairs.add(PhrasePair(i, j, a, b))
                    if b < tgt_len and b not in aligned_t:
                        b += 1
                    else:
                        break
                if a > 0 and (a - 1) not in aligned_t:
                    a -= 1
                else:
                    break
    return sorted(pairs)


def write_links(link_sets: Iterable[set[tuple[int, int]]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for links in link_sets:
            fh.write(" ".join(f"{i}-{j}" for i, j in sorted(links)))
            fh.write("\n")


def read_links(path) -> list[set[tuple[int, int]]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            links = set()
            if line:
                for item in line.split(" "):
                    i, j = item.split("-")
                    links.add((int(i), int(j)))
            out.append(links)
    return out
