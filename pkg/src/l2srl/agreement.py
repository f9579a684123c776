"""Agreement-based consistency between a learner sentence and its correction.

Each side of a pair is reduced to word-level role tuples (predicate token,
argument token, role); a tuple is matched when the other side has a tuple
with the same role whose predicate and argument tokens are both linked by the
word alignment.  The two per-side recalls (matched/total) drive selection:
a pair is kept when both recalls strictly exceed the threshold.

Adjunct subtypes are collapsed (AM-TMP == AM) during matching by default;
pass am_coarse=False for subtype-exact matching.
"""

from dataclasses import dataclass
from typing import NamedTuple

from l2srl.corpus import SentencePair
from l2srl.model import Alignment, AnnotatedSentence, coarse_label


class RoleTuple(NamedTuple):
    """One (predicate word, argument word, role) triple; indices are 1-based."""

    predicate: int
    argument: int
    role: str


@dataclass(frozen=True)
class PairRecall:
    """Per-side tuple counts and recalls for one sentence pair.

    A pair is eligible only when both sides carry at least one tuple;
    ineligible pairs report recalls of 0.
    """

    total_l2: int
    total_l1: int
    shared_l2: int
    shared_l1: int

    @property
    def eligible(self) -> bool:
        return self.total_l2 > 0 and self.total_l1 > 0

    @property
    def l2_recall(self) -> float:
        return self.shared_l2 / self.total_l2 if self.total_l2 else 0.0

    @property
    def l1_recall(self) -> float:
        return self.shared_l1 / self.total_l1 if self.total_l1 else 0.0


@dataclass(frozen=True)
class SelectionConfig:
    """Selection threshold; comparison is strictly-greater on both recalls."""

    p: float = 0.9

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"threshold p must be in [0, 1], got {self.p}")


def extract_tuples(sentence: AnnotatedSentence) -> set[RoleTuple]:
    """One tuple per (frame, span, covered token), carrying the span label."""
    tuples = set()
    for frame in sentence.frames:
        for span in frame.spans:
            for argument in range(span.start, span.end + 1):
                tuples.add(RoleTuple(frame.predicate_index, argument, span.label))
    return tuples


def match_tuples(
    links, l2_tuples, l1_tuples, am_coarse: bool = True
) -> tuple[set[RoleTuple], set[RoleTuple]]:
    """Matched subsets of each side's tuples under the alignment links.

    An L2 tuple (p, a, r) is matched when some L1 tuple (p', a', r') has the
    same role (coarse-AM by default) with (p-1, p'-1) and (a-1, a'-1) both in
    the 0-based link set; L1 matching is symmetric.  Counting per side keeps
    both recalls well-defined under many-to-many alignments.
    """
    key = coarse_label if am_coarse else (lambda r: r)
    l2_to_l1: dict[int, set[int]] = {}
    for i, j in links:
        l2_to_l1.setdefault(i, set()).add(j)
    by_role_l1: dict[str, list[RoleTuple]] = {}
    for t in l1_tuples:
        by_role_l1.setdefault(key(t.role), []).append(t)
    matched_l2 = set()
    matched_l1 = set()
    for t in l2_tuples:
        reachable_p = l2_to_l1.get(t.predicate - 1, ())
        reachable_a = l2_to_l1.get(t.argument - 1, ())
        for u in by_role_l1.get(key(t.role), ()):
            if u.predicate - 1 in reachable_p and u.argument - 1 in reachable_a:
                matched_l2.add(t)
                matched_l1.add(u)
    return matched_l2, matched_l1


def shared_tuples(
    pair: SentencePair, l2_tuples=None, l1_tuples=None, am_coarse: bool = True
) -> tuple[set[RoleTuple], set[RoleTuple]]:
    """match_tuples over a pair, extracting the tuple sets when not given."""
    if l2_tuples is None:
        l2_tuples = extract_tuples(pair.l2)
    if l1_tuples is None:
        l1_tuples = extract_tuples(pair.l1)
    return match_tuples(pair.alignment.links, l2_tuples, l1_tuples, am_coarse)


def recall_pair(pair: SentencePair, am_coarse: bool = True) -> PairRecall:
    """Tuple recalls of one pair; pairs with an empty side are ineligible."""
    l2_tuples = extract_tuples(pair.l2)
    l1_tuples = extract_tuples(pair.l1)
    matched_l2, matched_l1 = match_tuples(
        pair.alignment.links, l2_tuples, l1_tuples, am_coarse
    )
    return PairRecall(
        total_l2=len(l2_tuples),
        total_l1=len(l1_tuples),
        shared_l2=len(matched_l2),
        shared_l1=len(matched_l1),
    )


def is_selected(recall: PairRecall, config: SelectionConfig) -> bool:
    return (
        recall.eligible
        and recall.l2_recall > config.p
        and recall.l1_recall > config.p
    )


def select(scored, config: SelectionConfig):
    """Filter (item, PairRecall) records, preserving input order."""
    return [(item, recall) for item, recall in scored if is_selected(recall, config)]


def selection_tsv(pairs, recalls, config: SelectionConfig) -> str:
    """Selection report rows: one line per pair, recalls with 4 decimals."""
    header = (
        "pair_id\ttotal_l2\ttotal_l1\tshared_l2\tshared_l1\t"
        "l2_recall\tl1_recall\tselected"
    )
    lines = [header]
    for pair, recall in zip(pairs, recalls):
        lines.append(
            "\t".join(
                (
                    pair.l2.pair_id,
                    str(recall.total_l2),
                    str(recall.total_l1),
                    str(recall.shared_l2),
                    str(recall.shared_l1),
                    f"{recall.l2_recall:.4f}",
                    f"{recall.l1_recall:.4f}",
                    "1" if is_selected(recall, config) else "0",
                )
            )
        )
    return "\n".join(lines) + "\n"


def heuristic_align(l2: AnnotatedSentence, l1: AnnotatedSentence) -> Alignment:
    """Deterministic fallback aligner over identical token forms.

    Longest-common-subsequence links first, then a greedy nearest-position
    pass over the remaining identical forms.  Tokens with different forms are
    never linked.
    """
    a = [t.form for t in l2.tokens]
    b = [t.form for t in l1.tokens]
    n, m = len(a), len(b)
    lengths = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                lengths[i][j] = lengths[i + 1][j + 1] + 1
            else:
                lengths[i][j] = max(lengths[i + 1][j], lengths[i][j + 1])
    links = set()
    used_i, used_j = set(), set()
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j] and lengths[i][j] == lengths[i + 1][j + 1] + 1:
            links.add((i, j))
            used_i.add(i)
            used_j.add(j)
            i += 1
            j += 1
        elif lengths[i + 1][j] >= lengths[i][j + 1]:
            i += 1
        else:
            j += 1
    for i in range(n):
        if i in used_i:
            continue
        candidates = [j for j in range(m) if j not in used_j and b[j] == a[i]]
        if not candidates:
            continue
        j = min(candidates, key=lambda j: (abs(j - i), j))
        links.add((i, j))
        used_i.add(i)
        used_j.add(j)
    return Alignment(l2.pair_id, frozenset(links))
