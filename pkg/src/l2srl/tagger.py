"""Predicate-conditioned linear-chain tagger for role labeling.

The model is a first-order global linear model over position-tag sequences,
trained with the averaged structured perceptron.  Features are purely lexical
and positional (no POS tags, no parse).  Decoding is Viterbi constrained by
the tag grammar: a B-x run continues with I-x and closes with E-x, ``rel`` is
forced at the predicate token and forbidden elsewhere, so every decode is a
well-formed frame.  Training is sequential and fully deterministic given the
seed; per-epoch shuffling uses a private RNG.
"""

import random
from collections import Counter
from dataclasses import dataclass, field, replace

from l2srl.corpus import Corpus
from l2srl.errors import (
    EmptyCorpus,
    InvalidPredicateIndex,
    ParseError,
    VersionMismatch,
)
from l2srl.model import (
    AnnotatedSentence,
    O_TAG,
    POSITIONS,
    REL_TAG,
    is_position_tag,
    make_tag,
    spans_from_tags,
    split_tag,
    tags_from_spans,
)

MODEL_MAGIC = "SRLMODEL"
MODEL_VERSION = "v1"
PAD_START = "<s>"
PAD_END = "</s>"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    seed: int = 1
    averaged: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


@dataclass
class TaggerModel:
    """Ordered label set plus sparse emission and transition weights."""

    labels: list[str]
    emissions: dict = field(default_factory=dict)  # (feature, label) -> weight
    transitions: dict = field(default_factory=dict)  # (prev label, label) -> weight
    version: str = MODEL_VERSION

    @classmethod
    def empty(cls, role_labels=()) -> "TaggerModel":
        return cls(labels=build_label_set(role_labels))


def build_label_set(role_labels) -> list[str]:
    """Canonical label order: O, rel, then S/B/I/E per sorted role label."""
    labels = [O_TAG, REL_TAG]
    for role in sorted(set(role_labels)):
        labels.extend(make_tag(position, role) for position in POSITIONS)
    return labels


def _distance_bucket(d: int) -> str:
    if d == 0:
        return "0"
    sign = "-" if d < 0 else "+"
    m = abs(d)
    if m <= 2:
        return f"{sign}{m}"
    if m <= 5:
        return f"{sign}3-5"
    return f"{sign}>5"


def extract_features(
    sentence: AnnotatedSentence, predicate_index: int, position: int
) -> list[str]:
    """Feature template instantiation for one token position.

    Templates: current/previous/next word, the two word bigrams, predicate
    word and its neighbors, bucketed signed distance to the predicate, a
    predicate/side flag, and word x predicate and distance x predicate
    conjunctions.  Boundary positions use padding symbols.
    """
    forms = [t.form for t in sentence.tokens]
    n = len(forms)

    def word(i: int) -> str:
        if i < 1:
            return PAD_START
        if i > n:
            return PAD_END
        return forms[i - 1]

    w0 = word(position)
    wm1 = word(position - 1)
    wp1 = word(position + 1)
    pw = word(predicate_index)
    d = position - predicate_index
    bucket = _distance_bucket(d)
    feats = [
        f"w0={w0}",
        f"w-1={wm1}",
        f"w+1={wp1}",
        f"w-1|w0={wm1}|{w0}",
        f"w0|w+1={w0}|{wp1}",
        f"pw={pw}",
        f"pw-1={word(predicate_index - 1)}",
        f"pw+1={word(predicate_index + 1)}",
        f"dist={bucket}",
        f"w0&pw={w0}|{pw}",
        f"dist&pw={bucket}|{pw}",
    ]
    if d == 0:
        feats.append("is_pred")
    else:
        feats.append("side=left" if d < 0 else "side=right")
    return feats


def _can_start(tag: str) -> bool:
    return split_tag(tag)[0] not in ("I", "E")


def _can_end(tag: str) -> bool:
    return split_tag(tag)[0] not in ("B", "I")


def _can_follow(prev: str, tag: str) -> bool:
    prev_pos, prev_label = split_tag(prev)
    pos, label = split_tag(tag)
    if prev_pos in ("B", "I"):
        return pos in ("I", "E") and label == prev_label
    return pos not in ("I", "E")


def _viterbi(labels, emissions, transitions, feats, predicate_pos):
    """Best grammar-valid tag sequence; ties break toward earlier labels."""
    n = len(feats)
    neg = float("-inf")
    emit = [
        [sum(emissions.get((f, lab), 0) for f in feats[t]) for lab in labels]
        for t in range(n)
    ]

    def allowed(t, lab):
        if t == predicate_pos:
            return lab == REL_TAG
        return lab != REL_TAG

    scores = [[neg] * len(labels) for _ in range(n)]
    back = [[-1] * len(labels) for _ in range(n)]
    for j, lab in enumerate(labels):
        if allowed(0, lab) and _can_start(lab):
            scores[0][j] = emit[0][j]
    for t in range(1, n):
        for j, lab in enumerate(labels):
            if not allowed(t, lab):
                continue
            best, best_k = neg, -1
            for k, prev in enumerate(labels):
                if scores[t - 1][k] == neg or not _can_follow(prev, lab):
                    continue
                candidate = scores[t - 1][k] + transitions.get((prev, lab), 0)
                if candidate > best:
                    best, best_k = candidate, k
            if best_k >= 0:
                scores[t][j] = best + emit[t][j]
                back[t][j] = best_k
    best, best_j = neg, -1
    for j, lab in enumerate(labels):
        if scores[n - 1][j] > best and _can_end(lab):
            best, best_j = scores[n - 1][j], j
    path = [best_j]
    for t in range(n - 1, 0, -1):
        path.append(back[t][path[-1]])
    path.reverse()
    return [labels[j] for j in path]


def viterbi_decode(
    model: TaggerModel, sentence: AnnotatedSentence, predicate_index: int
) -> list[str]:
    """Decode the best tag sequence for one predicate of a sentence."""
    n = len(sentence.tokens)
    if not 1 <= predicate_index <= n:
        raise InvalidPredicateIndex(f"predicate index {predicate_index} outside 1..{n}")
    feats = [extract_features(sentence, predicate_index, i) for i in range(1, n + 1)]
    return _viterbi(
        model.labels, model.emissions, model.transitions, feats, predicate_index - 1
    )


def _training_sequences(corpus: Corpus):
    sequences = []
    for sentence in corpus.sentences:
        n = len(sentence.tokens)
        for frame in sentence.frames:
            gold = tags_from_spans(frame, n)
            feats = [
                extract_features(sentence, frame.predicate_index, i)
                for i in range(1, n + 1)
            ]
            sequences.append((feats, gold, frame.predicate_index - 1))
    return sequences


def _sequence_delta(feats, gold, predicted) -> Counter:
    delta = Counter()
    for t, (g, p) in enumerate(zip(gold, predicted)):
        if g == p:
            continue
        for f in feats[t]:
            delta[("E", f, g)] += 1
            delta[("E", f, p)] -= 1
    for t in range(1, len(gold)):
        delta[("T", gold[t - 1], gold[t])] += 1
        delta[("T", predicted[t - 1], predicted[t])] -= 1
    return delta


def train(corpus: Corpus, config: TrainConfig | None = None) -> TaggerModel:
    """Averaged structured perceptron over one sequence per (sentence, frame).

    Weights stay integral during training (updates are feature-count
    differences), so averaging is an exact rational and runs with the same
    seed produce bit-identical models.
    """
    config = config or TrainConfig()
    sequences = _training_sequences(corpus)
    if not sequences:
        raise EmptyCorpus("no (sentence, frame) training sequences in corpus")
    roles = {
        s.label for sent in corpus.sentences for f in sent.frames for s in f.spans
    }
    labels = build_label_set(roles)
    weights: dict = {}
    totals: dict = {}
    stamp: dict = {}
    emissions: dict = {}
    transitions: dict = {}
    step = 0
    rng = random.Random(config.seed)
    order = list(range(len(sequences)))
    for _ in range(config.epochs):
        rng.shuffle(order)
        for index in order:
            step += 1
            feats, gold, predicate_pos = sequences[index]
            predicted = _viterbi(labels, emissions, transitions, feats, predicate_pos)
            if predicted == gold:
                continue
            for key, d in _sequence_delta(feats, gold, predicted).items():
                if not d:
                    continue
                old = weights.get(key, 0)
                totals[key] = totals.get(key, 0) + (step - 1 - stamp.get(key, 0)) * old
                stamp[key] = step - 1
                new = old + d
                weights[key] = new
                target = emissions if key[0] == "E" else transitions
                if new:
                    target[key[1:]] = new
                else:
                    target.pop(key[1:], None)
    final: dict = {}
    if config.averaged:
        for key, w in weights.items():
            summed = totals.get(key, 0) + (step - stamp.get(key, 0)) * w
            if summed:
                final[key] = summed / step
    else:
        final = {key: float(w) for key, w in weights.items() if w}
    model = TaggerModel(labels=labels)
    for key, w in final.items():
        target = model.emissions if key[0] == "E" else model.transitions
        target[key[1:]] = w
    return model


def tag(
    model: TaggerModel, sentence: AnnotatedSentence, predicate_indices
) -> AnnotatedSentence:
    """Attach one decoded frame per given predicate position (gold predicates)."""
    n = len(sentence.tokens)
    indices = list(predicate_indices)
    if len(set(indices)) != len(indices):
        raise InvalidPredicateIndex("duplicate predicate indices")
    for index in indices:
        if not 1 <= index <= n:
            raise InvalidPredicateIndex(f"predicate index {index} outside 1..{n}")
    frames = []
    for index in sorted(indices):
        tags = viterbi_decode(model, sentence, index)
        frames.append(spans_from_tags(tags))
    return replace(sentence, frames=tuple(frames))


def tag_corpus(model: TaggerModel, corpus: Corpus) -> Corpus:
    """Re-annotate every sentence at its own predicate positions."""
    out = []
    for sentence in corpus.sentences:
        predicates = [f.predicate_index for f in sentence.frames]
        out.append(tag(model, sentence, predicates))
    return Corpus(tuple(out))


def render_model(model: TaggerModel) -> bytes:
    """Canonical model file: header, label line, then sorted E/T weight rows."""
    lines = [f"{MODEL_MAGIC} {model.version}", "\t".join(model.labels)]
    for (feature, label) in sorted(model.emissions):
        w = model.emissions[(feature, label)]
        if w:
            lines.append(f"E\t{feature}\t{label}\t{float(w)!r}")
    for (prev, label) in sorted(model.transitions):
        w = model.transitions[(prev, label)]
        if w:
            lines.append(f"T\t{prev}\t{label}\t{float(w)!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_model(data: bytes) -> TaggerModel:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc}") from None
    if "\r" in text:
        raise ParseError("CR/CRLF line endings are not supported (LF required)")
    if not text.endswith("\n"):
        raise ParseError("truncated model file (missing final newline)")
    lines = text.split("\n")[:-1]
    if not lines:
        raise ParseError("truncated model file (no header)", 1)
    magic, _, version = lines[0].partition(" ")
    if magic != MODEL_MAGIC or not version:
        raise ParseError(f"not a model file (header {lines[0]!r})", 1)
    if version != MODEL_VERSION:
        raise VersionMismatch(f"unsupported model version {version!r}")
    if len(lines) < 2:
        raise ParseError("truncated model file (no label line)", 2)
    labels = lines[1].split("\t")
    _validate_label_set(labels)
    model = TaggerModel(labels=labels)
    known = set(labels)
    for n, line in enumerate(lines[2:], start=3):
        cells = line.split("\t")
        if len(cells) != 4:
            raise ParseError(f"weight row needs 4 columns, got {len(cells)}", n)
        kind, a, b, raw = cells
        try:
            weight = float(raw)
        except ValueError:
            raise ParseError(f"bad weight {raw!r}", n) from None
        if kind == "E":
            if b not in known:
                raise ParseError(f"unknown label {b!r}", n)
            model.emissions[(a, b)] = weight
        elif kind == "T":
            if a not in known or b not in known:
                raise ParseError(f"unknown label in transition {a!r} -> {b!r}", n)
            model.transitions[(a, b)] = weight
        else:
            raise ParseError(f"unknown row kind {kind!r}", n)
    return model


def _validate_label_set(labels) -> None:
    if O_TAG not in labels or REL_TAG not in labels:
        raise ParseError("label set must include O and rel", 2)
    roles = set()
    for label in labels:
        if not is_position_tag(label):
            raise ParseError(f"bad label {label!r} in label set", 2)
        position, role = split_tag(label)
        if position is not None:
            roles.add(role)
    for role in roles:
        for position in POSITIONS:
            if make_tag(position, role) not in labels:
                raise ParseError(
                    f"label set not closed under the tag grammar: missing {position}-{role}",
                    2,
                )
    if len(set(labels)) != len(labels):
        raise ParseError("duplicate labels in label set", 2)


def load_model(path) -> TaggerModel:
    with open(path, "rb") as f:
        return parse_model(f.read())


def save_model(model: TaggerModel, path) -> None:
    with open(path, "wb") as f:
        f.write(render_model(model))
