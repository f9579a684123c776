"""Shared builders and brute-force reference implementations for tests.

The reference implementations here are deliberately literal (double loops,
full enumeration) and independent of the library code paths they check.
"""

import random

from l2srl.corpus import Corpus, SentencePair
from l2srl.model import (
    Alignment,
    AnnotatedSentence,
    Frame,
    Span,
    Token,
)

VOCAB = ("wa", "ni", "de", "ta", "shi", "ren", "chi", "zuo", "hao", "lai")


def sent(sid, forms, frames=(), lang="ENG", side="L2", pair=None):
    return AnnotatedSentence(
        id=sid,
        lang=lang,
        side=side,
        pair_id=pair if pair is not None else sid,
        tokens=tuple(Token(i, f) for i, f in enumerate(forms, start=1)),
        frames=tuple(frames),
    )


def frame(predicate, *spans):
    return Frame(predicate, tuple(Span(s, e, lab) for s, e, lab in spans))


def corpus(*sentences):
    return Corpus(tuple(sentences))


def make_pair(l2_sentence, l1_sentence, links):
    return SentencePair(
        l2_sentence, l1_sentence, Alignment(l2_sentence.pair_id, frozenset(links))
    )


def identity_pair(sid, forms, frames, lang="ENG"):
    """L2 == L1 sentence with an identity alignment."""
    l2 = sent(f"{sid}.l2", forms, frames, lang=lang, side="L2", pair=sid)
    l1 = sent(f"{sid}.l1", forms, frames, lang=lang, side="L1", pair=sid)
    return make_pair(l2, l1, {(i, i) for i in range(len(forms))})


def random_frame(rng, n, predicate, labels=("A0", "A1", "A2", "AM")):
    """Random non-overlapping spans avoiding the predicate token."""
    spans = []
    i = 1
    while i <= n:
        if i == predicate:
            i += 1
            continue
        if rng.random() < 0.45:
            end = min(i + rng.randint(0, 2), n)
            if i <= predicate <= end:
                end = predicate - 1
            if end >= i:
                spans.append(Span(i, end, rng.choice(labels)))
                i = end + 2 if rng.random() < 0.5 else end + 1
                continue
        i += 1
    return Frame(predicate, tuple(spans))


def random_sentence(rng, sid, n_frames=1, length=None, lang=None, side=None):
    n = length if length is not None else rng.randint(3, 10)
    forms = [rng.choice(VOCAB) for _ in range(n)]
    predicates = sorted(rng.sample(range(1, n + 1), min(n_frames, n)))
    frames = tuple(random_frame(rng, n, p) for p in predicates)
    return sent(
        sid,
        forms,
        frames,
        lang=lang or rng.choice(("ENG", "JPN", "RUS", "ARA")),
        side=side or rng.choice(("L2", "L1")),
    )


def random_pred_gold_corpora(rng, n_sentences):
    """Same tokenization on both sides, independent random frames."""
    preds, golds = [], []
    for k in range(n_sentences):
        n = rng.randint(3, 9)
        forms = [rng.choice(VOCAB) for _ in range(n)]
        lang = rng.choice(("ENG", "JPN", "RUS", "ARA"))
        side = rng.choice(("L2", "L1"))
        n_frames = rng.randint(0, 2)
        all_preds = sorted(rng.sample(range(1, n + 1), min(3, n)))
        pred_frames = tuple(
            random_frame(rng, n, p) for p in rng.sample(all_preds, n_frames)
        )
        gold_frames = tuple(
            random_frame(rng, n, p)
            for p in rng.sample(all_preds, rng.randint(0, len(all_preds)))
        )
        pred_frames = tuple(sorted(pred_frames, key=lambda f: f.predicate_index))
        gold_frames = tuple(sorted(gold_frames, key=lambda f: f.predicate_index))
        sid = f"s{k}"
        preds.append(sent(sid, forms, pred_frames, lang=lang, side=side))
        golds.append(sent(sid, forms, gold_frames, lang=lang, side=side))
    return Corpus(tuple(preds)), Corpus(tuple(golds))


def brute_force_counts(pred_corpus, gold_corpus):
    """Literal span-triple counter: enumerate all (pred, gold) span pairs."""
    matched = predicted = gold = 0
    gold_by_id = {s.id: s for s in gold_corpus.sentences}
    for p_sent in pred_corpus.sentences:
        g_sent = gold_by_id[p_sent.id]
        p_frames = {f.predicate_index: f for f in p_sent.frames}
        g_frames = {f.predicate_index: f for f in g_sent.frames}
        for idx in set(p_frames) | set(g_frames):
            p_spans = list(p_frames[idx].spans) if idx in p_frames else []
            g_spans = list(g_frames[idx].spans) if idx in g_frames else []
            predicted += len(p_spans)
            gold += len(g_spans)
            used = set()
            for ps in p_spans:
                for gi, gs in enumerate(g_spans):
                    if gi in used:
                        continue
                    if (ps.start, ps.end, ps.label) == (gs.start, gs.end, gs.label):
                        matched += 1
                        used.add(gi)
                        break
    return matched, predicted, gold


def brute_force_prf(pred_corpus, gold_corpus):
    matched, predicted, gold = brute_force_counts(pred_corpus, gold_corpus)
    p = 100.0 * matched / predicted if predicted else 0.0
    r = 100.0 * matched / gold if gold else 0.0
    f = 2.0 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def brute_force_shared(links, l2_tuples, l1_tuples, coarse):
    """Literal double loop over every (L2 tuple, L1 tuple) pair."""

    def same_role(a, b):
        if coarse:
            a = "AM" if a.startswith("AM") else a
            b = "AM" if b.startswith("AM") else b
        return a == b

    def linked(t, u):
        return (
            same_role(t.role, u.role)
            and (t.predicate - 1, u.predicate - 1) in links
            and (t.argument - 1, u.argument - 1) in links
        )

    matched_l2 = {t for t in l2_tuples if any(linked(t, u) for u in l1_tuples)}
    matched_l1 = {u for u in l1_tuples if any(linked(t, u) for t in l2_tuples)}
    return matched_l2, matched_l1


HELD_OUT_AGENTS = ["nilo", "pexa", "quib", "rost"]
HELD_OUT_PATIENTS = ["vun", "wex", "yalt", "zorb"]
HELD_OUT_VERBS = ["jumpa", "liftu", "mendo", "pusht"]


def held_out_sentence(sid, k, side, correct=True, lang="ENG", pair=None):
    """Vocabulary and argument order unseen in the toy training corpus.

    Patient-first order: gold is (1,1,A1) (3,3,A0), so a model that only
    learned positional cues from the agent-first toy corpus mislabels it.
    ``correct=False`` swaps the labels, producing gold-inconsistent frames.
    """
    forms = [
        HELD_OUT_PATIENTS[k % 4],
        HELD_OUT_VERBS[(k // 4) % 4],
        HELD_OUT_AGENTS[(k + k // 4) % 4],
    ]
    if correct:
        frames = [frame(2, (1, 1, "A1"), (3, 3, "A0"))]
    else:
        frames = [frame(2, (1, 1, "A0"), (3, 3, "A1"))]
    return sent(sid, forms, frames, lang=lang, side=side, pair=pair)


def build_retrain_fixture(root, pool_pairs=200, good_pairs=50):
    """Write a full retrain setup under ``root`` and return the config path.

    The pool holds ``good_pairs`` identical, correctly-annotated pairs of
    held-out-vocabulary sentences (selected at p=0.9) and inconsistent pairs
    for the rest (L2 and L1 labels disagree, so both recalls are 0).
    """
    root.mkdir(parents=True, exist_ok=True)
    from l2srl.corpus import render_corpus

    (root / "train.tsv").write_bytes(render_corpus(toy_separable_corpus()))
    pool_l2, pool_l1 = [], []
    for k in range(pool_pairs):
        pid = f"pool{k}"
        good = k < good_pairs
        pool_l2.append(
            held_out_sentence(f"{pid}.l2", k, "L2", correct=good, pair=pid)
        )
        pool_l1.append(
            held_out_sentence(f"{pid}.l1", k, "L1", correct=True, pair=pid)
        )
    (root / "pool_l2.tsv").write_bytes(render_corpus(Corpus(tuple(pool_l2))))
    (root / "pool_l1.tsv").write_bytes(render_corpus(Corpus(tuple(pool_l1))))
    dev = Corpus(
        tuple(held_out_sentence(f"dev{k}", k, "L2" if k % 2 else "L1") for k in range(8))
    )
    test_l2 = Corpus(
        tuple(held_out_sentence(f"t{k}.l2", k, "L2") for k in range(16))
    )
    test_l1 = Corpus(
        tuple(held_out_sentence(f"t{k}.l1", k + 1, "L1") for k in range(16))
    )
    (root / "dev.tsv").write_bytes(render_corpus(dev))
    (root / "test_l2.tsv").write_bytes(render_corpus(test_l2))
    (root / "test_l1.tsv").write_bytes(render_corpus(test_l1))
    config = root / "retrain.cfg"
    config.write_text(
        "train = train.tsv\n"
        "pool_l2 = pool_l2.tsv\n"
        "pool_l1 = pool_l1.tsv\n"
        "dev = dev.tsv\n"
        "test_l2 = test_l2.tsv\n"
        "test_l1 = test_l1.tsv\n"
        "alignments = heuristic\n"
        "tag_pool = false\n"
        "p = 0.9\n"
        "epochs = 10\n"
        "seed = 1\n"
        f"out = {root / 'run'}\n",
        encoding="utf-8",
    )
    return config


def toy_separable_corpus():
    """20 sentences where every role is keyed by a unique cue word.

    Linearly separable by construction, so the perceptron must reach
    training F = 100 within the default epoch budget.
    """
    agents = ["kip", "mora", "tavi", "zun"]
    patients = ["lem", "rudo", "fein", "galt"]
    adjuncts = ["soon", "hapt", "offa", "awey"]
    verbs = ["runsa", "taket", "givon", "seest"]
    sentences = []
    k = 0
    for i in range(4):
        for j in range(4):
            forms = [agents[i], verbs[(i + j) % 4], patients[j]]
            frames = [frame(2, (1, 1, "A0"), (3, 3, "A1"))]
            if (i + j) % 2 == 0:
                forms.append(adjuncts[(i * 2 + j) % 4])
                frames = [frame(2, (1, 1, "A0"), (3, 3, "A1"), (4, 4, "AM"))]
            sentences.append(sent(f"toy{k}", forms, frames, side="L1"))
            k += 1
    for i in range(4):
        # two-token patient spans with dedicated begin/end cue words
        forms = [agents[i], verbs[i], "bron", "dell"]
        sentences.append(sent(f"toy{k}", forms, [frame(2, (1, 1, "A0"), (3, 4, "A1"))], side="L1"))
        k += 1
    return Corpus(tuple(sentences))
