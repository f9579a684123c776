"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they pass.
"""

import json
import random
import time

from helpers import (
    brute_force_prf,
    brute_force_shared,
    build_retrain_fixture,
    corpus,
    frame,
    identity_pair,
    make_pair,
    random_frame,
    random_pred_gold_corpora,
    sent,
    toy_separable_corpus,
)
from l2srl.agreement import (
    PairRecall,
    RoleTuple,
    SelectionConfig,
    is_selected,
    match_tuples,
    recall_pair,
)
from l2srl.cli import main
from l2srl.corpus import (
    SplitSpec,
    parse_alignments,
    parse_corpus,
    render_alignments,
    render_corpus,
    split_dataset,
)
from l2srl.errors import ParseError
from l2srl.model import spans_from_tags, spans_overlap
from l2srl.oracle import ORACLE_SEQUENCE, apply_oracle
from l2srl.scoring import (
    ScoreReport,
    confusion_matrix,
    f_delta,
    fmt2,
    score,
)
from l2srl.tagger import (
    TaggerModel,
    TrainConfig,
    build_label_set,
    extract_features,
    parse_model,
    render_model,
    tag_corpus,
    train,
    viterbi_decode,
)

import pytest


def ok(n: int, text: str) -> None:
    print(f"[criterion {n:2d}] PASS - {text}")


def test_c01_scorer_matches_brute_force_counter():
    rng = random.Random(20260808)
    started = time.time()
    for _ in range(500):
        pred, gold = random_pred_gold_corpora(rng, rng.randint(1, 5))
        report = score(pred, gold)
        assert (report.precision, report.recall, report.f1) == brute_force_prf(pred, gold)
    elapsed = time.time() - started
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    ok(1, f"scorer == brute-force span counter on 500 corpora ({elapsed:.2f}s)")


def test_c02_delta_f_arithmetic_anchor():
    # integer counts chosen so each micro F renders to an exact 2-decimal value
    l1 = ScoreReport(matched=7381, predicted=10000, gold=10000)
    l2 = ScoreReport(matched=6920, predicted=10000, gold=10000)
    assert fmt2(l1.f1) == "73.81"
    assert fmt2(l2.f1) == "69.20"
    assert fmt2(f_delta(l2, l1)) == "-4.61"
    ok(2, "F 73.81 vs 69.20 yields delta_f -4.61 after 2-decimal rendering")


def test_c03_oracle_sequence_monotone_terminal_100():
    def frame_f1(p, g):
        ps, gs = set(p.spans), set(g.spans)
        if not ps or not gs:
            return 0.0
        m = len(ps & gs)
        prec, rec = 100.0 * m / len(ps), 100.0 * m / len(gs)
        return 2 * prec * rec / (prec + rec) if prec + rec else 0.0

    rng = random.Random(314159)
    started = time.time()
    for _ in range(200):
        n = rng.randint(4, 12)
        predicate = rng.randint(1, n)
        gold = random_frame(rng, n, predicate)
        while not gold.spans:  # F(empty, empty) is 0 by convention, not 100
            gold = random_frame(rng, n, predicate)
        current = random_frame(rng, n, predicate)
        f_prev = frame_f1(current, gold)
        for kind in ORACLE_SEQUENCE:
            current = apply_oracle(current, gold, kind)
            ordered = sorted(current.spans)
            for a, b in zip(ordered, ordered[1:]):
                assert not spans_overlap(a, b), "transform created overlap"
            assert not any(s.covers(predicate) for s in current.spans)
            f_now = frame_f1(current, gold)
            assert f_now >= f_prev - 1e-9, "F decreased"
            f_prev = f_now
        assert current == gold
        assert f_prev == 100.0
    elapsed = time.time() - started
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    ok(3, f"200 random frame pairs: monotone, overlap-free, end at F=100 ({elapsed:.2f}s)")


def test_c04_confusion_matrix_three_cases():
    pred = corpus(
        sent("s1", list("abcdef"), [frame(1, (2, 2, "A1"), (3, 3, "A1"), (5, 5, "AM"))])
    )
    gold = corpus(
        sent("s1", list("abcdef"), [frame(1, (2, 2, "A0"), (3, 4, "A1"), (6, 6, "A2"))])
    )
    matrix = confusion_matrix(pred, gold)
    # hand-derived: boundary match (A0,A1); spurious (O,AM); missed (A2,O);
    # the (3,3)-vs-(3,4) overlap has no boundary match and contributes nothing
    assert matrix.counts == {("A0", "A1"): 1, ("O", "AM"): 1, ("A2", "O"): 1}
    ok(4, "6-token fixture counts exactly the three cases; overlap event ignored")


def test_c05_agreement_metric():
    # (a) identical pair, identity alignment
    pair = identity_pair("p", ["a", "b", "c"], [frame(2, (1, 1, "A0"), (3, 3, "A1"))])
    recall = recall_pair(pair)
    assert (recall.l2_recall, recall.l1_recall) == (1.0, 1.0)

    # (b) worked example: recalls (1.0, 0.6667 +- 0.00005)
    l2 = sent("w.l2", ["he", "eat", "rice"],
              [frame(2, (1, 1, "A0"), (3, 3, "A1"))], side="L2", pair="w")
    l1 = sent("w.l1", ["he", "often", "eats", "rice", "today"],
              [frame(3, (1, 1, "A0"), (4, 4, "A1"), (5, 5, "AM"))], side="L1", pair="w")
    worked = make_pair(l2, l1, {(1, 2), (0, 0), (2, 3)})
    recall = recall_pair(worked)
    assert recall.l2_recall == 1.0
    assert abs(recall.l1_recall - 0.6667) <= 0.00005

    # (c) swap symmetry on 200 random pairs
    from helpers import random_sentence
    from l2srl.corpus import SentencePair
    from l2srl.model import Alignment

    rng = random.Random(271828)
    for k in range(200):
        s2 = random_sentence(rng, f"a{k}", n_frames=rng.randint(0, 2), side="L2")
        s1 = random_sentence(rng, f"b{k}", n_frames=rng.randint(0, 2), side="L1")
        links = {
            (rng.randint(0, len(s2.tokens) - 1), rng.randint(0, len(s1.tokens) - 1))
            for _ in range(rng.randint(0, 8))
        }
        forward = recall_pair(SentencePair(s2, s1, Alignment("x", frozenset(links))))
        swapped = SentencePair(
            sent(s1.id, [t.form for t in s1.tokens], s1.frames, side="L2", pair="x"),
            sent(s2.id, [t.form for t in s2.tokens], s2.frames, side="L1", pair="x"),
            Alignment("x", frozenset((j, i) for i, j in links)),
        )
        backward = recall_pair(swapped)
        assert forward.l2_recall == backward.l1_recall
        assert forward.l1_recall == backward.l2_recall

    # (d) strict threshold boundary: recalls exactly (0.9, 0.9) rejected
    boundary = PairRecall(total_l2=10, total_l1=10, shared_l2=9, shared_l1=9)
    assert boundary.l2_recall == 0.9
    assert not is_selected(boundary, SelectionConfig(p=0.9))
    ok(5, "identity, worked example, swap symmetry (200 pairs), strict threshold")


def test_c06_shared_tuples_brute_force_equivalence():
    rng = random.Random(606)
    for _ in range(200):
        size = rng.randint(3, 20)
        l2 = {
            RoleTuple(rng.randint(1, size), rng.randint(1, size),
                      rng.choice(("A0", "A1", "A2", "AM", "AM-TMP")))
            for _ in range(rng.randint(0, 20))
        }
        l1 = {
            RoleTuple(rng.randint(1, size), rng.randint(1, size),
                      rng.choice(("A0", "A1", "A2", "AM", "AM-TMP")))
            for _ in range(rng.randint(0, 20))
        }
        links = {
            (rng.randint(0, size - 1), rng.randint(0, size - 1))
            for _ in range(rng.randint(0, 3 * size))
        }
        for coarse in (True, False):
            assert match_tuples(links, l2, l1, coarse) == brute_force_shared(
                links, l2, l1, coarse
            )
    ok(6, "tuple matching == brute-force double loop on 200 random pairs")


def test_c07_viterbi_exhaustive_optimality():
    from l2srl.tagger import _can_end, _can_follow, _can_start

    def enumerate_valid(labels, n, pred_pos):
        out = []

        def extend(seq):
            t = len(seq)
            if t == n:
                if _can_end(seq[-1]):
                    out.append(list(seq))
                return
            for lab in labels:
                if (lab == "rel") != (t == pred_pos):
                    continue
                if t == 0 and not _can_start(lab):
                    continue
                if t > 0 and not _can_follow(seq[-1], lab):
                    continue
                seq.append(lab)
                extend(seq)
                seq.pop()

        extend([])
        return out

    def score_sequence(model, feats, seq):
        total = 0.0
        for f in feats[0]:
            total += model.emissions.get((f, seq[0]), 0)
        for t in range(1, len(seq)):
            total += model.transitions.get((seq[t - 1], seq[t]), 0)
            for f in feats[t]:
                total += model.emissions.get((f, seq[t]), 0)
        return total

    rng = random.Random(707)
    started = time.time()
    for trial in range(100):
        labels = build_label_set(["A0"] if trial % 2 else ["A0", "A1"])
        n = rng.randint(1, 7)
        pred = rng.randint(1, n)
        s = sent("s", [rng.choice("abcde") for _ in range(n)])
        feats = [extract_features(s, pred, i) for i in range(1, n + 1)]
        model = TaggerModel(labels=labels)
        for t in range(n):
            for f in feats[t]:
                for lab in labels:
                    if rng.random() < 0.25:
                        model.emissions[(f, lab)] = rng.randint(-9, 9)
        for a in labels:
            for b in labels:
                if rng.random() < 0.25:
                    model.transitions[(a, b)] = rng.randint(-9, 9)
        decoded = viterbi_decode(model, s, pred)
        decoded_frame = spans_from_tags(decoded)  # grammar + forced rel hold
        assert decoded_frame.predicate_index == pred
        candidates = enumerate_valid(labels, n, pred - 1)
        assert decoded in candidates
        best = max(score_sequence(model, feats, c) for c in candidates)
        assert score_sequence(model, feats, decoded) == best
    elapsed = time.time() - started
    assert elapsed < 30.0, f"took {elapsed:.1f}s"
    ok(7, f"decoded score == enumeration max on 100 random models ({elapsed:.2f}s)")


def test_c08_tagger_convergence_and_determinism():
    toy = toy_separable_corpus()
    config = TrainConfig(epochs=10, seed=1)
    model = train(toy, config)
    assert score(tag_corpus(model, toy), toy).f1 == 100.0
    again = train(toy, config)
    assert render_model(model) == render_model(again)
    ok(8, "toy corpus training F=100 within 10 epochs; same-seed models byte-identical")


def test_c09_retraining_directional(tmp_path):
    started = time.time()
    config_path = build_retrain_fixture(tmp_path / "fix", pool_pairs=200, good_pairs=50)
    assert main(["retrain", "--config", str(config_path)]) == 0
    run = tmp_path / "fix" / "run"
    report = json.loads((run / "report.json").read_text())
    assert report["selection"]["pool"] == 200
    assert report["selection"]["selected"] == 50
    for split in ("test_l2", "test_l1"):
        assert report["retrained"][split]["f1"] >= report["baseline"][split]["f1"]

    # empty selection (p = 1.0, strict comparison) reproduces the baseline
    empty_cfg = tmp_path / "fix" / "retrain_p1.cfg"
    kept = [line for line in config_path.read_text().splitlines()
            if not line.startswith(("p =", "out ="))]
    kept += ["p = 1.0", f"out = {tmp_path / 'fix' / 'run_p1'}"]
    empty_cfg.write_text("\n".join(kept) + "\n")
    assert main(["retrain", "--config", str(empty_cfg)]) == 0
    run1 = tmp_path / "fix" / "run_p1"
    empty_report = json.loads((run1 / "report.json").read_text())
    assert empty_report["selection"]["selected"] == 0
    baseline_bytes = (run1 / "baseline" / "model.txt").read_bytes()
    retrained_bytes = (run1 / "retrained" / "model.txt").read_bytes()
    assert baseline_bytes == retrained_bytes
    elapsed = time.time() - started
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    ok(9, f"selected 50/200; retrained F >= baseline; empty selection bit-identical ({elapsed:.2f}s)")


def test_c10_io_round_trips_and_rejections():
    # corpus: value identity and byte identity
    c = corpus(
        sent("s1", ["he", "eats", "rice"], [frame(2, (1, 1, "A0"), (3, 3, "A1"))]),
        sent("s2", ["go"], [frame(1)], lang="JPN", side="L1"),
    )
    data = render_corpus(c)
    assert parse_corpus(data) == c
    assert render_corpus(parse_corpus(data)) == data

    # alignment: same two properties
    table = parse_alignments(b"p1\t0-0 1-2\np2\t\n")
    assert render_alignments(table) == b"p1\t0-0 1-2\np2\t\n"

    # model files
    model = train(toy_separable_corpus(), TrainConfig(epochs=2, seed=1))
    blob = render_model(model)
    assert render_model(parse_model(blob)) == blob

    # CRLF rejected with a line number
    with pytest.raises(ParseError) as err:
        parse_corpus(data.replace(b"\n", b"\r\n"))
    assert err.value.line == 1 and "LF" in str(err.value)

    # malformed tag column rejected with a line number
    bad = data.replace(b"S-A0", b"S-A7")
    with pytest.raises(ParseError) as err:
        parse_corpus(bad)
    assert err.value.line is not None
    ok(10, "read/write value identity, write/read byte identity, CRLF + bad tags rejected")


def test_c11_split_sizes():
    pairs = []
    for lang in ("ENG", "JPN", "RUS", "ARA"):
        for k in range(150):
            pairs.append(
                identity_pair(f"{lang.lower()}{k}", ["a", "b"], [frame(1)], lang=lang)
            )
    result = split_dataset(pairs, SplitSpec(dev_pairs_per_lang=50), seed=1)
    assert len(result.dev) == 200
    assert len(result.test_l2) == 400
    assert len(result.test_l1) == 400
    ok(11, "150 pairs x 4 languages with dev=50 -> 200 dev pairs, 400 + 400 test")
