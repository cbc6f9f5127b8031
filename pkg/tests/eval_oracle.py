"""Independent metric oracle, exact rational arithmetic over (gold, pred) pairs.

Uses the 2*TP / (2*TP + FP + FN) identity for F1, computed with Fractions,
which is algebraically equal to 2PR/(P+R) with the 0-when-undefined
convention. Shared by the evaluator unit tests and the acceptance suite.
"""
from fractions import Fraction

LABELS = ("positive", "neutral", "negative")


def oracle_metrics(pairs):
    """pairs: list of (gold_label, predicted) strings; predicted may be 'unparseable'."""
    total = len(pairs)
    correct = sum(1 for g, p in pairs if g == p)
    accuracy = Fraction(correct, total) if total else Fraction(0)
    f1s = {}
    for label in LABELS:
        tp = sum(1 for g, p in pairs if g == label and p == label)
        fp = sum(1 for g, p in pairs if g != label and p == label)
        fn = sum(1 for g, p in pairs if g == label and p != label)
        denom = 2 * tp + fp + fn
        f1s[label] = Fraction(2 * tp, denom) if denom else Fraction(0)
    macro = sum(f1s.values(), Fraction(0)) / len(LABELS)
    return float(accuracy), float(macro), {k: float(v) for k, v in f1s.items()}


# 25 hand-built scenarios: (name, [(gold, predicted), ...]). They cover
# perfect and degenerate runs, zero-denominator labels, unparseable
# predictions, and single-class gold sets.
SCENARIOS = [
    ("all_correct", [("positive", "positive")] * 4 + [("negative", "negative")] * 3
     + [("neutral", "neutral")] * 3),
    ("all_wrong_rotation", [("positive", "neutral"), ("neutral", "negative"),
                            ("negative", "positive")] * 3),
    ("spec_hand_case", [("positive", "positive"), ("positive", "negative"),
                        ("negative", "negative"), ("neutral", "neutral")]),
    ("one_unparseable", [("positive", "positive"), ("neutral", "neutral"),
                         ("negative", "negative"), ("positive", "unparseable")]),
    ("all_unparseable", [("positive", "unparseable"), ("neutral", "unparseable"),
                         ("negative", "unparseable")]),
    ("single_gold_class_correct", [("neutral", "neutral")] * 5),
    ("single_gold_class_wrong", [("neutral", "positive")] * 5),
    ("never_predicted_label", [("positive", "positive"), ("neutral", "positive"),
                               ("negative", "positive")]),
    ("label_absent_everywhere", [("positive", "positive"), ("positive", "positive"),
                                 ("negative", "negative")]),
    ("precision_zero_recall_zero", [("positive", "negative"), ("negative", "positive")]),
    ("skewed_majority", [("positive", "positive")] * 9 + [("neutral", "positive")]),
    ("balanced_half_right", [("positive", "positive"), ("positive", "neutral"),
                             ("neutral", "neutral"), ("neutral", "negative"),
                             ("negative", "negative"), ("negative", "positive")]),
    ("unparseable_mixed", [("positive", "positive"), ("positive", "unparseable"),
                           ("neutral", "unparseable"), ("negative", "negative")]),
    ("one_item_correct", [("negative", "negative")]),
    ("one_item_wrong", [("negative", "neutral")]),
    ("one_item_unparseable", [("neutral", "unparseable")]),
    ("swap_two_classes", [("positive", "neutral")] * 3 + [("neutral", "positive")] * 3),
    ("fp_only_for_neutral", [("positive", "neutral"), ("positive", "positive"),
                             ("negative", "negative")]),
    ("fn_only_for_neutral", [("neutral", "positive"), ("positive", "positive"),
                             ("negative", "negative")]),
    ("big_diagonal_with_noise", [("positive", "positive")] * 6
     + [("neutral", "neutral")] * 4 + [("negative", "negative")] * 5
     + [("positive", "neutral"), ("neutral", "negative"), ("negative", "unparseable")]),
    ("two_thirds_unparseable", [("positive", "unparseable"), ("neutral", "unparseable"),
                                ("negative", "negative")]),
    ("alternating", [("positive", "positive"), ("positive", "negative")] * 4),
    ("neutral_heavy", [("neutral", "neutral")] * 7 + [("neutral", "positive")] * 2
     + [("positive", "neutral")]),
    ("all_predicted_negative", [("positive", "negative"), ("neutral", "negative"),
                                ("negative", "negative"), ("negative", "negative")]),
    ("rotation_with_unparseable", [("positive", "neutral"), ("neutral", "unparseable"),
                                   ("negative", "positive"), ("positive", "positive")]),
]

assert len(SCENARIOS) == 25
