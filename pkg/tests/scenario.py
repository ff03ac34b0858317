"""Shared two-tier benchmark scenario used by the end-to-end comparison tests.

The scenario is plain data (dicts), so both the engine under test and the
independent Monte-Carlo oracle can consume it without sharing any code.
"""

from __future__ import annotations

CHOICES = ["A", "B", "C", "D"]

EASY_ANSWERS = {"A": 0.95, "B": 0.03, "C": 0.01}
EASY_UNEXTRACTABLE = 0.01
HARD_ANSWERS = {"A": 0.40, "B": 0.32, "C": 0.20, "D": 0.03}
HARD_UNEXTRACTABLE = 0.05
HARD_CONDITIONING_GAIN = 0.15

N_EASY = 10
N_HARD = 10

UNIT_SIZE = 8
THOUGHT_LENGTH = 4
EXPLORATION_RATIO = 0.25
SUBSET_SIZE = 2


def query_ids() -> list[str]:
    easy = [f"easy{i:02d}" for i in range(N_EASY)]
    hard = [f"hard{i:02d}" for i in range(N_HARD)]
    return easy + hard


def build_queries() -> list[dict]:
    records = []
    for qid in query_ids():
        records.append(
            {
                "id": qid,
                "prompt": f"Question {qid}: pick the best option from A, B, C, D.",
                "answer_domain": "multiple_choice",
                "choices": list(CHOICES),
                "gold_answer": "A",
            }
        )
    return records


def build_profiles() -> dict[str, dict]:
    profiles = {}
    for qid in query_ids():
        if qid.startswith("easy"):
            profiles[qid] = {
                "answers": dict(EASY_ANSWERS),
                "unextractable": EASY_UNEXTRACTABLE,
                "correct_answer": "A",
                "conditioning_gain": 0.0,
                "tokens_mean": 120.0,
                "tokens_std": 15.0,
            }
        else:
            profiles[qid] = {
                "answers": dict(HARD_ANSWERS),
                "unextractable": HARD_UNEXTRACTABLE,
                "correct_answer": "A",
                "conditioning_gain": HARD_CONDITIONING_GAIN,
                "tokens_mean": 180.0,
                "tokens_std": 25.0,
            }
    return profiles


def total_budget() -> int:
    m = N_EASY + N_HARD
    return 2 * m * UNIT_SIZE
