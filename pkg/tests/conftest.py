"""Shared fixture questions and curated gold/prediction pairs.

The five error-pattern fixtures pin the verifier's labels on hand-entered
gold/prediction pairs; the expected verdicts are part of the contract.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# Recurring questions (see also tests/oracles.py for the frozen expectations).
FOUR_EQ_QUESTION = "D=A+2, A=1, B=A+1, C=3+B, C?"
TWO_EQ_QUESTION = "A=1, B=2+A, B?"
DISTRACTOR_QUESTION = "A=1, C=5+B, B=2+A, D=3+A, C?"
PLAIN_QUESTION = "A=1, B=2+A, C=3+B, D=2, C?"

TWO_EQ_GOLD = "B=2+A, B=2+1, B=3"
DISTRACTOR_GOLD = "A=1, B=2+A, B=2+1, B=3, C=5+B, C=5+3, C=8"

# (question, gold, prediction, expected labels, answer_correct)
ERROR_FIXTURES = [
    ("copying_error", TWO_EQ_QUESTION, TWO_EQ_GOLD,
     "B=6+A, B=6+1, B=7", ["copying_error"], False),
    ("hasty_assignment", TWO_EQ_QUESTION, TWO_EQ_GOLD,
     "B=2+2, B=4", ["hasty_assignment"], False),
    ("ignoring_incorrect_step", DISTRACTOR_QUESTION, DISTRACTOR_GOLD,
     "A=1, B=2+D, B=2+A, B=2+1, B=3, C=5+B, C=5+3, C=8",
     ["ignoring_incorrect_step"], True),
    ("correct_assignment", DISTRACTOR_QUESTION, DISTRACTOR_GOLD,
     "A=1, B=2+D, B=2+1, B=3, C=5+B, C=5+3, C=8",
     ["correct_assignment"], True),
    ("non_affecting_error", DISTRACTOR_QUESTION, DISTRACTOR_GOLD,
     "A=1, B=2+A, B=2+1, B=3, D=3+A, D=3+2, D=5, C=5+B, C=5+3, C=8",
     ["non_affecting_error"], True),
]


@pytest.fixture
def four_eq_question():
    from symchain import parse_question

    return parse_question(FOUR_EQ_QUESTION)


@pytest.fixture
def distractor_question():
    from symchain import parse_question

    return parse_question(DISTRACTOR_QUESTION)
