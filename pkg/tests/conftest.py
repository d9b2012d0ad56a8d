import pytest

from emobow.lexicon import Lexicon

GRISHAM = (
    "Interesting Grisham tale of a lawyer that takes millions of dollars from his firm after "
    "faking his own death. Grisham usually is able to hook his readers early and ,in this case, "
    "doesn't play his hand to soon. The usually reliable Frank Mueller makes this story even an "
    "even better bet on Audiobook."
)

# Reference outputs for the Grisham review (raw, before normalization).
# The +G references are abbreviated, so the tests rebuild them.
GOLDEN = {
    "m": "interesting grisham tale of a lawyer that takes millions of dollars from his firm after "
         "faking his own death grisham usually is able to hook his readers early and in this case "
         "doesn't play his hand to soon the usually reliable frank mueller makes this story even "
         "an even better bet on audiobook",
    "es": "interesting death hook play reliable better",
    "s": "interesting death hook play reliable better",
    "e": "death hook reliable better",
    "ces+m": "positive grisham tale of a lawyer that takes millions of dollars from his firm after "
             "faking his own anger sadness fear negative grisham usually is able to positive joy his "
             "readers early and in this case doesn't positive his hand to soon the usually trust "
             "positive frank mueller makes this story even an even positive joy bet on audiobook",
    # the reference text lost "own" and "grisham usually" after "faking his"; restored here
    "cs+m": "positive grisham tale of a lawyer that takes millions of dollars from his firm after "
            "faking his own negative grisham usually is able to positive his readers early and in "
            "this case doesn't positive his hand to soon the usually positive frank mueller makes "
            "this story even an even positive bet on audiobook",
    "ce+m": "Interesting grisham tale of a lawyer that takes millions of dollars from his firm after "
            "faking his own anger sadness fear grisham usually is able to joy his readers early and "
            "in this case doesn't play his hand to soon the usually trust frank mueller makes this "
            "story even an even joy bet on audiobook",
    "m-es": "grisham tale of a lawyer that takes millions of dollars from his firm after faking his "
            "own grisham usually is able to his readers early and ,in this case doesn't his hand to "
            "soon the usually frank mueller makes this story even an even bet on audiobook.",
}

MINI_LEXICON = {
    "interesting": ["positive"],
    "death": ["anger", "sadness", "fear", "negative"],
    "hook": ["positive", "joy"],
    "play": ["positive"],
    "reliable": ["trust", "positive"],
    "better": ["positive", "joy"],
}

ABANDON_TSV = "".join(
    f"abandon\t{c}\t{int(c in ('fear', 'sadness', 'negative'))}\n"
    for c in ["anger", "anticipation", "disgust", "fear", "joy", "negative", "positive",
              "sadness", "surprise", "trust"]
)


@pytest.fixture
def mini_lexicon():
    return Lexicon.from_words(MINI_LEXICON)


@pytest.fixture
def grisham_tokens():
    from emobow.textnorm import normalize

    return normalize(GRISHAM)


# one summary line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
