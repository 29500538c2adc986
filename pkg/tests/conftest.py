import pytest

from kbdecode import Catalog, TableScorer, Vocabulary


@pytest.fixture(scope="session")
def ascii_vocab() -> Vocabulary:
    return Vocabulary.ascii_basic()


@pytest.fixture(scope="session")
def pepsi_scenario(ascii_vocab):
    """Complementary-failure scenario: an out-of-KB person plus a relation
    the unconstrained decode misspells."""

    class Scenario:
        vocab = ascii_vocab
        catalog = Catalog(
            {"PepsiCo", "Pepsi", "Carol Douglas"},
            {"employer", "product or material produced"},
            ascii_vocab,
        )
        text = "Carol Dollard works at PepsiCo, maker of Pepsi."
        unconstrained_text = (
            "[s] Carol Dollard [r] employer [o] PepsiCo [e] "
            "[s] PepsiCo [r] produces [o] Pepsi [e]"
        )
        constrained_text = (
            "[s] Carol Douglas [r] employer [o] PepsiCo [e] "
            "[s] PepsiCo [r] product or material produced [o] Pepsi [e]"
        )
        corrected_text = "[s] PepsiCo [r] product or material produced [o] Pepsi [e]"

        @classmethod
        def base_scorer(cls) -> TableScorer:
            prompt = cls.vocab.encode(cls.text)
            return TableScorer.scripted(
                cls.vocab, prompt, [cls.unconstrained_text, cls.constrained_text]
            )

    return Scenario
