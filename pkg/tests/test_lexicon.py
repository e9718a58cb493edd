import pytest
from hypothesis import given, strategies as st

from genderflow.lexicon import (
    GenderLexicon, LexiconError, TokenClass, classify_token, default_lexicon, load_lexicon,
    load_lexicon_dir, parse_pairs, parse_pronouns,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_pairs_file_builds_word_sets(tmp_path):
    pairs = write(tmp_path, "pairs.tsv", "sister\tbrother\ngirl\tboy\n")
    lex = load_lexicon(None, pairs)
    assert lex.fem_words == {"sister", "girl"}
    assert lex.msc_words == {"brother", "boy"}


def test_empty_pairs_default_pronouns(tmp_path):
    lex = load_lexicon(None, write(tmp_path, "pairs.tsv", ""))
    assert lex.fem_words == set() and lex.msc_words == set()
    assert lex.fem_pronouns == {"she", "her", "hers", "herself"}
    assert lex.msc_pronouns == {"he", "him", "his", "himself"}


def test_token_on_both_sides_rejected_with_row(tmp_path):
    pairs = write(tmp_path, "pairs.tsv", "# comment\nsister\tbrother\nactor\tactor\n")
    with pytest.raises(LexiconError) as exc:
        load_lexicon(None, pairs)
    assert exc.value.row == 3


def test_cross_row_clash_rejected():
    with pytest.raises(LexiconError):
        parse_pairs(["sister\tbrother", "brother\tx"])


def test_wrong_column_count():
    with pytest.raises(LexiconError) as exc:
        parse_pairs(["sister\tbrother", "girl"])
    assert exc.value.row == 2


def test_duplicates_and_comments():
    assert parse_pairs(["# c", "girl\tboy", "", "Girl\tBoy", "girl\tboy"]) == [("girl", "boy")]


def test_pronoun_sections():
    fem, msc = parse_pronouns(["[fem]", "she", "[msc]", "he", "him"])
    assert fem == {"she"} and msc == {"he", "him"}
    with pytest.raises(LexiconError):
        parse_pronouns(["she"])
    with pytest.raises(LexiconError):
        parse_pronouns(["[fem]", "they", "[msc]", "they"])


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_lexicon(None, tmp_path / "nope.tsv")


def test_invariants_enforced_on_construction():
    with pytest.raises(LexiconError):
        GenderLexicon({"she"}, {"she"})
    with pytest.raises(LexiconError):
        GenderLexicon({"She"}, {"he"})
    with pytest.raises(LexiconError):
        GenderLexicon({"she"}, {"he"}, (("two words", "x"),))


def test_classify_examples():
    lex = default_lexicon()
    assert classify_token(lex, "She") is TokenClass.FEM_PRONOUN
    assert classify_token(lex, "friend") is TokenClass.NEUTRAL
    assert classify_token(lex, "brother") is TokenClass.MSC_WORD
    assert classify_token(lex, "her") is TokenClass.FEM_PRONOUN


def test_pronoun_precedence_over_words():
    lex = GenderLexicon({"her"}, {"he"}, (("her", "his"),))
    assert classify_token(lex, "her") is TokenClass.FEM_PRONOUN
    assert classify_token(lex, "his") is TokenClass.MSC_WORD


def test_lexicon_dir_and_determinism(fixtures_dir):
    a = load_lexicon_dir(fixtures_dir / "lexicon")
    b = load_lexicon_dir(fixtures_dir / "lexicon")
    assert a == b
    assert ("girl", "boy") in a.word_pairs
    assert load_lexicon_dir(None) == default_lexicon()


def test_lexicon_dir_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_lexicon_dir(tmp_path / "absent")


LEX = default_lexicon()


@given(st.text(max_size=12))
def test_classification_is_case_insensitive(tok):
    assert classify_token(LEX, tok) is classify_token(LEX, tok.lower())


def test_every_pair_classifies_to_its_side():
    for f, m in LEX.word_pairs:
        assert classify_token(LEX, f) in (TokenClass.FEM_WORD, TokenClass.FEM_PRONOUN)
        assert classify_token(LEX, m) in (TokenClass.MSC_WORD, TokenClass.MSC_PRONOUN)
        if f not in LEX.fem_pronouns:
            assert classify_token(LEX, f) is TokenClass.FEM_WORD
        if m not in LEX.msc_pronouns:
            assert classify_token(LEX, m) is TokenClass.MSC_WORD
