import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hcorpus.normalize import (
    ARABIC_MARKS,
    NormalizationProfile,
    normalize,
    strip_marks,
)

FATHA = "َ"
DAMMA = "ُ"
SUPERSCRIPT_ALEF = "ٰ"


def test_strip_marks_removes_harakat_only():
    assert strip_marks("كَتَبَ") == "كتب"
    assert strip_marks("كتب") == "كتب"
    assert strip_marks("الرحمن" + SUPERSCRIPT_ALEF) == "الرحمن"


def test_alef_variants_unified():
    assert normalize("أخبرنا") == "اخبرنا"
    assert normalize("إلى") == "الي"
    assert normalize("آية") == "اية"


def test_ya_and_alef_maqsura_unified():
    assert normalize("موسى") == "موسي"


def test_tatweel_removed():
    assert normalize("كـــتب") == "كتب"


def test_whitespace_collapsed_and_stripped():
    assert normalize("  قال \n\t رسول  ") == "قال رسول"


def test_nfc_applied_before_rules():
    # alef + combining madda composes to آ, which then unifies to ا
    assert normalize("آ") == "ا"


def test_page_artifacts_stripped():
    text = "قال الراوي (12) كلاما.\n-----\n42\nوزاد فيه."
    assert normalize(text) == "قال الراوي كلاما. وزاد فيه."


def test_artifact_rules_leave_prose_numbers():
    # a number inline (not alone on its line) is content, not an artifact
    assert normalize("سنة 200 هجرية") == "سنة 200 هجرية"


def test_profile_switches_off():
    profile = NormalizationProfile(
        strip_diacritics_for_matching=False,
        unify_alef_variants=False,
        unify_ya_and_alef_maqsura=False,
        remove_tatweel=False,
        collapse_whitespace=False,
        strip_page_artifacts=False,
    )
    text = "أُخبرنا  موسى"
    assert normalize(text, profile) == text


def test_profile_round_trip_and_unknown_keys():
    profile = NormalizationProfile(collapse_whitespace=False)
    assert NormalizationProfile.from_dict(profile.to_dict()) == profile
    with pytest.raises(ValueError):
        NormalizationProfile.from_dict({"no_such_rule": True})


_TEXT_ALPHABET = (
    "ابتجحسقكلمنوي"  # base letters
    + "أإآىئء"  # variant forms
    + FATHA + DAMMA
    + "ـ .:!؟\n\t 0123456789()household-"
)


@settings(max_examples=150)
@given(
    st.text(alphabet=_TEXT_ALPHABET, max_size=80),
    st.builds(
        NormalizationProfile,
        strip_diacritics_for_matching=st.booleans(),
        unify_alef_variants=st.booleans(),
        unify_ya_and_alef_maqsura=st.booleans(),
        remove_tatweel=st.booleans(),
        collapse_whitespace=st.booleans(),
        strip_page_artifacts=st.booleans(),
    ),
)
def test_normalize_idempotent_for_every_profile(text, profile):
    once = normalize(text, profile)
    assert normalize(once, profile) == once


@settings(max_examples=100)
@given(st.text(alphabet=_TEXT_ALPHABET, max_size=80))
def test_default_profile_output_is_markless(text):
    out = normalize(text)
    assert not (set(out) & ARABIC_MARKS)
    assert "ـ" not in out and "أ" not in out and "ى" not in out
