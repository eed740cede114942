from hcorpus import markers


def test_sentence_spans_tile_the_region():
    text = "قال الاول. ثم قال الثاني؟ وبعده الثالث؛ والاخير بلا خاتمة"
    spans = markers.sentence_spans(text)
    assert "".join(text[s:e] for s, e in spans) == text
    assert all(e > s for s, e in spans)
    assert [text[s:e].strip()[-1] for s, e in spans[:-1]] == [".", "؟", "؛"]


def test_sentence_spans_sub_region():
    text = "اول. ثاني. ثالث."
    spans = markers.sentence_spans(text, 5, 11)
    assert "".join(text[s:e] for s, e in spans) == text[5:11]


def test_starts_with_opener():
    assert markers.starts_with_opener("حدثنا فلان")
    assert markers.starts_with_opener("  اخبرنا فلان")
    assert not markers.starts_with_opener("قال فلان")
    # opener embedded inside a longer word does not count
    assert not markers.starts_with_opener("وحدثنا فلان")


def test_parse_window_primary_separator():
    text = "حدثنا محمد عن علي قال: الكلام المروي."
    spans = markers.parse_window(text)
    assert len(spans) == 1
    span = spans[0]
    assert span.is_hadith and span.confidence == 1.0
    assert text[span.chain[0]:span.chain[1]] == "حدثنا محمد عن علي قال"
    assert text[span.body[0]:span.body[1]] == "الكلام المروي."


def test_parse_window_last_qala_fallback():
    # no colon form anywhere: the final standalone قال closes the chain
    text = "حدثنا محمد قال ثنا علي بن احمد قال الكلام المروي."
    spans = markers.parse_window(text)
    assert len(spans) == 1
    span = spans[0]
    assert span.confidence == 0.6
    assert text[span.chain[0]:span.chain[1]].endswith("علي بن احمد قال")
    assert text[span.body[0]:span.body[1]] == "الكلام المروي."


def test_parse_window_chain_only_fragment():
    text = "حدثنا محمد بن علي عن ابيه"
    spans = markers.parse_window(text)
    assert len(spans) == 1
    span = spans[0]
    assert span.is_hadith and span.confidence == 0.3
    assert span.body[0] == span.body[1]  # no body seen
    assert text[span.chain[0]:span.chain[1]] == text


def test_parse_window_heading_terminates_body():
    text = "حدثنا محمد قال: الكلام الاول. باب الصلاة. شرح تابع."
    spans = markers.parse_window(text)
    hadith = [s for s in spans if s.is_hadith]
    filler = [s for s in spans if not s.is_hadith]
    assert len(hadith) == 1
    assert text[hadith[0].body[0]:hadith[0].body[1]] == "الكلام الاول."
    assert [text[s.body[0]:s.body[1]] for s in filler] == ["باب الصلاة.", "شرح تابع."]


def test_parse_window_without_openers_is_filler():
    text = "باب الطهارة. شرح من المصنف."
    spans = markers.parse_window(text)
    assert all(not s.is_hadith for s in spans)
    assert [text[s.body[0]:s.body[1]] for s in spans] == ["باب الطهارة.", "شرح من المصنف."]


def test_parse_window_leading_filler_then_narrations():
    text = "تمهيد قصير. حدثنا زيد قال: الاول. حدثنا عمرو قال: الثاني."
    spans = markers.parse_window(text)
    assert [s.is_hadith for s in spans] == [False, True, True]
    first, second = spans[1], spans[2]
    assert text[first.body[0]:first.body[1]] == "الاول."
    assert text[second.body[0]:second.body[1]] == "الثاني."
    # spans are ordered and non-overlapping
    ends = [s.end for s in spans]
    starts = [s.start for s in spans]
    assert all(starts[i + 1] >= ends[i] for i in range(len(spans) - 1))


def test_canonical_separator_matches_primary_form():
    # reconstruction: chain + ": " + body equals the source for the قال: form
    text = "حدثنا محمد عن علي قال: الكلام المروي."
    span = markers.parse_window(text)[0]
    rebuilt = (
        text[span.chain[0]:span.chain[1]]
        + markers.CANONICAL_SEPARATOR
        + text[span.body[0]:span.body[1]]
    )
    assert rebuilt == text
