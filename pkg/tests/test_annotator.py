import json

import pytest

from hcorpus import markers
from hcorpus.annotator import (
    AnnotationRequest,
    MockAnnotator,
    RemoteAnnotator,
    RetryPolicy,
    Task,
    TokenBucket,
    TransportError,
)
from hcorpus.normalize import strip_marks


# -- request validation -----------------------------------------------------------


def test_request_rejects_empty_input():
    with pytest.raises(ValueError, match="input_text must be non-empty"):
        AnnotationRequest(task=Task.SUMMARIZE, input_text="").validate()


def test_translate_request_needs_language():
    with pytest.raises(ValueError, match="language"):
        AnnotationRequest(task=Task.TRANSLATE, input_text="نص").validate()
    AnnotationRequest(
        task=Task.TRANSLATE, input_text="نص", context={"language": "fa"}
    ).validate()


# -- mock annotator -----------------------------------------------------------------


def mock_run(task, text, **context):
    client = MockAnnotator(tag_vocabulary=("فقه", "ادب", "عقيدة", "رقائق"))
    return client.annotate(AnnotationRequest(task=task, input_text=text, context=context))


def test_mock_is_deterministic_across_instances():
    for task, ctx in [
        (Task.TRANSLATE, {"language": "en"}),
        (Task.DIACRITIZE, {}),
        (Task.SUMMARIZE, {}),
        (Task.KEY_POINTS, {}),
        (Task.TAG, {}),
        (Task.CLASSIFY_HADITH, {}),
        (Task.SEGMENT_WINDOW, {}),
    ]:
        text = "حدثنا محمد عن علي قال: الكلمة الطيبة صدقة والعلم نور."
        first = mock_run(task, text, **ctx)
        second = mock_run(task, text, **ctx)
        assert first.ok and second.ok
        assert first.output == second.output
        assert first.model_version == "mock-1"
        assert first.annotator == "mock"


def test_mock_translate_transliterates():
    out = mock_run(Task.TRANSLATE, "كتب", language="fa").output
    assert out == "[fa] ktb"
    assert mock_run(Task.TRANSLATE, "كتب", language="en").output.startswith("[en] ")


def test_mock_diacritize_preserves_skeleton():
    text = "الكلمة الطيبة صدقة"
    out = mock_run(Task.DIACRITIZE, text).output
    assert out != text
    assert strip_marks(out) == text
    # every Arabic letter gains exactly one mark, nothing else changes
    assert len(out) == len(text) + sum(1 for ch in text if "ء" <= ch <= "ي")


def test_mock_summary_is_strictly_shorter():
    for text in ("كلمة", "الكلمة الطيبة صدقة والعلم نور يهدي صاحبه الي الخير"):
        out = mock_run(Task.SUMMARIZE, text).output
        assert len(out) < len(text)


def test_mock_key_points_shape():
    out = mock_run(Task.KEY_POINTS, "اول ثان ثالث رابع خامس سادس سابع ثامن").output
    lines = out.split("\n")
    assert 1 <= len(lines) <= 3
    assert all(line.strip() for line in lines)


def test_mock_tags_come_from_vocabulary():
    vocab = ("فقه", "ادب", "عقيدة", "رقائق")
    out = mock_run(Task.TAG, "العلم نور والجهل ظلام").output
    tags = out.split("\n")
    assert 1 <= len(tags) <= 3
    assert len(set(tags)) == len(tags)
    assert all(t in vocab for t in tags)


def test_mock_tags_empty_without_vocabulary():
    client = MockAnnotator()
    out = client.annotate(AnnotationRequest(task=Task.TAG, input_text="نص"))
    assert out.output == ""


def test_mock_classify_detects_openers():
    assert mock_run(Task.CLASSIFY_HADITH, "حدثنا زيد قال: كذا.").output == "true"
    assert mock_run(Task.CLASSIFY_HADITH, "باب العلم وفضله.").output == "false"


def test_mock_segment_window_matches_grammar():
    text = "حدثنا زيد قال: الاول. باب الادب."
    payload = json.loads(mock_run(Task.SEGMENT_WINDOW, text).output)
    want = markers.parse_window(text)
    assert len(payload["spans"]) == len(want)
    for got, span in zip(payload["spans"], want):
        assert got["body"] == list(span.body)
        assert got["is_hadith"] == span.is_hadith


# -- retry policy & rate limiting ----------------------------------------------------


def test_retry_policy_backoff_doubles():
    policy = RetryPolicy(max_attempts=4, backoff_initial=0.5, backoff_multiplier=2.0)
    assert [policy.delay(a) for a in (1, 2, 3)] == [0.5, 1.0, 2.0]


def test_token_bucket_rejects_bad_rate():
    with pytest.raises(ValueError, match="rate must be positive"):
        TokenBucket(0)


def test_token_bucket_throttles_with_fake_clock():
    now = [0.0]
    sleeps = []

    def clock():
        return now[0]

    def sleep(seconds):
        sleeps.append(seconds)
        now[0] += seconds

    bucket = TokenBucket(rate=2.0, capacity=2.0, clock=clock, sleep=sleep)
    bucket.acquire()
    bucket.acquire()
    assert sleeps == []  # burst capacity covers the first two
    bucket.acquire()
    assert sleeps == [pytest.approx(0.5)]  # 1 token at 2/s: half a second
    now[0] += 10.0  # long idle refills up to capacity, not beyond
    bucket.acquire()
    bucket.acquire()
    assert len(sleeps) == 1


# -- remote annotator ------------------------------------------------------------------


class ScriptedTransport:
    """Plays back a canned sequence of (status, body) or exceptions."""

    def __init__(self, *script):
        self.script = list(script)
        self.calls = []

    def __call__(self, url, payload, timeout):
        self.calls.append((url, dict(payload), timeout))
        item = self.script.pop(0)
        if isinstance(item, Exception):
            raise item
        status, body = item
        if callable(body):
            body = body(payload)
        return status, body


def _echo(output="نتيجة", model_version="m9"):
    return lambda payload: {
        "request_id": payload["request_id"],
        "output": output,
        "model_version": model_version,
    }


def make_remote(transport, max_attempts=3):
    sleeps = []
    client = RemoteAnnotator(
        endpoint="http://annotator.test/v1",
        policy=RetryPolicy(max_attempts=max_attempts, backoff_initial=0.5),
        transport=transport,
        sleep=sleeps.append,
    )
    return client, sleeps


def test_remote_success_first_attempt():
    transport = ScriptedTransport((200, _echo()))
    client, sleeps = make_remote(transport)
    outcome = client.annotate(
        AnnotationRequest(task=Task.TRANSLATE, input_text="نص", context={"language": "fa"})
    )
    assert outcome.ok
    assert outcome.output == "نتيجة"
    assert outcome.model_version == "m9"
    assert outcome.attempts == 1
    assert outcome.annotator == "remote"
    assert sleeps == []
    url, payload, timeout = transport.calls[0]
    assert url == "http://annotator.test/v1"
    assert payload["task"] == "translate"
    assert payload["input_text"] == "نص"
    assert payload["context"] == {"language": "fa"}
    assert payload["request_id"]


def test_remote_retries_rate_limit_then_succeeds():
    transport = ScriptedTransport((429, {}), (200, _echo()))
    client, sleeps = make_remote(transport)
    outcome = client.annotate(AnnotationRequest(task=Task.SUMMARIZE, input_text="نص"))
    assert outcome.ok and outcome.attempts == 2
    assert len(transport.calls) == 2
    assert sleeps == [0.5]


def test_remote_client_error_is_fatal():
    transport = ScriptedTransport((400, {}))
    client, sleeps = make_remote(transport)
    outcome = client.annotate(AnnotationRequest(task=Task.SUMMARIZE, input_text="نص"))
    assert not outcome.ok
    assert outcome.error == "fatal status 400"
    assert outcome.attempts == 1
    assert len(transport.calls) == 1
    assert sleeps == []


def test_remote_exhausts_retries_on_server_errors():
    transport = ScriptedTransport((500, {}), (503, {}), (502, {}))
    client, sleeps = make_remote(transport)
    outcome = client.annotate(AnnotationRequest(task=Task.SUMMARIZE, input_text="نص"))
    assert not outcome.ok
    assert outcome.attempts == 3
    assert outcome.error == "retryable status 502"
    assert sleeps == [0.5, 1.0]  # exponential backoff between attempts


def test_remote_retries_transport_errors():
    transport = ScriptedTransport(TransportError("connection refused"), (200, _echo()))
    client, _ = make_remote(transport)
    outcome = client.annotate(AnnotationRequest(task=Task.SUMMARIZE, input_text="نص"))
    assert outcome.ok and outcome.attempts == 2


def test_remote_reports_persistent_transport_failure():
    transport = ScriptedTransport(*[TransportError("boom")] * 3)
    client, _ = make_remote(transport)
    outcome = client.annotate(AnnotationRequest(task=Task.SUMMARIZE, input_text="نص"))
    assert not outcome.ok
    assert outcome.error == "transport: boom"


@pytest.mark.parametrize(
    "body",
    [
        {"output": "بلا معرف"},  # request_id missing
        lambda payload: {"request_id": payload["request_id"]},  # output missing
        {"request_id": "wrong", "output": "نص"},
    ],
)
def test_remote_rejects_malformed_bodies(body):
    transport = ScriptedTransport((200, body), (200, _echo()))
    client, _ = make_remote(transport)
    outcome = client.annotate(AnnotationRequest(task=Task.SUMMARIZE, input_text="نص"))
    assert outcome.ok and outcome.attempts == 2  # malformed body burns an attempt

    transport = ScriptedTransport(*[(200, body)] * 3)
    client, _ = make_remote(transport)
    outcome = client.annotate(AnnotationRequest(task=Task.SUMMARIZE, input_text="نص"))
    assert not outcome.ok
    assert outcome.error == "malformed response body"


def test_remote_validates_before_sending():
    transport = ScriptedTransport()
    client, _ = make_remote(transport)
    with pytest.raises(ValueError, match="non-empty"):
        client.annotate(AnnotationRequest(task=Task.SUMMARIZE, input_text=""))
    assert transport.calls == []
