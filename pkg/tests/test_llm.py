import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import httpx
import pytest
from hypothesis import given, strategies as st

from crewline.errors import (
    ConfigError,
    JsonSyntax,
    NoJsonFound,
    ProviderError,
    ReplayExhausted,
    ReplayMismatch,
    Timeout,
)
from crewline.llm import (
    API_KEY_ENV,
    ChatMessage,
    Gateway,
    LlmConfig,
    TranscriptEntry,
    complete,
    extract_json,
    fingerprint,
    load_transcript,
    transcript_line,
)

MSGS = [ChatMessage("system", "You are a tester."), ChatMessage("user", "Say hi")]


def write_transcript(path, entries):
    path.write_text("".join(transcript_line(TranscriptEntry(fp, r)) for fp, r in entries), encoding="utf-8")


# ---------------------------------------------------------------- config/messages

def test_config_rules():
    with pytest.raises(ConfigError):
        LlmConfig(provider="replay")
    with pytest.raises(ConfigError):
        LlmConfig(provider="remote_chat", temperature=2.5)
    cfg = LlmConfig(provider="remote_chat", base_url="http://x/")
    assert cfg.temperature == 0 and cfg.model == "gpt-3.5"
    assert cfg.url == "http://x/v1/chat/completions"
    assert LlmConfig(provider="local_chat").url.startswith("http://localhost")


def test_message_rules():
    with pytest.raises(ValueError):
        ChatMessage("user", "  ")
    ChatMessage("assistant", "")


def test_fingerprint_depends_on_model_and_messages():
    fp = fingerprint("gpt-3.5", MSGS)
    assert fp == fingerprint("gpt-3.5", list(MSGS))
    assert fp != fingerprint("other", MSGS)
    assert fp != fingerprint("gpt-3.5", MSGS[:1] + [ChatMessage("user", "Say hi!")])


# ---------------------------------------------------------------- replay

def test_replay_identity(tmp_path):
    t = tmp_path / "t.jsonl"
    write_transcript(t, [(fingerprint("gpt-3.5", MSGS), "hello")])
    assert complete(LlmConfig(transcript=str(t)), MSGS) == "hello"


def test_replay_mismatch(tmp_path):
    t = tmp_path / "t.jsonl"
    write_transcript(t, [("0" * 64, "hello")])
    with pytest.raises(ReplayMismatch) as e:
        complete(LlmConfig(transcript=str(t)), MSGS)
    assert e.value.expected == "0" * 64
    assert e.value.got == fingerprint("gpt-3.5", MSGS)


def test_replay_exhausted_and_start_offset(tmp_path):
    t = tmp_path / "t.jsonl"
    fp = fingerprint("gpt-3.5", MSGS)
    write_transcript(t, [(fp, "one"), (fp, "two")])
    gw = Gateway(LlmConfig(transcript=str(t)))
    assert [gw.complete(MSGS), gw.complete(MSGS)] == ["one", "two"]
    with pytest.raises(ReplayExhausted):
        gw.complete(MSGS)
    assert Gateway(LlmConfig(transcript=str(t)), start=1).complete(MSGS) == "two"
    assert gw.parallelism == 1


def test_messages_must_end_with_user(tmp_path):
    t = tmp_path / "t.jsonl"
    t.write_text("", encoding="utf-8")
    with pytest.raises(ValueError):
        Gateway(LlmConfig(transcript=str(t))).complete([ChatMessage("system", "x")])


# ---------------------------------------------------------------- live wire format

def _ok(text):
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": text}}]})


def test_wire_format_and_auth(monkeypatch):
    seen = {}

    def handler(request: httpx.Request):
        seen["url"] = str(request.url)
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        return _ok("pong")

    monkeypatch.setenv(API_KEY_ENV, "sk-test")
    cfg = LlmConfig(provider="remote_chat", base_url="http://api.test", max_output_tokens=77)
    assert complete(cfg, MSGS, transport=httpx.MockTransport(handler)) == "pong"
    assert seen["url"] == "http://api.test/v1/chat/completions"
    assert seen["auth"] == "Bearer sk-test"
    assert seen["body"] == {
        "model": "gpt-3.5",
        "messages": [m.to_dict() for m in MSGS],
        "temperature": 0.0,
        "max_tokens": 77,
    }


def test_record_then_replay_closure(tmp_path):
    answers = iter(["first", "second"])
    transport = httpx.MockTransport(lambda r: _ok(next(answers)))
    live = LlmConfig(provider="remote_chat", base_url="http://api.test")
    t = tmp_path / "rec.jsonl"
    other = MSGS[:1] + [ChatMessage("user", "again")]
    with Gateway(live, record_to=t, transport=transport) as gw:
        assert gw.parallelism == 1
        recorded = [gw.complete(MSGS), gw.complete(other)]
    assert [e.fingerprint for e in load_transcript(t)] == [
        fingerprint("gpt-3.5", MSGS),
        fingerprint("gpt-3.5", other),
    ]
    replay = Gateway(LlmConfig(transcript=str(t)))
    assert [replay.complete(MSGS), replay.complete(other)] == recorded


def test_record_with_no_calls_leaves_empty_transcript(tmp_path):
    t = tmp_path / "rec.jsonl"
    Gateway(LlmConfig(provider="remote_chat"), record_to=t).close()
    assert t.read_text() == ""


class _Scripted(BaseHTTPRequestHandler):
    statuses: list[int] = []
    hits: list[str] = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        self.rfile.read(length)
        type(self).hits.append(self.path)
        status = type(self).statuses.pop(0) if type(self).statuses else 200
        if status == 200:
            body = json.dumps({"choices": [{"message": {"content": "recovered"}}]}).encode()
        else:
            body = b'{"error": "scripted failure"}'
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    _Scripted.statuses = []
    _Scripted.hits = []
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Scripted)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    server.server_close()


def _live(server, **kw):
    host, port = server.server_address
    return LlmConfig(provider="local_chat", base_url=f"http://{host}:{port}", **kw)


def test_retries_500_twice_then_success(stub_server):
    _Scripted.statuses = [500, 500, 200]
    delays = []
    gw = Gateway(_live(stub_server, max_retries=3), sleep=delays.append)
    assert gw.complete(MSGS) == "recovered"
    assert len(_Scripted.hits) == 3
    assert _Scripted.hits[0] == "/v1/chat/completions"
    # base 1s, factor 2, jitter in [0.5, 1]
    assert 0.5 <= delays[0] <= 1.0 and 1.0 <= delays[1] <= 2.0


def test_retry_budget_is_respected(stub_server):
    _Scripted.statuses = [503, 429, 502, 500, 200]
    gw = Gateway(_live(stub_server, max_retries=2), sleep=lambda s: None)
    with pytest.raises(ProviderError) as e:
        gw.complete(MSGS)
    assert e.value.status == 502
    assert len(_Scripted.hits) == 3  # 1 + max_retries


def test_client_errors_are_not_retried(stub_server):
    _Scripted.statuses = [400, 200]
    gw = Gateway(_live(stub_server), sleep=lambda s: None)
    with pytest.raises(ProviderError) as e:
        gw.complete(MSGS)
    assert e.value.status == 400 and len(_Scripted.hits) == 1


def test_timeouts_raise_timeout():
    def handler(request):
        raise httpx.ReadTimeout("slow", request=request)

    cfg = LlmConfig(provider="remote_chat", base_url="http://api.test", max_retries=1)
    gw = Gateway(cfg, transport=httpx.MockTransport(handler), sleep=lambda s: None)
    with pytest.raises(Timeout):
        gw.complete(MSGS)


def test_concurrency_limit():
    active, peak = [0], [0]
    lock = threading.Lock()
    gate = threading.Event()

    def handler(request):
        with lock:
            active[0] += 1
            peak[0] = max(peak[0], active[0])
        gate.wait(0.05)
        with lock:
            active[0] -= 1
        return _ok("x")

    gw = Gateway(
        LlmConfig(provider="remote_chat", base_url="http://api.test", max_concurrency=2),
        transport=httpx.MockTransport(handler),
    )
    threads = [threading.Thread(target=gw.complete, args=(MSGS,)) for _ in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert gw.calls == 6 and peak[0] <= 2


# ---------------------------------------------------------------- extract_json

def test_extract_json_examples():
    assert extract_json('```json\n{"a":1}\n```') == {"a": 1}
    assert extract_json('Here are the events: [{"date":"3/2/2023"}] done.') == [{"date": "3/2/2023"}]
    with pytest.raises(NoJsonFound):
        extract_json("no braces here")


def test_extract_json_errors():
    with pytest.raises(JsonSyntax):
        extract_json("Sure! events: {...broken")
    with pytest.raises(JsonSyntax) as e:
        extract_json("x {'a': 1}")
    assert e.value.position >= 2
    assert extract_json('{"s": "brace } inside [string"}') == {"s": "brace } inside [string"}


json_values = st.recursive(
    st.none() | st.booleans() | st.integers() | st.floats(allow_nan=False, allow_infinity=False) | st.text(),
    lambda children: st.lists(children, max_size=4) | st.dictionaries(st.text(max_size=8), children, max_size=4),
    max_leaves=12,
)
containers = st.one_of(
    st.lists(json_values, max_size=4),
    st.dictionaries(st.text(max_size=8), json_values, max_size=4),
)
noise = st.text(
    alphabet=st.characters(blacklist_characters="{}[]`", blacklist_categories=("Cs",)), max_size=40
)


@given(containers, noise, noise, st.booleans(), st.booleans())
def test_extract_json_recovers_embedded_value(value, prefix, suffix, fenced, pretty):
    payload = json.dumps(value, indent=2 if pretty else None, ensure_ascii=bool(len(prefix) % 2))
    if fenced:
        payload = f"```json\n{payload}\n```"
    assert extract_json(prefix + payload + suffix) == value


@given(noise)
def test_extract_json_no_false_positive(text):
    with pytest.raises(NoJsonFound):
        extract_json(text)


def test_backticks_inside_json_strings():
    assert extract_json('["```a```"]') == ["```a```"]
    assert extract_json('```json\n["```", "x"]\n```') == ["```", "x"]
    assert extract_json('Events [see below]:\n```json\n{"a": [1]}\n```') == {"a": [1]}


def test_fence_glued_to_prose_and_noise_after_closing_fence():
    assert extract_json('Result:```json\n[1, "`"]\n```tail\nmore') == [1, "`"]
    assert extract_json('{"a": 1}\n```\nnext line') == {"a": 1}
