"""Chat client plumbing: recording, replay, and response handling."""

import pytest

from syntra.errors import ConfigError, ReplayMismatch, TransportError
from syntra.llm import ChatClient, HttpTransport, RecordingTransport, ReplayTransport, SequenceTransport


class TestChatClient:
    def test_string_prompt_becomes_user_message(self):
        transport = SequenceTransport(["hi"])
        client = ChatClient(transport, model="m1")
        assert client.complete("hello", temperature=0.7) == "hi"
        payload = transport.requests[0]
        assert payload["model"] == "m1"
        assert payload["messages"] == [{"role": "user", "content": "hello"}]
        assert payload["temperature"] == 0.7

    def test_malformed_response_is_transport_error(self):
        class Broken:
            def send(self, payload):
                return {"nope": []}

        with pytest.raises(TransportError):
            ChatClient(Broken()).complete("x", temperature=0.0)

    def test_exhausted_sequence_is_transport_error(self):
        client = ChatClient(SequenceTransport([]))
        with pytest.raises(TransportError):
            client.complete("x", temperature=0.0)


class TestRecordReplay:
    def test_round_trip(self, tmp_path):
        log = tmp_path / "calls.jsonl"
        recording = RecordingTransport(SequenceTransport(["one", "two"]), log)
        client = ChatClient(recording)
        assert client.complete("p1", temperature=1.0) == "one"
        assert client.complete("p2", temperature=1.0) == "two"

        replay_client = ChatClient(ReplayTransport(log))
        assert replay_client.complete("p1", temperature=1.0) == "one"
        assert replay_client.complete("p2", temperature=1.0) == "two"

    def test_diverging_request_rejected(self, tmp_path):
        log = tmp_path / "calls.jsonl"
        ChatClient(RecordingTransport(SequenceTransport(["one"]), log)).complete(
            "p1", temperature=1.0
        )
        replay_client = ChatClient(ReplayTransport(log))
        with pytest.raises(ReplayMismatch):
            replay_client.complete("different", temperature=1.0)

    def test_exhausted_log_rejected(self, tmp_path):
        log = tmp_path / "calls.jsonl"
        ChatClient(RecordingTransport(SequenceTransport(["one"]), log)).complete(
            "p1", temperature=1.0
        )
        replay_client = ChatClient(ReplayTransport(log))
        replay_client.complete("p1", temperature=1.0)
        with pytest.raises(ReplayMismatch):
            replay_client.complete("p1", temperature=1.0)


class TestHttpTransport:
    def test_requires_base_url(self, monkeypatch):
        monkeypatch.delenv("SYNTRA_LLM_BASE_URL", raising=False)
        with pytest.raises(ConfigError):
            HttpTransport()

    def test_env_configuration(self, monkeypatch):
        monkeypatch.setenv("SYNTRA_LLM_BASE_URL", "http://example.invalid/v1/")
        monkeypatch.setenv("SYNTRA_LLM_API_KEY", "sk-test")
        transport = HttpTransport()
        assert transport.base_url == "http://example.invalid/v1"
        assert transport.api_key == "sk-test"
