import pytest
from fastapi.testclient import TestClient

from test_decoder_search import EOS_ID, ScriptedModel, uniform_logits
from ts_toolkit.corpus_io import RESERVED
from ts_toolkit.server import create_app
from ts_toolkit.subword import SubwordModel


@pytest.fixture(scope="module")
def subword():
    vocab = {sym: i for i, sym in enumerate(RESERVED)}
    for tok in ("one</w>", "two</w>", "six</w>", "1</w>", "2</w>", "6</w>"):
        vocab[tok] = len(vocab)
    return SubwordModel(merges=[], vocab=vocab)


@pytest.fixture(scope="module")
def client(subword):
    v = len(subword.vocab)
    # always suggest "one" (token id 6) then stop
    overrides = {(): {6: 10.0}, (6,): {EOS_ID: 10.0}}
    model = ScriptedModel(uniform_logits(v, overrides), v)
    app = create_app(model, subword, model_id="scripted", beam_size=4)
    return TestClient(app)


def suggest(client, **overrides):
    payload = {
        "source": "1 2", "translation": "one two", "span": [0, 1],
    }
    payload.update(overrides)
    return client.post("/suggest", json=payload)


class TestHealth:
    def test_ok_when_model_loaded(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "model_id": "scripted"}

    def test_503_without_model(self, subword):
        bare = TestClient(create_app(None, subword))
        assert bare.get("/health").status_code == 503
        assert suggest(bare).status_code == 503


class TestSuggest:
    def test_basic_response_schema(self, client):
        response = suggest(client)
        assert response.status_code == 200
        body = response.json()
        assert body["model_id"] == "scripted"
        assert body["latency_ms"] >= 0
        top = body["suggestions"][0]
        assert top["tokens"] == ["one"]
        assert top["text"] == "one"
        assert isinstance(top["score"], float)

    def test_null_span_insertion_is_200(self, client):
        response = suggest(client, span=[1, 1])
        assert response.status_code == 200
        assert response.json()["suggestions"]

    def test_invalid_span_is_400(self, client):
        for span in ([2, 1], [0, 3], [-1, 0]):
            response = suggest(client, span=span)
            assert response.status_code == 400
            assert response.json()["error"] == "invalid-span"

    def test_span_may_cover_whole_translation(self, client):
        assert suggest(client, span=[0, 2]).status_code == 200

    def test_k_caps_at_beam_size(self, client):
        body = suggest(client, k=50).json()
        assert 1 <= len(body["suggestions"]) <= 4

    def test_k_must_be_positive(self, client):
        assert suggest(client, k=0).status_code == 422

    def test_missing_fields_rejected(self, client):
        response = client.post("/suggest", json={"source": "1"})
        assert response.status_code == 422

    def test_hint_accepted_and_changes_nothing_else(self, client):
        plain = suggest(client).json()
        hinted = suggest(client, hint="o").json()
        assert hinted["suggestions"][0]["tokens"] == plain["suggestions"][0]["tokens"]

    def test_deterministic_across_requests(self, client):
        a = suggest(client).json()["suggestions"]
        b = suggest(client).json()["suggestions"]
        assert a == b


class TestStaticUi:
    def test_ui_served_when_directory_exists(self, subword, tmp_path):
        (tmp_path / "index.html").write_text("<html><body>workbench</body></html>")
        app = create_app(None, subword, ui_dir=str(tmp_path))
        client = TestClient(app)
        response = client.get("/ui/")
        assert response.status_code == 200
        assert "workbench" in response.text

    def test_no_ui_mount_without_directory(self, subword):
        client = TestClient(create_app(None, subword, ui_dir=None))
        assert client.get("/ui/").status_code == 404
