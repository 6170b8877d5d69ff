import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from recapit.errors import ProviderError
from recapit.providers import (HashedBagOfWordsEmbedder, HttpEmbeddingProvider,
                               HttpTitleProvider, TfidfTitleProvider,
                               embedding_provider_from_env,
                               title_provider_from_env)


class _StubHandler(BaseHTTPRequestHandler):
    def log_message(self, fmt, *args):
        pass

    def do_POST(self):
        length = int(self.headers.get("Content-Length") or 0)
        body = json.loads(self.rfile.read(length).decode("utf-8"))
        if self.path == "/embed":
            payload = {"embeddings": [[1.0, 0.0] for _ in body["texts"]]}
        elif self.path == "/title":
            # echo the first words back, with the auth header visible
            auth = self.headers.get("Authorization", "")
            payload = {"title": f"Echo {body['text'].split()[0]} {auth[-3:]}"}
        elif self.path == "/broken":
            payload = {"nope": True}
        else:
            self.send_response(500)
            self.end_headers()
            return
        raw = json.dumps(payload).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)


@pytest.fixture(scope="module")
def stub_server():
    srv = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{srv.server_address[1]}"
    srv.shutdown()
    srv.server_close()


def test_http_embedding_provider(stub_server):
    provider = HttpEmbeddingProvider(stub_server + "/embed")
    vectors = provider.embed(["one", "two"])
    assert len(vectors) == 2
    assert np.array_equal(vectors[0], np.array([1.0, 0.0]))


def test_http_title_provider_sends_bearer(stub_server):
    provider = HttpTitleProvider(stub_server + "/title", api_key="xyz")
    (title,) = provider.titles(["hello world"])
    assert title == "Echo hello xyz"


def test_http_provider_malformed_payload(stub_server):
    provider = HttpEmbeddingProvider(stub_server + "/broken")
    with pytest.raises(ProviderError):
        provider.embed(["x"])


def test_http_provider_unreachable():
    provider = HttpTitleProvider("http://127.0.0.1:1/title", timeout=0.2)
    with pytest.raises(ProviderError):
        provider.titles(["x"])


def test_env_selection(stub_server, monkeypatch):
    monkeypatch.delenv("RECAPIT_EMBED_URL", raising=False)
    monkeypatch.delenv("RECAPIT_TITLE_URL", raising=False)
    assert isinstance(embedding_provider_from_env(), HashedBagOfWordsEmbedder)
    assert isinstance(title_provider_from_env(), TfidfTitleProvider)

    monkeypatch.setenv("RECAPIT_EMBED_URL", stub_server + "/embed")
    monkeypatch.setenv("RECAPIT_TITLE_URL", stub_server + "/title")
    monkeypatch.setenv("RECAPIT_API_KEY", "secret")
    embedder = embedding_provider_from_env()
    titler = title_provider_from_env()
    assert isinstance(embedder, HttpEmbeddingProvider)
    assert isinstance(titler, HttpTitleProvider)
    assert embedder.api_key == "secret"


def test_title_word_cap(stub_server):
    provider = HttpTitleProvider(stub_server + "/title")
    (title,) = provider.titles([" ".join(["w"] * 40)])
    assert len(title.split()) <= 12
