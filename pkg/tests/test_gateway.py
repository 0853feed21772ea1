from __future__ import annotations

import json
import threading

import pytest
from fastapi.testclient import TestClient

from citescribe.corpus import Work
from citescribe.gateway.cli import main
from citescribe.gateway.config import ConfigError, ServiceConfig, load_config, parse_config_file
from citescribe.gateway.runtime import DemoGenerator, Runtime, resolve_references
from citescribe.gateway.service import create_app
from citescribe.providers import (
    GenerationRequest,
    HashEmbedder,
    ScriptedGenerator,
    ScriptedScorer,
    TransportError,
    fabrication_response,
)
from citescribe.providers.templating import load_templates
from citescribe.vectorindex import build_index, embed_works

from synth import make_corpus

# -- config -----------------------------------------------------------------


def test_parse_config_file_scalars():
    values = parse_config_file(
        '# comment\ncorpus_path = "data/works.jsonl"\nk = 5\nkeep_fraction = 0.7\n'
    )
    assert values == {"corpus_path": "data/works.jsonl", "k": 5, "keep_fraction": 0.7}


def test_env_overrides_file(tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text('provider_url = "http://from-file"\nk = 3\n')
    config = load_config(cfg, env={"PROVIDER_URL": "http://from-env"})
    assert config.provider_url == "http://from-env"
    assert config.k == 3


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text("mystery = 1\n")
    with pytest.raises(ConfigError, match="mystery"):
        load_config(cfg, env={})


def test_validate_paths_names_offending_key(tmp_path):
    config = ServiceConfig(corpus_path=str(tmp_path / "missing.jsonl"))
    with pytest.raises(ConfigError, match="corpus_path"):
        config.validate_paths()


def test_resolve_references_prefers_corpus_match():
    corpus = {
        "W1": Work(id="W1", title="A Known Paper", abstract="Full abstract.", year=2019)
    }
    stubs = [
        Work(id="bib:a", title="a known paper"),
        Work(id="bib:b", title="Unknown", abstract="Own abstract"),
        Work(id="bib:c", title="Unknown and abstractless"),
    ]
    resolved, report = resolve_references(stubs, corpus)
    assert [w.id for w in resolved] == ["W1", "bib:b"]
    assert report["dropped"] == ["bib:c"]


# -- HTTP service ----------------------------------------------------------------


LONG_PARA_1 = (
    "This paragraph is deliberately long enough to survive the stub filter and "
    "describes the proposed system architecture in detail, from ingestion through "
    "retrieval to the final ranking presented to the author in the editor."
)
LONG_PARA_2 = (
    "A further paragraph reports empirical results on the benchmark, demonstrating "
    "that the proposed ranking recovers the withheld citation more often than the "
    "distance-only baseline across every tested condition and corpus size."
)


def _service_runtime():
    corpus = make_corpus(40, seed=0)
    corpus.append(Work(id="C1", title="Canonical Anchor Work", abstract="Old but good.", year=2015))
    corpus.append(Work(id="C2", title="Recent Anchor Work", abstract="New and sharp.", year=2024))
    works_by_id = {w.id: w for w in corpus}
    embedder = HashEmbedder(dimension=32, seed=0)
    index = build_index(list(embed_works(corpus, embedder)))
    generator = ScriptedGenerator(
        [
            ("make up the title", fabrication_response("graph embeddings", "benchmark")),
            ("Respond YES or NO", "YES relevant."),
            ("Now summarize the results", "Summary of results."),
            ("Now write the paper introduction", "'''\nIntro citing [1] and [2].\n'''"),
        ]
    )
    return Runtime(
        config=ServiceConfig(seed=4, embed_dimension=32),
        templates=load_templates(),
        works_by_id=works_by_id,
        index=index,
        generator=generator,
        scorer=ScriptedScorer({}),
        embedder=embedder,
    )


INTRO_BIBTEX = (
    "@article{c1, title={Canonical Anchor Work}, year={2015}}\n"
    "@article{c2, title={Recent Anchor Work}, year={2024}}\n"
)
SUGGEST_BODY = {
    "document": "Prior systems ranked by distance. Our approach re-ranks. It works.",
    "cursor": 34,
    "bibtex": "",
}


def test_health_and_work_lookup():
    client = TestClient(create_app(_service_runtime()))
    health = client.get("/health").json()
    assert health["index_count"] == 42
    assert "version" in health
    assert client.get("/works/C1").json()["title"] == "Canonical Anchor Work"
    assert client.get("/works/NOPE").status_code == 404


def test_suggest_endpoint_deterministic():
    client = TestClient(create_app(_service_runtime()))
    first = client.post("/suggest", json=SUGGEST_BODY)
    assert first.status_code == 200
    body = first.json()
    assert body["suggestions"]
    assert set(body["timings_ms"]) == {"fabricate", "retrieve", "score"}
    assert [s["rank"] for s in body["suggestions"]] == list(
        range(1, len(body["suggestions"]) + 1)
    )
    again = TestClient(create_app(_service_runtime())).post("/suggest", json=SUGGEST_BODY)
    assert again.json()["suggestions"] == body["suggestions"]


def test_suggest_cursor_out_of_range_400():
    client = TestClient(create_app(_service_runtime()))
    response = client.post(
        "/suggest", json={"document": "short", "cursor": 10, "bibtex": ""}
    )
    assert response.status_code == 400
    assert response.json()["error"] == "cursor_out_of_range"


def test_suggest_malformed_body_400():
    client = TestClient(create_app(_service_runtime()))
    assert client.post("/suggest", json={"cursor": 1}).status_code == 400


def test_suggest_provider_down_502_names_stage():
    runtime = _service_runtime()

    class Down:
        def generate(self, request: GenerationRequest):
            raise TransportError("no route to model")

    runtime.generator = Down()
    client = TestClient(create_app(runtime))
    response = client.post("/suggest", json=SUGGEST_BODY)
    assert response.status_code == 502
    assert response.json()["stage"] == "fabricate"


def test_suggest_concurrent_requests_match_serial():
    runtime = _service_runtime()
    client = TestClient(create_app(runtime))
    serial = client.post("/suggest", json=SUGGEST_BODY).json()["suggestions"]

    results = {}

    def hit(tag):
        fresh = TestClient(create_app(_service_runtime()))
        results[tag] = fresh.post("/suggest", json=SUGGEST_BODY).json()["suggestions"]

    threads = [threading.Thread(target=hit, args=(i,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r == serial for r in results.values())


INTRO_BODY = {
    "manuscript": f"\\title{{Svc Test}}\n\n{LONG_PARA_1}\n\n{LONG_PARA_2}",
    "abstract": "We study citation suggestion.",
    "bibtex": INTRO_BIBTEX,
}


def test_intro_endpoint_full_trace():
    client = TestClient(create_app(_service_runtime()))
    response = client.post("/intro", json=INTRO_BODY)
    assert response.status_code == 200
    body = response.json()
    assert body["intro_text"] == "Intro citing [1] and [2]."
    trace = body["trace"]
    assert trace["y_years"] == 5  # default echoed
    assert trace["citation_map"] == {"1": "C1", "2": "C2"}
    assert len(trace["votes"]) == 4
    assert trace["kept_paragraphs"]


def test_intro_missing_abstract_400():
    client = TestClient(create_app(_service_runtime()))
    body = dict(INTRO_BODY)
    del body["abstract"]
    assert client.post("/intro", json=body).status_code == 400
    assert (
        client.post("/intro", json={**INTRO_BODY, "abstract": "   "}).status_code == 400
    )


def test_intro_unresolvable_refs_422():
    client = TestClient(create_app(_service_runtime()))
    body = {**INTRO_BODY, "bibtex": "@article{x, title={Nowhere To Be Found}}"}
    response = client.post("/intro", json=body)
    assert response.status_code == 422
    assert response.json()["error"] == "references_unresolved"


def test_intro_y_years_override_echoed():
    client = TestClient(create_app(_service_runtime()))
    response = client.post("/intro", json={**INTRO_BODY, "y_years": 3})
    assert response.json()["trace"]["y_years"] == 3


def test_response_bodies_round_trip_their_schema():
    client = TestClient(create_app(_service_runtime()))
    body = client.post("/suggest", json=SUGGEST_BODY).json()
    assert json.loads(json.dumps(body)) == body


# -- CLI ---------------------------------------------------------------------------


@pytest.fixture()
def clean_env(monkeypatch):
    for var in ("PROVIDER_URL", "PROVIDER_KEY", "EMBED_URL", "EMBED_KEY", "TEMPLATE_DIR"):
        monkeypatch.delenv(var, raising=False)


def _write_corpus(tmp_path, n=30):
    from citescribe.corpus import write_works

    corpus = make_corpus(n, seed=1)
    path = tmp_path / "corpus.jsonl"
    write_works(corpus, path)
    return corpus, path


def test_cli_ingest_fixture_report(works10_path, capsys, clean_env):
    assert main(["ingest", "--works", str(works10_path), "--min-citations", "1",
                 "--recent-uncited-months", "18", "--now", "2025-03-01"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report == {"parsed": 10, "skipped": 0, "filtered": 4, "retained": 6}


def test_cli_index_and_info(tmp_path, capsys, clean_env):
    _, corpus_path = _write_corpus(tmp_path)
    out = tmp_path / "index.bin"
    assert main(["index", "--works", str(corpus_path), "--out", str(out)]) == 0
    built = json.loads(capsys.readouterr().out)
    assert built["count"] == 30
    assert main(["index-info", str(out)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info == built


def test_cli_suggest_unconfigured_provider_error(tmp_path, capsys, clean_env):
    _, corpus_path = _write_corpus(tmp_path)
    index_path = tmp_path / "index.bin"
    main(["index", "--works", str(corpus_path), "--out", str(index_path)])
    capsys.readouterr()
    doc = tmp_path / "doc.txt"
    doc.write_text("A sentence to support. Another one.")
    code = main(
        ["suggest", "--document", str(doc), "--cursor", "10",
         "--works", str(corpus_path), "--index", str(index_path)]
    )
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("error: provider_unconfigured:")
    assert err.count("\n") == 1


def test_cli_suggest_with_mock_provider(tmp_path, capsys, clean_env):
    _, corpus_path = _write_corpus(tmp_path)
    index_path = tmp_path / "index.bin"
    main(["index", "--works", str(corpus_path), "--out", str(index_path)])
    capsys.readouterr()
    doc = tmp_path / "doc.txt"
    doc.write_text("A sentence to support. Another one.")
    code = main(
        ["suggest", "--document", str(doc), "--cursor", "10", "--provider", "mock",
         "--works", str(corpus_path), "--index", str(index_path), "--seed", "3"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["seed"] == 3
    assert payload["suggestions"]
    assert all(s["source"] == "index" for s in payload["suggestions"])


def test_cli_intro_with_mock_provider(tmp_path, capsys, clean_env):
    manuscript = tmp_path / "ms.tex"
    manuscript.write_text(f"\\title{{CLI Test}}\n\n{LONG_PARA_1}\n\n{LONG_PARA_2}")
    bib = tmp_path / "refs.bib"
    bib.write_text(
        "@article{r1, title={Old Ref}, year={2012}, abstract={Abstract one.}}\n"
        "@article{r2, title={New Ref}, year={2024}, abstract={Abstract two.}}\n"
    )
    out = tmp_path / "intro.txt"
    code = main(
        ["intro", "--manuscript", str(manuscript), "--bibtex", str(bib),
         "--abstract", "We study things.", "--provider", "mock", "--out", str(out)]
    )
    assert code == 0
    assert out.is_file()
    trace = json.loads((tmp_path / "intro.trace.json").read_text())
    assert trace["title"] == "CLI Test"
    assert trace["y_years"] == 5


def test_cli_eval_retrieval_oracle_row(tmp_path, capsys, clean_env):
    corpus, corpus_path = _write_corpus(tmp_path)
    papers = tmp_path / "papers.jsonl"
    with open(papers, "w") as handle:
        for p in range(4):
            sentences = [
                {"text": f"Paper {p} sentence {i} cites [CITE].", "citation_id": corpus[(p * 11 + i) % len(corpus)].id}
                for i in range(12)
            ]
            handle.write(json.dumps({
                "id": f"P{p}",
                "sentences": sentences,
                "reference_ids": [w.id for w in corpus[:15]],
            }) + "\n")
    out_dir = tmp_path / "report"
    code = main(
        ["eval-retrieval", "--papers", str(papers), "--works", str(corpus_path),
         "--ranker", "oracle", "--strategy", "random", "--n", "10", "--seed", "7",
         "--out-dir", str(out_dir)]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "seed=7" in out
    assert "1.000" in out
    report = json.loads((out_dir / "report.json").read_text())
    assert report["rows"][0]["mrr"] == 1.0
    assert (out_dir / "figures" / "mrr_by_condition.png").is_file()
    assert (out_dir / "report.csv").is_file()


def test_cli_eval_intro_with_mock(tmp_path, capsys, clean_env):
    pairs = tmp_path / "pairs.jsonl"
    pairs.write_text(
        json.dumps({"generated": "We built a system.", "original": "We built a system."})
        + "\n"
    )
    out_dir = tmp_path / "intro_report"
    code = main(
        ["eval-intro", "--pairs", str(pairs), "--provider", "mock",
         "--out-dir", str(out_dir)]
    )
    assert code == 0
    assert (out_dir / "figures" / "rouge_distribution.png").is_file()
    report = json.loads((out_dir / "report.json").read_text())
    assert report["pair_count"] == 1


def test_demo_generator_covers_all_stages(templates):
    gen = DemoGenerator()
    fab = gen.generate(GenerationRequest(prompt="...make up the title and abstract...\nSENTENCES: about topic modeling CITE-HERE here\n"))
    assert json.loads(fab.text)["title"]
    assert gen.generate(GenerationRequest(prompt="Respond YES or NO please")).text.split()[0] in ("YES", "NO")
    assert gen.generate(GenerationRequest(prompt="Now summarize the results in a few sentences.")).text
    intro = gen.generate(GenerationRequest(prompt="Now write the paper introduction.")).text
    assert "[1]" in intro
