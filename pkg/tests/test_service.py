import json

import pytest
from fastapi.testclient import TestClient

from lemtag.corpus import parse_tsv
from lemtag.service import create_app, replay_journal

from conftest import FIXTURE_TSV, REFERENCE_LEMMAS, REFERENCE_MORPH, REFERENCE_POS


@pytest.fixture
def service_dir(tmp_path):
    corpus_dir = tmp_path / "corpora"
    corpus_dir.mkdir()
    (corpus_dir / "demo.tsv").write_text(FIXTURE_TSV, encoding="utf-8")
    (tmp_path / "lemmas.txt").write_text("\n".join(REFERENCE_LEMMAS) + "\n")
    (tmp_path / "pos.txt").write_text("\n".join(REFERENCE_POS) + "\n")
    (tmp_path / "morph.tsv").write_text(
        "\n".join(f"{c}\t{v}" for c, v in REFERENCE_MORPH) + "\n"
    )
    return tmp_path


@pytest.fixture
def client(service_dir):
    app = create_app(
        service_dir / "corpora",
        lemma_list=service_dir / "lemmas.txt",
        pos_list=service_dir / "pos.txt",
        morph_list=service_dir / "morph.tsv",
    )
    return TestClient(app)


def test_list_corpora(client):
    body = client.get("/corpora").json()
    assert body == {"corpora": [{"id": "demo", "sentences": 2, "tokens": 9}]}


def test_tokens_first_page(client):
    body = client.get("/corpus/demo/tokens", params={"offset": 0, "limit": 5}).json()
    assert body["total"] == 9
    assert len(body["tokens"]) == 5
    assert body["tokens"][0]["form"] == "Saint"
    assert body["tokens"][4] == {
        "sentence": 0, "token": 4, "form": ".", "lemma": ".", "pos": "PONfrt", "morph": "_",
    }


def test_tokens_offset_beyond_end(client):
    body = client.get("/corpus/demo/tokens", params={"offset": 100, "limit": 5}).json()
    assert body["tokens"] == []
    assert body["total"] == 9


def test_tokens_deterministic(client):
    first = client.get("/corpus/demo/tokens").content
    second = client.get("/corpus/demo/tokens").content
    assert first == second


def test_unknown_corpus_404(client):
    assert client.get("/corpus/nope/tokens").status_code == 404
    assert client.get("/corpus/nope/export").status_code == 404


def test_search_exact_lemma(client):
    body = client.post(
        "/corpus/demo/search", json={"filters": {"lemma": "là"}}
    ).json()
    assert body["total"] == 1
    assert body["matches"][0]["form"] == "la"
    assert [t["form"] for t in body["matches"][0]["context"]]  # carries context


def test_search_prefix_wildcard(client):
    body = client.post(
        "/corpus/demo/search", json={"filters": {"form": "la*"}}
    ).json()
    assert body["total"] == 2
    assert all(m["form"].startswith("la") for m in body["matches"])


def test_search_rejects_empty_filters_and_inner_wildcards(client):
    assert client.post("/corpus/demo/search", json={"filters": {}}).status_code == 400
    assert (
        client.post(
            "/corpus/demo/search", json={"filters": {"form": "c*l"}}
        ).status_code
        == 400
    )


def test_search_no_match_is_200_empty(client):
    body = client.post("/corpus/demo/search", json={"filters": {"form": "zzz"}})
    assert body.status_code == 200
    assert body.json() == {"total": 0, "matches": []}


def test_batch_edit_counts_and_applies(client):
    response = client.post(
        "/corpus/demo/batch-edit",
        json={"filters": {"form": "la"}, "column": "lemma", "value": "la_fixed"},
    )
    assert response.json() == {"edited": 2}
    body = client.post(
        "/corpus/demo/search", json={"filters": {"lemma": "la_fixed"}}
    ).json()
    assert body["total"] == 2


def test_batch_edit_zero_matches_no_journal(client, service_dir):
    response = client.post(
        "/corpus/demo/batch-edit",
        json={"filters": {"form": "zzz"}, "column": "lemma", "value": "x"},
    )
    assert response.json() == {"edited": 0}
    assert not (service_dir / "corpora" / "demo.journal.jsonl").exists()


def test_batch_edit_rejects_bad_column(client):
    response = client.post(
        "/corpus/demo/batch-edit",
        json={"filters": {"form": "la"}, "column": "form", "value": "x"},
    )
    assert response.status_code == 400


def test_batch_edit_rejects_invalid_pos_value(client):
    response = client.post(
        "/corpus/demo/batch-edit",
        json={"filters": {"form": "la"}, "column": "pos", "value": "NOT OK!"},
    )
    assert response.status_code == 400


def test_batch_edit_stale_preview_conflict(client):
    response = client.post(
        "/corpus/demo/batch-edit",
        json={
            "filters": {"form": "la"},
            "column": "lemma",
            "value": "x",
            "expected_count": 5,
        },
    )
    assert response.status_code == 409


def test_single_token_edit_via_coordinates(client):
    response = client.post(
        "/corpus/demo/batch-edit",
        json={"sentence": 0, "token": 0, "column": "lemma", "value": "Saint"},
    )
    assert response.json() == {"edited": 1}
    tokens = client.get("/corpus/demo/tokens").json()["tokens"]
    assert tokens[0]["lemma"] == "Saint"


def test_journal_replay_reproduces_working_document(client, service_dir):
    client.post(
        "/corpus/demo/batch-edit",
        json={"filters": {"form": "la"}, "column": "lemma", "value": "il"},
    )
    client.post(
        "/corpus/demo/batch-edit",
        json={"sentence": 1, "token": 1, "column": "pos", "value": "PROper"},
    )
    exported = client.get("/corpus/demo/export").content

    journal_path = service_dir / "corpora" / "demo.journal.jsonl"
    entries = [json.loads(l) for l in journal_path.read_text().splitlines()]
    original = parse_tsv(FIXTURE_TSV, doc_id="demo")
    replayed = replay_journal(original, entries)
    from lemtag.corpus import write_tsv

    assert write_tsv(replayed) == exported


def test_journal_survives_restart(client, service_dir):
    client.post(
        "/corpus/demo/batch-edit",
        json={"filters": {"form": "la"}, "column": "lemma", "value": "il"},
    )
    exported = client.get("/corpus/demo/export").content
    fresh = TestClient(
        create_app(
            service_dir / "corpora",
            lemma_list=service_dir / "lemmas.txt",
            pos_list=service_dir / "pos.txt",
            morph_list=service_dir / "morph.tsv",
        )
    )
    assert fresh.get("/corpus/demo/export").content == exported


def test_unallowed_lifecycle(client):
    assert client.get("/corpus/demo/unallowed").json() == {
        "unallowed_lemmas": [],
        "unallowed_pos": [],
        "unallowed_morph": [],
    }
    client.post(
        "/corpus/demo/batch-edit",
        json={"sentence": 0, "token": 0, "column": "lemma", "value": "sainz9"},
    )
    report = client.get("/corpus/demo/unallowed").json()
    assert report["unallowed_lemmas"] == [
        {"doc": "demo", "sentence": 0, "token": 0, "value": "sainz9"}
    ]
    client.post(
        "/corpus/demo/batch-edit",
        json={"sentence": 0, "token": 0, "column": "lemma", "value": "saint"},
    )
    assert client.get("/corpus/demo/unallowed").json()["unallowed_lemmas"] == []


def test_export_without_edits_matches_canonical_form(client):
    from lemtag.corpus import write_tsv

    exported = client.get("/corpus/demo/export").content
    assert exported == write_tsv(parse_tsv(FIXTURE_TSV, doc_id="demo"))
    parse_tsv(exported, doc_id="demo")  # round-trips cleanly


def test_export_reflects_batch_edit(client):
    client.post(
        "/corpus/demo/batch-edit",
        json={"filters": {"lemma": "là"}, "column": "lemma", "value": "la2"},
    )
    assert b"la2" in client.get("/corpus/demo/export").content


def test_search_partition_for_exact_filter(client):
    total = client.get("/corpus/demo/tokens").json()["total"]
    matching = client.post(
        "/corpus/demo/search", json={"filters": {"pos": "PONfrt"}}
    ).json()["total"]
    non_matching = 0
    tokens = client.get("/corpus/demo/tokens", params={"limit": 100}).json()["tokens"]
    non_matching = sum(1 for t in tokens if t["pos"] != "PONfrt")
    assert matching + non_matching == total


def test_tag_without_models_503(client):
    response = client.post("/tag", json={"text": "veez\nla\n"})
    assert response.status_code == 503


def test_randomized_edit_sequences_replay(client, service_dir):
    import random

    rng = random.Random(13)
    tokens = client.get("/corpus/demo/tokens", params={"limit": 100}).json()["tokens"]
    for _ in range(12):
        target = rng.choice(tokens)
        client.post(
            "/corpus/demo/batch-edit",
            json={
                "sentence": target["sentence"],
                "token": target["token"],
                "column": "lemma",
                "value": f"edit{rng.randint(0, 99)}",
            },
        )
    journal_path = service_dir / "corpora" / "demo.journal.jsonl"
    entries = [json.loads(l) for l in journal_path.read_text().splitlines()]
    replayed = replay_journal(parse_tsv(FIXTURE_TSV, doc_id="demo"), entries)
    from lemtag.corpus import write_tsv

    assert write_tsv(replayed) == client.get("/corpus/demo/export").content


@pytest.fixture(scope="module")
def tagging_client(tmp_path_factory):
    from lemtag.preprocess import SplitSet
    from lemtag.synthetic import regular_language
    from lemtag.tagger import TrainConfig, save_model, train

    root = tmp_path_factory.mktemp("tagging")
    corpus_dir = root / "corpora"
    corpus_dir.mkdir()
    doc = regular_language(16, seed=21, n_stems=6)
    from lemtag.corpus import write_tsv

    (corpus_dir / "synth.tsv").write_bytes(write_tsv(doc))

    sents = list(doc.sentences)
    splits = SplitSet(tuple(sents[:14]), tuple(sents[14:]), (), 0, (0.8, 0.1, 0.1))
    model_dir = root / "models"
    model_dir.mkdir()
    for task in ("LEMMA", "POS", "NOMB"):
        config = TrainConfig(
            task=task, cemb_size=32, hidden_size=32, max_epochs=2,
            noise_probability=0.0, seed=5,
        )
        save_model(train(config, splits), model_dir / f"{task}.lmtg")
    app = create_app(corpus_dir, model_dir=model_dir)
    return TestClient(app)


def test_tag_three_forms_three_rows(tagging_client):
    body = tagging_client.post("/tag", json={"text": "brena\nmusir\nvelu\n"}).json()
    (sentence,) = body["sentences"]
    assert len(sentence) == 3
    assert all(set(t) == {"form", "lemma", "pos", "morph"} for t in sentence)


def test_tag_empty_body_400(tagging_client):
    assert tagging_client.post("/tag", json={"text": "\n\n"}).status_code == 400


def test_tag_pos_stays_in_training_label_set(tagging_client):
    labels = {"NOMcom", "VERcjg", "VERinf", "ADJqua", "PONfrt"}
    body = tagging_client.post(
        "/tag", json={"text": "zzzq\nunseen\n\nxyz\n"}
    ).json()
    for sentence in body["sentences"]:
        for token in sentence:
            assert token["pos"] in labels


def test_tag_tsv_output_parses(tagging_client):
    response = tagging_client.post("/tag?format=tsv", json={"text": "brena\nmusir\n"})
    doc = parse_tsv(response.content, doc_id="tagged")
    assert doc.n_tokens == 2


def test_unallowed_consistent_with_offline_validation(client, service_dir):
    from lemtag.corpus import load_reference_lists, validate as validate_offline

    client.post(
        "/corpus/demo/batch-edit",
        json={"filters": {"form": "la"}, "column": "lemma", "value": "hapax9"},
    )
    served = client.get("/corpus/demo/unallowed").json()
    exported = client.get("/corpus/demo/export").content
    refs = load_reference_lists(
        service_dir / "lemmas.txt", service_dir / "pos.txt", service_dir / "morph.tsv"
    )
    offline = validate_offline(parse_tsv(exported, doc_id="demo"), refs)
    assert len(served["unallowed_lemmas"]) == len(offline.unallowed_lemmas)
    assert {i["value"] for i in served["unallowed_lemmas"]} == {
        i.value for i in offline.unallowed_lemmas
    }
