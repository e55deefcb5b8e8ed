import threading
from datetime import timedelta

import pytest
from fastapi.testclient import TestClient

from threatwarn.alerts import timeline, warning_to_record
from threatwarn.corpus import build_index
from threatwarn.ingest import Source, post_to_record
from threatwarn.pipeline import WarningEngine
from threatwarn.service import create_app

from conftest import (
    build_experts,
    build_golden_chain,
    build_mirai_scenario,
    make_post,
    ts,
)


@pytest.fixture
def scenario_state():
    feed, corpus = build_mirai_scenario()
    index = build_index(corpus)
    engine = WarningEngine(
        chain=build_golden_chain(), experts=build_experts(), index=index
    )
    store = engine.replay(feed).store
    return index, store


@pytest.fixture
def client(scenario_state):
    index, store = scenario_state
    return TestClient(create_app(index, store, excerpt_limit=10))


def corpus_record(post_id, text, when, source="darkweb"):
    return post_to_record(
        make_post(post_id, text, when, source=Source(source), author="seller")
    )


def test_healthz_reports_counts(client, scenario_state):
    index, store = scenario_state
    response = client.get("/healthz")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["documents"] == index.doc_count
    assert body["warnings"] == len(store)


def test_get_warnings_returns_wire_records(client, scenario_state):
    _, store = scenario_state
    response = client.get("/warnings")
    assert response.status_code == 200
    assert response.json() == [warning_to_record(w) for w in store]


def test_get_warnings_filters_by_term_and_time(client, scenario_state):
    _, store = scenario_state
    response = client.get(
        "/warnings",
        params={
            "term": "mirai",
            "since": "2016-09-05T00:00:00Z",
            "until": "2016-09-05T23:59:59Z",
        },
    )
    assert response.status_code == 200
    records = response.json()
    assert len(records) == 2
    assert all(r["term"] == "mirai" for r in records)
    assert all(r["generated_at"].startswith("2016-09-05") for r in records)


def test_get_warnings_rejects_bad_time_params(client):
    response = client.get("/warnings", params={"since": "whenever"})
    assert response.status_code == 400
    assert "since" in response.json()["detail"]


def test_get_warnings_treats_empty_params_as_absent(client, scenario_state):
    _, store = scenario_state
    response = client.get("/warnings?term=&since=&until=")
    assert response.status_code == 200
    assert len(response.json()) == len(store)


def test_timeline_unknown_term_is_empty_success(client):
    response = client.get("/terms/unknownterm/timeline")
    assert response.status_code == 200
    assert response.json() == []


def test_timeline_equals_library_result(client, scenario_state):
    _, store = scenario_state
    response = client.get("/terms/mirai/timeline")
    assert response.status_code == 200
    expected = [
        {
            "bucket_start": e.bucket_start.isoformat(),
            "warning_count": e.warning_count,
            "twitter_mentions": e.twitter_mentions,
            "darkweb_mentions": e.darkweb_mentions,
        }
        for e in timeline(store, "mirai")
    ]
    assert response.json() == expected


def test_mentions_equal_library_results(client, scenario_state):
    index, _ = scenario_state
    as_of = "2016-10-02T00:00:00Z"
    response = client.get("/terms/mirai/mentions", params={"as_of": as_of, "limit": 5})
    assert response.status_code == 200
    body = response.json()
    assert body["count"] == index.mention_count("mirai", ts(2016, 10, 2))
    expected_ids = [m.post_id for m in index.mention_posts("mirai", ts(2016, 10, 2), 5)]
    assert [p["post_id"] for p in body["posts"]] == expected_ids


def test_mentions_rejects_bad_params(client):
    assert client.get("/terms/mirai/mentions", params={"as_of": "nope"}).status_code == 400
    assert client.get("/terms/mirai/mentions", params={"limit": -1}).status_code == 400
    # non-integer limit fails fastapi validation with a 400-class status
    assert client.get("/terms/mirai/mentions", params={"limit": "many"}).status_code == 422


def test_post_then_read_your_write(client):
    before = client.get(
        "/terms/freshterm/mentions", params={"as_of": "2017-01-01T00:00:00Z"}
    ).json()["count"]
    response = client.post(
        "/corpus/posts",
        json=[corpus_record("svc1", "freshterm exploit chatter", ts(2016, 12, 1))],
    )
    assert response.status_code == 201
    assert response.json()["added"] == 1
    after = client.get(
        "/terms/freshterm/mentions", params={"as_of": "2017-01-01T00:00:00Z"}
    ).json()["count"]
    assert after == before + 1


def test_post_accepts_a_single_record_object(client):
    response = client.post(
        "/corpus/posts", json=corpus_record("svc-single", "solo post", ts(2016, 12, 2))
    )
    assert response.status_code == 201
    assert response.json()["added"] == 1


def test_post_duplicate_id_conflicts(client):
    record = corpus_record("svc-dup", "text", ts(2016, 12, 3))
    assert client.post("/corpus/posts", json=[record]).status_code == 201
    response = client.post("/corpus/posts", json=[record])
    assert response.status_code == 409
    response = client.post("/corpus/posts", json=[record, record])
    assert response.status_code == 409


def test_post_rejects_expert_feed_and_malformed_records(client):
    expert = corpus_record("svc-exp", "text", ts(2016, 12, 4), source="expert_feed")
    assert client.post("/corpus/posts", json=[expert]).status_code == 400
    assert client.post("/corpus/posts", json=[{"id": "svc-bad"}]).status_code == 400


def test_read_endpoints_are_side_effect_free(client):
    baseline = client.get("/healthz").json()
    client.get("/warnings")
    client.get("/terms/mirai/timeline")
    client.get("/terms/mirai/mentions", params={"as_of": "2017-01-01T00:00:00Z"})
    assert client.get("/healthz").json() == baseline


def test_concurrent_readers_see_consistent_prefixes(scenario_state):
    """Linearizability smoke test: counts observed during ingest must match
    some prefix of the sequential ingest order."""
    index, store = scenario_state
    app = create_app(index, store)
    client = TestClient(app)

    total = 40
    when = ts(2016, 12, 10)
    records = [
        corpus_record(f"conc{i}", "plantedconcurrency probe", when + timedelta(hours=i))
        for i in range(total)
    ]
    as_of = "2017-06-01T00:00:00Z"
    observed = []
    stop = threading.Event()

    def reader():
        while not stop.is_set():
            count = client.get(
                "/terms/plantedconcurrency/mentions", params={"as_of": as_of}
            ).json()["count"]
            observed.append(count)

    threads = [threading.Thread(target=reader) for _ in range(3)]
    for thread in threads:
        thread.start()
    for record in records:
        assert client.post("/corpus/posts", json=[record]).status_code == 201
    stop.set()
    for thread in threads:
        thread.join(timeout=10)

    final = client.get(
        "/terms/plantedconcurrency/mentions", params={"as_of": as_of}
    ).json()["count"]
    assert final == total
    # every observation equals a valid sequential state: an integer prefix size
    assert all(0 <= count <= total for count in observed)
    # each reader saw monotonically growing counts is not guaranteed across
    # threads, but observations never exceed what was ingested at the end
    assert observed, "readers never ran"
