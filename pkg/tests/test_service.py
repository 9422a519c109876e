import threading

import pytest
from fastapi.testclient import TestClient

from tableforge.corpus import example_to_dict
from tableforge.sampledata import make_assay_corpus
from tableforge.service import ReviewService, ServiceError, create_app


def _service(tmp_path, **kwargs):
    return ReviewService(tmp_path / "store", **kwargs)


def _seed_corpus(service, n=12, seed=3):
    corpus = make_assay_corpus(n, seed=seed)
    return service.add_corpus(
        [example_to_dict(ex) for ex in corpus.examples], "corpus-a"
    ), corpus


def test_fraction_zero_creates_no_tasks(tmp_path):
    service = _service(tmp_path)
    corpus_id, _ = _seed_corpus(service)
    run_id = service.create_run(corpus_id, "random", 0.0, 1)
    assert service.run_info(run_id)["tasks"]["total"] == 0


def test_fraction_one_creates_one_task_per_train_sample(tmp_path):
    service = _service(tmp_path)
    corpus_id, corpus = _seed_corpus(service)
    run_id = service.create_run(corpus_id, "random", 1.0, 1)
    assert service.run_info(run_id)["tasks"]["total"] == len(corpus.train())


def test_same_seed_selects_same_samples(tmp_path):
    service = _service(tmp_path)
    corpus_id, _ = _seed_corpus(service)
    first = service.create_run(corpus_id, "random", 0.5, 7)
    second = service.create_run(corpus_id, "random", 0.5, 7)
    samples = lambda run_id: sorted(
        service.tasks[t].sample_id for t in service.runs[run_id].task_ids
    )
    assert samples(first) == samples(second)


def test_unknown_corpus_is_not_found(tmp_path):
    service = _service(tmp_path)
    with pytest.raises(ServiceError) as err:
        service.create_run("nope", "random", 0.5, 1)
    assert err.value.status == 404


def test_claim_transitions_and_second_claim_differs(tmp_path):
    service = _service(tmp_path)
    corpus_id, _ = _seed_corpus(service)
    run_id = service.create_run(corpus_id, "random", 0.3, 1)
    first = service.next_task(run_id)
    second = service.next_task(run_id)
    assert first.status == "claimed"
    assert second.task_id != first.task_id


def test_empty_queue_returns_none(tmp_path):
    service = _service(tmp_path)
    corpus_id, _ = _seed_corpus(service)
    run_id = service.create_run(corpus_id, "random", 0.0, 1)
    assert service.next_task(run_id) is None


def test_concurrent_claims_never_double_assign(tmp_path):
    service = _service(tmp_path)
    corpus_id, _ = _seed_corpus(service, n=10)
    run_id = service.create_run(corpus_id, "random", 1.0, 1)
    claimed: list[str] = []
    lock = threading.Lock()

    def worker():
        while True:
            task = service.next_task(run_id)
            if task is None:
                return
            with lock:
                claimed.append(task.task_id)

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(claimed) == len(set(claimed))
    assert len(claimed) == service.run_info(run_id)["tasks"]["total"]


def test_submit_requires_claim(tmp_path):
    service = _service(tmp_path)
    corpus_id, _ = _seed_corpus(service)
    run_id = service.create_run(corpus_id, "random", 0.3, 1)
    pending = [service.tasks[t] for t in service.runs[run_id].task_ids][0]
    with pytest.raises(ServiceError) as err:
        service.submit_annotation(pending.task_id, "text")
    assert err.value.status == 409


def test_submit_marks_done_and_is_idempotent(tmp_path):
    service = _service(tmp_path)
    corpus_id, _ = _seed_corpus(service)
    run_id = service.create_run(corpus_id, "random", 0.3, 1)
    task = service.next_task(run_id)
    ack = service.submit_annotation(task.task_id, task.draft + " edited")
    assert ack["status"] == "done"
    again = service.submit_annotation(task.task_id, task.draft + " edited")
    assert again["duplicate"] is True
    with pytest.raises(ServiceError):
        service.submit_annotation(task.task_id, "different text")


def test_submission_learns_rules_into_run_memory(tmp_path):
    service = _service(tmp_path)
    corpus_id, _ = _seed_corpus(service)
    run_id = service.create_run(corpus_id, "oracle", 0.3, 1)
    task = service.next_task(run_id)
    corrected = task.draft.replace("300", "301") if "300" in task.draft else task.draft
    service.submit_annotation(task.task_id, corrected)
    if corrected != task.draft:
        assert service.runs[run_id].memory.rules


def test_replay_reproduces_state(tmp_path):
    service = _service(tmp_path)
    corpus_id, _ = _seed_corpus(service)
    run_id = service.create_run(corpus_id, "uncertainty", 0.4, 2)
    task = service.next_task(run_id)
    service.submit_annotation(task.task_id, task.draft)
    service.next_task(run_id)

    replayed = ReviewService(tmp_path / "store")
    assert replayed.corpora.keys() == service.corpora.keys()
    assert replayed.runs.keys() == service.runs.keys()
    assert {t: (v.status, v.annotation) for t, v in replayed.tasks.items()} == \
        {t: (v.status, v.annotation) for t, v in service.tasks.items()}
    assert replayed.runs[run_id].memory == service.runs[run_id].memory


def test_lease_expiry_recovers_claimed_tasks(tmp_path):
    now = [1000.0]
    service = ReviewService(tmp_path / "store", lease_seconds=60, clock=lambda: now[0])
    corpus_id, _ = _seed_corpus(service)
    run_id = service.create_run(corpus_id, "random", 0.1, 1)
    first = service.next_task(run_id)
    assert service.next_task(run_id) is None or \
        service.next_task(run_id).task_id != first.task_id
    now[0] += 61
    recovered = service.next_task(run_id)
    assert recovered is not None


def test_run_metrics_cover_test_split(tmp_path):
    service = _service(tmp_path)
    corpus_id, corpus = _seed_corpus(service)
    run_id = service.create_run(corpus_id, "random", 0.2, 1)
    report = service.run_metrics(run_id)
    assert 0.0 <= report.table_recall <= 1.0
    assert report.ter >= 0.0


# --- HTTP layer ---

@pytest.fixture()
def client(tmp_path):
    service = ReviewService(tmp_path / "store")
    return TestClient(create_app(service)), service


def _post_corpus(client, n=8):
    corpus = make_assay_corpus(n, seed=4)
    response = client.post("/api/corpora", json={
        "corpus_id": "web-corpus",
        "examples": [example_to_dict(ex) for ex in corpus.examples],
    })
    assert response.status_code == 200
    return response.json()["corpus_id"]


def test_http_full_annotation_flow(client):
    http, _ = client
    corpus_id = _post_corpus(http)
    response = http.post("/api/runs", json={
        "corpus_id": corpus_id, "strategy": "random", "fraction": 0.5, "seed": 1,
    })
    assert response.status_code == 200
    run_id = response.json()["run_id"]

    response = http.get(f"/api/runs/{run_id}/tasks/next")
    assert response.status_code == 200
    task = response.json()
    assert task["status"] == "claimed"
    assert task["tables"]

    response = http.post(
        f"/api/tasks/{task['task_id']}/annotation",
        json={"corrected_text": task["draft"]},
    )
    assert response.status_code == 200

    response = http.get(f"/api/tasks/{task['task_id']}")
    assert response.json()["status"] == "done"

    response = http.get(f"/api/runs/{run_id}/metrics")
    body = response.json()
    assert set(body) == {
        "table_recall", "bleu_extract", "rouge1", "rouge2", "rougeL", "bleu", "ter",
    }


def test_http_empty_queue_gives_204(client):
    http, _ = client
    corpus_id = _post_corpus(http)
    run_id = http.post("/api/runs", json={
        "corpus_id": corpus_id, "strategy": "random", "fraction": 0.0, "seed": 1,
    }).json()["run_id"]
    response = http.get(f"/api/runs/{run_id}/tasks/next")
    assert response.status_code == 204


def test_http_errors_have_code_and_message(client):
    http, _ = client
    response = http.get("/api/runs/does-not-exist")
    assert response.status_code == 404
    body = response.json()
    assert body["code"] == "not_found"
    assert "message" in body
