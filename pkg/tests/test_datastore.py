import gzip
import json
from importlib import resources

import jsonschema
import numpy as np
import pytest
from _fixtures import random_archive

from mtobench import datastore
from mtobench.datastore import (
    ArchiveError,
    IntegrityError,
    MergeCompatibilityError,
    MergeConflictError,
    SchemaVersionError,
    empty_archive,
    merge,
    merge_algorithms,
    merge_problems,
    merge_reps,
    round_array,
    set_precision,
    split,
    subset,
)
from mtobench.metrics import compute_metric


def _schema(name="mtodata.schema.json"):
    return json.loads(resources.files("mtobench").joinpath("schemas", name).read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def test_round_trip_plain_and_gzip(tmp_path, rng):
    data = random_archive(rng, P=2, A=2, R=3, save_dec=True, fail_prob=0.1)
    compute_metric(data, "obj")
    for name in ("a.json", "a.json.gz"):
        path = datastore.save(data, tmp_path / name)
        back = datastore.load(path)
        assert back == data
        np.testing.assert_array_equal(back.metrics["obj"].table, data.metrics["obj"].table)
    assert (tmp_path / "a.json.gz").read_bytes()[:2] == b"\x1f\x8b"
    assert not list(tmp_path.glob("*.tmp"))


def test_round_trip_mo_and_nonfinite(tmp_path, rng):
    mo = random_archive(rng, mo=True, save_dec=True)
    assert datastore.load(datastore.save(mo, tmp_path / "m.json")) == mo
    nf = random_archive(rng, nonfinite=True)
    back = datastore.load(datastore.save(nf, tmp_path / "n.json"))
    assert back == nf
    first = next(r for r in back.results[0][0] if r is not None)
    assert first.obj[0][0] == np.inf


def test_save_is_byte_deterministic(tmp_path, rng):
    data = random_archive(rng)
    a = datastore.save(data, tmp_path / "a.json.gz").read_bytes()
    b = datastore.save(data.copy(), tmp_path / "b.json.gz").read_bytes()
    assert a == b


def test_corrupted_and_truncated(tmp_path, rng):
    data = random_archive(rng)
    raw = datastore.dumps(data)
    with pytest.raises(IntegrityError):
        datastore.loads(raw[: len(raw) // 2])
    tampered = raw.replace(b'"reps":3', b'"reps":4', 1)
    with pytest.raises(IntegrityError):
        datastore.loads(tampered)
    gz = gzip.compress(raw)
    with pytest.raises(IntegrityError):
        datastore.loads(gz[:-20])
    with pytest.raises(IntegrityError):
        datastore.loads(b"[1, 2]")


def test_version_mismatch(rng):
    doc = json.loads(datastore.dumps(random_archive(rng)))
    doc["schema_version"] = "2.0"
    doc["checksum"] = datastore._checksum(doc)
    with pytest.raises(SchemaVersionError):
        datastore.loads(datastore.canonical_json(doc))
    with pytest.raises(SchemaVersionError):
        datastore.loads(b'{"format": "other"}')


def test_unknown_fields_kept(tmp_path, rng):
    doc = json.loads(datastore.dumps(random_archive(rng)))
    doc["note"] = {"by": "lab"}
    doc["schema_version"] = "1.3"
    doc["checksum"] = datastore._checksum(doc)
    data = datastore.loads(datastore.canonical_json(doc))
    assert data.extra == {"note": {"by": "lab"}}
    again = json.loads(datastore.dumps(data))
    assert again["note"] == {"by": "lab"} and again["schema_version"] == "1.3"


def test_metrics_absent_when_empty(rng):
    data = datastore.loads(datastore.dumps(random_archive(rng)))
    assert data.metrics == {}


def test_validate_rejects_bad_shapes(rng):
    data = random_archive(rng)
    with pytest.raises(ArchiveError):
        datastore.ExperimentData(data.algorithms, data.problems, data.results, data.run_times, data.reps,
                                 data.G, seeds=[1])


def test_schema_validation(rng):
    schema = _schema()
    for kwargs in ({}, {"mo": True, "save_dec": True}, {"fail_prob": 0.3}, {"nonfinite": True}):
        data = random_archive(rng, **kwargs)
        compute_metric(data, "obj" if not kwargs.get("mo") else "igd")
        jsonschema.validate(json.loads(datastore.dumps(data)), schema)
    jsonschema.validate(json.loads(datastore.dumps(empty_archive())), schema)


def test_merge_reps(rng):
    a = random_archive(rng, R=10, base_seed=1, names=["X", "Y"], alg_names=["M", "N"])
    b = random_archive(np.random.default_rng(0), R=10, base_seed=11, names=["X", "Y"], alg_names=["M", "N"])
    b.problems, b.algorithms = a.problems, a.algorithms
    b.results = [[[r for r in cells] for cells in row] for row in b.results]
    # shapes must be consistent for both fixtures after borrowing metadata
    b = _align(b, a)
    m = merge_reps(a, b)
    assert m.reps == 20 and m.seeds == list(range(1, 21))
    left, right = split(m, "reps", 10)
    assert left == a and right == b
    assert merge_reps(a, empty_archive(a.algorithms, a.problems, a.G)) == a
    assert merge_reps(empty_archive(), a) == a


def _align(b, a):
    """Rebuild ``b`` with ``a``'s metadata using per-task results of matching shape."""
    rng = np.random.default_rng(9)
    from _fixtures import so_result

    results = [[[so_result(rng, a.problems[p]["T"], a.G, a.problems[p]["D"], seed=s) for s in b.seeds]
                for _ in range(a.A)] for p in range(a.P)]
    return datastore.ExperimentData(a.algorithms, a.problems, results, np.ones((a.P, a.A, b.reps)), b.reps,
                                    a.G, a.save_dec, b.base_seed, b.seeds)


def test_merge_reps_incompatible(rng):
    a = random_archive(rng, G=5, base_seed=0)
    b = _align(random_archive(rng, base_seed=3), a)
    b.G = 6
    with pytest.raises(MergeCompatibilityError) as err:
        merge_reps(a, b)
    assert err.value.field == "G"
    c = _align(random_archive(rng, base_seed=3), a)
    c.algorithms = [dict(x, params={"N": 1}) for x in c.algorithms]
    with pytest.raises(MergeCompatibilityError) as err:
        merge_reps(a, c)
    assert err.value.field == "algorithms"


def test_merge_algorithms_and_problems(rng):
    a = random_archive(rng, P=2, A=2, R=3, base_seed=5, alg_names=["A1", "A2"], names=["P1", "P2"])
    b = subset(a, algorithms=[0, 1])
    b.algorithms = [dict(x, name=x["name"] + "b") for x in b.algorithms]
    m = merge_algorithms(a, b)
    assert m.A == 4
    for p in range(2):
        for r in range(3):
            assert m.results[p][2][r] is None or np.array_equal(m.results[p][2][r].obj[0], a.results[p][0][r].obj[0])
    with pytest.raises(MergeConflictError):
        merge_algorithms(a, a)
    parts = split(m, "algorithms")
    assert len(parts) == 4 and all(x.A == 1 for x in parts)
    assert merge(parts, "algorithms") == m
    c = subset(a, problems=[1])
    with pytest.raises(MergeConflictError):
        merge_problems(a, c)
    c.problems = [dict(c.problems[0], name="P3")]
    mp = merge_problems(a, c)
    assert mp.problem_names == ["P1", "P2", "P3"]
    d = subset(a, reps=[0, 1])
    with pytest.raises(MergeCompatibilityError) as err:
        merge_problems(a, d)
    assert err.value.field == "reps"


def test_split_selectors(rng):
    data = random_archive(rng, P=3, A=3, R=8, base_seed=1, fail_prob=0.2)
    first = split(data, "reps", [list(range(5))])[0]
    assert first.reps == 5 and first.seeds == [1, 2, 3, 4, 5] and first.base_seed == 1
    for r in range(5):
        assert (first.results[0][0][r] is None) == (data.results[0][0][r] is None)
    named = split(data, "problems", [["P1", "P3"], ["P2"]])
    assert [x.problem_names for x in named] == [["P1", "P3"], ["P2"]]
    tail = split(data, "reps", 3)[1]
    assert tail.base_seed == 4
    assert all(f["rep"] < 5 for f in tail.failures)
    assert merge(split(data, "reps", 3), "reps") == data
    with pytest.raises(ValueError):
        split(data, "problems", [["nope"]])


def test_split_drops_metrics(rng):
    data = random_archive(rng)
    compute_metric(data, "obj")
    assert all(part.metrics == {} for part in split(data, "reps"))


def test_set_precision(rng):
    assert round_array([1.23456, -2.345, 0.125, np.inf], 2).tolist() == [1.23, -2.35, 0.13, np.inf]
    data = random_archive(rng, save_dec=True)
    compute_metric(data, "obj")
    once = set_precision(data, 2)
    assert once.metrics == {}
    assert set_precision(once, 2) == once
    for p in range(data.P):
        for a in range(data.A):
            for r in range(data.reps):
                src, dst = data.results[p][a][r], once.results[p][a][r]
                if src is None:
                    continue
                np.testing.assert_array_equal(src.dec[0], dst.dec[0])
                np.testing.assert_allclose(dst.obj[0], np.round(src.obj[0], 2), atol=1e-2)
    with pytest.raises(ValueError):
        set_precision(data, -1)


def test_zero_run_times(rng):
    data = random_archive(rng)
    compute_metric(data, "runtime")
    z = datastore.zero_run_times(data)
    assert np.all(z.run_times == 0) and "runtime" not in z.metrics
    assert np.any(data.run_times != 0)
