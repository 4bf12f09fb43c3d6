"""Exit criteria. Run with ``pytest tests/test_acceptance.py``; the terminal
summary prints one PASS/FAIL/SKIP line per criterion."""

import itertools
import random
import time

import pytest

from dgml.effort import (
    comparison_report,
    compute_ted,
    conventional_total,
    involvement_report,
    load_conventional_efforts,
    load_dgml_efforts,
)
from dgml.inference import RequirementSpec, compose_skeleton, search
from dgml.markup import parse_dgml, serialize_dgml, validate
from dgml.model import DgmlDocument
from dgml.repository import Repository

from generators import make_module, random_document, random_query, random_repo_modules

SEED = 20100101


def criterion(text):
    return pytest.mark.acceptance(criterion=text)


@criterion("TED reproduction: per-project totals (9, 13, 10, 5, 9, 10) exactly, < 1 s")
def test_ted_reproduction(data_dir):
    start = time.perf_counter()
    records = load_dgml_efforts(data_dir / "dgml_efforts.csv")
    teds = [compute_ted(r) for r in records]
    elapsed = time.perf_counter() - start
    assert teds == [9, 13, 10, 5, 9, 10]
    assert all(t == int(t) for t in teds)
    assert elapsed < 1.0


@criterion("Conventional totals (19, 37, 24, 12, 26, 27); savings (10, 24, 14, 7, 17, 17)")
def test_conventional_totals_and_savings(data_dir):
    dgml = load_dgml_efforts(data_dir / "dgml_efforts.csv")
    conv = load_conventional_efforts(data_dir / "conventional_efforts.csv")
    assert [conventional_total(r) for r in conv] == [19, 37, 24, 12, 26, 27]
    report = comparison_report(dgml, conv)
    assert [r.conventional_total for r in report.rows] == [19, 37, 24, 12, 26, 27]
    assert [r.savings for r in report.rows] == [10, 24, 14, 7, 17, 17]


@criterion("Involvement report reproduces the (user, agile-client) hour pairs exactly")
def test_involvement_pairs(data_dir):
    rows = involvement_report(
        load_dgml_efforts(data_dir / "dgml_efforts.csv"),
        load_conventional_efforts(data_dir / "conventional_efforts.csv"),
    )
    assert [(r.project, r.user_hours, r.ace_hours) for r in rows] == [
        ("Project1-4Modules", 6, 1),
        ("Project2-4Modules", 8, 2),
        ("Project3-5Modules", 7, 2),
        ("Project4-5Modules", 4, 1),
        ("Project5-5Modules", 7, 3),
        ("Project6-6Modules", 7, 2),
    ]


@criterion("Human-hours measurements: not reproducible at desk scale (substituted)")
def test_human_hours_not_reproducible():
    pytest.skip("human study; substituted by the arithmetic reproductions and property suites")


@criterion("Round trip: 500 random modules, parse(serialize(m)) = m, byte-identical re-serialization")
def test_round_trip_500():
    rng = random.Random(SEED)
    failures = []
    for i in range(500):
        doc = random_document(rng)
        assert validate(doc) == [], f"generator produced an invalid module at #{i}"
        text = serialize_dgml(doc)
        parsed = parse_dgml(text)
        if parsed != doc or serialize_dgml(parsed) != text:
            failures.append(i)
    assert failures == []


@criterion("Ranking invariance: 200 random repos, order-independent and sorted by (drf desc, match desc, name asc)")
def test_ranking_invariance_200(tmp_path):
    rng = random.Random(SEED + 1)
    violations = []
    for i in range(200):
        modules = random_repo_modules(rng)
        query = RequirementSpec.from_keywords(random_query(rng))
        orders = [modules, modules[::-1]]
        for _ in range(2):
            shuffled = modules[:]
            rng.shuffle(shuffled)
            orders.append(shuffled)
        outputs = []
        for j, order in enumerate(orders):
            repo = Repository.init(tmp_path / f"r{i}-{j}")
            for m in order:
                repo.add_module(DgmlDocument(m))
            outputs.append(search(repo, query))
        if any(out != outputs[0] for out in outputs[1:]):
            violations.append((i, "order-dependent"))
        keys = [(-c.drf, -c.match_score, c.module_name) for c in outputs[0]]
        if keys != sorted(keys) or len(set(keys)) != len(keys):
            violations.append((i, "unsorted"))
        if {c.module_name for c in outputs[0]} != {m.name for m in modules if m.keywords & query.keywords}:
            violations.append((i, "wrong result set"))
    assert violations == []


def _brute_force(modules, query):
    best = frozenset()
    for size in range(len(modules) + 1):
        for subset in itertools.combinations(modules, size):
            covered = query & frozenset().union(*(m.keywords for m in subset))
            if len(covered) > len(best):
                best = covered
    return best


@criterion("Greedy coverage oracle: 100 instances vs brute force over all subsets, < 30 s")
def test_greedy_oracle_100(tmp_path):
    rng = random.Random(SEED + 2)
    start = time.perf_counter()
    violations = []
    for i in range(100):
        modules = random_repo_modules(rng, max_modules=10)
        query = random_query(rng, max_keywords=8)
        assert len(modules) <= 10 and len(query) <= 8
        repo = Repository.init(tmp_path / f"g{i}")
        for m in modules:
            repo.add_module(DgmlDocument(m))
        sk = compose_skeleton(repo, RequirementSpec.from_keywords(query))
        covered = frozenset(sk.covered)
        coverable = _brute_force(modules, query)
        best_single = max(len(query & m.keywords) for m in modules)
        if covered != coverable:
            violations.append((i, "coverable keyword left uncovered"))
        if len(covered) < best_single:
            violations.append((i, "below best single module"))
    elapsed = time.perf_counter() - start
    assert violations == []
    assert elapsed < 30.0


@criterion("DRF accounting: random reuse/derive sequences (<= 50 ops), exact counts and index consistency across reopen")
def test_drf_accounting(tmp_path):
    rng = random.Random(SEED + 3)
    violations = []
    for trial in range(20):
        root = tmp_path / f"d{trial}"
        repo = Repository.init(root)
        initial = {}
        for k in range(rng.randint(1, 6)):
            name = f"base{k}"
            drf = rng.randint(0, 5)
            repo.add_module(make_module(name, rng.sample(["a", "b", "c", "d"], rng.randint(1, 3)), drf=drf))
            initial[name] = drf
        events = {name: 0 for name in initial}
        children = 0
        for _ in range(rng.randint(1, 50)):
            target = rng.choice(sorted(events))
            if rng.random() < 0.7:
                repo.record_reuse(target)
            else:
                child = f"child{children}"
                children += 1
                repo.derive_module(target, make_module(child, rng.sample(["a", "b", "e"], rng.randint(1, 2))))
                initial[child] = 0
                events[child] = 0
            events[target] += 1
        live_index = repo.index
        del repo
        reopened = Repository.open(root)
        for name, start in initial.items():
            if reopened.get(name).drf != start + events[name]:
                violations.append((trial, name))
        if reopened.rebuild_index() != live_index or reopened.index != live_index:
            violations.append((trial, "index"))
    assert violations == []
