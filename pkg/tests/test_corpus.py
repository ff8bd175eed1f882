"""Harvest fidelity, subset builders, task matrix, and vuln import."""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone

import pytest
from helpers import make_sample

from codeprov import (
    ChangeKind,
    CommitFileChange,
    DataError,
    HarvestSpec,
    LanguageId,
    ProvenanceLabel,
    PurityViolationError,
    build_ai_subset,
    build_human_subset,
    build_wild_corpus,
    dedup,
    filter_code_files,
    harvest_repo,
    import_vuln_records,
    load_task_matrix,
)
from codeprov.corpus import (
    DEFAULT_HUMAN_WINDOW,
    GeneratorResponse,
    GitError,
    cascade_fragment_labeler,
    change_samples,
    final_state_samples,
    subprocess_generator,
)
from codeprov.records import read_records, write_records


def _utc(*args) -> datetime:
    return datetime(*args, tzinfo=timezone.utc)


def wild_spec(start=(2022, 1, 1), end=(2022, 2, 1), max_size=64 * 1024) -> HarvestSpec:
    return HarvestSpec(window_start=_utc(*start), window_end=_utc(*end), max_file_size=max_size)


EXPECTED_FIRST_PARENT = [
    ("a.py", ChangeKind.ADDED),
    ("b.js", ChangeKind.ADDED),
    ("a.py", ChangeKind.MODIFIED),
    ("src/util.go", ChangeKind.ADDED),
    ("b.js", ChangeKind.DELETED),
    ("a.py", ChangeKind.DELETED),
    ("core.py", ChangeKind.ADDED),
    ("src/util.go", ChangeKind.MODIFIED),
    ("feat.rb", ChangeKind.ADDED),
    ("core.py", ChangeKind.MODIFIED),
    ("README.md", ChangeKind.ADDED),
]


def test_harvest_fixture_repo_exact_change_set(fixture_repo):
    changes, diagnostics = harvest_repo(wild_spec(), fixture_repo)
    assert [(c.path, c.change_kind) for c in changes] == EXPECTED_FIRST_PARENT
    messages = [d.message for d in diagnostics]
    assert len(diagnostics) == 2
    assert any("binary" in m and "data.bin" in m for m in messages)
    assert any("oversized" in m and "big.txt" in m for m in messages)


def test_harvest_contents_track_renames_and_edits(fixture_repo):
    changes, _ = harvest_repo(wild_spec(), fixture_repo)
    by_event = {(c.path, c.change_kind): c for c in changes}
    add = by_event[("a.py", ChangeKind.ADDED)]
    assert add.pre_content is None and add.post_content == "print('a1')\n"
    mod = by_event[("a.py", ChangeKind.MODIFIED)]
    assert mod.pre_content == "print('a1')\n"
    assert mod.post_content == "print('a2')\nprint('more')\n"
    # rename surfaces as delete + add carrying the same content
    assert by_event[("a.py", ChangeKind.DELETED)].pre_content == mod.post_content
    assert by_event[("core.py", ChangeKind.ADDED)].post_content == mod.post_content
    # the merge commit contributes the feature branch file via its first-parent diff
    merge_add = by_event[("feat.rb", ChangeKind.ADDED)]
    assert merge_add.post_content == "puts 'feature'\n"


def test_harvest_window_is_half_open(fixture_repo):
    changes, _ = harvest_repo(wild_spec(start=(2022, 1, 3), end=(2022, 1, 6)), fixture_repo)
    assert [(c.path, c.change_kind) for c in changes] == [
        ("a.py", ChangeKind.MODIFIED),
        ("src/util.go", ChangeKind.ADDED),
        ("b.js", ChangeKind.DELETED),
    ]


def test_harvest_window_excluding_everything_is_empty(fixture_repo):
    changes, diagnostics = harvest_repo(wild_spec(start=(2030, 1, 1), end=(2031, 1, 1)), fixture_repo)
    assert changes == [] and diagnostics == []


def test_harvest_window_soundness_property(fixture_repo):
    spec = wild_spec(start=(2022, 1, 2), end=(2022, 1, 10))
    changes, _ = harvest_repo(spec, fixture_repo)
    assert changes
    for change in changes:
        assert spec.start_epoch <= change.timestamp < spec.end_epoch


def test_harvest_determinism(fixture_repo):
    first = harvest_repo(wild_spec(), fixture_repo)
    second = harvest_repo(wild_spec(), fixture_repo)
    assert first == second


def test_harvest_rejects_non_repo(tmp_path):
    with pytest.raises(GitError, match="not a readable git repository"):
        harvest_repo(wild_spec(), tmp_path)


def test_spec_validation():
    with pytest.raises(DataError):
        HarvestSpec(window_start=_utc(2022, 2, 1), window_end=_utc(2022, 1, 1))
    with pytest.raises(DataError):
        HarvestSpec(window_start=_utc(2022, 1, 1), window_end=_utc(2022, 2, 1), extension_allowlist=frozenset())
    with pytest.raises(DataError):
        HarvestSpec(window_start=_utc(2022, 1, 1), window_end=_utc(2022, 2, 1), max_file_size=0)


# -- filtering and staging -----------------------------------------------------


def _change(path, kind=ChangeKind.ADDED, repo="r", commit="abc123", ts=100, pre=None, post="x\n"):
    if kind is ChangeKind.DELETED:
        pre, post = pre or "x\n", None
    if kind is ChangeKind.MODIFIED and pre is None:
        pre = "old\n"
    return CommitFileChange(repo=repo, commit=commit, timestamp=ts, path=path,
                            change_kind=kind, pre_content=pre, post_content=post)


def test_filter_code_files():
    changes = [_change("a.py"), _change("b.md"), _change("c.json")]
    kept = filter_code_files(changes, {".py"})
    assert [c.path for c in kept] == ["a.py"]
    assert filter_code_files([], {".py"}) == []
    assert filter_code_files(kept, {".py"}) == kept  # idempotent


def test_final_state_replay_keeps_last_survivor():
    changes = [
        _change("f.py", ChangeKind.ADDED, ts=1, post="v1\n"),
        _change("f.py", ChangeKind.MODIFIED, ts=2, pre="v1\n", post="v2\n"),
        _change("gone.py", ChangeKind.ADDED, ts=3),
        _change("gone.py", ChangeKind.DELETED, ts=4),
    ]
    samples = final_state_samples(changes)
    assert len(samples) == 1
    assert samples[0].content == "v2\n"
    assert samples[0].origin.path == "f.py"
    assert samples[0].label is ProvenanceLabel.UNKNOWN


def test_change_samples_per_commit_granularity():
    changes = [
        _change("f.py", ChangeKind.ADDED, ts=1, post="v1\n"),
        _change("f.py", ChangeKind.MODIFIED, ts=2, pre="v1\n", post="v2\n"),
        _change("f.py", ChangeKind.DELETED, ts=3),
    ]
    samples = change_samples(changes)
    assert [s.content for s in samples] == ["v1\n", "v2\n"]


def test_build_human_subset_rejects_late_window(human_repo):
    spec = HarvestSpec(window_start=_utc(2008, 1, 1), window_end=_utc(2012, 1, 1))
    with pytest.raises(PurityViolationError, match="2011-01-01"):
        build_human_subset(spec, [human_repo])


def test_build_human_subset_final_state(human_repo):
    spec = HarvestSpec(window_start=DEFAULT_HUMAN_WINDOW[0], window_end=DEFAULT_HUMAN_WINDOW[1])
    samples, diagnostics = build_human_subset(spec, [human_repo])
    assert diagnostics == []
    assert len(samples) == 2
    by_path = {s.origin.path: s for s in samples}
    assert by_path["h.py"].content == "def hello():\n    return 'v2'\n"
    assert by_path["h.py"].language is LanguageId.PYTHON
    assert by_path["lib.rb"].language is LanguageId.RUBY
    for sample in samples:
        assert sample.label is ProvenanceLabel.HUMAN
        assert sample.origin.repo == "ancient"
        assert sample.origin.timestamp is not None


def test_build_wild_corpus_final_state(fixture_repo):
    samples, changes, diagnostics = build_wild_corpus(wild_spec(), [fixture_repo])
    # surviving code files at window end: core.py, feat.rb, src/util.go
    assert sorted(s.origin.path for s in samples) == ["core.py", "feat.rb", "src/util.go"]
    assert len(changes) == len(EXPECTED_FIRST_PARENT)
    per_commit, _, _ = build_wild_corpus(wild_spec(), [fixture_repo], per_commit=True)
    assert len(per_commit) > len(samples)


def test_duplicate_contents_retained_until_dedup():
    changes = [
        _change("x.py", repo="r1", post="same\n"),
        _change("y.py", repo="r2", post="same\n"),
    ]
    samples = final_state_samples(changes)
    assert len(samples) == 2  # staging keeps both
    kept, removed = dedup(samples)
    assert len(kept) == 1 and removed == 1


def test_dedup_identity_cases():
    distinct = [make_sample("a", "one\n"), make_sample("b", "two\n")]
    kept, removed = dedup(distinct)
    assert kept == distinct and removed == 0
    again, removed = dedup(kept)
    assert again == kept and removed == 0


# -- task matrix and AI subset ---------------------------------------------------


def test_packaged_task_matrix_shape():
    matrix = load_task_matrix()
    assert len(matrix.topics) == 33
    assert matrix.total_tasks == 165
    assert all(len(matrix.tasks[t]) == 5 for t in matrix.topics)
    assert len(matrix.generator_ids) == 11
    assert len(matrix.cells()) == 165 * 11 == 1815


def test_build_ai_subset_full_coverage():
    matrix = load_task_matrix()
    matrix = type(matrix)(
        topics=matrix.topics[:1], tasks={matrix.topics[0]: matrix.tasks[matrix.topics[0]][:2]},
        generator_ids=matrix.generator_ids[:2],
    )
    responses = [
        GeneratorResponse(task_id, model, f"print({i})\n")
        for i, (task_id, model) in enumerate(matrix.cells())
    ]
    samples, diagnostics = build_ai_subset(matrix, responses)
    assert len(samples) == 4
    assert diagnostics == []
    for sample in samples:
        assert sample.label is ProvenanceLabel.AI
        assert sample.origin.generator in matrix.generator_ids
        assert sample.origin.path in matrix.task_ids()


def test_build_ai_subset_reports_missing_cells():
    matrix = load_task_matrix()
    matrix = type(matrix)(
        topics=matrix.topics[:1], tasks={matrix.topics[0]: matrix.tasks[matrix.topics[0]][:2]},
        generator_ids=("model-a",),
    )
    covered = matrix.cells()[0]
    samples, diagnostics = build_ai_subset(matrix, [GeneratorResponse(*covered, "x = 1\n")])
    assert len(samples) == 1
    missing = [d for d in diagnostics if "missing cell" in d.message]
    assert len(missing) == 1
    assert matrix.cells()[1][0] in missing[0].message
    # coverage accounting: produced + missing tiles the grid
    assert len(samples) + len(missing) == len(matrix.cells())


def test_build_ai_subset_flags_strays_and_duplicates():
    matrix = load_task_matrix()
    matrix = type(matrix)(
        topics=matrix.topics[:1], tasks={matrix.topics[0]: matrix.tasks[matrix.topics[0]][:1]},
        generator_ids=("model-a",),
    )
    cell = matrix.cells()[0]
    responses = [
        GeneratorResponse(*cell, "a\n"),
        GeneratorResponse(*cell, "b\n"),
        GeneratorResponse("ghost-topic/1", "model-a", "c\n"),
    ]
    samples, diagnostics = build_ai_subset(matrix, responses)
    assert len(samples) == 1 and samples[0].content == "a\n"
    assert any("duplicate" in d.message for d in diagnostics)
    assert any("outside task matrix" in d.message for d in diagnostics)


def test_subprocess_generator_adapter():
    script = (
        "import json, sys\n"
        "for line in sys.stdin:\n"
        "    req = json.loads(line)\n"
        "    req['content'] = 'code for ' + req['task_id']\n"
        "    del req['prompt']\n"
        "    print(json.dumps(req))\n"
    )
    matrix = load_task_matrix()
    matrix = type(matrix)(
        topics=matrix.topics[:1], tasks={matrix.topics[0]: matrix.tasks[matrix.topics[0]][:2]},
        generator_ids=("m1",),
    )
    responses = subprocess_generator([sys.executable, "-c", script], matrix)
    assert len(responses) == 2
    samples, diagnostics = build_ai_subset(matrix, responses)
    assert len(samples) == 2 and diagnostics == []


# -- vulnerability import --------------------------------------------------------


def _vuln_obj(**overrides):
    obj = {
        "cve_id": "CVE-2024-123456",
        "cwe_id": "CWE-79",
        "cvss_base": 7.5,
        "attack_vector": "network",
        "language": "python",
        "vulnerable_fragment": "os.system(cmd)",
        "patched_fragment": "subprocess.run(shlex.split(cmd))",
        "intro_source": "ai",
        "fix_source": "human",
        "disclosed": "2024-05-01",
    }
    obj.update(overrides)
    return obj


def _jsonl(objs) -> bytes:
    return "".join(json.dumps(o) + "\n" for o in objs).encode()


def test_import_vulns_accepts_valid_record():
    records, diagnostics = import_vuln_records(iter(_jsonl([_vuln_obj()]).splitlines(True)))
    assert len(records) == 1 and diagnostics == []
    assert records[0].cve_id == "CVE-2024-123456"


def test_import_vulns_rejects_out_of_range_cvss():
    records, diagnostics = import_vuln_records(iter(_jsonl([_vuln_obj(cvss_base=11.0)]).splitlines(True)))
    assert records == []
    assert len(diagnostics) == 1 and "cvss" in diagnostics[0].message


def test_import_vulns_round_trips_through_data_model(tmp_path):
    from codeprov import VulnRecord

    records, _ = import_vuln_records(iter(_jsonl([_vuln_obj(), _vuln_obj(cve_id="CVE-2023-9900")]).splitlines(True)))
    path = tmp_path / "vulns.jsonl"
    write_records(records, path)
    back, diagnostics = read_records(path, VulnRecord)
    assert diagnostics == [] and back == records


def test_import_vulns_requires_labels_or_labeler():
    missing = _vuln_obj()
    del missing["intro_source"]
    records, diagnostics = import_vuln_records(iter(_jsonl([missing]).splitlines(True)))
    assert records == []
    assert any("labeler" in d.message for d in diagnostics)


def test_import_vulns_labels_fragments_with_cascade():
    from codeprov import CascadeEnsemble, ConstantDetector, EnsembleConfig

    ensemble = CascadeEnsemble(
        [ConstantDetector(0.95, detector_id="m")], EnsembleConfig(master_id="m", aux_ids=())
    )
    labeler = cascade_fragment_labeler(ensemble)
    unlabeled = _vuln_obj()
    del unlabeled["intro_source"]
    del unlabeled["fix_source"]
    records, diagnostics = import_vuln_records(iter(_jsonl([unlabeled]).splitlines(True)), labeler)
    assert diagnostics == []
    assert records[0].intro_source is ProvenanceLabel.AI
    assert records[0].fix_source is ProvenanceLabel.AI
