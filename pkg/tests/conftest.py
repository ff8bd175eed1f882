"""Session fixtures: scripted git repositories with known change histories."""

from __future__ import annotations

import os
import subprocess
from pathlib import Path

import pytest


def run_git(cwd: Path, *args: str, when: str | None = None) -> None:
    env = os.environ.copy()
    env.update(
        GIT_AUTHOR_NAME="Fixture",
        GIT_AUTHOR_EMAIL="fixture@example.com",
        GIT_COMMITTER_NAME="Fixture",
        GIT_COMMITTER_EMAIL="fixture@example.com",
    )
    if when:
        env["GIT_AUTHOR_DATE"] = env["GIT_COMMITTER_DATE"] = when
    subprocess.run(["git", "-C", str(cwd), *args], check=True, capture_output=True, env=env)


def _init_repo(path: Path) -> None:
    path.mkdir(parents=True)
    subprocess.run(["git", "init", "-q", "-b", "main", str(path)], check=True, capture_output=True)
    run_git(path, "config", "user.email", "fixture@example.com")
    run_git(path, "config", "user.name", "Fixture")


def _commit_all(repo: Path, message: str, when: str) -> None:
    run_git(repo, "add", "-A")
    run_git(repo, "commit", "-q", "-m", message, when=when)


@pytest.fixture(scope="session")
def fixture_repo(tmp_path_factory) -> Path:
    """Twelve commits: adds, modifies, deletes, a rename, a binary file, an
    oversized file, and a feature branch folded in by a merge commit.

    First-parent expectation (window covering 2022, 64 KiB cap):
      c1  A a.py            c2  A b.js (+binary skipped)
      c3  M a.py            c4  A src/util.go
      c5  D b.js            c6  D a.py + A core.py (rename)
      c7  M src/util.go     c8  merge: A feat.rb
      c9  (big.txt skipped) c10 M core.py
      c11 A README.md
    """
    repo = tmp_path_factory.mktemp("repos") / "wild"
    _init_repo(repo)
    day = "2022-01-{:02d}T12:00:00+00:00".format

    (repo / "a.py").write_text("print('a1')\n")
    _commit_all(repo, "c1 add a.py", day(1))

    (repo / "b.js").write_text("let b = 1;\n")
    (repo / "data.bin").write_bytes(b"\x00\x01\x02BINARY")
    _commit_all(repo, "c2 add b.js and binary", day(2))

    (repo / "a.py").write_text("print('a2')\nprint('more')\n")
    _commit_all(repo, "c3 modify a.py", day(3))

    (repo / "src").mkdir()
    (repo / "src/util.go").write_text("package util\n\nfunc F() int { return 1 }\n")
    _commit_all(repo, "c4 add util.go", day(4))

    (repo / "b.js").unlink()
    _commit_all(repo, "c5 delete b.js", day(5))

    run_git(repo, "mv", "a.py", "core.py")
    _commit_all(repo, "c6 rename a.py to core.py", day(6))

    run_git(repo, "checkout", "-q", "-b", "feature")
    (repo / "feat.rb").write_text("puts 'feature'\n")
    _commit_all(repo, "f1 add feat.rb", day(7))

    run_git(repo, "checkout", "-q", "main")
    (repo / "src/util.go").write_text("package util\n\nfunc F() int { return 2 }\n")
    _commit_all(repo, "c7 modify util.go", day(8))

    run_git(repo, "merge", "-q", "--no-ff", "-m", "c8 merge feature", "feature", when=day(9))

    (repo / "big.txt").write_text("x" * (128 * 1024))
    _commit_all(repo, "c9 add oversized file", day(10))

    (repo / "core.py").write_text("print('a3')\n")
    _commit_all(repo, "c10 modify core.py", day(11))

    (repo / "README.md").write_text("# fixture\n")
    _commit_all(repo, "c11 add readme", day(12))
    return repo


@pytest.fixture(scope="session")
def human_repo(tmp_path_factory) -> Path:
    """Three commits dated 2009-2010; final state holds two code files."""
    repo = tmp_path_factory.mktemp("repos") / "ancient"
    _init_repo(repo)

    (repo / "h.py").write_text("def hello():\n    return 'v1'\n")
    _commit_all(repo, "add h.py", "2009-03-01T10:00:00+00:00")

    (repo / "lib.rb").write_text("def lib\n  1\nend\n")
    _commit_all(repo, "add lib.rb", "2009-06-01T10:00:00+00:00")

    (repo / "h.py").write_text("def hello():\n    return 'v2'\n")
    _commit_all(repo, "update h.py", "2010-02-01T10:00:00+00:00")
    return repo
