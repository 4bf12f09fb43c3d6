"""File-backed design repository with a keyword inverted index.

Layout on disk::

    <root>/
      modules/<name>.dgml   canonical DGML, source of truth
      keywords.idx          derived cache, "keyword<TAB>name1,name2" per line
      repo.meta             "dgml-repo 1"

A :class:`Repository` loads everything at open time and works on that
snapshot. One writer per repository; there is no cross-process locking.
"""

from __future__ import annotations

import contextlib
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .markup import DgmlError, Violation, parse_dgml, serialize_dgml, validate
from .model import MAX_SCORE, MIN_SCORE, DesignModule, DgmlDocument

log = logging.getLogger(__name__)

REPO_MARKER = "dgml-repo 1"
MODULES_DIR = "modules"
INDEX_FILE = "keywords.idx"
META_FILE = "repo.meta"
MODULE_SUFFIX = ".dgml"


class RepositoryError(Exception):
    pass


class AlreadyInitialized(RepositoryError):
    pass


class NotARepository(RepositoryError):
    pass


class DuplicateModuleName(RepositoryError):
    pass


class ModuleNotFound(RepositoryError, LookupError):
    pass


class ScoreOutOfRange(RepositoryError, ValueError):
    pass


class IoFailure(RepositoryError, OSError):
    pass


class ValidationFailed(RepositoryError):
    """A module was rejected; ``report`` lists every violation."""

    def __init__(self, name: str, report: list[Violation]):
        self.name = name
        self.report = report
        detail = "; ".join(str(v) for v in report)
        super().__init__(f"module {name!r} is invalid: {detail}")


@contextlib.contextmanager
def _io(action: str) -> Iterator[None]:
    try:
        yield
    except OSError as exc:
        raise IoFailure(f"{action}: {exc}") from exc


def atomic_write(path: Path, text: str) -> None:
    """Replace ``path`` with ``text`` via a synced temp file and rename."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise
    _fsync_dir(path.parent)


def _fsync_dir(path: Path) -> None:
    try:
        fd = os.open(path, os.O_RDONLY)
    except OSError:
        return
    try:
        os.fsync(fd)
    except OSError:
        pass
    finally:
        os.close(fd)


class KeywordIndex:
    """Inverted mapping keyword -> sorted module names."""

    def __init__(self, entries: Mapping[str, Iterable[str]] | None = None):
        self._entries: dict[str, tuple[str, ...]] = {}
        for keyword, names in (entries or {}).items():
            names = tuple(sorted(set(names)))
            if names:
                self._entries[keyword] = names

    @classmethod
    def from_modules(cls, modules: Iterable[DesignModule]) -> KeywordIndex:
        index = cls()
        for module in modules:
            index.add(module.name, module.keywords)
        return index

    def add(self, name: str, keywords: Iterable[str]) -> None:
        for keyword in keywords:
            names = set(self._entries.get(keyword, ()))
            names.add(name)
            self._entries[keyword] = tuple(sorted(names))

    def lookup(self, keyword: str) -> tuple[str, ...]:
        return self._entries.get(keyword, ())

    def keywords(self) -> list[str]:
        return sorted(self._entries)

    def as_dict(self) -> dict[str, list[str]]:
        return {kw: list(self._entries[kw]) for kw in sorted(self._entries)}

    def to_text(self) -> str:
        return "".join(f"{kw}\t{','.join(self._entries[kw])}\n" for kw in sorted(self._entries))

    @classmethod
    def from_text(cls, text: str) -> KeywordIndex:
        entries = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            keyword, sep, names = line.partition("\t")
            if not sep or not keyword or not names or keyword in entries:
                raise ValueError(f"bad index line {lineno}: {line!r}")
            entries[keyword] = names.split(",")
        return cls(entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KeywordIndex):
            return NotImplemented
        return self._entries == other._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"KeywordIndex({self.as_dict()!r})"


@dataclass(frozen=True)
class LoadProblem:
    """A module file that could not be loaded."""

    path: Path
    reason: str

    def __str__(self) -> str:
        return f"{self.path.name}: {self.reason}"


def _scan_modules(modules_dir: Path) -> tuple[dict[str, DesignModule], list[LoadProblem]]:
    modules: dict[str, DesignModule] = {}
    problems: list[LoadProblem] = []
    with _io(f"cannot list {modules_dir}"):
        paths = sorted(modules_dir.glob("*" + MODULE_SUFFIX))
    for path in paths:
        with _io(f"cannot read {path}"):
            data = path.read_bytes()
        try:
            module = parse_dgml(data).module
        except DgmlError as exc:
            problems.append(LoadProblem(path, f"{exc.code}: {exc}"))
            continue
        if module.name != path.name[: -len(MODULE_SUFFIX)]:
            problems.append(LoadProblem(path, f"file holds module {module.name!r}"))
            continue
        modules[module.name] = module
    for module in list(modules.values()):
        if module.derived_from is not None and module.derived_from not in modules:
            problems.append(
                LoadProblem(
                    modules_dir / (module.name + MODULE_SUFFIX),
                    f"derived-from names missing module {module.derived_from!r}",
                )
            )
    return modules, problems


class Repository:
    """The centralized design store.

    Use :meth:`init` to create a repository and :meth:`open` to load one.
    Every mutating method persists its change before returning.
    """

    def __init__(self, root: Path, modules: dict[str, DesignModule], problems: list[LoadProblem]):
        self.root = root
        self._modules = modules
        self.index = KeywordIndex.from_modules(modules.values())
        self.problems = problems

    @property
    def modules_dir(self) -> Path:
        return self.root / MODULES_DIR

    @classmethod
    def init(cls, root: str | os.PathLike) -> Repository:
        root = Path(root)
        if (root / META_FILE).exists():
            raise AlreadyInitialized(f"{root} already holds a repository")
        with _io(f"cannot initialize {root}"):
            (root / MODULES_DIR).mkdir(parents=True, exist_ok=True)
            atomic_write(root / INDEX_FILE, "")
            atomic_write(root / META_FILE, REPO_MARKER + "\n")
        return cls(root, {}, [])

    @classmethod
    def open(cls, root: str | os.PathLike) -> Repository:
        """Load a repository, refreshing the index cache if missing or stale."""
        root = Path(root)
        meta = root / META_FILE
        try:
            marker = meta.read_text(encoding="utf-8").strip()
        except FileNotFoundError:
            raise NotARepository(f"{root} is not a DGML repository") from None
        except OSError as exc:
            raise IoFailure(f"cannot read {meta}: {exc}") from exc
        if marker != REPO_MARKER:
            raise NotARepository(f"{meta}: unsupported repository marker {marker!r}")
        modules, problems = _scan_modules(root / MODULES_DIR)
        repo = cls(root, modules, problems)
        for problem in problems:
            log.warning("skipping %s", problem)
        if repo._cached_index() != repo.index:
            log.info("index cache missing or stale, rewriting %s", root / INDEX_FILE)
            try:
                repo._write_index()
            except IoFailure as exc:
                log.warning("%s", exc)
        return repo

    def _cached_index(self) -> KeywordIndex | None:
        try:
            return KeywordIndex.from_text((self.root / INDEX_FILE).read_text(encoding="utf-8"))
        except (OSError, ValueError, UnicodeDecodeError):
            return None

    # -- queries ---------------------------------------------------------

    def names(self) -> list[str]:
        return sorted(self._modules)

    def modules(self) -> list[DesignModule]:
        return [self._modules[n] for n in self.names()]

    def get(self, name: str) -> DesignModule:
        try:
            return self._modules[name]
        except KeyError:
            raise ModuleNotFound(f"no module named {name!r}") from None

    def __contains__(self, name: object) -> bool:
        return name in self._modules

    def __len__(self) -> int:
        return len(self._modules)

    # -- mutations -------------------------------------------------------

    def _module_path(self, name: str) -> Path:
        return self.modules_dir / (name + MODULE_SUFFIX)

    def _write_module(self, module: DesignModule) -> None:
        with _io(f"cannot write module {module.name!r}"):
            atomic_write(self._module_path(module.name), serialize_dgml(DgmlDocument(module)))
        self._modules[module.name] = module

    def _write_index(self) -> None:
        with _io("cannot write index"):
            atomic_write(self.root / INDEX_FILE, self.index.to_text())

    def _check_new(self, doc: DgmlDocument) -> None:
        report = validate(doc)
        if report:
            raise ValidationFailed(doc.module.name, report)
        if doc.module.name in self._modules:
            raise DuplicateModuleName(f"module {doc.module.name!r} already exists")

    def add_module(self, doc: DgmlDocument | DesignModule) -> Repository:
        if isinstance(doc, DesignModule):
            doc = DgmlDocument(doc)
        self._check_new(doc)
        parent = doc.module.derived_from
        if parent is not None and parent not in self._modules:
            raise ModuleNotFound(f"derived-from names missing module {parent!r}")
        self._write_module(doc.module)
        self.index.add(doc.module.name, doc.module.keywords)
        self._write_index()
        return self

    def record_reuse(self, name: str) -> int:
        """Count one reuse of ``name`` and return its new DRF."""
        module = self.get(name)
        self._write_module(module.evolve(drf=module.drf + 1))
        return module.drf + 1

    def derive_module(self, parent: str, doc: DgmlDocument | DesignModule) -> Repository:
        """Store ``doc`` as derived from ``parent`` and count a reuse of the parent."""
        if isinstance(doc, DesignModule):
            doc = DgmlDocument(doc)
        self.get(parent)
        doc = DgmlDocument(doc.module.evolve(derived_from=parent), doc.version)
        self._check_new(doc)
        self._write_module(doc.module)
        self.index.add(doc.module.name, doc.module.keywords)
        self.record_reuse(parent)
        self._write_index()
        return self

    def set_score(self, name: str, score: int) -> Repository:
        module = self.get(name)
        if isinstance(score, bool) or not isinstance(score, int) or not MIN_SCORE <= score <= MAX_SCORE:
            raise ScoreOutOfRange(f"score must be an integer in [{MIN_SCORE}, {MAX_SCORE}], got {score!r}")
        self._write_module(module.evolve(expert_score=score))
        return self

    def rebuild_index(self) -> KeywordIndex:
        """Rebuild the index from the module files alone.

        Unloadable files are skipped and listed in :attr:`problems`. The
        cache file is rewritten; the live snapshot is left untouched.
        """
        modules, self.problems = _scan_modules(self.modules_dir)
        index = KeywordIndex.from_modules(modules.values())
        with _io("cannot write index"):
            atomic_write(self.root / INDEX_FILE, index.to_text())
        return index


def init_repo(root: str | os.PathLike) -> Repository:
    return Repository.init(root)


def open_repo(root: str | os.PathLike) -> Repository:
    return Repository.open(root)
