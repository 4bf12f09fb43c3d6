"""Design inference: keyword extraction, DRF-ranked search, skeleton composition."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterable

from .model import DesignElement, DesignModule, DgmlDocument
from .repository import Repository

STOPWORDS = frozenset(
    """a an and are as at be by for from has have in is it of on or that the
    this to want wants will with""".split()
)

_SPLIT_RE = re.compile(r"[^a-z0-9]+")
_NON_ALNUM_RE = re.compile(r"[^a-z0-9]")
_EXPLICIT_RE = re.compile(r"^keywords:(.*)$", re.IGNORECASE | re.MULTILINE)

SKELETON_ROOT_ID = "root"


class EmptyQuery(ValueError):
    pass


def extract_keywords(text: str) -> frozenset[str]:
    """Lowercase, split on non-alphanumerics, drop short tokens and stopwords."""
    return frozenset(
        tok for tok in _SPLIT_RE.split(text.lower()) if len(tok) >= 2 and tok not in STOPWORDS
    )


def normalize_keyword(raw: str) -> str:
    """Normal form of one explicitly given keyword; may be empty."""
    return _NON_ALNUM_RE.sub("", raw.lower())


@dataclass(frozen=True)
class RequirementSpec:
    """A UI requirement specification and the keywords drawn from it."""

    source_text: str
    keywords: frozenset[str]

    @classmethod
    def from_text(cls, text: str) -> RequirementSpec:
        """Extract keywords from UIRS text.

        Lines of the form ``keywords: a, b, c`` list keywords explicitly;
        those are normalized one per item and added to the extracted set.
        The ``keywords:`` label itself is not a keyword.
        """
        explicit = set()
        for match in _EXPLICIT_RE.finditer(text):
            explicit.update(normalize_keyword(item) for item in match.group(1).split(","))
        explicit.discard("")
        body = _EXPLICIT_RE.sub(lambda m: m.group(1), text)
        return cls(text, extract_keywords(body) | explicit)

    @classmethod
    def from_keywords(cls, keywords: Iterable[str]) -> RequirementSpec:
        words = [str(k) for k in keywords]
        normalized = frozenset(filter(None, map(normalize_keyword, words)))
        return cls(", ".join(words), normalized)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> RequirementSpec:
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


@dataclass(frozen=True)
class MatchCandidate:
    module_name: str
    match_score: int
    drf: int
    expert_score: int
    matched_keywords: tuple[str, ...]

    @property
    def sort_key(self) -> tuple[int, int, str]:
        return (-self.drf, -self.match_score, self.module_name)


def _require_keywords(spec: RequirementSpec) -> None:
    if not spec.keywords:
        raise EmptyQuery("no keywords could be extracted from the requirement specification")


def _candidate_modules(repo: Repository, keywords: Iterable[str], min_score: int) -> list[DesignModule]:
    names = set()
    for keyword in keywords:
        names.update(repo.index.lookup(keyword))
    found = [repo.get(n) for n in sorted(names)]
    return [m for m in found if m.expert_score >= min_score]


def search(repo: Repository, spec: RequirementSpec, min_score: int = 0) -> list[MatchCandidate]:
    """Find every module sharing a keyword with ``spec``.

    Results are ordered by DRF descending; ties fall to the number of
    matched keywords (descending) and then the module name. The first
    entry is the best reuse candidate.
    """
    _require_keywords(spec)
    results = []
    for module in _candidate_modules(repo, spec.keywords, min_score):
        matched = tuple(sorted(spec.keywords & module.keywords))
        results.append(
            MatchCandidate(module.name, len(matched), module.drf, module.expert_score, matched)
        )
    results.sort(key=lambda c: c.sort_key)
    return results


@dataclass(frozen=True)
class SkeletonDesign:
    selected: tuple[str, ...]
    covered: tuple[str, ...]
    uncovered: tuple[str, ...]
    document: DgmlDocument


def assemble_document(name: str, keywords: Iterable[str], modules: Iterable[DesignModule]) -> DgmlDocument:
    """Concatenate module designs under one window, ids prefixed ``<module>.``."""
    children: list[DesignElement] = []
    for module in modules:
        children.extend(root.with_id_prefix(module.name + ".") for root in module.design)
    root = DesignElement("window", SKELETON_ROOT_ID, {"title": name}, tuple(children))
    return DgmlDocument(DesignModule(name=name, keywords=frozenset(keywords), design=(root,)))


def compose_skeleton(
    repo: Repository, spec: RequirementSpec, min_score: int = 0, name: str = "skeleton"
) -> SkeletonDesign:
    """Greedy keyword cover of ``spec`` by repository modules.

    Each step takes the module covering the most still-uncovered keywords
    (ties: higher DRF, then lower name) until no module adds coverage.
    """
    _require_keywords(spec)
    pool = _candidate_modules(repo, spec.keywords, min_score)
    uncovered = set(spec.keywords)
    chosen: list[DesignModule] = []
    while True:
        best, best_key = None, None
        for module in pool:
            gain = len(uncovered & module.keywords)
            if gain == 0:
                continue
            key = (-gain, -module.drf, module.name)
            if best_key is None or key < best_key:
                best, best_key = module, key
        if best is None:
            break
        chosen.append(best)
        uncovered -= best.keywords
        pool.remove(best)
    return SkeletonDesign(
        selected=tuple(m.name for m in chosen),
        covered=tuple(sorted(spec.keywords - uncovered)),
        uncovered=tuple(sorted(uncovered)),
        document=assemble_document(name, spec.keywords, chosen),
    )


def accept_skeleton(repo: Repository, skeleton: SkeletonDesign) -> Repository:
    """Count one reuse for every module the skeleton was built from."""
    for name in skeleton.selected:
        repo.get(name)
    for name in skeleton.selected:
        repo.record_reuse(name)
    return repo
