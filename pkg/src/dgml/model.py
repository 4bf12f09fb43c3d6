"""Value types for DGML design documents.

Instances are plain frozen dataclasses. Constructors do not enforce the
document invariants; :func:`dgml.markup.validate` does, so partially
broken data coming in from ingestion paths can still be represented and
reported on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping

DGML_VERSION = "1.0"

CONTAINER_KINDS = frozenset(
    {"window", "panel", "group", "radiogroup", "dropdown", "list", "table", "menu"}
)
LEAF_KINDS = frozenset(
    {
        "label",
        "textbox",
        "textarea",
        "button",
        "checkbox",
        "radio",
        "option",
        "listitem",
        "column",
        "menuitem",
        "image",
        "link",
        "separator",
    }
)
ELEMENT_KINDS = CONTAINER_KINDS | LEAF_KINDS

MODULE_NAME_RE = re.compile(r"[a-z0-9][a-z0-9-]*")
KEYWORD_RE = re.compile(r"[a-z0-9]+")
ATTRIBUTE_KEY_RE = re.compile(r"[a-z][a-z0-9-]*")

MIN_SCORE = 0
MAX_SCORE = 10


def is_container(kind: str) -> bool:
    return kind in CONTAINER_KINDS


@dataclass(frozen=True)
class DesignElement:
    """One UI widget in a design tree.

    ``id`` is kept out of ``attributes``; the serializer writes it first.
    """

    kind: str
    id: str
    attributes: Mapping[str, str] = field(default_factory=dict)
    children: tuple[DesignElement, ...] = ()

    def walk(self) -> Iterator[DesignElement]:
        """Yield this element and all descendants in document order."""
        yield self
        for child in self.children:
            yield from child.walk()

    def with_id_prefix(self, prefix: str) -> DesignElement:
        return DesignElement(
            kind=self.kind,
            id=prefix + self.id,
            attributes=dict(self.attributes),
            children=tuple(c.with_id_prefix(prefix) for c in self.children),
        )


@dataclass(frozen=True)
class DesignModule:
    name: str
    keywords: frozenset[str]
    drf: int = 0
    expert_score: int = 0
    derived_from: str | None = None
    design: tuple[DesignElement, ...] = ()

    def elements(self) -> Iterator[DesignElement]:
        for root in self.design:
            yield from root.walk()

    def evolve(self, **changes) -> DesignModule:
        return replace(self, **changes)


@dataclass(frozen=True)
class DgmlDocument:
    module: DesignModule
    version: str = DGML_VERSION

    @property
    def name(self) -> str:
        return self.module.name
