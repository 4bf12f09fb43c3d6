"""Parse, validate and serialize DGML documents.

The accepted grammar is a closed subset of XML::

    <dgml version="1.0">
      <module name="...">
        <keywords><kw>...</kw>...</keywords>
        <meta drf="N" score="N" derived-from="..."/>      (optional)
        <design>...design elements...</design>          (optional)
      </module>
    </dgml>

Well-formedness is delegated to expat. DOCTYPE declarations, CDATA
sections and processing instructions are rejected; comments and an XML
declaration are tolerated and dropped.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from xml.parsers import expat

from .model import (
    ATTRIBUTE_KEY_RE,
    DGML_VERSION,
    ELEMENT_KINDS,
    KEYWORD_RE,
    LEAF_KINDS,
    MAX_SCORE,
    MIN_SCORE,
    MODULE_NAME_RE,
    DesignElement,
    DesignModule,
    DgmlDocument,
)

__all__ = [
    "BadMetaValue",
    "BadVersion",
    "ChildrenOnLeaf",
    "DgmlError",
    "Diagnostic",
    "DuplicateId",
    "InvalidAttribute",
    "InvalidKeyword",
    "InvalidName",
    "MalformedMarkup",
    "MissingId",
    "MissingKeywords",
    "MissingName",
    "UnknownElement",
    "Violation",
    "canonicalize",
    "diagnose_dgml",
    "load_dgml",
    "parse_dgml",
    "serialize_dgml",
    "validate",
]


class DgmlError(ValueError):
    """A DGML document was rejected.

    ``line`` is the 1-based source line when the error came from parsing
    text, ``None`` when it came from an in-memory document.
    """

    def __init__(self, message: str, *, line: int | None = None, subject: str = ""):
        self.message = message
        self.line = line
        self.subject = subject
        super().__init__(f"line {line}: {message}" if line is not None else message)

    @property
    def code(self) -> str:
        return type(self).__name__


class MalformedMarkup(DgmlError):
    pass


class UnknownElement(DgmlError):
    pass


class MissingName(DgmlError):
    pass


class MissingKeywords(DgmlError):
    pass


class MissingId(DgmlError):
    pass


class DuplicateId(DgmlError):
    pass


class ChildrenOnLeaf(DgmlError):
    pass


class BadMetaValue(DgmlError):
    pass


class BadVersion(DgmlError):
    pass


class InvalidName(DgmlError):
    pass


class InvalidKeyword(DgmlError):
    pass


class InvalidAttribute(DgmlError):
    pass


_ERRORS = {
    cls.__name__: cls
    for cls in (
        MalformedMarkup,
        UnknownElement,
        MissingName,
        MissingKeywords,
        MissingId,
        DuplicateId,
        ChildrenOnLeaf,
        BadMetaValue,
        BadVersion,
        InvalidName,
        InvalidKeyword,
        InvalidAttribute,
    )
}


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by :func:`validate`.

    ``subject`` names the offending thing: an element id for DuplicateId,
    the element kind for UnknownElement and ChildrenOnLeaf, otherwise the
    field name or bad value. ``field`` is the module part it lives in.
    """

    code: str
    subject: str
    message: str
    field: str = "module"
    element_id: str | None = None

    def to_error(self, line: int | None = None) -> DgmlError:
        return _ERRORS[self.code](self.message, line=line, subject=self.subject)

    def __str__(self) -> str:
        return f"{self.code}({self.subject!r}): {self.message}"


# Characters XML 1.0 cannot carry even when escaped.
_ILLEGAL_XML_CHARS = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\ud800-\udfff\ufffe\uffff]")


def _element_violations(
    kind: str, element_id: str, attributes, has_children: bool, seen_ids: set[str]
) -> list[Violation]:
    found = []
    where = f"<{kind} id={element_id!r}>"
    if kind not in ELEMENT_KINDS:
        found.append(
            Violation("UnknownElement", kind, f"unknown design element <{kind}>", "element", element_id)
        )
    if not element_id:
        found.append(Violation("MissingId", kind, f"<{kind}> has no id", "element"))
    elif _ILLEGAL_XML_CHARS.search(element_id):
        found.append(
            Violation("InvalidAttribute", "id", f"{where}: id contains illegal characters", "element", element_id)
        )
    elif element_id in seen_ids:
        found.append(
            Violation("DuplicateId", element_id, f"duplicate element id {element_id!r}", "element", element_id)
        )
    else:
        seen_ids.add(element_id)
    if has_children and kind in LEAF_KINDS:
        found.append(
            Violation("ChildrenOnLeaf", kind, f"{where}: <{kind}> cannot have children", "element", element_id)
        )
    for key, value in attributes.items():
        if key == "id" or not ATTRIBUTE_KEY_RE.fullmatch(key):
            found.append(
                Violation("InvalidAttribute", key, f"{where}: bad attribute name {key!r}", "element", element_id)
            )
        elif not isinstance(value, str) or _ILLEGAL_XML_CHARS.search(value):
            found.append(
                Violation("InvalidAttribute", key, f"{where}: bad value for attribute {key!r}", "element", element_id)
            )
    return found


def _is_count(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _module_violations(doc: DgmlDocument) -> list[Violation]:
    found = []
    module = doc.module
    if doc.version != DGML_VERSION:
        found.append(
            Violation("BadVersion", "version", f"version must be {DGML_VERSION!r}, got {doc.version!r}", "version")
        )
    if not module.name:
        found.append(Violation("MissingName", "name", "module has no name", "name"))
    elif not MODULE_NAME_RE.fullmatch(module.name):
        found.append(Violation("InvalidName", "name", f"bad module name {module.name!r}", "name"))
    if not module.keywords:
        found.append(Violation("MissingKeywords", "keywords", "module has no keywords", "keywords"))
    for kw in sorted(module.keywords):
        if not KEYWORD_RE.fullmatch(kw):
            found.append(Violation("InvalidKeyword", kw, f"keyword {kw!r} is not lowercase [a-z0-9]+", "keywords"))
    if not _is_count(module.drf) or module.drf < 0:
        found.append(Violation("BadMetaValue", "drf", f"drf must be a non-negative integer, got {module.drf!r}", "drf"))
    if not _is_count(module.expert_score) or not MIN_SCORE <= module.expert_score <= MAX_SCORE:
        found.append(
            Violation(
                "BadMetaValue",
                "score",
                f"score must be an integer in [{MIN_SCORE}, {MAX_SCORE}], got {module.expert_score!r}",
                "score",
            )
        )
    parent = module.derived_from
    if parent is not None and not MODULE_NAME_RE.fullmatch(parent):
        found.append(Violation("InvalidName", "derived-from", f"bad derived-from name {parent!r}", "derived-from"))
    return found


def validate(doc: DgmlDocument) -> list[Violation]:
    """Return every invariant violation in ``doc``; an empty list means valid."""
    found = _module_violations(doc)
    seen: set[str] = set()
    for element in doc.module.elements():
        found.extend(
            _element_violations(element.kind, element.id, element.attributes, bool(element.children), seen)
        )
    return found


# -- parsing ---------------------------------------------------------------


@dataclass
class _Node:
    tag: str
    attrs: dict[str, str]
    line: int
    children: list[_Node]
    text: list[str]


def _read_tree(text: str | bytes) -> _Node:
    if isinstance(text, str):
        try:
            text = text.encode("utf-8")
        except UnicodeEncodeError as exc:
            line = text.count("\n", 0, exc.start) + 1
            raise MalformedMarkup("text is not encodable as UTF-8", line=line) from None
    parser = expat.ParserCreate("utf-8")
    holder = _Node("", {}, 0, [], [])
    stack = [holder]

    def reject(what):
        def handler(*_args):
            raise MalformedMarkup(f"{what} are not supported", line=parser.CurrentLineNumber)

        return handler

    def start(tag, attrs):
        node = _Node(tag, attrs, parser.CurrentLineNumber, [], [])
        stack[-1].children.append(node)
        stack.append(node)

    def end(_tag):
        stack.pop()

    def chars(data):
        stack[-1].text.append(data)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    parser.StartDoctypeDeclHandler = reject("DOCTYPE declarations")
    parser.StartCdataSectionHandler = reject("CDATA sections")
    parser.ProcessingInstructionHandler = reject("processing instructions")
    parser.EntityDeclHandler = reject("entity declarations")
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        raise MalformedMarkup(expat.errors.messages[exc.code], line=exc.lineno) from None
    return holder.children[0]


def _no_text(node: _Node) -> None:
    if "".join(node.text).strip():
        raise MalformedMarkup(f"unexpected text inside <{node.tag}>", line=node.line)


def _only_attrs(node: _Node, allowed: tuple[str, ...]) -> None:
    for key in node.attrs:
        if key not in allowed:
            raise MalformedMarkup(f"unexpected attribute {key!r} on <{node.tag}>", line=node.line)


def _single(node: _Node, tag: str, required: bool, missing_error=MalformedMarkup) -> _Node | None:
    matches = [c for c in node.children if c.tag == tag]
    if len(matches) > 1:
        raise MalformedMarkup(f"<{tag}> appears more than once in <{node.tag}>", line=matches[1].line)
    if not matches:
        if required:
            raise missing_error(f"<{node.tag}> is missing <{tag}>", line=node.line, subject=tag)
        return None
    return matches[0]


_COUNT_RE = re.compile(r"-?[0-9]+")


@dataclass(frozen=True)
class Diagnostic:
    """A violation found while reading DGML text, with its source line."""

    line: int | None
    violation: Violation

    def to_error(self) -> DgmlError:
        return self.violation.to_error(self.line)

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.violation}"


class _Builder:
    """Turns the raw node tree into a document, collecting diagnostics."""

    def __init__(self) -> None:
        self.seen_ids: set[str] = set()
        self.problems: list[Diagnostic] = []

    def meta_int(self, node: _Node, key: str) -> int:
        raw = node.attrs.get(key)
        if raw is None:
            return 0
        if not _COUNT_RE.fullmatch(raw):
            self.problems.append(
                Diagnostic(node.line, Violation("BadMetaValue", key, f"{key} must be an integer, got {raw!r}", key))
            )
            return 0
        return int(raw)

    def element(self, node: _Node) -> DesignElement:
        _no_text(node)
        attrs = dict(node.attrs)
        element_id = attrs.pop("id", "")
        for v in _element_violations(node.tag, element_id, attrs, bool(node.children), self.seen_ids):
            self.problems.append(Diagnostic(node.line, v))
        return DesignElement(
            kind=node.tag,
            id=element_id,
            attributes={k: attrs[k] for k in sorted(attrs)},
            children=tuple(self.element(child) for child in node.children),
        )


def _build(text: str | bytes) -> tuple[DgmlDocument, list[Diagnostic]]:
    root = _read_tree(text)
    if root.tag != "dgml":
        raise MalformedMarkup(f"root element must be <dgml>, got <{root.tag}>", line=root.line)
    _only_attrs(root, ("version",))
    _no_text(root)
    if "version" not in root.attrs:
        raise BadVersion("<dgml> has no version attribute", line=root.line, subject="version")
    modules = [c for c in root.children if c.tag == "module"]
    strays = [c for c in root.children if c.tag != "module"]
    if strays:
        raise MalformedMarkup(f"unexpected <{strays[0].tag}> in <dgml>", line=strays[0].line)
    if len(modules) != 1:
        raise MalformedMarkup("a document must hold exactly one <module>", line=root.line)
    mod = modules[0]
    _only_attrs(mod, ("name",))
    _no_text(mod)
    if "name" not in mod.attrs:
        raise MissingName("<module> has no name attribute", line=mod.line, subject="name")
    for child in mod.children:
        if child.tag not in ("keywords", "meta", "design"):
            raise MalformedMarkup(f"unexpected <{child.tag}> in <module>", line=child.line)

    kw_node = _single(mod, "keywords", required=True, missing_error=MissingKeywords)
    _only_attrs(kw_node, ())
    _no_text(kw_node)
    keywords = set()
    for kw in kw_node.children:
        if kw.tag != "kw":
            raise MalformedMarkup(f"unexpected <{kw.tag}> in <keywords>", line=kw.line)
        _only_attrs(kw, ())
        if kw.children:
            raise MalformedMarkup("<kw> holds text only", line=kw.line)
        keywords.add("".join(kw.text).strip())

    builder = _Builder()
    drf, score, parent = 0, 0, None
    meta_node = _single(mod, "meta", required=False)
    if meta_node is not None:
        _only_attrs(meta_node, ("drf", "score", "derived-from"))
        _no_text(meta_node)
        if meta_node.children:
            raise MalformedMarkup("<meta> must be empty", line=meta_node.line)
        drf = builder.meta_int(meta_node, "drf")
        score = builder.meta_int(meta_node, "score")
        parent = meta_node.attrs.get("derived-from") or None

    design: tuple[DesignElement, ...] = ()
    design_node = _single(mod, "design", required=False)
    if design_node is not None:
        _only_attrs(design_node, ())
        _no_text(design_node)
        design = tuple(builder.element(n) for n in design_node.children)

    doc = DgmlDocument(
        version=root.attrs["version"],
        module=DesignModule(
            name=mod.attrs["name"],
            keywords=frozenset(keywords),
            drf=drf,
            expert_score=score,
            derived_from=parent,
            design=design,
        ),
    )
    meta_line = meta_node.line if meta_node is not None else mod.line
    lines = {
        "version": root.line,
        "name": mod.line,
        "keywords": kw_node.line,
        "drf": meta_line,
        "score": meta_line,
        "derived-from": meta_line,
    }
    problems = [Diagnostic(lines.get(v.field, mod.line), v) for v in _module_violations(doc)]
    problems += builder.problems
    problems.sort(key=lambda d: d.line or 0)
    return doc, problems


def diagnose_dgml(text: str | bytes) -> list[Diagnostic]:
    """Every problem in ``text``, in line order; empty means it parses cleanly.

    Markup that cannot be read into a document at all yields a single
    diagnostic.
    """
    try:
        _doc, problems = _build(text)
    except DgmlError as exc:
        return [Diagnostic(exc.line, Violation(exc.code, exc.subject, exc.message))]
    return problems


def parse_dgml(text: str | bytes) -> DgmlDocument:
    """Parse DGML text into a validated document.

    Raises:
        DgmlError: a subclass naming the first problem, with ``line`` set.
    """
    doc, problems = _build(text)
    if problems:
        raise problems[0].to_error()
    return doc


def load_dgml(path: str | os.PathLike) -> DgmlDocument:
    with open(path, "rb") as fh:
        return parse_dgml(fh.read())


# -- serialization ---------------------------------------------------------

_ESCAPES = str.maketrans(
    {
        "&": "&amp;",
        "<": "&lt;",
        ">": "&gt;",
        '"': "&quot;",
        "'": "&apos;",
        # raw whitespace in attribute values is normalized away by parsers
        "\t": "&#9;",
        "\n": "&#10;",
        "\r": "&#13;",
    }
)


def _quote(value: str) -> str:
    return '"' + value.translate(_ESCAPES) + '"'


def _element_lines(element: DesignElement, depth: int, out: list[str]) -> None:
    pad = "  " * depth
    attrs = [f"id={_quote(element.id)}"]
    attrs += [f"{k}={_quote(element.attributes[k])}" for k in sorted(element.attributes)]
    head = f"{pad}<{element.kind} {' '.join(attrs)}"
    if not element.children:
        out.append(head + "/>")
        return
    out.append(head + ">")
    for child in element.children:
        _element_lines(child, depth + 1, out)
    out.append(f"{pad}</{element.kind}>")


def serialize_dgml(doc: DgmlDocument) -> str:
    """Render ``doc`` in canonical form.

    Two-space indentation, LF line endings, keywords sorted, element
    attributes id-first then alphabetical, meta attributes in the fixed
    order drf, score, derived-from.
    """
    m = doc.module
    out = [f"<dgml version={_quote(doc.version)}>", f"  <module name={_quote(m.name)}>", "    <keywords>"]
    out += [f"      <kw>{kw}</kw>" for kw in sorted(m.keywords)]
    out.append("    </keywords>")
    out.append(
        f"    <meta drf=\"{m.drf}\" score=\"{m.expert_score}\" derived-from={_quote(m.derived_from or '')}/>"
    )
    if m.design:
        out.append("    <design>")
        for root in m.design:
            _element_lines(root, 3, out)
        out.append("    </design>")
    else:
        out.append("    <design/>")
    out += ["  </module>", "</dgml>"]
    return "\n".join(out) + "\n"


def canonicalize(text: str | bytes) -> str:
    return serialize_dgml(parse_dgml(text))
