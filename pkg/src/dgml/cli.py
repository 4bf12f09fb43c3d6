"""``dgml`` command-line tool.

Exit codes: 0 success, 1 validation failure, 2 not found, 3 I/O failure,
4 usage error. Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .effort import (
    EffortError,
    as_number,
    comparison_report,
    compute_ted,
    format_table,
    involvement_report,
    load_conventional_efforts,
    load_dgml_efforts,
)
from .inference import (
    EmptyQuery,
    RequirementSpec,
    accept_skeleton,
    compose_skeleton,
    search,
)
from .markup import DgmlError, diagnose_dgml, load_dgml, serialize_dgml
from .model import MODULE_NAME_RE
from .repository import (
    AlreadyInitialized,
    DuplicateModuleName,
    IoFailure,
    ModuleNotFound,
    NotARepository,
    Repository,
    ScoreOutOfRange,
    ValidationFailed,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_FOUND = 2
EXIT_IO = 3
EXIT_USAGE = 4

_EXIT_CODES = [
    ((ModuleNotFound, NotARepository, FileNotFoundError), EXIT_NOT_FOUND),
    (
        (
            DgmlError,
            ValidationFailed,
            DuplicateModuleName,
            AlreadyInitialized,
            ScoreOutOfRange,
            EmptyQuery,
            EffortError,
            UnicodeDecodeError,
        ),
        EXIT_INVALID,
    ),
    ((IoFailure, OSError), EXIT_IO),
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _out(text: str = "") -> None:
    sys.stdout.write(text if text.endswith("\n") or not text else text + "\n")


def _emit_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def _note(text: str) -> None:
    print(text, file=sys.stderr)


def _module_facts(module) -> dict:
    return {
        "name": module.name,
        "keywords": sorted(module.keywords),
        "drf": module.drf,
        "score": module.expert_score,
        "derived_from": module.derived_from,
    }


# -- commands ----------------------------------------------------------------


def cmd_validate(args) -> int:
    data = Path(args.file).read_bytes()
    problems = diagnose_dgml(data)
    if args.json:
        _emit_json(
            {
                "file": args.file,
                "valid": not problems,
                "violations": [
                    {"line": p.line, "code": p.violation.code, "subject": p.violation.subject,
                     "message": p.violation.message}
                    for p in problems
                ],
            }
        )
    elif not problems:
        _out(f"ok {args.file}")
    for problem in problems:
        _note(f"{args.file}: {problem}")
    return EXIT_INVALID if problems else EXIT_OK


def cmd_repo_init(args) -> int:
    Repository.init(args.dir)
    if args.json:
        _emit_json({"initialized": args.dir})
    else:
        _out(f"initialized {args.dir}")
    return EXIT_OK


def cmd_repo_add(args) -> int:
    repo = Repository.open(args.dir)
    doc = load_dgml(args.file)
    repo.add_module(doc)
    if args.json:
        _emit_json({"added": _module_facts(doc.module)})
    else:
        _out(doc.module.name)
    return EXIT_OK


def cmd_repo_list(args) -> int:
    repo = Repository.open(args.dir)
    if args.json:
        _emit_json({"modules": [_module_facts(m) for m in repo.modules()]})
    else:
        for name in repo.names():
            _out(name)
    return EXIT_OK


def cmd_repo_reindex(args) -> int:
    repo = Repository.open(args.dir)
    index = repo.rebuild_index()
    for problem in repo.problems:
        _note(f"skipped {problem}")
    indexed = len({name for names in index.as_dict().values() for name in names})
    if args.json:
        _emit_json(
            {
                "keywords": len(index),
                "modules": indexed,
                "problems": [str(p) for p in repo.problems],
            }
        )
    else:
        _out(f"indexed {len(index)} keywords over {indexed} modules")
    return EXIT_INVALID if repo.problems else EXIT_OK


def cmd_derive(args) -> int:
    repo = Repository.open(args.dir)
    doc = load_dgml(args.file)
    repo.derive_module(args.parent, doc)
    parent = repo.get(args.parent)
    if args.json:
        _emit_json({"derived": doc.module.name, "parent": parent.name, "parent_drf": parent.drf})
    else:
        _out(f"{doc.module.name} derived from {parent.name} (drf={parent.drf})")
    return EXIT_OK


def cmd_score(args) -> int:
    repo = Repository.open(args.dir)
    repo.set_score(args.name, args.score)
    if args.json:
        _emit_json({"name": args.name, "score": args.score})
    else:
        _out(f"{args.name} score={args.score}")
    return EXIT_OK


def cmd_reuse(args) -> int:
    repo = Repository.open(args.dir)
    drf = repo.record_reuse(args.name)
    if args.json:
        _emit_json({"name": args.name, "drf": drf})
    else:
        _out(f"{args.name} drf={drf}")
    return EXIT_OK


def _requirement(args) -> RequirementSpec:
    if args.spec is not None:
        return RequirementSpec.from_file(args.spec)
    return RequirementSpec.from_keywords(args.keywords.split(","))


def cmd_search(args) -> int:
    repo = Repository.open(args.dir)
    spec = _requirement(args)
    results = search(repo, spec, min_score=args.min_score)
    if args.json:
        _emit_json(
            {
                "query": sorted(spec.keywords),
                "results": [
                    {
                        "name": c.module_name,
                        "drf": c.drf,
                        "match_score": c.match_score,
                        "score": c.expert_score,
                        "matched": list(c.matched_keywords),
                    }
                    for c in results
                ],
            }
        )
        return EXIT_OK
    for c in results:
        _out(
            f"{c.module_name}\tdrf={c.drf}\tmatch={c.match_score}\tscore={c.expert_score}"
            f"\tmatched={','.join(c.matched_keywords)}"
        )
    if not results:
        _note("no matching modules")
    return EXIT_OK


def _confirm(prompt: str) -> bool:
    sys.stderr.write(prompt)
    sys.stderr.flush()
    answer = sys.stdin.readline()
    return answer.strip().lower() in ("y", "yes")


def cmd_compose(args) -> int:
    if not MODULE_NAME_RE.fullmatch(args.name):
        raise UsageError(f"bad skeleton name {args.name!r}")
    repo = Repository.open(args.dir)
    spec = _requirement(args)
    skeleton = compose_skeleton(repo, spec, min_score=args.min_score, name=args.name)
    text = serialize_dgml(skeleton.document)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")

    if args.json:
        payload = {
            "selected": list(skeleton.selected),
            "covered": list(skeleton.covered),
            "uncovered": list(skeleton.uncovered),
        }
        if not args.out:
            payload["document"] = text
    else:
        _out("selected: " + ", ".join(skeleton.selected))
        _out("covered: " + ", ".join(skeleton.covered))
        _out("uncovered: " + ", ".join(skeleton.uncovered))
        if args.out:
            _out(f"written: {args.out}")
        else:
            _out(text)

    accepted = False
    if skeleton.selected:
        accepted = args.yes or _confirm(
            f"Accept skeleton and record reuse of {len(skeleton.selected)} module(s)? [y/N] "
        )
        if accepted:
            accept_skeleton(repo, skeleton)
            _note("reuse recorded for: " + ", ".join(skeleton.selected))
        else:
            _note("not accepted; repository unchanged")
    if args.json:
        payload["accepted"] = accepted
        _emit_json(payload)
    return EXIT_OK


def cmd_effort_ted(args) -> int:
    records = load_dgml_efforts(args.dgml)
    teds = [(r.project, compute_ted(r)) for r in records]
    if args.json:
        _emit_json({"rows": [{"project": p, "ted": as_number(t)} for p, t in teds]})
        return EXIT_OK
    _out("project,ted")
    for project, ted in teds:
        _out(f"{project},{ted}")
    return EXIT_OK


def cmd_effort_report(args) -> int:
    report = comparison_report(load_dgml_efforts(args.dgml), load_conventional_efforts(args.conv))
    if args.json:
        _emit_json(report.to_json())
    elif args.table:
        _out(report.to_table())
    else:
        _out(report.to_csv())
    return EXIT_OK


def cmd_effort_involvement(args) -> int:
    rows = involvement_report(load_dgml_efforts(args.dgml), load_conventional_efforts(args.conv))
    if args.json:
        _emit_json(
            {
                "rows": [
                    {"project": r.project, "user_hours": as_number(r.user_hours),
                     "ace_hours": as_number(r.ace_hours)}
                    for r in rows
                ]
            }
        )
    elif args.table:
        cells = [["project", "user_hours", "ace_hours"]]
        cells += [[r.project, str(r.user_hours), str(r.ace_hours)] for r in rows]
        _out(format_table(cells))
    else:
        _out("project,user_hours,ace_hours")
        for r in rows:
            _out(f"{r.project},{r.user_hours},{r.ace_hours}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="write one JSON object to stdout")

    parser = _Parser(prog="dgml", description="DGML design repository and reuse inference")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", parents=[common], help="check a .dgml file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    repo = sub.add_parser("repo", help="repository maintenance")
    repo_sub = repo.add_subparsers(dest="repo_command", required=True, metavar="ACTION")
    p = repo_sub.add_parser("init", parents=[common], help="create an empty repository")
    p.add_argument("dir")
    p.set_defaults(func=cmd_repo_init)
    p = repo_sub.add_parser("add", parents=[common], help="store a module")
    p.add_argument("dir")
    p.add_argument("file")
    p.set_defaults(func=cmd_repo_add)
    p = repo_sub.add_parser("list", parents=[common], help="list module names")
    p.add_argument("dir")
    p.set_defaults(func=cmd_repo_list)
    p = repo_sub.add_parser("reindex", parents=[common], help="rebuild the keyword index from module files")
    p.add_argument("dir")
    p.set_defaults(func=cmd_repo_reindex)

    p = sub.add_parser("derive", parents=[common], help="store a module derived from an existing one")
    p.add_argument("dir")
    p.add_argument("--parent", required=True)
    p.add_argument("file")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("score", parents=[common], help="set a module's expert score")
    p.add_argument("dir")
    p.add_argument("name")
    p.add_argument("score", type=int)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("reuse", parents=[common], help="record one reuse of a module")
    p.add_argument("dir")
    p.add_argument("name")
    p.set_defaults(func=cmd_reuse)

    for name, func, helptext in (
        ("search", cmd_search, "rank modules matching a requirement"),
        ("compose", cmd_compose, "build a skeleton design covering a requirement"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("dir")
        query = p.add_mutually_exclusive_group(required=True)
        query.add_argument("--spec", help="UIRS text file")
        query.add_argument("--keywords", help="comma-separated keywords")
        p.add_argument("--min-score", type=int, default=0, help="skip modules scored below N")
        p.set_defaults(func=func)
    p.add_argument("--out", help="write the skeleton DGML here")
    p.add_argument("--yes", action="store_true", help="accept without prompting")
    p.add_argument("--name", default="skeleton", help="module name for the skeleton")

    effort = sub.add_parser("effort", help="effort accounting")
    effort_sub = effort.add_subparsers(dest="effort_command", required=True, metavar="ACTION")
    p = effort_sub.add_parser("ted", parents=[common], help="total DGML effort per project")
    p.add_argument("--dgml", required=True)
    p.set_defaults(func=cmd_effort_ted)
    for name, func, helptext in (
        ("report", cmd_effort_report, "DGML vs conventional totals and savings"),
        ("involvement", cmd_effort_involvement, "end-user vs agile-client hours"),
    ):
        p = effort_sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--dgml", required=True)
        p.add_argument("--conv", required=True)
        p.add_argument("--table", action="store_true", help="aligned text table instead of CSV")
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="dgml: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _note(str(exc))
        return EXIT_USAGE
    except Exception as exc:
        for types, code in _EXIT_CODES:
            if isinstance(exc, types):
                prefix = f"{exc.code}: " if isinstance(exc, DgmlError) else ""
                _note(f"dgml: {prefix}{exc}")
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
