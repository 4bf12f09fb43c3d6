"""Store UI designs as DGML documents, infer reusable modules, account for effort."""

__version__ = "0.1.0"

from .effort import (
    ConventionalEffortRecord,
    DgmlEffortRecord,
    EffortReport,
    comparison_report,
    compute_ted,
    conventional_total,
    involvement_report,
)
from .inference import (
    EmptyQuery,
    MatchCandidate,
    RequirementSpec,
    SkeletonDesign,
    accept_skeleton,
    compose_skeleton,
    extract_keywords,
    search,
)
from .markup import DgmlError, canonicalize, parse_dgml, serialize_dgml, validate
from .model import DesignElement, DesignModule, DgmlDocument
from .repository import KeywordIndex, Repository, init_repo, open_repo

__all__ = [
    "ConventionalEffortRecord",
    "DesignElement",
    "DesignModule",
    "DgmlDocument",
    "DgmlEffortRecord",
    "DgmlError",
    "EffortReport",
    "EmptyQuery",
    "KeywordIndex",
    "MatchCandidate",
    "Repository",
    "RequirementSpec",
    "SkeletonDesign",
    "accept_skeleton",
    "canonicalize",
    "comparison_report",
    "compose_skeleton",
    "compute_ted",
    "conventional_total",
    "extract_keywords",
    "init_repo",
    "involvement_report",
    "open_repo",
    "parse_dgml",
    "search",
    "serialize_dgml",
    "validate",
]
