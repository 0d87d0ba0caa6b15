"""LOCC protocol trees: file format, builtins and exhaustive simulation."""

from importlib import resources

from .builtin import builtin_protocol
from .engine import (
    DiscriminationReport,
    discrimination_table,
    enumerate_branches,
    verify_discrimination,
)
from .model import BranchTranscript, Case, Leaf, MeasureNode, ProtocolTree, structurally_equal
from .parser import format_protocol, parse_protocol


def shipped_protocol_files() -> dict[str, str]:
    """Name -> text of every ``.locc`` file bundled with the package."""
    root = resources.files(__name__) / "files"
    return {
        p.name: p.read_text(encoding="utf-8")
        for p in sorted(root.iterdir(), key=lambda p: p.name)
        if p.name.endswith(".locc")
    }


__all__ = [
    "BranchTranscript",
    "Case",
    "DiscriminationReport",
    "Leaf",
    "MeasureNode",
    "ProtocolTree",
    "builtin_protocol",
    "discrimination_table",
    "enumerate_branches",
    "format_protocol",
    "parse_protocol",
    "shipped_protocol_files",
    "structurally_equal",
    "verify_discrimination",
]
