"""Text formats: ``RSD 1`` densities and ``RSDEC 1`` decompositions.

Both are line oriented, carry exact rationals as ``p/q`` (or ``p``), and allow
``#`` comments and blank lines. Writers are deterministic, so identical inputs
give byte-identical files.
"""
from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .decompose import (
    LEAF_REASONS,
    CutSelected,
    Decomposition,
    DivisionNode,
    ResidualLeaf,
    SelectedWhole,
    SplitBoth,
)
from .density import DensityError, GridDensity
from .geometry import Rectangle, format_scalar, parse_rect, parse_scalar


class FormatError(ValueError):
    """A density or decomposition file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _content_lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _scalars(tokens, no):
    try:
        return [parse_scalar(tok) for tok in tokens]
    except ValueError as exc:
        raise FormatError(str(exc), no) from None


# -- RSD 1 -------------------------------------------------------------------

def density_to_text(d: GridDensity) -> str:
    out = ["RSD 1", f"dim {d.dim}"]
    out.append("rect " + " ".join(f"{format_scalar(s.lo)} {format_scalar(s.hi)}" for s in d.domain.sides))
    out.append("cells " + " ".join(str(m) for m in d.shape))
    uniform = GridDensity.uniform(d.domain, d.shape, d.f, d.w)
    for axis, e in enumerate(d.edges):
        if tuple(e) != uniform.edges[axis]:
            out.append(f"edges {axis} " + " ".join(format_scalar(x) for x in e))
    out.append("f " + " ".join(format_scalar(x) for x in d.f))
    if any(x != 1 for x in d.w):
        out.append("w " + " ".join(format_scalar(x) for x in d.w))
    return "\n".join(out) + "\n"


def density_from_text(text: str) -> GridDensity:
    lines = list(_content_lines(text))
    if not lines or lines[0][1].split() != ["RSD", "1"]:
        raise FormatError("missing 'RSD 1' header", lines[0][0] if lines else None)
    dim = bounds = cells = f = w = None
    edges: dict[int, list] = {}
    for no, line in lines[1:]:
        key, *rest = line.split()
        if key == "dim":
            if len(rest) != 1 or not rest[0].isdigit() or int(rest[0]) < 1:
                raise FormatError("'dim' takes one positive integer", no)
            dim = int(rest[0])
        elif key == "rect":
            vals = _scalars(rest, no)
            if len(vals) % 2:
                raise FormatError("'rect' needs lo/hi pairs", no)
            bounds = list(zip(vals[0::2], vals[1::2]))
        elif key == "cells":
            if not all(tok.isdigit() for tok in rest):
                raise FormatError("'cells' takes positive integers", no)
            cells = [int(tok) for tok in rest]
        elif key == "edges":
            if not rest or not rest[0].isdigit():
                raise FormatError("'edges' needs an axis index", no)
            edges[int(rest[0])] = _scalars(rest[1:], no)
        elif key == "f":
            f = _scalars(rest, no)
        elif key == "w":
            w = _scalars(rest, no)
        else:
            raise FormatError(f"unknown record {key!r}", no)
    if dim is None or bounds is None or cells is None or f is None:
        raise FormatError("'dim', 'rect', 'cells' and 'f' are all required")
    if len(bounds) != dim or len(cells) != dim:
        raise FormatError(f"'rect' and 'cells' must describe {dim} axes")
    if any(m < 1 for m in cells):
        raise FormatError("cell counts must be positive")
    try:
        domain = Rectangle.from_bounds(bounds)
        if w is None:
            w = [Fraction(1)] * len(f)
        uniform_edges = GridDensity.uniform(domain, cells, [Fraction(0)] * math.prod(cells)).edges
        all_edges = []
        for axis in range(dim):
            e = edges.get(axis, uniform_edges[axis])
            if len(e) != cells[axis] + 1:
                raise FormatError(f"axis {axis} needs {cells[axis] + 1} edges, got {len(e)}")
            all_edges.append(tuple(e))
        return GridDensity(domain, tuple(all_edges), tuple(f), tuple(w))
    except (DensityError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from None


def read_density(path: Union[str, Path]) -> GridDensity:
    return density_from_text(Path(path).read_text())


def write_density(d: GridDensity, path: Union[str, Path]) -> None:
    Path(path).write_text(density_to_text(d))


# -- RSDEC 1 -----------------------------------------------------------------

def _fmt_mean(m) -> str:
    return "undefined" if m is None else format_scalar(m)


def _outcome_text(node: DivisionNode) -> str:
    o = node.outcome
    if isinstance(o, SelectedWhole):
        return "selected"
    if isinstance(o, SplitBoth):
        return f"split-both axis={o.axis} at={format_scalar(o.midpoint)}"
    if isinstance(o, CutSelected):
        return f"cut-selected axis={o.axis} at={format_scalar(o.cut)}"
    if isinstance(o, ResidualLeaf):
        return f"residual reason={o.reason}"
    raise ValueError(f"node {node.rect} has no outcome")


def decomposition_to_text(dec: Decomposition, dump_tree: bool = False) -> str:
    out = [
        "RSDEC 1",
        f"level {format_scalar(dec.level)}",
        f"complete {'true' if dec.complete else 'false'}",
        f"mode {'exact' if dec.exact else 'float'}",
        f"domain {dec.domain}",
    ]
    for n in dec.selected_nodes:
        out.append(f"select {n.rect} mean={_fmt_mean(n.mean)} depth={n.depth}")
    for n in dec.residual_nodes:
        out.append(f"residual {n.rect} reason={n.outcome.reason}")
    if dump_tree and dec.root is not None:
        for n in dec.root.walk():
            out.append(f"node depth={n.depth} {n.rect} mean={_fmt_mean(n.mean)} outcome={_outcome_text(n)}")
    return "\n".join(out) + "\n"


def _kv(tokens, no) -> dict:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise FormatError(f"expected key=value, got {tok!r}", no)
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _mean_value(text, no):
    if text == "undefined":
        return None
    return _scalars([text], no)[0]


def decomposition_from_text(text: str) -> Decomposition:
    lines = list(_content_lines(text))
    if not lines or lines[0][1].split() != ["RSDEC", "1"]:
        raise FormatError("missing 'RSDEC 1' header", lines[0][0] if lines else None)
    level = complete = domain = None
    exact = True
    selected, residual, flat_nodes = [], [], []
    try:
        for no, line in lines[1:]:
            key, _, rest = line.partition(" ")
            tokens = rest.split()
            if key == "level":
                level = _scalars(tokens, no)[0]
            elif key == "complete":
                if tokens not in (["true"], ["false"]):
                    raise FormatError("'complete' must be true or false", no)
                complete = tokens[0] == "true"
            elif key == "mode":
                if tokens not in (["exact"], ["float"]):
                    raise FormatError("'mode' must be exact or float", no)
                exact = tokens[0] == "exact"
            elif key == "domain":
                domain = parse_rect(tokens[0])
            elif key == "select":
                kv = _kv(tokens[1:], no)
                node = DivisionNode(parse_rect(tokens[0]), _mean_value(kv.get("mean", "undefined"), no),
                                    int(kv.get("depth", 0)), SelectedWhole())
                selected.append(node)
            elif key == "residual":
                kv = _kv(tokens[1:], no)
                reason = kv.get("reason")
                if reason not in LEAF_REASONS:
                    raise FormatError(f"unknown residual reason {reason!r}", no)
                residual.append(DivisionNode(parse_rect(tokens[0]), None, 0, ResidualLeaf(reason)))
            elif key == "node":
                flat_nodes.append((no, tokens))
            else:
                raise FormatError(f"unknown record {key!r}", no)
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from None
    if level is None or complete is None:
        raise FormatError("'level' and 'complete' are required")
    root = _rebuild_tree(flat_nodes) if flat_nodes else None
    if domain is None:
        domain = root.rect if root is not None else None
    if domain is None:
        raise FormatError("'domain' is required when no tree is dumped")
    if not exact:
        # repr-formatted floats parse to the rationals they denote; map them back
        tree = list(root.walk()) if root is not None else []
        for node in tree + selected + residual:
            _float_node(node)
        level, domain = float(level), domain.to_float()
    return Decomposition(level, root, selected, residual, complete, exact, domain)


def _float_node(node: DivisionNode) -> None:
    node.rect = node.rect.to_float()
    if node.mean is not None:
        node.mean = float(node.mean)
    o = node.outcome
    if isinstance(o, SplitBoth):
        o.midpoint = float(o.midpoint)
    elif isinstance(o, CutSelected):
        o.cut = float(o.cut)


def _rebuild_tree(flat_nodes) -> DivisionNode:
    """Rebuild the division tree from its preorder dump."""
    parsed = []
    for no, tokens in flat_nodes:
        try:
            depth = int(tokens[0].removeprefix("depth="))
            rect = parse_rect(tokens[1])
            kv_mean = _kv([tokens[2]], no)
            outcome_kind = tokens[3].removeprefix("outcome=")
            extra = _kv(tokens[4:], no)
        except (IndexError, ValueError) as exc:
            raise FormatError(f"bad node record: {exc}", no) from None
        parsed.append((no, DivisionNode(rect, _mean_value(kv_mean.get("mean"), no), depth), outcome_kind, extra))

    root = None
    pending: list[tuple[DivisionNode, str, dict, list]] = []
    for no, node, kind, extra in parsed:
        if kind == "selected":
            node.outcome = SelectedWhole()
        elif kind == "residual":
            node.outcome = ResidualLeaf(extra.get("reason", ""))
        elif kind not in ("split-both", "cut-selected"):
            raise FormatError(f"unknown outcome {kind!r}", no)
        if root is None:
            root = node
        else:
            if not pending:
                raise FormatError("node outside the tree", no)
            parent = pending[-1]
            if node.depth != parent[0].depth + 1:
                raise FormatError("node depth does not follow its parent", no)
            parent[3].append(node)
            if len(parent[3]) == 2:
                pending.pop()
                _attach(*parent)
        if kind in ("split-both", "cut-selected"):
            pending.append((node, kind, extra, []))
    if pending:
        raise FormatError("truncated tree dump")
    return root


def _attach(node: DivisionNode, kind: str, extra: dict, children: list) -> None:
    axis = int(extra["axis"])
    at = parse_scalar(extra["at"])
    if kind == "split-both":
        node.outcome = SplitBoth(axis, at, children[0], children[1])
    else:
        node.outcome = CutSelected(axis, at, children[0], children[1])


def read_decomposition(path: Union[str, Path]) -> Decomposition:
    return decomposition_from_text(Path(path).read_text())


def write_decomposition(dec: Decomposition, path: Union[str, Path], dump_tree: bool = False) -> None:
    Path(path).write_text(decomposition_to_text(dec, dump_tree))
