"""Command-line front end: ``risingsun {gen,decompose,verify,cz,render}``.

Every failure path has its own exit status (see ``EXIT_*``) and a one-line
diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .decompose import (
    CZInputError,
    InvariantViolation,
    LevelBelowMeanError,
    StoppingPolicy,
    ZeroMeasureError,
    cz_decompose,
    rising_sun_decompose,
)
from .density import DensityError, GridDensity
from .fixtures import PRESETS, UnknownPresetError, preset
from .formats import (
    FormatError,
    decomposition_from_text,
    decomposition_to_text,
    density_from_text,
    density_to_text,
)
from .geometry import format_scalar, parse_scalar
from .render import COLOR_MODES, UnsupportedDimensionError, render_svg
from .verify import DEFAULT_FLOAT_TOLERANCE, verify_decomposition

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_LEVEL_BELOW_MEAN = 4
EXIT_ZERO_MEASURE = 5
EXIT_VERIFY_FAILED = 6
EXIT_DOMAIN_MISMATCH = 7
EXIT_UNSUPPORTED_DIM = 8
EXIT_UNKNOWN_PRESET = 9
EXIT_CZ_INPUT = 10
EXIT_POLICY = 11
EXIT_IO = 12
EXIT_INTERNAL = 13

DEFAULT_MAX_DEPTH = 24


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Optional[str] = None
    decomposition: Optional[str] = None
    output: Optional[str] = None
    level: Optional[str] = None
    mode: str = "exact"
    min_side: str = "0"
    max_depth: Optional[int] = DEFAULT_MAX_DEPTH
    max_select: Optional[int] = None
    seed: int = 0
    preset: Optional[str] = None
    tolerance: Optional[str] = None
    svg_width: int = 640
    svg_height: int = 640
    color_by: str = "kind"
    dump_tree: bool = False

    def policy(self) -> StoppingPolicy:
        try:
            min_side = parse_scalar(self.min_side)
        except ValueError as exc:
            raise CliError(EXIT_USAGE, f"--min-side: {exc}") from None
        depth = None if self.max_depth is not None and self.max_depth <= 0 else self.max_depth
        try:
            return StoppingPolicy(min_side, depth, self.max_select)
        except ValueError as exc:
            raise CliError(EXIT_POLICY, f"invalid stopping policy: {exc}") from None

    def parsed_level(self):
        if self.level is None:
            raise CliError(EXIT_USAGE, "--level is required")
        try:
            A = parse_scalar(self.level)
        except ValueError as exc:
            raise CliError(EXIT_USAGE, f"--level: {exc}") from None
        return float(A) if self.mode == "float" else A

    def rtol(self, default) -> Optional[float]:
        if self.tolerance is None:
            return default
        try:
            value = parse_scalar(self.tolerance)
        except ValueError as exc:
            raise CliError(EXIT_USAGE, f"--tolerance: {exc}") from None
        if value < 0:
            raise CliError(EXIT_USAGE, "--tolerance must be >= 0")
        return value


def _read(path: Optional[str], what: str) -> str:
    if path is None:
        raise CliError(EXIT_USAGE, f"--input is required ({what})")
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc.strerror}") from None


def _load_density(cfg: RunConfig) -> GridDensity:
    text = _read(cfg.input, "an RSD 1 density")
    try:
        d = density_from_text(text)
    except (FormatError, DensityError) as exc:
        raise CliError(EXIT_PARSE, f"{cfg.input}: {exc}") from None
    return d.to_float() if cfg.mode == "float" else d


def _load_decomposition(path: Optional[str]):
    if path is None:
        raise CliError(EXIT_USAGE, "a decomposition file is required")
    try:
        return decomposition_from_text(_read(path, "an RSDEC 1 decomposition"))
    except FormatError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None


def cmd_gen(cfg: RunConfig) -> int:
    if cfg.preset is None:
        raise CliError(EXIT_USAGE, "--preset is required")
    try:
        d = preset(cfg.preset, cfg.seed)
    except UnknownPresetError:
        names = ", ".join(sorted(PRESETS))
        raise CliError(EXIT_UNKNOWN_PRESET, f"unknown preset {cfg.preset!r} (known: {names})") from None
    _write(cfg.output, density_to_text(d))
    return EXIT_OK


def _run_rising_sun(cfg: RunConfig, d: GridDensity):
    policy = cfg.policy()
    A = cfg.parsed_level()
    rtol = cfg.rtol(None)
    try:
        return rising_sun_decompose(d, A, policy, None if rtol is None else float(rtol))
    except LevelBelowMeanError as exc:
        raise CliError(EXIT_LEVEL_BELOW_MEAN, str(exc)) from None
    except ZeroMeasureError as exc:
        raise CliError(EXIT_ZERO_MEASURE, str(exc)) from None


def cmd_decompose(cfg: RunConfig) -> int:
    d = _load_density(cfg)
    dec = _run_rising_sun(cfg, d)
    _write(cfg.output, decomposition_to_text(dec, dump_tree=cfg.dump_tree))
    if not dec.complete:
        print(f"note: truncated by the stopping policy; {len(dec.selected_nodes)} rectangles "
              "selected, f > level remains in some resolution-limit leaf", file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    d = _load_density(cfg)
    dec = _load_decomposition(cfg.decomposition)
    exact_domain = d.to_exact().domain
    if dec.domain.to_exact() != exact_domain:
        raise CliError(EXIT_DOMAIN_MISMATCH,
                       f"decomposition domain {dec.domain} does not match density domain {d.domain}")
    default = 0 if dec.exact else DEFAULT_FLOAT_TOLERANCE
    report = verify_decomposition(d, dec, cfg.rtol(default))
    text = report.render()
    if not dec.complete:
        text += "note: decomposition was truncated (complete false)\n"
    _write(cfg.output, text)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _side_by_side(cz, dec) -> str:
    rows = [f"{'calderon-zygmund':<48} rising sun"]
    cz_rows = [f"{str(c)} mean={format_scalar(m)}" for c, m in cz.cubes]
    rs_rows = [f"{n.rect} mean={format_scalar(n.mean)}" for n in dec.selected_nodes]
    for i in range(max(len(cz_rows), len(rs_rows))):
        left = cz_rows[i] if i < len(cz_rows) else ""
        right = rs_rows[i] if i < len(rs_rows) else ""
        rows.append(f"{left:<48} {right:<48}".rstrip())
    return "\n".join(rows) + "\n"


def cmd_cz(cfg: RunConfig) -> int:
    d = _load_density(cfg)
    policy = cfg.policy()
    A = cfg.parsed_level()
    rtol = cfg.rtol(None)
    rtol = None if rtol is None else float(rtol)
    try:
        cz = cz_decompose(d, A, policy, rtol)
    except CZInputError as exc:
        raise CliError(EXIT_CZ_INPUT, str(exc)) from None
    except LevelBelowMeanError as exc:
        raise CliError(EXIT_LEVEL_BELOW_MEAN, str(exc)) from None
    except ZeroMeasureError as exc:
        raise CliError(EXIT_ZERO_MEASURE, str(exc)) from None
    n = d.dim
    lines = [f"level {format_scalar(cz.level)}", f"complete {'true' if cz.complete else 'false'}"]
    for cube, m in cz.cubes:
        bound = 2**n * cz.level
        lines.append(f"cube {cube} mean={format_scalar(m)} bound={format_scalar(bound)}")
    _write(cfg.output, "\n".join(lines) + "\n")
    dec = rising_sun_decompose(d, A, policy, rtol)
    comparison = _side_by_side(cz, dec)
    if cfg.output is None or cfg.output == "-":
        sys.stdout.write("\n" + comparison)
    else:
        sys.stdout.write(comparison)
    return EXIT_OK


def cmd_render(cfg: RunConfig) -> int:
    dec = _load_decomposition(cfg.decomposition or cfg.input)
    try:
        svg = render_svg(dec, cfg.svg_width, cfg.svg_height, cfg.color_by)
    except UnsupportedDimensionError as exc:
        raise CliError(EXIT_UNSUPPORTED_DIM, str(exc)) from None
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    _write(cfg.output, svg)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "decompose": cmd_decompose,
    "verify": cmd_verify,
    "cz": cmd_cz,
    "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risingsun", description="Exact rising sun decompositions of grid densities.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, density=True):
        p.add_argument("--input", help="input file ('-' for stdin)")
        p.add_argument("--output", help="output file (default stdout)")
        if density:
            p.add_argument("--mode", choices=("exact", "float"), default="exact")
            p.add_argument("--tolerance", help="relative tolerance (float mode)")

    def policy(p):
        p.add_argument("--level", help="level A as p/q")
        p.add_argument("--min-side", default="0", help="smallest side a split may produce")
        p.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH,
                       help=f"deepest node that is divided (default {DEFAULT_MAX_DEPTH}, 0 for none)")
        p.add_argument("--max-select", type=int, help="stop after this many selections")

    p = sub.add_parser("gen", help="write a fixture density")
    p.add_argument("--preset", help="one of: " + ", ".join(sorted(PRESETS)))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")

    p = sub.add_parser("decompose", help="rising sun decomposition of a density")
    common(p)
    policy(p)
    p.add_argument("--dump-tree", action="store_true", help="include the division tree")

    p = sub.add_parser("verify", help="re-check a decomposition against its density")
    common(p)
    p.add_argument("--decomposition", required=True, help="RSDEC 1 file to check")

    p = sub.add_parser("cz", help="Calderon-Zygmund cubes, compared with the rising sun")
    common(p)
    policy(p)

    p = sub.add_parser("render", help="SVG figure of a 1-D or 2-D decomposition")
    p.add_argument("--input", help="RSDEC 1 file")
    p.add_argument("--decomposition", help="alias for --input")
    p.add_argument("--output")
    p.add_argument("--svg-width", type=int, default=640)
    p.add_argument("--svg-height", type=int, default=640)
    p.add_argument("--color-by", choices=COLOR_MODES, default="kind")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in fields})


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    cfg = config_from_args(ns)
    try:
        return COMMANDS[cfg.command](cfg)
    except CliError as exc:
        print(f"risingsun {cfg.command}: {exc}", file=sys.stderr)
        return exc.code
    except InvariantViolation as exc:
        print(f"risingsun {cfg.command}: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
