"""Word alignments in Pharaoh ``s-t`` pair format, one line per sentence.

Alignments are assumed to come from the intersection heuristic, so each
source token carries at most one target link.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AlignmentError, DataError


@dataclass(frozen=True)
class Alignment:
    """Per source position, the aligned 0-based target index or None."""

    links: tuple[int | None, ...]
    source_len: int
    target_len: int


def parse_alignment(line: str, source_len: int, target_len: int | None = None,
                    first_link: bool = False) -> Alignment:
    """Parse one Pharaoh line (``0-1 2-0 ...``) into an Alignment.

    Source positions absent from the line stay unaligned. A source position
    listed twice with different targets is an error unless ``first_link`` is
    set, which keeps the smallest target index. When ``target_len`` is not
    given it is inferred as max target index + 1.
    """
    links: list[int | None] = [None] * source_len
    max_t = -1
    for pair in line.split():
        s_str, sep, t_str = pair.partition("-")
        if not sep or not s_str.isdigit() or not t_str.isdigit():
            raise AlignmentError(f"malformed alignment pair {pair!r}")
        s, t = int(s_str), int(t_str)
        if s >= source_len:
            raise AlignmentError(
                f"source index {s} out of range for {source_len} source tokens")
        if target_len is not None and t >= target_len:
            raise AlignmentError(
                f"target index {t} out of range for {target_len} target tokens")
        if links[s] is not None and links[s] != t:
            if first_link:
                t = min(t, links[s])
            else:
                raise AlignmentError(
                    f"source position {s} has links to both {links[s]} and {t}; "
                    "intersection alignments allow at most one link per source "
                    "token (pass first_link to keep the smallest)")
        links[s] = t
        max_t = max(max_t, t)
    if target_len is None:
        target_len = max_t + 1
    return Alignment(tuple(links), source_len, target_len)


def target_indices(alignment: Alignment, span: tuple[int, int]) -> list[int]:
    """Aligned target indices of the source positions in ``[lo, hi)``,
    in source order; unaligned positions are skipped."""
    lo, hi = span
    if not 0 <= lo <= hi <= alignment.source_len:
        raise ValueError(
            f"span {span} out of range for {alignment.source_len} source tokens")
    return [t for t in alignment.links[lo:hi] if t is not None]


def read_alignment_file(path, source_lens, first_link: bool = False) -> list[Alignment]:
    """Read one Pharaoh line per sentence, parallel to ``source_lens``."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) != len(source_lens):
        raise DataError(
            f"{path}: {len(lines)} alignment lines for {len(source_lens)} sentences")
    out = []
    for lineno, (line, n) in enumerate(zip(lines, source_lens), 1):
        try:
            out.append(parse_alignment(line, n, first_link=first_link))
        except AlignmentError as e:
            raise DataError(f"{path}:{lineno}: {e}") from e
    return out
