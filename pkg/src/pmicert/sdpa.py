"""SDPA sparse text export of relaxation problems, plus a re-import parser.

Semantics of the exported file: constraint c (one per monomial of degree up
to 2k, in graded-lex order) states <A_c, X> = b_c over the PSD blocks, except
that the constant-monomial constraint carries the free objective scalar:
<A_c, X> + gamma = b_c, with gamma to be maximized (the standard dual-form
treatment of the bound variable).  Header comments record that convention.

Layout: comment lines starting with '*', then the number of constraints, the
number of blocks, the block size list (a negative size would mark a diagonal
block; none are emitted here), the objective/right-hand-side vector, and one
line per entry `<cons#> <block#> <i> <j> <value>` with 1-based indices and
i <= j (upper triangle of the symmetric coefficient matrices).
"""

from __future__ import annotations

from dataclasses import dataclass

from .relax import SDPProblem


@dataclass
class SdpaData:
    ncons: int
    nblocks: int
    sizes: list
    objective: list       # floats, length ncons
    entries: list         # (cons 1-based, block 1-based, i, j, value) with i <= j
    gamma_constraint: int  # 1-based index of the constraint carrying gamma


def to_sdpa_data(p: SDPProblem) -> SdpaData:
    entries = []
    for c, _ in enumerate(p.monomials):
        for (i, j) in sorted(p.entries0[c]):
            entries.append((c + 1, 1, i + 1, j + 1, float(p.entries0[c][(i, j)])))
        for (i, j) in sorted(p.entries1[c]):
            entries.append((c + 1, 2, i + 1, j + 1, float(p.entries1[c][(i, j)])))
    return SdpaData(
        ncons=p.constraint_count(),
        nblocks=2,
        sizes=list(p.block_sizes),
        objective=[float(v) for v in p.rhs],
        entries=entries,
        gamma_constraint=p.const_index + 1,
    )


def format_sdpa(data: SdpaData) -> str:
    lines = [
        "* SDPA sparse export: coefficient-matching constraints of an SOS relaxation",
        f"* constraint {data.gamma_constraint} carries the free objective scalar gamma",
        str(data.ncons),
        str(data.nblocks),
        " ".join(str(s) for s in data.sizes),
        " ".join(repr(v) for v in data.objective),
    ]
    for cons, blk, i, j, v in data.entries:
        lines.append(f"{cons} {blk} {i} {j} {v!r}")
    return "\n".join(lines) + "\n"


def export_sdpa(p: SDPProblem) -> str:
    """Deterministic SDPA sparse text for a built relaxation."""
    return format_sdpa(to_sdpa_data(p))


def parse_sdpa(text: str) -> SdpaData:
    """Text-level parser for the exported format (round-trip stable)."""
    gamma_constraint = 0
    body = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("*") or line.startswith('"'):
            if "free objective scalar gamma" in line:
                gamma_constraint = int(line.split()[2])
            continue
        body.append(line)
    if len(body) < 4:
        raise ValueError("truncated SDPA file: missing header lines")
    ncons = int(body[0])
    nblocks = int(body[1])
    sizes = [int(tok) for tok in body[2].split()]
    if len(sizes) != nblocks:
        raise ValueError(f"block size list has {len(sizes)} entries, expected {nblocks}")
    objective = [float(tok) for tok in body[3].split()]
    if len(objective) != ncons:
        raise ValueError(f"objective vector has {len(objective)} entries, expected {ncons}")
    entries = []
    for line in body[4:]:
        toks = line.split()
        if len(toks) != 5:
            raise ValueError(f"malformed entry line: {line!r}")
        cons, blk, i, j = (int(t) for t in toks[:4])
        if not (1 <= cons <= ncons and 1 <= blk <= nblocks):
            raise ValueError(f"entry indices out of range: {line!r}")
        if not (1 <= i <= j <= sizes[blk - 1]):
            raise ValueError(f"entry not in upper triangle of its block: {line!r}")
        entries.append((cons, blk, i, j, float(toks[4])))
    return SdpaData(ncons, nblocks, sizes, objective, entries, gamma_constraint)
