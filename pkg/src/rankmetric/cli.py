"""Batch command-line surface over the library pipelines.

Every subcommand reads and writes the bit-exact text formats of its
owning module; tolerances arrive as ``num/den`` rationals, never floats.
Reports are deterministic: identical invocations produce byte-identical
output. Exit status is 0 on success, 2 on validation errors, and 3 on
reported outcomes such as ``TooLarge`` or ``NotRepairable``; in the
failure cases the offending error class name is printed verbatim.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from .errors import FormatError, OutcomeError, RankMetricError, TooLarge
from .gf import field_for_order
from .matrix import (
    Matrix,
    kassabov_generators,
    rank,
    rank_distance,
    read_matrices,
    read_matrix,
    write_matrix,
)
from .embeddings import (
    DeltaEmbedding,
    Homomorphism,
    amalgamate,
    iota,
    skolem_noether_conjugator,
)
from .stability import relation_defect, repair
from .fraisse import (
    approximate_extension,
    approximate_homogeneity,
    back_and_forth,
    tower_make,
)
from . import ramsey as _ramsey


def _max_dim() -> int:
    raw = os.environ.get("RANKMETRIC_MAX_DIM", "256")
    try:
        return int(raw)
    except ValueError:
        raise FormatError(f"RANKMETRIC_MAX_DIM must be an integer, got {raw!r}")


def _guard_dim(n: int):
    cap = _max_dim()
    if n > cap:
        raise TooLarge(f"dimension {n} exceeds RANKMETRIC_MAX_DIM={cap}")


def _fraction(text: str) -> Fraction:
    parts = text.split("/")
    try:
        if len(parts) == 1:
            return Fraction(int(parts[0]))
        if len(parts) == 2:
            return Fraction(int(parts[0]), int(parts[1]))
    except (ValueError, ZeroDivisionError):
        pass
    raise FormatError(f"expected a rational like num/den, got {text!r}")


def _read_text(path: str) -> str:
    with open(path, "r", encoding="ascii") as fh:
        return fh.read()


def _write_text(path: str, text: str):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def _load_matrix(path: str) -> Matrix:
    m = read_matrix(_read_text(path))
    _guard_dim(max(m.rows, m.cols))
    return m


def _emit(out, text: str):
    out.write(text)


# -- handlers ----------------------------------------------------------------


def _cmd_rank(args, out):
    m = _load_matrix(args.input)
    _emit(out, f"rank {rank(m)}\n")


def _cmd_dist(args, out):
    x = _load_matrix(args.x)
    y = _load_matrix(args.y)
    _emit(out, f"dist {rank_distance(x, y)}\n")


def _cmd_gens(args, out):
    _guard_dim(args.n)
    spec = field_for_order(args.q)
    a, b = kassabov_generators(args.n, spec)
    text = write_matrix(a) + write_matrix(b)
    d = relation_defect(a, b, args.n)
    nums, den = d.components_over_common_denominator()
    text += "defect " + " ".join(f"{v}/{den}" for v in nums) + "\n"
    if args.out:
        _write_text(args.out, text)
    else:
        _emit(out, text)


def _cmd_iota(args, out):
    x = _load_matrix(args.input)
    _guard_dim(args.n)
    y = iota(args.n, args.m, x)
    text = write_matrix(y)
    if args.out:
        _write_text(args.out, text)
    else:
        _emit(out, text)


def _read_pair(path: str):
    mats = read_matrices(_read_text(path), 2)
    for m in mats:
        _guard_dim(max(m.rows, m.cols))
    return mats


def _cmd_defect(args, out):
    x, y = _read_pair(args.input)
    _emit(out, relation_defect(x, y, args.n).to_text())


def _cmd_repair(args, out):
    x, y = _read_pair(args.input)
    psi, _, cert = repair(x, y, args.n)
    _emit(out, cert.to_text())
    if args.out:
        _write_text(args.out, psi.to_text())


def _load_delta(path: str) -> DeltaEmbedding:
    e = DeltaEmbedding.from_text(_read_text(path))
    _guard_dim(e.n)
    return e


def _load_hom(path: str) -> Homomorphism:
    h = Homomorphism.from_text(_read_text(path))
    _guard_dim(h.n)
    return h


def _cmd_homog(args, out):
    phi = _load_delta(args.phi)
    psi = _load_delta(args.psi)
    beta, residual = approximate_homogeneity(phi, psi)
    _emit(out, f"residual {residual.numerator}/{residual.denominator}\n")
    text = write_matrix(beta)
    if args.out:
        _write_text(args.out, text)
    else:
        _emit(out, text)


def _cmd_extend(args, out):
    phi = _load_delta(args.phi)
    tower = tower_make(args.tower, args.prefix, phi.spec)
    for d in tower.dims:
        _guard_dim(d)
    k_prime, psi, err = approximate_extension(phi, tower, _fraction(args.delta_prime))
    _emit(out, f"k_prime {k_prime}\n")
    _emit(out, f"stage_dim {tower.dims[k_prime]}\n")
    _emit(out, f"commute_error {err.numerator}/{err.denominator}\n")
    if args.out:
        _write_text(args.out, psi.to_text())


def _cmd_backforth(args, out):
    spec = field_for_order(args.q)
    tower_x = tower_make(args.tower_x, args.prefix_x, spec)
    tower_y = tower_make(args.tower_y, args.prefix_y, spec)
    for d in (*tower_x.dims, *tower_y.dims):
        _guard_dim(d)
    probes = []
    for spec_str in args.probes.split(","):
        side, stage_str = spec_str.split(":")
        stage = int(stage_str)
        tower = {"x": tower_x, "y": tower_y}[side]
        a, b = tower.generators_at(stage)
        probes.extend([a, b, tower.one_at(stage)])
    cert = back_and_forth(tower_x, tower_y, args.rounds, probes)
    _emit(out, cert.to_text())


def _cmd_amalgamate(args, out):
    phi0 = _load_hom(args.phi0)
    phi1 = _load_hom(args.phi1)
    _guard_dim(phi0.n * phi1.n)
    c, psi0, psi1 = amalgamate(phi0, phi1)
    _emit(out, f"c {c}\n")
    a_gen, b_gen = kassabov_generators(phi0.m, phi0.spec)
    ok = all(
        psi0.apply(phi0.apply(g)) == psi1.apply(phi1.apply(g))
        for g in (a_gen, b_gen)
    )
    _emit(out, f"commutes {'exact' if ok else 'FAIL'}\n")
    if args.out0:
        _write_text(args.out0, psi0.to_text())
    if args.out1:
        _write_text(args.out1, psi1.to_text())


def _cmd_conjugator(args, out):
    phi0 = _load_hom(args.phi0)
    phi1 = _load_hom(args.phi1)
    u = skolem_noether_conjugator(phi0, phi1)
    text = write_matrix(u)
    if args.out:
        _write_text(args.out, text)
    else:
        _emit(out, text)


def _cmd_slorder(args, out):
    _emit(out, f"slorder {_ramsey.sl_order(args.n, args.q)}\n")


def _cmd_copies(args, out):
    spec = field_for_order(args.q)
    _guard_dim(args.b)
    if args.method in ("brute_force", "both"):
        kb = _ramsey.count_copies(args.a, args.b, spec, "brute_force")
    if args.method in ("orbit_stabilizer", "both"):
        ko = _ramsey.count_copies(args.a, args.b, spec, "orbit_stabilizer")
    if args.method == "both":
        agree = "agree" if kb == ko else "DISAGREE"
        _emit(out, f"k {kb} brute_force {kb} orbit_stabilizer {ko} {agree}\n")
    elif args.method == "brute_force":
        _emit(out, f"k {kb} method brute_force\n")
    else:
        _emit(out, f"k {ko} method orbit_stabilizer\n")


def _cmd_ramsey_bound(args, out):
    rep = _ramsey.ramsey_dimension(args.a, args.b, args.q,
                                   _fraction(args.eps), args.k_mode)
    _emit(out, f"k={rep.k} bound~{rep.bound_float:.4f} c={rep.c}\n")
    _emit(out, f"bound_exact {rep.exact_expression()}\n")


def _cmd_ramsey_search(args, out):
    spec = field_for_order(args.q)
    _guard_dim(args.c)
    if args.coloring.startswith("constant:"):
        value = _fraction(args.coloring.split(":", 1)[1])
        gamma = _ramsey.constant_coloring(value, args.a, args.c, spec)
    elif args.coloring == "distance-to-copy":
        base = _ramsey.span_fingerprint(
            _ramsey.base_copy_basis(args.a, args.c, spec), spec, args.c)
        gamma = _ramsey.distance_to_copy_coloring(base, args.a, args.c, spec)
    else:
        raise FormatError(f"unknown coloring {args.coloring!r}")
    rep = _ramsey.monochromatic_search(args.b, args.c, gamma,
                                       _fraction(args.eps), args.strategy,
                                       seed=args.seed, trials=args.trials)
    _emit(out, rep.to_text())


# -- parser ------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rankmetric",
        description="exact computations in matrix algebras under the rank metric",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rank", help="rank of a matrix file")
    s.add_argument("--in", dest="input", required=True)
    s.set_defaults(func=_cmd_rank)

    s = sub.add_parser("dist", help="rank distance between two matrices")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.set_defaults(func=_cmd_dist)

    s = sub.add_parser("gens", help="shift generator pair with relation check")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_gens)

    s = sub.add_parser("iota", help="inclusion x -> x tensor 1_{n/m}")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_iota)

    s = sub.add_parser("defect", help="relation defect of a pair file")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--in", dest="input", required=True)
    s.set_defaults(func=_cmd_defect)

    s = sub.add_parser("repair", help="repair a pair to an exact embedding")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", help="write the repaired embedding (DELTA file)")
    s.set_defaults(func=_cmd_repair)

    s = sub.add_parser("homog", help="inner unit carrying one embedding to another")
    s.add_argument("--phi", required=True)
    s.add_argument("--psi", required=True)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_homog)

    s = sub.add_parser("extend", help="extend an embedding back into a tower")
    s.add_argument("--phi", required=True)
    s.add_argument("--tower", required=True,
                   choices=["factorial", "powers_of_2"])
    s.add_argument("--prefix", type=int, required=True)
    s.add_argument("--delta-prime", dest="delta_prime", required=True)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_extend)

    s = sub.add_parser("backforth", help="alternating tower maps with certificates")
    s.add_argument("--tower-x", dest="tower_x", default="factorial",
                   choices=["factorial", "powers_of_2"])
    s.add_argument("--tower-y", dest="tower_y", default="powers_of_2",
                   choices=["factorial", "powers_of_2"])
    s.add_argument("--prefix-x", dest="prefix_x", type=int, default=6)
    s.add_argument("--prefix-y", dest="prefix_y", type=int, default=9)
    s.add_argument("--rounds", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--probes", default="y:1",
                   help="comma list side:stage, generators+1 at each")
    s.set_defaults(func=_cmd_backforth)

    s = sub.add_parser("amalgamate", help="complete two embeddings to a commuting square")
    s.add_argument("--phi0", required=True)
    s.add_argument("--phi1", required=True)
    s.add_argument("--out0")
    s.add_argument("--out1")
    s.set_defaults(func=_cmd_amalgamate)

    s = sub.add_parser("conjugator", help="intertwining unit of two unital maps")
    s.add_argument("--phi0", required=True)
    s.add_argument("--phi1", required=True)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_conjugator)

    s = sub.add_parser("slorder", help="order of SL_n(F_q)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.set_defaults(func=_cmd_slorder)

    s = sub.add_parser("copies", help="count embedded copies of M_a in M_b")
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--method", default="both",
                   choices=["brute_force", "orbit_stabilizer", "both"])
    s.set_defaults(func=_cmd_copies)

    s = sub.add_parser("ramsey-bound", help="explicit partition dimension bound")
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--eps", required=True)
    s.add_argument("--k-mode", dest="k_mode", default="auto",
                   choices=["auto", "exact", "envelope"])
    s.set_defaults(func=_cmd_ramsey_bound)

    s = sub.add_parser("ramsey-search", help="search copies for small oscillation")
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--c", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--eps", required=True)
    s.add_argument("--strategy", default="exhaustive",
                   choices=["exhaustive", "random"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--coloring", default="constant:0",
                   help="constant:num/den or distance-to-copy")
    s.set_defaults(func=_cmd_ramsey_search)

    return p


def run(argv, out=None) -> int:
    """Parse and execute one command; returns the exit status."""
    out = out or sys.stdout
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        args.func(args, out)
    except OutcomeError as exc:
        out.write(f"error {type(exc).__name__}: {exc}\n")
        return 3
    except RankMetricError as exc:
        out.write(f"error {type(exc).__name__}: {exc}\n")
        return 2
    except OSError as exc:
        out.write(f"error io: {exc}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
