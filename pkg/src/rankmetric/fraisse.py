"""Towers of matrix algebras and the finite-stage limit machinery.

The completed limit algebra is never materialized: everything here is a
statement about finite stages of a divisibility tower, carried by exact
certificates.

* ``approximate_homogeneity``: two block embeddings with the same shape
  differ by an explicit inner unit, exactly.
* ``approximate_extension``: a block embedding out of a tower stage is
  extended back into a later stage of the tower, with the commuting
  defect of the triangle computed in closed form and matched by direct
  matrix evaluation.
* ``back_and_forth``: alternating extensions between two towers with
  tolerances 2^-t, recording exact round-trip errors per probe into a
  replayable certificate.
* ``inner_approximate``: approximate automorphism data on probes is
  turned into a single conjugating unit via defect repair plus
  homogeneity.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    DimensionMismatch,
    InconsistentTarget,
    MultiplicityMismatch,
    NotFactorSequence,
    SpecMismatch,
    StageOrder,
    TowerPrefixTooShort,
)
from .gf import FieldSpec
from .matrix import Matrix, invert, kassabov_generators, rank_distance, solve
from .embeddings import (
    DeltaEmbedding,
    block_embedding,
    compose,
    iota,
    iota_embedding,
    _shuffle_conjugator,
    _merge_permutation,
)
from .stability import repair

_RULES = ("factorial", "powers_of_2", "explicit")


class Tower:
    """A divisibility tower of matrix algebra dimensions (realized prefix)."""

    __slots__ = ("dims", "rule", "spec")

    def __init__(self, dims, rule: str, spec: FieldSpec):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise NotFactorSequence("a tower needs at least one stage")
        for d in dims:
            if d < 1:
                raise NotFactorSequence("stage dimensions must be positive")
        for lo, hi in zip(dims, dims[1:]):
            if hi % lo != 0:
                raise NotFactorSequence(f"{lo} does not divide {hi}")
        self.dims = dims
        self.rule = rule
        self.spec = spec

    def __len__(self):
        return len(self.dims)

    def extended(self, extra: int) -> "Tower":
        """A longer realization of the same rule (explicit towers cannot grow)."""
        if self.rule == "factorial":
            start = len(self.dims)
            new = [_factorial(i) for i in range(start, start + extra)]
        elif self.rule == "powers_of_2":
            start = len(self.dims)
            new = [2 ** i for i in range(start, start + extra)]
        else:
            raise NotFactorSequence("explicit towers have a fixed prefix")
        return Tower(self.dims + tuple(new), self.rule, self.spec)

    def element(self, stage: int, value: Matrix) -> "TowerElement":
        return TowerElement(self, stage, value)

    def generators_at(self, stage: int) -> tuple["TowerElement", "TowerElement"]:
        a, b = kassabov_generators(self.dims[stage], self.spec)
        return TowerElement(self, stage, a), TowerElement(self, stage, b)

    def one_at(self, stage: int) -> "TowerElement":
        return TowerElement(self, stage,
                            Matrix.identity(self.spec, self.dims[stage]))

    def __repr__(self):
        return f"Tower({self.rule}, dims={list(self.dims)})"


def _factorial(i: int) -> int:
    out = 1
    for j in range(2, i + 1):
        out *= j
    return out


def tower_make(rule, prefix_len: int, spec: FieldSpec) -> Tower:
    """Build a tower from a named rule or an explicit dimension list."""
    if isinstance(rule, (list, tuple)):
        dims = list(rule)
        if prefix_len and prefix_len != len(dims):
            raise NotFactorSequence("prefix length does not match explicit list")
        return Tower(dims, "explicit", spec)
    if rule == "factorial":
        return Tower([_factorial(i) for i in range(prefix_len)], rule, spec)
    if rule == "powers_of_2":
        return Tower([2 ** i for i in range(prefix_len)], rule, spec)
    raise NotFactorSequence(f"unknown tower rule {rule!r}")


class TowerElement:
    """A matrix living at one stage of a tower.

    Elements at different stages are identified through the inclusions:
    equality holds when both include to the same matrix at the larger
    stage.
    """

    __slots__ = ("tower", "stage", "value")

    def __init__(self, tower: Tower, stage: int, value: Matrix):
        if not 0 <= stage < len(tower.dims):
            raise StageOrder(f"stage {stage} not realized")
        d = tower.dims[stage]
        if value.rows != d or value.cols != d:
            raise DimensionMismatch(f"value must be {d}x{d} at stage {stage}")
        if value.spec != tower.spec:
            raise SpecMismatch("value over a different field")
        self.tower = tower
        self.stage = stage
        self.value = value

    def __eq__(self, other):
        if not isinstance(other, TowerElement) or self.tower is not other.tower:
            return NotImplemented
        top = max(self.stage, other.stage)
        return include_to(self, top).value == include_to(other, top).value

    def __hash__(self):
        return hash((id(self.tower), self.stage, self.value))

    def __repr__(self):
        return f"TowerElement(stage {self.stage}, dim {self.value.rows})"


def include_to(e: TowerElement, stage: int) -> TowerElement:
    """Map an element up the tower through the canonical inclusion."""
    if stage < e.stage:
        raise StageOrder(f"cannot include stage {e.stage} down to {stage}")
    if stage == e.stage:
        return e
    target = e.tower.dims[stage]
    return TowerElement(e.tower, stage,
                        iota(target, e.tower.dims[e.stage], e.value))


def approximate_homogeneity(phi: DeltaEmbedding, psi: DeltaEmbedding):
    """The inner unit carrying one block embedding onto another, exactly.

    Both must share source, target, and multiplicity; then conjugation by
    B_psi B_phi^{-1} maps phi onto psi with zero residual at this stage.
    Approximation enters only through the certificates of the maps being
    compared, which the caller composes.
    """
    if phi.spec != psi.spec:
        raise SpecMismatch("embeddings over different fields")
    if phi.m != psi.m or phi.n != psi.n:
        raise DimensionMismatch("embeddings with different shapes")
    if phi.mult != psi.mult:
        raise MultiplicityMismatch(f"{phi.mult} != {psi.mult}")
    beta = psi.conjugator * phi.conjugator_inv
    return beta, Fraction(0)


def approximate_extension(phi: DeltaEmbedding, tower: Tower,
                          delta_prime: Fraction):
    """Extend a block embedding out of a tower stage back into the tower.

    ``phi`` maps the stage algebra M_{m_k} into some M_n. The smallest
    realized stage k' with delta_prime * m_{k'} > n receives a block
    embedding ``psi``: M_n -> M_{m_{k'}} built so that the triangle over
    the inclusion M_{m_k} -> M_{m_{k'}} commutes up to the exact defect

        commute_error = 1 - r s m_k / m_{k'}

    (r = phi's multiplicity, s = floor(m_{k'} / n)), which never exceeds
    phi's delta plus delta_prime. Raises ``TowerPrefixTooShort`` when no
    realized stage is large enough.
    """
    delta_prime = Fraction(delta_prime)
    if delta_prime <= 0:
        raise DimensionMismatch("delta_prime must be positive")
    if tower.spec != phi.spec:
        raise SpecMismatch("tower and embedding over different fields")
    m_k = phi.m
    try:
        k = tower.dims.index(m_k)
    except ValueError:
        raise DimensionMismatch(
            f"source dimension {m_k} is not a realized tower stage"
        ) from None
    n = phi.n
    k_prime = None
    for idx in range(k, len(tower.dims)):
        if delta_prime * tower.dims[idx] > n:
            k_prime = idx
            break
    if k_prime is None:
        raise TowerPrefixTooShort(
            f"no realized stage satisfies {delta_prime} * m > {n}"
        )
    m_p = tower.dims[k_prime]
    s = m_p // n
    r = phi.mult

    if s == 0:
        psi = DeltaEmbedding(n, m_p, 0, Matrix.identity(phi.spec, m_p))
    else:
        shuffle = _shuffle_conjugator(phi.spec, m_k, m_p // m_k)
        merge = _merge_permutation(phi.spec, s, n, r, m_k, m_p)
        blocks = [phi.conjugator_inv] * s
        from .matrix import direct_sum
        if m_p > n * s:
            blocks.append(Matrix.identity(phi.spec, m_p - n * s))
        y_inv_blocks = direct_sum(blocks)
        z = shuffle * merge.transpose() * y_inv_blocks
        psi = DeltaEmbedding(n, m_p, s, z)

    commute_error = Fraction(m_p - r * s * m_k, m_p)
    if commute_error > phi.delta_fraction + delta_prime:
        raise AssertionError("commuting defect exceeds delta + delta_prime")
    return k_prime, psi, commute_error


class MapRecord:
    """One map of a back-and-forth run, with direction and tolerance."""

    __slots__ = ("index", "direction", "embedding", "tolerance")

    def __init__(self, index, direction, embedding, tolerance):
        self.index = index
        self.direction = direction  # "xy" or "yx"
        self.embedding = embedding
        self.tolerance = tolerance


class ProbeError:
    __slots__ = ("probe_index", "error")

    def __init__(self, probe_index, error):
        self.probe_index = probe_index
        self.error = error


class RoundTrip:
    """Errors of one composite map-pair against the tower inclusion."""

    __slots__ = ("map_index", "bound", "errors")

    def __init__(self, map_index, bound, errors):
        self.map_index = map_index
        self.bound = bound
        self.errors = tuple(errors)


class BackForthCertificate:
    """Exact replayable record of a back-and-forth run."""

    __slots__ = ("rounds", "stage_pairs", "maps", "round_trips",
                 "successive", "final_bound")

    def __init__(self, rounds, stage_pairs, maps, round_trips, successive):
        self.rounds = rounds
        self.stage_pairs = tuple(stage_pairs)
        self.maps = tuple(maps)
        self.round_trips = tuple(round_trips)
        self.successive = tuple(successive)
        self.final_bound = Fraction(2) ** (-2 * rounds + 3)

    def all_bounds_hold(self) -> bool:
        for rt in self.round_trips:
            for pe in rt.errors:
                if pe.error > rt.bound:
                    return False
        if self.round_trips:
            last = self.round_trips[-1]
            for pe in last.errors:
                if pe.error > self.final_bound:
                    return False
        return True

    def to_text(self) -> str:
        lines = [f"BACKFORTH rounds {self.rounds}"]
        lines.append("stages " + " ".join(f"({j},{k})" for j, k in self.stage_pairs))
        for m in self.maps:
            lines.append(
                f"map {m.index} {m.direction} M_{m.embedding.m}->M_{m.embedding.n}"
                f" mult {m.embedding.mult} delta {m.embedding.delta}"
                f" tol {m.tolerance.numerator}/{m.tolerance.denominator}"
            )
        for rt in self.round_trips:
            errs = " ".join(
                f"p{pe.probe_index}={pe.error.numerator}/{pe.error.denominator}"
                for pe in rt.errors
            )
            lines.append(
                f"roundtrip {rt.map_index} bound "
                f"{rt.bound.numerator}/{rt.bound.denominator} {errs}"
            )
        for rt in self.successive:
            errs = " ".join(
                f"p{pe.probe_index}={pe.error.numerator}/{pe.error.denominator}"
                for pe in rt.errors
            )
            lines.append(
                f"successive {rt.map_index} bound "
                f"{rt.bound.numerator}/{rt.bound.denominator} {errs}"
            )
        lines.append(
            f"final_bound {self.final_bound.numerator}/{self.final_bound.denominator}"
        )
        return "\n".join(lines) + "\n"


def back_and_forth(tower_x: Tower, tower_y: Tower, rounds: int, probes,
                   start_x: int = 0, start_y: int = 0) -> BackForthCertificate:
    """Alternating tower maps with tolerance 2^-t for the t-th map.

    The first map is the maximal-multiplicity block map between the
    starting stages. Before each extension the source tower advances one
    stage (so neither sequence terminates), and each new map is produced
    by ``approximate_extension`` at the halved tolerance. After every
    extension the composite with the previous map is compared against
    the straight tower inclusion on every probe that lives early enough
    in the relevant tower, recording exact errors; same-direction maps
    are also compared pairwise (the Cauchy telescoping).
    """
    if tower_x.spec != tower_y.spec:
        raise SpecMismatch("towers over different fields")
    if rounds < 1:
        raise DimensionMismatch("need at least one round")
    probes = list(probes)

    j = [start_x]
    k = [start_y]
    maps: list[MapRecord] = []
    composites: list[DeltaEmbedding] = []  # bump-composed map used by trips
    round_trips = []
    successive = []

    base = block_embedding(tower_x.dims[start_x], tower_y.dims[start_y],
                           tower_x.spec)
    maps.append(MapRecord(0, "xy", base, Fraction(1)))
    stage_pairs = [(start_x, start_y)]

    for t in range(1, rounds):
        tol = Fraction(1, 2 ** t)
        prev = maps[-1]
        if prev.direction == "xy":
            # bump Y, extend back into X
            src_stage = k[-1] + 1
            if src_stage >= len(tower_y.dims):
                raise TowerPrefixTooShort("target tower prefix exhausted")
            k.append(src_stage)
            bump = iota_embedding(tower_y.dims[src_stage],
                                  tower_y.dims[src_stage - 1], tower_y.spec)
            bumped = compose(bump, prev.embedding)
            j_new, psi, _ = approximate_extension(bumped, tower_x, tol)
            if j_new < j[-1]:
                raise TowerPrefixTooShort("extension landed before current stage")
            j.append(j_new)
            maps.append(MapRecord(t, "yx", psi, tol))
            composites.append(bumped)
            rt = _round_trip(psi, bumped, tower_x, j[-2], j_new, probes,
                             prev.tolerance + tol, t)
            round_trips.append(rt)
        else:
            src_stage = j[-1] + 1
            if src_stage >= len(tower_x.dims):
                raise TowerPrefixTooShort("target tower prefix exhausted")
            j.append(src_stage)
            bump = iota_embedding(tower_x.dims[src_stage],
                                  tower_x.dims[src_stage - 1], tower_x.spec)
            bumped = compose(bump, prev.embedding)
            k_new, psi, _ = approximate_extension(bumped, tower_y, tol)
            if k_new < k[-1]:
                raise TowerPrefixTooShort("extension landed before current stage")
            k.append(k_new)
            maps.append(MapRecord(t, "xy", psi, tol))
            composites.append(bumped)
            rt = _round_trip(psi, bumped, tower_y, k[-2], k_new, probes,
                             prev.tolerance + tol, t)
            round_trips.append(rt)
        stage_pairs.append((j[-1], k[-1]))

        if t >= 2:
            suc = _successive(maps[t - 2], maps[t], tower_x, tower_y,
                              j, k, probes, t)
            if suc is not None:
                successive.append(suc)

    return BackForthCertificate(rounds, stage_pairs, maps, round_trips,
                                successive)


def _probe_tower(probe: TowerElement):
    return probe.tower


def _round_trip(psi: DeltaEmbedding, bumped_prev: DeltaEmbedding,
                home_tower: Tower, home_stage: int, landing_stage: int,
                probes, bound: Fraction, map_index: int) -> RoundTrip:
    """Errors of psi o (bumped prev) against the straight inclusion."""
    composite = compose(psi, bumped_prev)
    errors = []
    for idx, probe in enumerate(probes):
        if _probe_tower(probe) is not home_tower or probe.stage > home_stage:
            continue
        at_home = include_to(probe, home_stage).value
        mapped = composite.apply(at_home)
        straight = iota(home_tower.dims[landing_stage],
                        home_tower.dims[home_stage], at_home)
        errors.append(ProbeError(idx, rank_distance(mapped, straight).as_fraction()))
    return RoundTrip(map_index, bound, errors)


def _successive(older: MapRecord, newer: MapRecord, tower_x: Tower,
                tower_y: Tower, j, k, probes, t: int):
    """Distance between consecutive same-direction maps on fitting probes."""
    if older.direction != newer.direction:
        return None
    if older.direction == "xy":
        src_tower, dst_tower = tower_x, tower_y
    else:
        src_tower, dst_tower = tower_y, tower_x
    old_src = src_tower.dims.index(older.embedding.m)
    new_src = src_tower.dims.index(newer.embedding.m)
    old_dst = dst_tower.dims.index(older.embedding.n)
    new_dst = dst_tower.dims.index(newer.embedding.n)
    bound = Fraction(2) ** (-(t - 2) + 1)
    errors = []
    for idx, probe in enumerate(probes):
        if _probe_tower(probe) is not src_tower or probe.stage > old_src:
            continue
        at_old = include_to(probe, old_src).value
        via_old = iota(dst_tower.dims[new_dst], dst_tower.dims[old_dst],
                       older.embedding.apply(at_old))
        at_new = iota(src_tower.dims[new_src], src_tower.dims[old_src], at_old)
        via_new = newer.embedding.apply(at_new)
        errors.append(ProbeError(idx, rank_distance(via_old, via_new).as_fraction()))
    if not errors:
        return None
    return RoundTrip(t, bound, errors)


def verify_certificate(cert: BackForthCertificate, tower_x: Tower,
                       tower_y: Tower, probes) -> bool:
    """Recompute every recorded error by direct rank evaluation.

    Replays the stored maps against the stated stage pairs and probes;
    any mismatch with the recorded rationals, or any recorded error above
    its bound, fails the verification.
    """
    probes = list(probes)
    for rt in cert.round_trips:
        t = rt.map_index
        newer = cert.maps[t]
        older = cert.maps[t - 1]
        if older.direction == "xy":
            bump_tower, home_tower = tower_y, tower_x
            home_stage = cert.stage_pairs[t - 1][0]
            bump_from = cert.stage_pairs[t - 1][1]
            landing = cert.stage_pairs[t][0]
        else:
            bump_tower, home_tower = tower_x, tower_y
            home_stage = cert.stage_pairs[t - 1][1]
            bump_from = cert.stage_pairs[t - 1][0]
            landing = cert.stage_pairs[t][1]
        bump = iota_embedding(bump_tower.dims[bump_from + 1],
                              bump_tower.dims[bump_from], bump_tower.spec)
        composite = compose(newer.embedding, compose(bump, older.embedding))
        recorded = {pe.probe_index: pe.error for pe in rt.errors}
        recomputed = {}
        for idx, probe in enumerate(probes):
            if probe.tower is not home_tower or probe.stage > home_stage:
                continue
            at_home = include_to(probe, home_stage).value
            mapped = composite.apply(at_home)
            straight = iota(home_tower.dims[landing], home_tower.dims[home_stage],
                            at_home)
            recomputed[idx] = rank_distance(mapped, straight).as_fraction()
        if recorded != recomputed:
            return False
        if any(err > rt.bound for err in recomputed.values()):
            return False
    if cert.round_trips and cert.round_trips[-1].errors:
        worst = max(pe.error for pe in cert.round_trips[-1].errors)
        if worst > cert.final_bound:
            return False
    for m in cert.maps:
        if m.embedding.delta_fraction > m.tolerance:
            return False
    return True


class InnerApproximation:
    """Result of ``inner_approximate``: the unit, exact residuals, and the
    repair certificate that bounds them."""

    __slots__ = ("unit", "stage", "residuals", "eps", "within", "certificate")

    def __init__(self, unit, stage, residuals, eps, certificate=None):
        self.unit = unit
        self.stage = stage
        self.residuals = tuple(residuals)
        self.eps = eps
        self.within = all(r <= eps for r in self.residuals)
        self.certificate = certificate

    def __repr__(self):
        return (f"InnerApproximation(stage {self.stage}, within={self.within}, "
                f"residuals={[str(r) for r in self.residuals]})")


def inner_approximate(targets, eps) -> InnerApproximation:
    """Find a conjugating unit realizing approximate automorphism data.

    ``targets`` is a list of (element, image) tower-element pairs, all in
    one tower. The elements must generate the stage algebra that contains
    them (together with 1, which is implicitly sent to 1): the associated
    generator images are extracted by closing the probes under products
    with expression tracking, the resulting approximate pair is repaired
    to an exact embedding, and homogeneity against the straight inclusion
    turns that into a single inner unit. Residuals are exact per pair.

    Raises ``InconsistentTarget`` when dependent probes carry conflicting
    images or the probes fail to generate, and propagates
    ``NotRepairable`` when the data is too far from any homomorphism.
    """
    eps = Fraction(eps)
    pairs = list(targets)
    if not pairs:
        raise InconsistentTarget("no target pairs supplied")
    tower = pairs[0][0].tower
    for y, img in pairs:
        if y.tower is not tower or img.tower is not tower:
            raise InconsistentTarget("all pairs must live in one tower")
    src_stage = max(y.stage for y, _ in pairs)
    dst_stage = max(max(img.stage for _, img in pairs), src_stage)
    n_s = tower.dims[src_stage]
    n_k = tower.dims[dst_stage]
    spec = tower.spec

    seed = [(Matrix.identity(spec, n_s), Matrix.identity(spec, n_k))]
    for y, img in pairs:
        seed.append((include_to(y, src_stage).value,
                     include_to(img, dst_stage).value))

    basis: list[tuple[Matrix, Matrix]] = []

    def coords_in_basis(mat: Matrix):
        if not basis:
            return None
        cols = Matrix.from_columns(spec, [m._e for m, _ in basis], n_s * n_s)
        return solve(cols, mat._e)

    def try_insert(mat: Matrix, img: Matrix, hard: bool) -> bool:
        coords = coords_in_basis(mat)
        if coords is not None:
            if hard:
                expect = Matrix.zero(spec, n_k)
                for c, (_, bimg) in zip(coords, basis):
                    if c:
                        expect = expect + bimg.scale(c)
                if expect != img:
                    raise InconsistentTarget(
                        "dependent probes carry conflicting images"
                    )
            return False
        basis.append((mat, img))
        return True

    for mat, img in seed:
        try_insert(mat, img, hard=True)

    full = n_s * n_s
    grew = True
    while grew and len(basis) < full:
        grew = False
        snapshot = list(basis)
        for m1, i1 in snapshot:
            for m2, i2 in snapshot:
                if len(basis) == full:
                    break
                if try_insert(m1 * m2, i1 * i2, hard=False):
                    grew = True
    if len(basis) < full:
        raise InconsistentTarget(
            "probes do not generate the stage algebra"
        )

    gen_a, gen_b = kassabov_generators(n_s, spec)
    cols = Matrix.from_columns(spec, [m._e for m, _ in basis], n_s * n_s)

    def image_of(mat: Matrix) -> Matrix:
        coords = solve(cols, mat._e)
        out = Matrix.zero(spec, n_k)
        for c, (_, bimg) in zip(coords, basis):
            if c:
                out = out + bimg.scale(c)
        return out

    x_img = image_of(gen_a)
    y_img = image_of(gen_b)

    psi, _, cert = repair(x_img, y_img, n_s)
    straight = iota_embedding(n_k, n_s, spec)
    beta, _ = approximate_homogeneity(straight, psi)

    beta_inv = invert(beta)
    residuals = []
    for y, img in pairs:
        lifted = include_to(y, dst_stage).value
        moved = beta * lifted * beta_inv
        want = include_to(img, dst_stage).value
        residuals.append(rank_distance(moved, want).as_fraction())
    return InnerApproximation(beta, dst_stage, residuals, eps, cert)
