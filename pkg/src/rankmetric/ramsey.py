"""Copy counting, explicit partition-dimension bounds, and oscillation search.

Embedded copies of a small matrix algebra inside a larger one are
fingerprinted by the canonical echelon basis of their linear span, so a
copy is a hashable value and censuses are exact. Counting runs two ways,
a direct conjugation census and the orbit-stabilizer quotient, which must
agree. The dimension bound 64 eps^-2 max(log 2k, log 6 ceil(1/eps)) is
evaluated with certified rational log enclosures, so the returned
multiple of b is exact, never a float artifact.

Everything that enumerates a general linear group is guarded: infeasible
sizes fail fast with ``TooLarge``.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import NotDivisor, NotLipschitz, TooLarge
from .gf import FieldSpec
from .matrix import Matrix, kron, rank, _b_rref, _g_rref, _use_packed

# An enumeration touching more than this many matrices fails fast.
ENUMERATION_LIMIT = 1 << 20
# Copies with more than this many elements refuse exhaustive distances.
COPY_ELEMENT_LIMIT = 4096


def sl_order(n: int, q: int) -> int:
    """|SL_n(F_q)| = (1/(q-1)) * prod_{i<n} (q^n - q^i), exactly."""
    if n < 1:
        raise NotDivisor("n must be positive")
    prod = 1
    for i in range(n):
        prod *= q ** n - q ** i
    assert prod % (q - 1) == 0
    return prod // (q - 1)


def gl_order(n: int, q: int) -> int:
    prod = 1
    for i in range(n):
        prod *= q ** n - q ** i
    return prod


# ---------------------------------------------------------------------------
# enumeration of units and copy fingerprints


def _check_enumeration(n: int, q: int):
    total = q ** (n * n)
    if total > ENUMERATION_LIMIT:
        raise TooLarge(
            f"enumerating {total} candidate {n}x{n} matrices over GF({q})"
        )
    return total


def iterate_units(n: int, spec: FieldSpec):
    """All invertible n x n matrices, in integer-encoding order (guarded)."""
    total = _check_enumeration(n, spec.q)
    q = spec.q
    for code in range(total):
        ents = []
        c = code
        for _ in range(n * n):
            ents.append(c % q)
            c //= q
        m = Matrix(spec, n, n, ents)
        if rank(m) == n:
            yield m


def _flatten(m: Matrix) -> list[int]:
    return list(m._e)


def span_fingerprint(mats, spec: FieldSpec, ambient: int) -> tuple:
    """Canonical echelon basis of the linear span of flattened matrices."""
    dim = ambient * ambient
    vectors = [_flatten(m) for m in mats]
    if _use_packed(spec):
        packed = []
        for v in vectors:
            acc = 0
            for j, e in enumerate(v):
                if e:
                    acc |= 1 << j
            packed.append(acc)
        _, rows = _b_rref(packed, dim)
        return tuple(tuple((r >> j) & 1 for j in range(dim)) for r in rows)
    _, rows = _g_rref(vectors, dim, spec)
    return tuple(tuple(r) for r in rows)


def base_copy_basis(a: int, b: int, spec: FieldSpec) -> list[Matrix]:
    """Basis of the standard embedded copy: the a x a units tensored up."""
    if b % a != 0:
        raise NotDivisor(f"{a} does not divide {b}")
    eye = Matrix.identity(spec, b // a)
    return [kron(Matrix.unit(spec, a, i, j), eye)
            for i in range(1, a + 1) for j in range(1, a + 1)]


class CopySet:
    """The embedded copies of M_a inside M_c, as distinct fingerprints."""

    __slots__ = ("a_dim", "c_dim", "copies", "spec")

    def __init__(self, a_dim: int, c_dim: int, copies, spec: FieldSpec):
        self.a_dim = a_dim
        self.c_dim = c_dim
        self.copies = tuple(copies)
        self.spec = spec
        if len(set(self.copies)) != len(self.copies):
            raise AssertionError("fingerprints must be pairwise distinct")

    def __len__(self):
        return len(self.copies)

    def __repr__(self):
        return f"CopySet({len(self.copies)} copies of M_{self.a_dim} in M_{self.c_dim})"


_CENSUS_CACHE: dict[tuple, CopySet] = {}


def enumerate_copies(a: int, b: int, spec: FieldSpec) -> CopySet:
    """Census of all conjugates of the standard copy (first-seen order).

    Deterministic, so results are cached per (a, b, field).
    """
    key = (a, b, spec.p, spec.k, spec.modulus)
    cached = _CENSUS_CACHE.get(key)
    if cached is not None:
        return cached
    from .matrix import invert
    base = base_copy_basis(a, b, spec)
    seen = []
    seen_set = set()
    for g in iterate_units(b, spec):
        gi = invert(g)
        fp = span_fingerprint([g * m * gi for m in base], spec, b)
        if fp not in seen_set:
            seen_set.add(fp)
            seen.append(fp)
    out = CopySet(a, b, seen, spec)
    _CENSUS_CACHE[key] = out
    return out


def count_copies(a: int, b: int, q_or_spec, method: str = "brute_force") -> int:
    """Number of embedded copies of M_a in M_b.

    ``brute_force`` runs the conjugation census; ``orbit_stabilizer``
    divides the automorphism count sl_order(b, q) by the brute-counted
    stabilizer of the standard copy (modulo scalars). Both enumerate the
    unit group, so both are guarded by ``TooLarge``.
    """
    spec = q_or_spec if isinstance(q_or_spec, FieldSpec) else None
    if spec is None:
        from .gf import field_for_order
        spec = field_for_order(q_or_spec)
    if a < 1 or b % a != 0:
        raise NotDivisor(f"{a} does not divide {b}")
    if method == "brute_force":
        return len(enumerate_copies(a, b, spec))
    if method == "orbit_stabilizer":
        base = base_copy_basis(a, b, spec)
        base_fp = span_fingerprint(base, spec, b)
        from .matrix import invert
        stab = 0
        total_units = 0
        for g in iterate_units(b, spec):
            total_units += 1
            gi = invert(g)
            if span_fingerprint([g * m * gi for m in base], spec, b) == base_fp:
                stab += 1
        q = spec.q
        assert stab % (q - 1) == 0
        aut = sl_order(b, q)
        stab_mod_scalars = stab // (q - 1)
        assert aut % stab_mod_scalars == 0
        k = aut // stab_mod_scalars
        assert k * stab == total_units  # orbit times stabilizer is the group
        return k
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# the copy metric and colorings


_RANK_TABLE_CACHE: dict[tuple, tuple] = {}


def _gf2_rank_table(n: int) -> tuple:
    """rank of every n x n GF(2) matrix, keyed by its n^2-bit encoding."""
    key = (2, n)
    tbl = _RANK_TABLE_CACHE.get(key)
    if tbl is None:
        total = 1 << (n * n)
        mask = (1 << n) - 1
        out = []
        for code in range(total):
            rows = [(code >> (i * n)) & mask for i in range(n)]
            pivots, _ = _b_rref(rows, n)
            out.append(len(pivots))
        tbl = tuple(out)
        _RANK_TABLE_CACHE[key] = tbl
    return tbl


def copy_elements(fp: tuple, spec: FieldSpec, ambient: int) -> list[tuple]:
    """Every element of the span (guarded), as flattened vectors."""
    dim_span = len(fp)
    count = spec.q ** dim_span
    if count > COPY_ELEMENT_LIMIT:
        raise TooLarge(f"copy has {count} elements")
    q = spec.q
    add = spec._add
    mul = spec._mul
    out = []
    for code in range(count):
        coeffs = []
        c = code
        for _ in range(dim_span):
            coeffs.append(c % q)
            c //= q
        acc = [0] * (ambient * ambient)
        for coef, vec in zip(coeffs, fp):
            if coef:
                cm = mul[coef * q:(coef + 1) * q]
                acc = [add[x * q + cm[y]] for x, y in zip(acc, vec)]
        out.append(tuple(acc))
    return out


_PACKED_ELEMENTS_CACHE: dict[tuple, list] = {}


def _packed_elements(fp: tuple, spec: FieldSpec, ambient: int) -> list[int]:
    key = (fp, ambient)
    cached = _PACKED_ELEMENTS_CACHE.get(key)
    if cached is None:
        cached = []
        for vec in copy_elements(fp, spec, ambient):
            acc = 0
            for j, e in enumerate(vec):
                if e:
                    acc |= 1 << j
            cached.append(acc)
        _PACKED_ELEMENTS_CACHE[key] = cached
    return cached


def copy_distance(s: tuple, t: tuple, spec: FieldSpec, ambient: int) -> Fraction:
    """Hausdorff distance between two copies under the rank metric.

    Both spans are expanded to their full (guarded) element sets; the
    distance is exact and symmetric by construction.
    """
    if s == t:
        return Fraction(0)
    if _use_packed(spec) and ambient * ambient <= 20:
        table = _gf2_rank_table(ambient)
        ps = _packed_elements(s, spec, ambient)
        pt = _packed_elements(t, spec, ambient)
        worst = 0
        for xa in ps:
            best = min(table[xa ^ xb] for xb in pt)
            if best > worst:
                worst = best
        for xb in pt:
            best = min(table[xa ^ xb] for xa in ps)
            if best > worst:
                worst = best
        return Fraction(worst, ambient)
    es = copy_elements(s, spec, ambient)
    et = copy_elements(t, spec, ambient)

    def dist(u, v):
        m = Matrix(spec, ambient, ambient,
                   [spec.sub_v(x, y) for x, y in zip(u, v)])
        return rank(m)

    worst = 0
    for u in es:
        best = min(dist(u, v) for v in et)
        if best > worst:
            worst = best
    for v in et:
        best = min(dist(u, v) for u in es)
        if best > worst:
            worst = best
    return Fraction(worst, ambient)


class Coloring:
    """A [0,1]-valued map on copy fingerprints, 1-Lipschitz for the copy metric.

    Values are cached; every new evaluation is checked against every
    previous one and the coloring is rejected (``NotLipschitz``) the
    moment a pair violates the contract.
    """

    __slots__ = ("evaluator", "a_dim", "c_dim", "spec", "name", "_cache")

    def __init__(self, evaluator, a_dim: int, c_dim: int, spec: FieldSpec,
                 name: str = "custom"):
        self.evaluator = evaluator
        self.a_dim = a_dim
        self.c_dim = c_dim
        self.spec = spec
        self.name = name
        self._cache: dict[tuple, Fraction] = {}

    def value(self, fp: tuple) -> Fraction:
        cached = self._cache.get(fp)
        if cached is not None:
            return cached
        v = Fraction(self.evaluator(fp))
        if not 0 <= v <= 1:
            raise NotLipschitz(f"coloring value {v} outside [0, 1]")
        for other_fp, other_v in self._cache.items():
            gap = abs(v - other_v)
            if gap and gap > copy_distance(fp, other_fp, self.spec, self.c_dim):
                raise NotLipschitz(
                    "coloring moves faster than the copy metric allows"
                )
        self._cache[fp] = v
        return v

    def evaluated(self) -> dict:
        return dict(self._cache)


def constant_coloring(value, a_dim: int, c_dim: int, spec: FieldSpec) -> Coloring:
    v = Fraction(value)
    return Coloring(lambda fp: v, a_dim, c_dim, spec, name=f"constant:{v}")


def distance_to_copy_coloring(base_fp: tuple, a_dim: int, c_dim: int,
                              spec: FieldSpec) -> Coloring:
    """gamma(S) = Hausdorff distance from S to a fixed copy (1-Lipschitz)."""
    return Coloring(
        lambda fp: copy_distance(fp, base_fp, spec, c_dim),
        a_dim, c_dim, spec, name="distance-to-copy",
    )


def oscillation(gamma: Coloring, copies) -> Fraction:
    """max - min of the coloring over a set of copies (0 on empty/singleton)."""
    if isinstance(copies, CopySet):
        copies = copies.copies
    values = [gamma.value(fp) for fp in copies]
    if len(values) < 2:
        return Fraction(0)
    return max(values) - min(values)


# ---------------------------------------------------------------------------
# the explicit dimension bound, with certified log enclosures


def _atanh_series_bounds(num: int, den: int, terms: int) -> tuple[Fraction, Fraction]:
    """Enclosure of atanh(num/den) for 0 < num < den via the odd series."""
    u = Fraction(num, den)
    u2 = u * u
    total = Fraction(0)
    power = u
    for j in range(terms):
        total += power / (2 * j + 1)
        power *= u2
    # remaining terms are positive and dominated by a geometric series
    tail = power / ((2 * terms + 1) * (1 - u2))
    return total, total + tail


def ln_bounds(n: int, terms: int = 24) -> tuple[Fraction, Fraction]:
    """Certified rational enclosure of ln(n) for an integer n >= 1."""
    if n < 1:
        raise ValueError("ln_bounds needs n >= 1")
    if n == 1:
        return Fraction(0), Fraction(0)
    e = 0
    z = Fraction(n)
    while z > Fraction(3, 2):
        z /= 2
        e += 1
    ln2_lo, ln2_hi = _atanh_series_bounds(1, 3, terms)
    ln2_lo, ln2_hi = 2 * ln2_lo, 2 * ln2_hi
    # ln z = 2 atanh((z-1)/(z+1)), 3/4 < z <= 3/2 so the argument is small
    uz = (z - 1) / (z + 1)
    if uz == 0:
        z_lo = z_hi = Fraction(0)
    else:
        z_lo, z_hi = _atanh_series_bounds(uz.numerator, uz.denominator, terms)
        z_lo, z_hi = 2 * z_lo, 2 * z_hi
    return e * ln2_lo + z_lo, e * ln2_hi + z_hi


class BoundReport:
    """The exact bound expression coeff * ln(arg) and the chosen dimension."""

    __slots__ = ("a_dim", "b_dim", "q", "eps", "k", "k_method", "coeff",
                 "log_arg", "c")

    def __init__(self, a_dim, b_dim, q, eps, k, k_method, coeff, log_arg, c):
        self.a_dim = a_dim
        self.b_dim = b_dim
        self.q = q
        self.eps = eps
        self.k = k
        self.k_method = k_method
        self.coeff = coeff
        self.log_arg = log_arg
        self.c = c

    @property
    def bound_float(self) -> float:
        return float(self.coeff) * math.log(self.log_arg)

    def exact_expression(self) -> str:
        return (f"({self.coeff.numerator}/{self.coeff.denominator})"
                f"*ln({self.log_arg})")

    def to_text(self) -> str:
        return (f"RAMSEY-BOUND a {self.a_dim} b {self.b_dim} q {self.q} "
                f"eps {self.eps.numerator}/{self.eps.denominator}\n"
                f"k {self.k} ({self.k_method})\n"
                f"bound {self.exact_expression()} ~ {self.bound_float:.4f}\n"
                f"c {self.c}\n")


def ramsey_dimension(a: int, b: int, q: int, eps, k_mode: str = "auto") -> BoundReport:
    """Smallest multiple of b strictly above 64 eps^-2 max(ln 2k, ln 6 ceil(1/eps)).

    ``k`` comes from the copy census when that is feasible (or forced via
    ``k_mode="exact"``), otherwise from the envelope q^(b^2). The
    comparison against multiples of b uses certified log enclosures, so
    the result is exact.
    """
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    from .gf import field_for_order
    spec = field_for_order(q)
    if b % a != 0:
        raise NotDivisor(f"{a} does not divide {b}")

    if k_mode not in ("auto", "exact", "envelope"):
        raise ValueError(f"unknown k_mode {k_mode!r}")
    k_method = "envelope"
    if k_mode == "envelope":
        k = q ** (b * b)
    elif a == b:
        k, k_method = 1, "exact"
    elif k_mode == "exact":
        k, k_method = count_copies(a, b, spec, "brute_force"), "exact"
    else:
        try:
            k, k_method = count_copies(a, b, spec, "brute_force"), "exact"
        except TooLarge:
            k = q ** (b * b)

    coeff = 64 * eps ** -2
    ceil_inv = -((-eps.denominator) // eps.numerator)  # ceil(1/eps)
    log_arg = max(2 * k, 6 * ceil_inv)

    approx = float(coeff) * math.log(log_arg)
    c = b * max(1, math.floor(approx / b))
    terms = 24
    while True:
        lo, hi = ln_bounds(log_arg, terms)
        # move down while c - b still exceeds the bound, up while c does not
        if Fraction(c) / coeff > hi and (c == b or Fraction(c - b) / coeff <= lo):
            break
        if Fraction(c) / coeff <= lo:
            c += b
            continue
        if c > b and Fraction(c - b) / coeff > hi:
            c -= b
            continue
        terms *= 2
        if terms > 3000:
            raise AssertionError("log enclosure failed to separate the bound")
    return BoundReport(a, b, q, eps, k, k_method, coeff, log_arg, c)


# ---------------------------------------------------------------------------
# oscillation search


class SearchReport:
    """Outcome of a monochromatic search: best copy and its oscillation."""

    __slots__ = ("found", "fingerprint", "oscillation", "examined", "strategy",
                 "eps")

    def __init__(self, found, fingerprint, oscillation, examined, strategy, eps):
        self.found = found
        self.fingerprint = fingerprint
        self.oscillation = oscillation
        self.examined = examined
        self.strategy = strategy
        self.eps = eps

    def __eq__(self, other):
        return (isinstance(other, SearchReport)
                and self.found == other.found
                and self.fingerprint == other.fingerprint
                and self.oscillation == other.oscillation
                and self.examined == other.examined
                and self.strategy == other.strategy
                and self.eps == other.eps)

    def to_text(self) -> str:
        status = "found" if self.found else "exhausted"
        osc = self.oscillation
        return (f"SEARCH {status} strategy {self.strategy} examined {self.examined}\n"
                f"oscillation {osc.numerator}/{osc.denominator}\n"
                f"span_dim {len(self.fingerprint) if self.fingerprint else 0}\n")

    def __repr__(self):
        return (f"SearchReport(found={self.found}, osc={self.oscillation}, "
                f"examined={self.examined})")


def _copies_inside(g: Matrix, base_a_copies, c: int, b: int, spec: FieldSpec):
    """Fingerprints of the copies of A inside g (B tensor 1) g^{-1}."""
    from .matrix import invert
    gi = invert(g)
    eye = Matrix.identity(spec, c // b)
    out = []
    for basis in base_a_copies:
        lifted = [g * kron(m, eye) * gi for m in basis]
        out.append(span_fingerprint(lifted, spec, c))
    return out


_COPY_BASES_CACHE: dict[tuple, list] = {}


def _base_a_copy_bases(a: int, b: int, spec: FieldSpec):
    """Bases (as matrix lists) of every copy of M_a inside M_b (cached)."""
    key = (a, b, spec.p, spec.k, spec.modulus)
    cached = _COPY_BASES_CACHE.get(key)
    if cached is not None:
        return cached
    from .matrix import invert
    base = base_copy_basis(a, b, spec)
    seen = {}
    for g in iterate_units(b, spec):
        gi = invert(g)
        mats = [g * m * gi for m in base]
        fp = span_fingerprint(mats, spec, b)
        if fp not in seen:
            seen[fp] = mats
    out = list(seen.values())
    _COPY_BASES_CACHE[key] = out
    return out


def monochromatic_search(b_dim: int, c_dim: int, gamma: Coloring, eps,
                         strategy: str = "exhaustive", seed: int = 0,
                         trials: int = 100) -> SearchReport:
    """Look for a conjugate of M_b in M_c on which the coloring barely moves.

    Exhaustive strategy: walk every unit of GL_c in encoding order,
    deduplicate the resulting copies of B, and return the first whose
    induced set of A-copies has oscillation at most eps; if none
    qualifies, report the minimum oscillation observed. Random strategy:
    seeded unit sampling for a fixed number of trials, deterministic and
    reproducible.
    """
    eps = Fraction(eps)
    spec = gamma.spec
    a_dim = gamma.a_dim
    if c_dim != gamma.c_dim:
        from .errors import DimensionMismatch
        raise DimensionMismatch("coloring ambient does not match c")
    if b_dim < 1 or c_dim % b_dim != 0 or b_dim % a_dim != 0:
        raise NotDivisor("need a | b and b | c")
    base_b = base_copy_basis(b_dim, c_dim, spec)
    base_a_copies = _base_a_copy_bases(a_dim, b_dim, spec)

    best_fp = None
    best_osc = None
    examined = 0
    seen = set()

    def consider(g: Matrix):
        nonlocal best_fp, best_osc, examined
        from .matrix import invert
        gi = invert(g)
        fp_b = span_fingerprint([g * m * gi for m in base_b], spec, c_dim)
        if fp_b in seen:
            return None
        seen.add(fp_b)
        examined += 1
        inside = _copies_inside(g, base_a_copies, c_dim, b_dim, spec)
        osc = oscillation(gamma, inside)
        if best_osc is None or osc < best_osc:
            best_osc = osc
            best_fp = fp_b
        if osc <= eps:
            return fp_b, osc
        return None

    if strategy == "exhaustive":
        for g in iterate_units(c_dim, spec):
            hit = consider(g)
            if hit is not None:
                return SearchReport(True, hit[0], hit[1], examined,
                                    "exhaustive", eps)
        return SearchReport(False, best_fp, best_osc, examined,
                            "exhaustive", eps)
    if strategy == "random":
        import random as _random
        from .matrix import random_unit
        _check_enumeration(c_dim, spec.q)
        rng = _random.Random(seed)
        hit_report = None
        for _ in range(trials):
            g = random_unit(spec, c_dim, rng)
            hit = consider(g)
            if hit is not None and hit_report is None:
                hit_report = SearchReport(True, hit[0], hit[1], examined,
                                          f"random:{seed}:{trials}", eps)
                return hit_report
        return SearchReport(False, best_fp, best_osc, examined,
                            f"random:{seed}:{trials}", eps)
    raise ValueError(f"unknown strategy {strategy!r}")
