"""Embedding calculus for matrix algebras under the rank metric.

Two representations are used side by side:

* ``DeltaEmbedding`` stores a (possibly non-unital) block homomorphism
  x -> y (x^{+k} (+) 0) y^{-1} by its multiplicity and conjugator. Its
  delta value (n - m*k)/n measures how much of the target it misses;
  delta = 0 means a unital embedding.
* ``Homomorphism`` stores a map by the images of the shift generator
  pair, validated at construction through a full matrix-unit rebuild,
  which certifies the ring-homomorphism property once and for all.

``skolem_noether_conjugator`` produces an explicit intertwining unit for
any two unital homomorphisms with the same source and target by aligning
the module decompositions cut out by the matrix-unit images, and
``amalgamate`` uses it to complete any two embeddings of a common
subalgebra into an exactly commuting square.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    DimensionMismatch,
    FormatError,
    NotDivisor,
    NotUnital,
    SpecMismatch,
)
from .gf import FieldSpec
from .matrix import (
    Matrix,
    RankDistance,
    direct_sum,
    image_basis,
    invert,
    kassabov_generators,
    matrix_units,
    read_matrices,
    write_matrix,
)


def _permutation_matrix(spec: FieldSpec, images: list[int]) -> Matrix:
    """The matrix sending basis vector j to basis vector images[j]."""
    n = len(images)
    e = [0] * (n * n)
    for j, i in enumerate(images):
        e[i * n + j] = 1
    return Matrix(spec, n, n, e)


def _shuffle_conjugator(spec: FieldSpec, m: int, k: int) -> Matrix:
    """Permutation Q with Q (x^{+k}) Q^{-1} = x (x) 1_k for all m x m x."""
    images = [0] * (m * k)
    for w in range(k):
        for i in range(m):
            images[w * m + i] = i * k + w
    return _permutation_matrix(spec, images)


def _merge_permutation(spec: FieldSpec, outer: int, block: int, copies: int,
                       inner: int, total: int) -> Matrix:
    """Permutation P with (x^{+copies} (+) 0)^{+outer} (+) 0 = P (x^{+outer*copies} (+) 0) P^{-1}.

    ``block`` is the size of each outer block, ``inner`` the size of x,
    ``total`` the ambient dimension.
    """
    images = [-1] * total
    for t in range(outer):
        for c in range(copies):
            u = t * copies + c
            for i in range(inner):
                images[u * inner + i] = t * block + c * inner + i
    used = outer * copies * inner
    tgt_pads = []
    for t in range(outer):
        tgt_pads.extend(range(t * block + copies * inner, (t + 1) * block))
    tgt_pads.extend(range(outer * block, total))
    for offset, src in enumerate(range(used, total)):
        images[src] = tgt_pads[offset]
    return _permutation_matrix(spec, images)


class DeltaEmbedding:
    """A conjugated block-diagonal homomorphism M_m -> M_n with padding."""

    __slots__ = ("m", "n", "mult", "conjugator", "conjugator_inv", "spec")

    def __init__(self, m: int, n: int, mult: int, conjugator: Matrix):
        if mult < 0 or m < 1:
            raise DimensionMismatch("bad multiplicity or source dimension")
        if m * mult > n:
            raise DimensionMismatch(
                f"{mult} copies of dimension {m} exceed target {n}"
            )
        if conjugator.rows != n or conjugator.cols != n:
            raise DimensionMismatch("conjugator has the wrong size")
        self.m = m
        self.n = n
        self.mult = mult
        self.conjugator = conjugator
        self.conjugator_inv = invert(conjugator)
        self.spec = conjugator.spec

    @property
    def delta(self) -> RankDistance:
        return RankDistance(self.n - self.m * self.mult, self.n)

    @property
    def delta_fraction(self) -> Fraction:
        return self.delta.as_fraction()

    @property
    def unital(self) -> bool:
        return self.m * self.mult == self.n

    def apply(self, x: Matrix) -> Matrix:
        if x.spec != self.spec:
            raise SpecMismatch("element over a different field")
        if x.rows != self.m or x.cols != self.m:
            raise DimensionMismatch(f"element must be {self.m}x{self.m}")
        if self.mult == 0:
            return Matrix.zero(self.spec, self.n)
        blocks = direct_sum([x] * self.mult, self.n - self.m * self.mult)
        return self.conjugator * blocks * self.conjugator_inv

    def generator_images(self) -> tuple[Matrix, Matrix]:
        a, b = kassabov_generators(self.m, self.spec)
        return self.apply(a), self.apply(b)

    def to_text(self) -> str:
        return f"DELTA {self.m} {self.n} {self.mult}\n" + write_matrix(self.conjugator)

    @classmethod
    def from_text(cls, text: str) -> "DeltaEmbedding":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("DELTA"):
            raise FormatError("expected a DELTA header")
        parts = lines[0].split()
        if len(parts) != 4:
            raise FormatError(f"bad DELTA header: {lines[0]!r}")
        m, n, mult = (int(t) for t in parts[1:])
        conj = read_matrices("\n".join(lines[1:]), 1)[0]
        return cls(m, n, mult, conj)

    def __repr__(self):
        return (f"DeltaEmbedding(M_{self.m} -> M_{self.n}, mult {self.mult}, "
                f"delta {self.delta})")


def delta_apply(e: DeltaEmbedding, x: Matrix) -> Matrix:
    return e.apply(x)


def compose(outer: DeltaEmbedding, inner: DeltaEmbedding) -> DeltaEmbedding:
    """The composite block embedding, with its explicit conjugator."""
    if outer.spec != inner.spec:
        raise SpecMismatch("embeddings over different fields")
    if outer.m != inner.n:
        raise DimensionMismatch("composition dimensions do not match")
    k1, k2 = inner.mult, outer.mult
    p, n, m = outer.n, inner.n, inner.m
    if k1 == 0 or k2 == 0:
        return DeltaEmbedding(m, p, 0, Matrix.identity(outer.spec, p))
    blocks = [inner.conjugator] * k2
    if p > n * k2:
        blocks.append(Matrix.identity(outer.spec, p - n * k2))
    middle = direct_sum(blocks)
    perm = _merge_permutation(outer.spec, k2, n, k1, m, p)
    return DeltaEmbedding(m, p, k1 * k2, outer.conjugator * middle * perm)


def iota(n: int, m: int, x: Matrix) -> Matrix:
    """The inclusion x -> x (x) 1_{n/m}; isometric for the rank metric."""
    if m < 1 or n % m != 0:
        raise NotDivisor(f"{m} does not divide {n}")
    if x.rows != m or x.cols != m:
        raise DimensionMismatch(f"element must be {m}x{m}")
    from .matrix import kron
    return kron(x, Matrix.identity(x.spec, n // m))


def iota_embedding(n: int, m: int, spec: FieldSpec) -> DeltaEmbedding:
    """The inclusion in block form: multiplicity n/m, shuffle conjugator."""
    if m < 1 or n % m != 0:
        raise NotDivisor(f"{m} does not divide {n}")
    return DeltaEmbedding(m, n, n // m, _shuffle_conjugator(spec, m, n // m))


def block_embedding(m: int, n: int, spec: FieldSpec) -> DeltaEmbedding:
    """Plain block map with maximal multiplicity floor(n/m), identity conjugator."""
    return DeltaEmbedding(m, n, n // m, Matrix.identity(spec, n))


def joint_embed(a_dim: int, b_dim: int, spec: FieldSpec):
    """Common superalgebra of dimension a*b with the two inclusions."""
    c = a_dim * b_dim
    return c, iota_embedding(c, a_dim, spec), iota_embedding(c, b_dim, spec)


class Homomorphism:
    """A homomorphism M_m -> M_n stored by its generator images.

    Construction rebuilds the full matrix-unit system and rejects the
    value unless every product identity holds, so an instance *is* a
    certificate that the map extends to a ring homomorphism. The map is
    unital when the unit images sum to the identity.
    """

    __slots__ = ("m", "n", "img_a", "img_b", "units", "spec")

    def __init__(self, m: int, n: int, img_a: Matrix, img_b: Matrix):
        if img_a.spec != img_b.spec:
            raise SpecMismatch("generator images over different fields")
        for img in (img_a, img_b):
            if img.rows != n or img.cols != n:
                raise DimensionMismatch("generator image has the wrong size")
        self.m = m
        self.n = n
        self.img_a = img_a
        self.img_b = img_b
        self.units = matrix_units(img_a, img_b, m)
        self.spec = img_a.spec

    @property
    def unit_image(self) -> Matrix:
        out = self.units[0][0]
        for i in range(1, self.m):
            out = out + self.units[i][i]
        return out

    @property
    def unital(self) -> bool:
        return self.unit_image == Matrix.identity(self.spec, self.n)

    def apply(self, x: Matrix) -> Matrix:
        """Evaluate on an arbitrary element via its matrix-unit coordinates."""
        if x.rows != self.m or x.cols != self.m:
            raise DimensionMismatch(f"element must be {self.m}x{self.m}")
        out = Matrix.zero(self.spec, self.n)
        for i in range(self.m):
            for j in range(self.m):
                v = x._e[i * self.m + j]
                if v:
                    out = out + self.units[i][j].scale(v)
        return out

    @classmethod
    def from_embedding(cls, e: DeltaEmbedding) -> "Homomorphism":
        ia, ib = e.generator_images()
        return cls(e.m, e.n, ia, ib)

    @classmethod
    def inclusion(cls, n: int, m: int, spec: FieldSpec) -> "Homomorphism":
        a, b = kassabov_generators(m, spec)
        return cls(m, n, iota(n, m, a), iota(n, m, b))

    def conjugate(self, u: Matrix) -> "Homomorphism":
        """The map x -> u phi(x) u^{-1}."""
        uinv = invert(u)
        return Homomorphism(self.m, self.n, u * self.img_a * uinv,
                            u * self.img_b * uinv)

    def to_text(self) -> str:
        return (f"HOM {self.m} {self.n}\n" + write_matrix(self.img_a)
                + write_matrix(self.img_b))

    @classmethod
    def from_text(cls, text: str) -> "Homomorphism":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("HOM"):
            raise FormatError("expected a HOM header")
        parts = lines[0].split()
        if len(parts) != 3:
            raise FormatError(f"bad HOM header: {lines[0]!r}")
        m, n = int(parts[1]), int(parts[2])
        img_a, img_b = read_matrices("\n".join(lines[1:]), 2)
        return cls(m, n, img_a, img_b)

    def __eq__(self, other):
        return (isinstance(other, Homomorphism) and self.m == other.m
                and self.n == other.n and self.img_a == other.img_a
                and self.img_b == other.img_b)

    def __hash__(self):
        return hash((self.m, self.n, self.img_a, self.img_b))

    def __repr__(self):
        tag = "unital " if self.unital else ""
        return f"Homomorphism({tag}M_{self.m} -> M_{self.n})"


def skolem_noether_conjugator(phi0: Homomorphism, phi1: Homomorphism) -> Matrix:
    """An explicit unit u with u phi0(x) u^{-1} = phi1(x) for all x.

    Both maps must be unital with the same source and target. The target
    column space splits into n/m copies of the standard column module
    under either map; picking the canonical basis of the E_11 image and
    transporting it through the E_i1 images yields a full basis adapted
    to each map, and u is the change of basis between the two.
    """
    if phi0.spec != phi1.spec:
        raise SpecMismatch("homomorphisms over different fields")
    if phi0.m != phi1.m or phi0.n != phi1.n:
        raise DimensionMismatch("homomorphisms with different shapes")
    if not phi0.unital or not phi1.unital:
        raise NotUnital("conjugator construction needs unital maps")
    m, n = phi0.m, phi0.n

    def adapted_basis(phi: Homomorphism) -> Matrix:
        top = image_basis(phi.units[0][0])
        cols = []
        for v in top.basis:
            for i in range(m):
                cols.append(phi.units[i][0].apply_to_vector(v))
        return Matrix.from_columns(phi.spec, cols, n)

    u0 = adapted_basis(phi0)
    u1 = adapted_basis(phi1)
    return u1 * invert(u0)


def amalgamate(phi0: Homomorphism, phi1: Homomorphism):
    """Complete two unital embeddings of M_a into an exact commuting square.

    Returns (c, psi0, psi1) with c = b0 * b1 and psi_i: M_{b_i} -> M_c
    unital such that psi0 o phi0 = psi1 o phi1 exactly: each psi_i is the
    inclusion corrected by the inner twist that straightens phi_i.
    """
    if phi0.spec != phi1.spec:
        raise SpecMismatch("homomorphisms over different fields")
    if phi0.m != phi1.m:
        raise DimensionMismatch("embeddings of different source algebras")
    for phi in (phi0, phi1):
        if not phi.unital:
            raise NotUnital("amalgamation needs unital embeddings")
    a = phi0.m
    b0, b1 = phi0.n, phi1.n
    c = b0 * b1
    spec = phi0.spec

    def leg(phi: Homomorphism, b: int) -> Homomorphism:
        straight = Homomorphism.inclusion(b, a, spec)
        u = skolem_noether_conjugator(straight, phi)
        lifted_u = iota(c, b, u)
        return Homomorphism.inclusion(c, b, spec).conjugate(invert(lifted_u))

    return c, leg(phi0, b0), leg(phi1, b1)
