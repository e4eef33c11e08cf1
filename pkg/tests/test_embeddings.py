from fractions import Fraction

import pytest

from rankmetric.errors import (
    DimensionMismatch,
    FormatError,
    NotDivisor,
    NotUnital,
)
from rankmetric.matrix import (
    Matrix,
    invert,
    kassabov_generators,
    rank,
    rank_distance,
    random_matrix,
    random_unit,
)
from rankmetric.embeddings import (
    DeltaEmbedding,
    Homomorphism,
    amalgamate,
    compose,
    delta_apply,
    iota,
    iota_embedding,
    joint_embed,
    skolem_noether_conjugator,
)


# -- iota ---------------------------------------------------------------------


def test_iota_identity(gf2, rng):
    x = random_matrix(gf2, 3, 3, rng)
    assert iota(3, 3, x) == x


def test_iota_isometry_rank_one(gf2):
    x = Matrix.unit(gf2, 2, 1, 2)
    lifted = iota(4, 2, x)
    assert rank(lifted) == 2
    zero2, zero4 = Matrix.zero(gf2, 2), Matrix.zero(gf2, 4)
    assert rank_distance(x, zero2) == rank_distance(lifted, zero4)


def test_iota_isometry_random(gf3, rng):
    for _ in range(30):
        x = random_matrix(gf3, 3, 3, rng)
        y = random_matrix(gf3, 3, 3, rng)
        assert rank_distance(iota(6, 3, x), iota(6, 3, y)) == rank_distance(x, y)


def test_iota_functoriality(gf2, rng):
    for _ in range(10):
        x = random_matrix(gf2, 2, 2, rng)
        assert iota(12, 4, iota(4, 2, x)) == iota(12, 2, x)


def test_iota_rejects_non_divisor(gf2):
    with pytest.raises(NotDivisor):
        iota(5, 2, Matrix.identity(gf2, 2))


def test_iota_embedding_equals_iota(gf3, rng):
    e = iota_embedding(6, 2, gf3)
    assert e.unital and e.delta == 0
    for _ in range(10):
        x = random_matrix(gf3, 2, 2, rng)
        assert e.apply(x) == iota(6, 2, x)


def test_identity_conjugator_differs_from_iota_by_fixed_shuffle(gf2, rng):
    # the plain block layout and the inclusion are the same map up to the
    # fixed shuffle permutation, which the inclusion's conjugator carries
    from rankmetric.embeddings import block_embedding
    block = block_embedding(2, 6, gf2)
    shuffled = iota_embedding(6, 2, gf2)
    q_perm = shuffled.conjugator
    qi = invert(q_perm)
    for _ in range(5):
        x = random_matrix(gf2, 2, 2, rng)
        assert q_perm * block.apply(x) * qi == iota(6, 2, x)


# -- delta embeddings ---------------------------------------------------------


def _random_embedding(spec, m, n, mult, rng):
    return DeltaEmbedding(m, n, mult, random_unit(spec, n, rng))


def test_delta_apply_zero(gf2, rng):
    e = _random_embedding(gf2, 2, 5, 2, rng)
    assert e.apply(Matrix.zero(gf2, 2)).is_zero()


def test_delta_apply_is_ring_hom(gf2, rng):
    e = _random_embedding(gf2, 2, 5, 2, rng)
    for _ in range(20):
        x = random_matrix(gf2, 2, 2, rng)
        y = random_matrix(gf2, 2, 2, rng)
        assert delta_apply(e, x * y) == delta_apply(e, x) * delta_apply(e, y)
        assert delta_apply(e, x + y) == delta_apply(e, x) + delta_apply(e, y)


def test_delta_value_and_idempotent_rank(gf2, rng):
    e = _random_embedding(gf2, 2, 5, 2, rng)
    assert e.delta.as_fraction() == Fraction(1, 5)
    image_one = e.apply(Matrix.identity(gf2, 2))
    assert rank(image_one) == 4
    assert image_one * image_one == image_one
    assert rank_distance(image_one, Matrix.identity(gf2, 5)).as_fraction() == Fraction(1, 5)


def test_unital_limit_behavior(gf3, rng):
    # d(phi(1), 1) <= delta for every constructed block embedding
    for (m, n, mult) in [(2, 6, 3), (2, 7, 3), (3, 10, 3), (2, 5, 1)]:
        e = _random_embedding(gf3, m, n, mult, rng)
        d = rank_distance(e.apply(Matrix.identity(gf3, m)),
                          Matrix.identity(gf3, n))
        assert d.as_fraction() <= e.delta_fraction


def test_lipschitz_expansion_sandwich(gf2, rng):
    e = _random_embedding(gf2, 2, 5, 2, rng)
    delta = e.delta_fraction
    for _ in range(20):
        x = random_matrix(gf2, 2, 2, rng)
        y = random_matrix(gf2, 2, 2, rng)
        dxy = rank_distance(x, y).as_fraction()
        dim = rank_distance(e.apply(x), e.apply(y)).as_fraction()
        assert dim <= dxy
        assert dim >= (1 - delta) * dxy


def test_compose_multiplies_and_agrees(gf2, rng):
    inner = _random_embedding(gf2, 2, 5, 2, rng)
    outer = _random_embedding(gf2, 5, 12, 2, rng)
    comp = compose(outer, inner)
    assert comp.mult == 4 and comp.m == 2 and comp.n == 12
    for _ in range(10):
        x = random_matrix(gf2, 2, 2, rng)
        assert comp.apply(x) == outer.apply(inner.apply(x))


def test_delta_embedding_rejects_overfull(gf2):
    with pytest.raises(DimensionMismatch):
        DeltaEmbedding(2, 5, 3, Matrix.identity(gf2, 5))


def test_delta_text_roundtrip(gf2, rng):
    e = _random_embedding(gf2, 2, 6, 2, rng)
    again = DeltaEmbedding.from_text(e.to_text())
    assert (again.m, again.n, again.mult) == (2, 6, 2)
    assert again.conjugator == e.conjugator


# -- joint embedding ----------------------------------------------------------


def test_joint_embed_dimensions(gf2):
    c, ea, eb = joint_embed(2, 3, gf2)
    assert c == 6
    assert ea.unital and eb.unital
    c2, _, _ = joint_embed(2, 2, gf2)
    assert c2 == 4


def test_joint_embed_scalars(gf3):
    c, ea, _ = joint_embed(1, 4, gf3)
    assert c == 4
    two = Matrix.scalar(gf3, 1, 2)
    assert ea.apply(two) == Matrix.scalar(gf3, 4, 2)


# -- homomorphisms ------------------------------------------------------------


def test_homomorphism_inclusion_is_unital(gf2):
    h = Homomorphism.inclusion(6, 2, gf2)
    assert h.unital
    a, b = kassabov_generators(2, gf2)
    assert h.apply(a) == h.img_a and h.apply(b) == h.img_b


def test_homomorphism_apply_is_multiplicative(gf2, rng):
    h = Homomorphism.inclusion(4, 2, gf2).conjugate(random_unit(gf2, 4, rng))
    for _ in range(10):
        x = random_matrix(gf2, 2, 2, rng)
        y = random_matrix(gf2, 2, 2, rng)
        assert h.apply(x * y) == h.apply(x) * h.apply(y)
        assert h.apply(x + y) == h.apply(x) + h.apply(y)


def test_homomorphism_text_roundtrip(gf2, rng):
    h = Homomorphism.inclusion(4, 2, gf2).conjugate(random_unit(gf2, 4, rng))
    again = Homomorphism.from_text(h.to_text())
    assert again == h


def test_homomorphism_rejects_garbage(gf2):
    with pytest.raises(FormatError):
        Homomorphism.from_text("HOM 2\n")


# -- skolem-noether -----------------------------------------------------------


def test_conjugator_self(gf2):
    inc = Homomorphism.inclusion(4, 2, gf2)
    u = skolem_noether_conjugator(inc, inc)
    ui = invert(u)
    assert u * inc.img_a * ui == inc.img_a
    assert u * inc.img_b * ui == inc.img_b


def test_conjugator_known_twist(gf2, rng):
    # returned unit need not equal the twisting unit, only intertwine
    inc = Homomorphism.inclusion(4, 2, gf2)
    g = random_unit(gf2, 4, rng)
    tw = inc.conjugate(g)
    u = skolem_noether_conjugator(inc, tw)
    ui = invert(u)
    assert u * inc.img_a * ui == tw.img_a
    assert u * inc.img_b * ui == tw.img_b


def test_conjugator_random_pair_many(gf2, gf3, rng):
    for spec, b in [(gf2, 4), (gf2, 6), (gf3, 6)]:
        inc = Homomorphism.inclusion(b, 2, spec)
        phi0 = inc.conjugate(random_unit(spec, b, rng))
        phi1 = inc.conjugate(random_unit(spec, b, rng))
        u = skolem_noether_conjugator(phi0, phi1)
        assert rank(u) == b
        ui = invert(u)
        assert u * phi0.img_a * ui == phi1.img_a
        assert u * phi0.img_b * ui == phi1.img_b


def test_conjugator_requires_unital(gf2, rng):
    inc = Homomorphism.inclusion(4, 2, gf2)
    padded = DeltaEmbedding(2, 5, 2, random_unit(gf2, 5, rng))
    ha, hb = padded.generator_images()
    nonunital = Homomorphism(2, 5, ha, hb)
    with pytest.raises(NotUnital):
        skolem_noether_conjugator(nonunital, nonunital)
    with pytest.raises(DimensionMismatch):
        skolem_noether_conjugator(inc, Homomorphism.inclusion(6, 2, gf2))


# -- amalgamation -------------------------------------------------------------


def test_amalgamate_plain_inclusions(gf2, rng):
    phi0 = Homomorphism.inclusion(4, 2, gf2)
    phi1 = Homomorphism.inclusion(6, 2, gf2)
    c, psi0, psi1 = amalgamate(phi0, phi1)
    assert c == 24
    a, b = kassabov_generators(2, gf2)
    for x in (a, b, random_matrix(gf2, 2, 2, rng)):
        assert psi0.apply(phi0.apply(x)) == psi1.apply(phi1.apply(x))


def test_amalgamate_scalar_source(gf2):
    phi0 = Homomorphism.inclusion(2, 1, gf2)
    phi1 = Homomorphism.inclusion(3, 1, gf2)
    c, psi0, psi1 = amalgamate(phi0, phi1)
    assert c == 6
    one = Matrix.identity(gf2, 1)
    assert psi0.apply(phi0.apply(one)) == psi1.apply(phi1.apply(one))


def test_amalgamate_random_twists(gf2, rng):
    phi0 = Homomorphism.inclusion(4, 2, gf2).conjugate(random_unit(gf2, 4, rng))
    phi1 = Homomorphism.inclusion(6, 2, gf2).conjugate(random_unit(gf2, 6, rng))
    c, psi0, psi1 = amalgamate(phi0, phi1)
    assert c == 24
    assert psi0.unital and psi1.unital
    a, b = kassabov_generators(2, gf2)
    for x in (a, b):
        assert psi0.apply(phi0.apply(x)) == psi1.apply(phi1.apply(x))


def test_amalgamate_rejects_nonunital(gf2, rng):
    padded = DeltaEmbedding(2, 5, 2, random_unit(gf2, 5, rng))
    ha, hb = padded.generator_images()
    nonunital = Homomorphism(2, 5, ha, hb)
    with pytest.raises(NotUnital):
        amalgamate(nonunital, Homomorphism.inclusion(4, 2, gf2))
