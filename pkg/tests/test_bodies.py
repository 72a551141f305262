import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from gcorr.bodies import (
    AxisBox, Ball, Ellipsoid, Intersection, MinkowskiSum, OrthogonalMatrix, Scaled, Slab, SymPolytope,
    body_from_json, bounding_radius, contains, intersect, is_unconditional, minkowski_contains, rotate, scale,
    support,
)
from gcorr.errors import BodyParseError, ContractViolation, DimensionMismatch, NoClosedFormSupport
from gcorr.randomness import haar_matrix


def quarter_turn():
    return OrthogonalMatrix([[0.0, -1.0], [1.0, 0.0]])


def make_bodies(n, rng):
    U = haar_matrix(rng, n)
    return [
        Slab(rng.standard_normal(n), 0.7),
        AxisBox(rng.uniform(0.5, 2, n)),
        Ball(1.3),
        Ellipsoid(rng.uniform(0.5, 2, n), U),
        SymPolytope(rng.standard_normal((n + 2, n))),
        Intersection((Ball(1.5), Slab(rng.standard_normal(n), 0.5))),
        Scaled(1.7, Ellipsoid(rng.uniform(0.5, 2, n))),
        rotate(AxisBox(rng.uniform(0.5, 2, n)), U),
        MinkowskiSum(Ball(0.5), AxisBox(rng.uniform(0.5, 1, n))),
    ]


# --- spec examples ----------------------------------------------------------


def test_contains_examples():
    assert contains(Ball(1.0), np.zeros(3))
    assert not contains(Slab([1.0, 0.0], 1.0), [1.5, 0.0])
    assert contains(Ellipsoid([1.0, 2.0]), [0.0, 2.0])


def test_contains_rejects_wrong_dimension_and_minkowski():
    with pytest.raises(DimensionMismatch):
        contains(AxisBox([1.0, 1.0]), [0.0, 0.0, 0.0])
    with pytest.raises(ContractViolation):
        contains(MinkowskiSum(Ball(1.0), Ball(1.0)), [0.0, 0.0])


def test_scale_examples():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((1000, 3)) * 2
    assert np.array_equal(scale(Ball(1.0), 2.0).indicator(X), Ball(2.0).indicator(X))
    e = Ellipsoid([1.0, 2.0, 0.5])
    assert np.array_equal(scale(e, 1.0).indicator(X), e.indicator(X))
    assert contains(scale(AxisBox([1.0, 1.0]), math.sqrt(2)), [1.4, 0.0])
    with pytest.raises(ContractViolation):
        scale(Ball(1.0), 0.0)


def test_rotate_examples():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((1000, 2)) * 2
    U = haar_matrix(rng, 2)
    assert np.array_equal(rotate(Ball(1.2), U).indicator(X), Ball(1.2).indicator(X))
    box = AxisBox([0.5, 1.5])
    assert np.array_equal(rotate(box, np.eye(2)).indicator(X), box.indicator(X))
    slab = rotate(Slab([1.0, 0.0], 1.0), quarter_turn())
    assert contains(slab, [0.0, 0.5])
    assert not contains(slab, [0.0, 1.5])


def test_support_examples():
    u = np.array([0.6, 0.8])
    assert support(Ball(2.0), u) == 2.0
    assert support(AxisBox([1.0, 3.0]), [1.0, 0.0]) == 1.0
    assert support(MinkowskiSum(Ball(1.0), Ball(2.0)), u) == pytest.approx(3.0)
    assert support(Slab([1.0, 0.0], 0.5), [1.0, 0.0]) == 0.5
    assert support(Slab([1.0, 0.0], 0.5), u) == math.inf
    e = Ellipsoid([1.0, 2.0], quarter_turn())
    # rows of the orientation are (0,-1) and (1,0)
    assert support(e, u) == pytest.approx(math.sqrt(1 * 0.8**2 + 4 * 0.6**2))


def test_support_refused_for_polytope_and_intersection():
    with pytest.raises(NoClosedFormSupport):
        support(SymPolytope([[1.0, 0.0]]), [1.0, 0.0])
    with pytest.raises(NoClosedFormSupport):
        support(Intersection((Ball(1.0), Slab([1.0, 0.0], 1.0))), [1.0, 0.0])


def test_minkowski_contains_examples():
    s = MinkowskiSum(Ball(1.0), Ball(1.0))
    x = np.array([1.9, 0.0])
    assert minkowski_contains(s, x, [x / np.linalg.norm(x)])
    x = np.array([0.0, 2.1])
    assert not minkowski_contains(s, x, [x / np.linalg.norm(x)])
    boxes = MinkowskiSum(AxisBox([1.0, 1.0]), AxisBox([2.0, 2.0]))
    assert minkowski_contains(boxes, [2.5, 2.5], np.eye(2))
    with pytest.raises(ContractViolation):
        minkowski_contains(s, [0.0, 0.0], [])


def test_minkowski_indicator_exact_for_box_and_ball_families():
    rng = np.random.default_rng(2)
    X = rng.uniform(-4, 4, (5000, 3))
    assert np.array_equal(MinkowskiSum(AxisBox([1, 2, 0.5]), AxisBox([0.5, 1, 1])).indicator(X),
                          AxisBox([1.5, 3, 1.5]).indicator(X))
    assert np.array_equal(MinkowskiSum(Ball(1.0), Ball(0.7)).indicator(X), Ball(1.7).indicator(X))


def test_minkowski_ball_plus_box_is_exact():
    # oracle: support-function test over a dense set of plane directions
    box, ball = AxisBox([1.0, 0.5]), Ball(0.4)
    phi = np.linspace(0, 2 * np.pi, 20001)
    U = np.column_stack([np.cos(phi), np.sin(phi)])
    h = box.support_many(U) + ball.support_many(U)
    rng = np.random.default_rng(6)
    X = rng.uniform(-2, 2, (4000, 2))
    oracle = np.all(X @ U.T <= h * (1 + 1e-9), axis=1)
    for s in (MinkowskiSum(ball, box), MinkowskiSum(box, ball)):
        assert np.count_nonzero(s.indicator(X) != oracle) <= 2
    assert MinkowskiSum(ball, box).indicator(np.array([[1.0 + 0.4 / np.sqrt(2) - 1e-9, 0.5 + 0.4 / np.sqrt(2)
                                                         - 1e-9]]))[0]
    assert not MinkowskiSum(ball, box).indicator(np.array([[1.3, 0.8]]))[0]


def test_bounding_radius_examples():
    assert bounding_radius(Ellipsoid([1.0, 3.0, 2.0])) == 3.0
    assert bounding_radius(Intersection((Slab([1.0, 0.0], 1.0), Ball(5.0)))) == 5.0
    assert bounding_radius(MinkowskiSum(Ball(1.0), AxisBox([1.0, 1.0]))) == pytest.approx(1 + math.sqrt(2))
    assert bounding_radius(Slab([1.0, 0.0], 1.0)) == math.inf
    assert bounding_radius(SymPolytope(np.eye(2) / 2)) == pytest.approx(2 * math.sqrt(2))


def test_intersect_simplifies_same_family():
    assert isinstance(intersect(Ball(1.0), Ball(2.0)), Ball)
    box = intersect(AxisBox([1.0, 3.0]), AxisBox([2.0, 2.0]))
    assert isinstance(box, AxisBox) and np.allclose(box.halfwidths, [1.0, 2.0])


def test_orthogonal_matrix_validation():
    with pytest.raises(ContractViolation):
        OrthogonalMatrix([[1.0, 0.1], [0.0, 1.0]])
    q = OrthogonalMatrix.nearest([[1.0, 1e-9], [0.0, 1.0]])
    assert np.allclose(q.entries.T @ q.entries, np.eye(2), atol=1e-14)


def test_from_shape_is_reproducible():
    S = np.diag([1.0, 4.0, 9.0])
    e = Ellipsoid.from_shape(S)
    assert np.allclose(e.radii, [3.0, 2.0, 1.0])
    for row in e.orientation.entries:
        nz = np.flatnonzero(np.abs(row) > 1e-14)
        assert row[nz[0]] > 0
    rng = np.random.default_rng(3)
    U = haar_matrix(rng, 3)
    S2 = U @ S @ U.T
    X = rng.standard_normal((2000, 3)) * 2
    inside = np.einsum("ij,jk,ik->i", X, np.linalg.inv(S2), X) <= 1
    assert np.array_equal(Ellipsoid.from_shape(S2).indicator(X), inside)


def test_unconditional_detection():
    assert is_unconditional(AxisBox([1.0, 2.0]))
    assert is_unconditional(Ellipsoid([1.0, 2.0]))
    assert not is_unconditional(Ellipsoid([1.0, 2.0], [[0.6, 0.8], [-0.8, 0.6]]))
    assert not is_unconditional(Slab([1.0, 1.0], 1.0))


def test_json_round_trip():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((500, 3)) * 2
    for body in make_bodies(3, rng):
        again = body_from_json(body.to_json())
        assert type(again) is type(body)
        assert np.array_equal(again.indicator(X), body.indicator(X))


@pytest.mark.parametrize("obj,key", [
    ({"kind": "ball", "radus": 1}, "radius"),
    ({"kind": "axis_box"}, "halfwidths"),
    ({"kind": "slab", "direction": [1, 0], "halfwidth": "wide"}, "halfwidth"),
    ({"radius": 1}, "kind"),
    ({"kind": "scaled", "factor": 2}, "inner"),
])
def test_json_errors_name_the_key(obj, key):
    with pytest.raises(BodyParseError, match=key):
        body_from_json(obj)


# --- properties -------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
def test_symmetric_convex_and_contains_origin(seed, n):
    rng = np.random.default_rng(seed)
    for body in make_bodies(n, rng):
        X = rng.standard_normal((10_000, n)) * 1.5
        ind = body.indicator(X)
        assert np.array_equal(ind, body.indicator(-X))
        assert body.indicator(np.zeros((1, n)))[0]
        inside = X[ind]
        if len(inside) > 1:
            perm = rng.permutation(len(inside))
            mids = 0.5 * (inside + inside[perm])
            assert body.indicator(mids).all()


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=st.floats(0.2, 3), b=st.floats(0.2, 3))
def test_scale_and_rotate_composition(seed, a, b):
    rng = np.random.default_rng(seed)
    n = 3
    U, V = haar_matrix(rng, n), haar_matrix(rng, n)
    X = rng.standard_normal((2000, n)) * 2
    for body in make_bodies(n, rng)[:7]:
        lhs = scale(scale(body, a), b).indicator(X)
        rhs = scale(body, a * b).indicator(X)
        # points within rounding of the boundary can flip; allow a handful
        assert np.count_nonzero(lhs != rhs) <= 2
        r1 = rotate(rotate(body, U), V).indicator(X)
        r2 = rotate(body, V @ U).indicator(X)
        assert np.count_nonzero(r1 != r2) <= 2
        assert np.array_equal(rotate(body, U).indicator(X), body.indicator(X @ U))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.floats(0.1, 5))
def test_support_homogeneous_under_scale(seed, c):
    rng = np.random.default_rng(seed)
    n = 3
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    for body in (AxisBox(rng.uniform(0.5, 2, n)), Ball(1.1), Ellipsoid(rng.uniform(0.5, 2, n), haar_matrix(rng, n)),
                 MinkowskiSum(Ball(0.3), AxisBox(rng.uniform(0.5, 2, n)))):
        assert support(scale(body, c), u) == pytest.approx(c * support(body, u), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_support_matches_sampled_maximum(seed):
    rng = np.random.default_rng(seed)
    n = 2
    body = Ellipsoid(rng.uniform(0.5, 2, n), haar_matrix(rng, n))
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    phi = np.linspace(0, 2 * np.pi, 20001)
    # boundary parametrization x = O^T diag(r) (cos, sin)
    pts = (np.column_stack([np.cos(phi), np.sin(phi)]) * body.radii) @ body.orientation.entries
    assert support(body, u) == pytest.approx(np.max(pts @ u), rel=1e-6)


def test_bounding_radius_is_an_upper_bound():
    rng = np.random.default_rng(5)
    for body in make_bodies(3, rng):
        R = bounding_radius(body)
        if math.isfinite(R):
            X = rng.standard_normal((20_000, 3)) * 3
            inside = X[body.indicator(X)]
            assert np.all(np.linalg.norm(inside, axis=1) <= R * (1 + 1e-12))
