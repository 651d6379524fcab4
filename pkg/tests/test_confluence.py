import numpy as np

from cplab.confluence import (ConfluenceParams, canonical_shift,
                              canonical_unshift, conf_map, conf_map_linear,
                              confluence_residual, dual_confluence_breakdown,
                              map_time, particle_conf_map, p4_spec,
                              reduced_confluence_residual, residual_ratio_sweep)
from cplab.phase import (MatrixPhasePoint, SystemKind, TangentPair,
                         moment_map, symplectic_pairing)
from cplab.reduction import ReducedPoint, Slice, embed
from cplab.sampling import random_reduced

EPS_SWEEP = [0.1, 0.05, 0.025]


def generic_point(rng, n=2):
    return MatrixPhasePoint(rng.normal(size=(n, n)) + 0.3j * rng.normal(size=(n, n)),
                            rng.normal(size=(n, n)) + 0.3j * rng.normal(size=(n, n)),
                            0.1)


class TestConfMap:
    def test_vacuum_worked(self):
        cp = ConfluenceParams(1.0, 0.0)
        image, params = conf_map(MatrixPhasePoint([[0.0]], [[0.0]], 0.0), cp)
        assert image.q[0, 0] == -0.5
        assert image.p[0, 0] == 0.0
        assert image.t == 1.0
        assert params["theta0"] == -0.25

    def test_linear_vacuum(self):
        cp = ConfluenceParams(1.0, 0.0)
        image, _ = conf_map_linear(MatrixPhasePoint([[0.0]], [[1.0]], 0.0), cp)
        assert image.q[0, 0] == -0.5 and image.p[0, 0] == -1.0

    def test_q_image_diverges_as_eps_cubed(self):
        pt = MatrixPhasePoint([[0.3]], [[0.1]], 0.0)
        norms = []
        for e in (0.1, 0.05):
            image, _ = conf_map(pt, ConfluenceParams(e, 0.0))
            norms.append(abs(image.q[0, 0]))
        assert 7.0 < norms[1] / norms[0] < 9.0  # eps^-3 halving

    def test_moment_map_preserved_exactly(self, rng):
        pt = generic_point(rng)
        for mapper in (conf_map, conf_map_linear):
            image, _ = mapper(pt, ConfluenceParams(0.1, 0.4))
            assert np.abs(moment_map(image) - moment_map(pt)).max() < 1e-10

    def test_composition_identity(self, rng):
        pt = generic_point(rng)
        cp = ConfluenceParams(0.1, 1.0)
        im1, _ = conf_map(pt, cp)
        im2, _ = conf_map_linear(canonical_shift(pt), cp)
        assert np.abs(im1.q - im2.q).max() < 1e-12
        assert np.abs(im1.p - im2.p).max() < 1e-12


def _pushforward(mapper, pt, cp, tangent, step=1e-4):
    """Finite-difference Jacobian action on a tangent pair (Richardson).

    Both confluence maps are quadratic in (q, p), so central differences
    carry no truncation error at any step; 1e-4 keeps the roundoff of the
    eps^-3-sized image entries at ~1e-12 (a 1e-6 step would be
    roundoff-dominated).
    """
    def moved(s):
        shifted = MatrixPhasePoint(pt.q + s * tangent.dq, pt.p + s * tangent.dp,
                                   pt.t)
        image, _ = mapper(shifted, cp)
        return image

    def diff(s):
        a, b = moved(s), moved(-s)
        return TangentPair((a.q - b.q) / (2 * s), (a.p - b.p) / (2 * s))

    d1, d2 = diff(step), diff(step / 2)
    return TangentPair((4 * d2.dq - d1.dq) / 3, (4 * d2.dp - d1.dp) / 3)


class TestSymplectomorphisms:
    def test_confluence_maps_preserve_pairing(self, rng):
        pt = generic_point(rng, 2)
        cp = ConfluenceParams(0.1, 0.3)
        u = TangentPair(rng.normal(size=(2, 2)), rng.normal(size=(2, 2)))
        w = TangentPair(rng.normal(size=(2, 2)), rng.normal(size=(2, 2)))
        before = symplectic_pairing(u, w)
        for mapper in (conf_map, conf_map_linear):
            pu = _pushforward(mapper, pt, cp, u)
            pw = _pushforward(mapper, pt, cp, w)
            assert abs(symplectic_pairing(pu, pw) - before) < 1e-9 * max(1, abs(before))

    def test_canonical_shift_preserves_pairing(self, rng):
        pt = generic_point(rng, 3)
        u = TangentPair(rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))
        w = TangentPair(rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))

        def as_map(p, _cp):
            return canonical_shift(p), {}

        pu = _pushforward(as_map, pt, None, u)
        pw = _pushforward(as_map, pt, None, w)
        assert abs(symplectic_pairing(pu, pw) - symplectic_pairing(u, w)) < 1e-10


class TestCanonicalShift:
    def test_zero_q(self):
        pt = MatrixPhasePoint(np.zeros((2, 2)), np.eye(2), 0.8)
        shifted = canonical_shift(pt)
        assert np.abs(shifted.p - (np.eye(2) + 0.4 * np.eye(2))).max() < 1e-15

    def test_roundtrip(self, rng):
        pt = generic_point(rng, 3)
        back = canonical_unshift(canonical_shift(pt))
        assert np.abs(back.p - pt.p).max() < 1e-14
        assert np.abs(back.q - pt.q).max() < 1e-14


class TestResiduals:
    def test_scalar_ratio(self):
        pt = MatrixPhasePoint([[0.3]], [[-0.2]], 0.1)
        res = [confluence_residual(pt, ConfluenceParams(e, 1.0)) for e in EPS_SWEEP]
        for r_big, r_small in zip(res, res[1:]):
            assert 3.5 < r_big / r_small < 4.5

    def test_vacuum_residual_tiny(self):
        pt = MatrixPhasePoint([[0.0]], [[0.0]], 0.0)
        for e in EPS_SWEEP:
            # all matter terms vanish; only roundoff from the parameter
            # cancellations remains, far below the eps^2 scale
            assert confluence_residual(pt, ConfluenceParams(e, 1.0)) < e ** 2

    def test_matrix_and_reduced_sweeps(self, rng):
        from cplab.selfcheck import _conf_remainders, _generic_conf_point
        pt = _generic_conf_point(rng)
        while True:
            xq = random_reduced(rng, 2, 1.0, t=0.1)
            if _conf_remainders(embed(xq)) > 1.0:
                break
        for kind in ("conf", "conf1"):
            sweep = residual_ratio_sweep(pt, 0.7 + 0.1j, EPS_SWEEP, kind)
            assert all(3.5 < r < 4.5 for r in sweep["ratios"]), (kind, sweep)
            sweep = residual_ratio_sweep(xq, 0.7 + 0.1j, EPS_SWEEP, kind,
                                         reduced=True)
            assert all(3.5 < r < 4.5 for r in sweep["ratios"]), (kind, sweep)

    def test_reduced_equals_matrix_on_slice(self, rng):
        # conf commutes with the Q_DIAG embedding, so the two residual code
        # paths (closed forms vs traces) must agree
        x = random_reduced(rng, 2, 1.0, t=0.1)
        cp = ConfluenceParams(0.1, 0.7)
        a = reduced_confluence_residual(x, cp, "conf")
        b = confluence_residual(embed(x), cp, "conf")
        assert abs(a - b) < 1e-8 * max(1.0, abs(b))

    def test_interaction_term_limit(self, rng):
        # -eps g^2 (q4_i + q4_j)/(dq4)^2 -> g^2/(dq2)^2 with O(eps^2) error
        x = random_reduced(rng, 3, 1.0, t=0.1)
        target = sum(1.0 / (x.positions[i] - x.positions[j]) ** 2
                     for i in range(3) for j in range(i + 1, 3))
        errs = []
        for e in (0.1, 0.05):
            y = particle_conf_map(x, ConfluenceParams(e, 0.0), "conf")
            val = -e * sum((y.positions[i] + y.positions[j])
                           / (y.positions[i] - y.positions[j]) ** 2
                           for i in range(3) for j in range(i + 1, 3))
            errs.append(abs(val - target) / abs(target))
        assert errs[0] < 0.1
        assert 3.5 < errs[0] / errs[1] < 4.5

    def test_image_time(self):
        cp = ConfluenceParams(0.1, 0.0)
        assert abs(map_time(0.3, cp) - (1 - 1e-4 * 0.3) / 1e-3) < 1e-9


class TestDualBreakdown:
    def test_generic_breakdown_visible(self, rng):
        xd = random_reduced(rng, 2, 1.0, Slice.P_DIAG, t=0.1)
        rep = dual_confluence_breakdown(xd, ConfluenceParams(0.1, 0.5))
        assert rep["deviation"] > 1e-3

    def test_linear_map_aligns(self, rng):
        xd = random_reduced(rng, 2, 1.0, Slice.P_DIAG, t=0.1)
        rep = dual_confluence_breakdown(xd, ConfluenceParams(0.1, 0.5),
                                        use_linear=True)
        assert rep["deviation"] < 1e-8

    def test_small_coupling_alignment(self):
        devs = []
        for g in (0.5, 0.05, 0.005):
            xd = ReducedPoint([0.3, 1.7], [-0.2, 0.6], g, 0.1, Slice.P_DIAG)
            rep = dual_confluence_breakdown(xd, ConfluenceParams(0.1, 0.5))
            devs.append(rep["eigenbasis_misalignment"])
        assert devs[0] > devs[1] > devs[2]
        assert devs[2] < 1e-2

    def test_linear_map_keeps_p_eigenbasis(self, rng):
        # eigenvectors of p_IV coincide with those of p_II under the linear map
        xd = random_reduced(rng, 2, 1.0, Slice.P_DIAG, t=0.1)
        pt = embed(xd)
        image, _ = conf_map_linear(pt, ConfluenceParams(0.1, 0.5))
        comm = image.p @ pt.p - pt.p @ image.p
        assert np.abs(comm).max() < 1e-10

    def test_p4_spec_parameters(self):
        cp = ConfluenceParams(0.1, 0.7)
        spec = p4_spec(cp)
        assert spec.kind is SystemKind.P_IV
        assert abs(spec.theta0 + 1.0 / (4 * 0.1 ** 6)) < 1e-6
        assert abs((spec.theta0 + spec.theta1) - 0.7) < 1e-9
