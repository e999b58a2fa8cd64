import itertools

import sympy
from django.test import SimpleTestCase

from core.errors import AlgebraIdentityError, InputError, PreconditionError
from core.models import all_passed, failed
from expr.services import function_atom, normal
from frame.models import FrameData, SemidirectAlgebra
from frame.semidirect import (
    DERIVATION_IDENTITY,
    build_semidirect,
    coframe,
    realize_nilpotent,
)
from frame.services import (
    connection_block_check,
    curvature_null_contraction,
    frame_connection,
    frame_curvature,
    frame_ricci,
    nrw_conditions,
    ricci_null_dual_formula,
    torsion_check,
    walker_frame_check,
)
from frame.walker import walker_check_coordinates
from tensor.models import Metric
from tensor.services import christoffel, ricci

x1, x2, y1, y2 = sympy.symbols("x1 x2 y1 y2")
v, y, u = sympy.symbols("v y u")


def structure_from(n, brackets):
    """{(i, j): {k: c}} -> r[k][i][j] antisimétrica."""
    r = [[[0] * n for _ in range(n)] for _ in range(n)]
    for (i, j), values in brackets.items():
        for k, c in values.items():
            r[k][i][j] += c
            r[k][j][i] -= c
    return r


def lorentz_gframe(n):
    g = [[0] * n for _ in range(n)]
    g[0][n - 1] = g[n - 1][0] = 1
    for A in range(1, n - 1):
        g[A][A] = 1
    return g


def sig22_frame():
    rows = [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [-x1**2, 2 * x1 * x2, 1, 0],
        [2 * x1 * x2, -x2**2, 0, 1],
    ]
    gframe = [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]
    return FrameData.from_vector_fields([x1, x2, y1, y2], rows, gframe, p=2, name="sig22")


def heisenberg_semidirect():
    return SemidirectAlgebra(
        p=1,
        q=3,
        k_brackets={(1, 2): {0: 1}},
        action={(3, 1): {1: 1}, (3, 2): {2: 1}, (3, 0): {0: 2}},
        g_null_dual=((1,),),
        g_middle=((1, 0), (0, 1)),
        name="heisenberg-semidirecto",
    )


def filiform_semidirect():
    return SemidirectAlgebra(
        p=1,
        q=3,
        k_brackets={(1, 2): {0: 1}},
        action={(3, 2): {1: 1}},
        g_null_dual=((1,),),
        g_middle=((1, 0), (0, 1)),
        name="filiforme",
    )


class FrameDataTests(SimpleTestCase):
    def test_estructura_no_antisimetrica(self):
        r = [[[0] * 4 for _ in range(4)] for _ in range(4)]
        r[0][1][2] = 1
        with self.assertRaises(InputError):
            FrameData.from_structure(lorentz_gframe(4), r, p=1)

    def test_metrica_fuera_de_bloques(self):
        g = lorentz_gframe(4)
        g[0][1] = g[1][0] = 1
        with self.assertRaises(InputError):
            FrameData.from_structure(g, structure_from(4, {}), p=1)

    def test_abeliano_plano(self):
        F = FrameData.from_structure(lorentz_gframe(4), structure_from(4, {}), p=1)
        self.assertTrue(frame_connection(F).is_zero())
        self.assertTrue(frame_curvature(F).is_zero())
        self.assertTrue(all_passed(walker_frame_check(F)))
        self.assertTrue(all_passed(nrw_conditions(F)))

    def test_funciones_de_estructura_sig22(self):
        F = sig22_frame()
        # [e1, e1̄] = -2 x1 e1 + 2 x2 e2
        self.assertEqual(F.r(0, 0, 2), -2 * x1)
        self.assertEqual(F.r(1, 0, 2), 2 * x2)
        self.assertEqual(F.r(0, 2, 0), 2 * x1)


class WalkerFrameTests(SimpleTestCase):
    def test_sig22_walker_y_nrw(self):
        F = sig22_frame()
        self.assertTrue(all_passed(walker_frame_check(F)))
        self.assertTrue(connection_block_check(F).passed)
        self.assertTrue(torsion_check(F).passed)
        checks = nrw_conditions(F)
        self.assertTrue(all_passed(checks), [str(c) for c in failed(checks)])

    def test_sig22_no_cumple_contraccion_nula(self):
        checks = curvature_null_contraction(sig22_frame())
        self.assertFalse(checks[0].passed)
        self.assertEqual(checks[0].witness[-1], 2)

    def test_corchete_a_B_no_nulo(self):
        F = FrameData.from_structure(lorentz_gframe(4), structure_from(4, {(0, 1): {2: 1}}), p=1)
        checks = {check.name: check for check in walker_frame_check(F)}
        self.assertFalse(checks["[e_a, e_B] = 0"].passed)
        self.assertEqual(checks["[e_a, e_B] = 0"].witness, (2, 0, 1, 1))
        with self.assertRaises(PreconditionError) as ctx:
            nrw_conditions(F)
        self.assertEqual(ctx.exception.relation, "[e_a, e_B] = 0")

    def test_formula_de_ricci_nulo_dual(self):
        # H = v^2 + y^2: Walker con d_a H != 0, R_bc̄ = H_vv = 2
        H = v**2 + y**2
        F = FrameData.from_vector_fields(
            [v, y, u], [[1, 0, 0], [0, 1, 0], [-H, 0, 1]], lorentz_gframe(3), p=1
        )
        self.assertTrue(all_passed(walker_frame_check(F)))
        self.assertEqual(ricci_null_dual_formula(F, 0, 2), 2)
        self.assertEqual(frame_ricci(F)[0, 2], 2)
        checks = {check.name: check for check in nrw_conditions(F)}
        self.assertFalse(checks["R_bc̄ = 0 (fórmula)"].passed)
        self.assertFalse(checks["R_bc̄ = 0 (directo)"].passed)
        coordinate = Metric.from_matrix([v, y, u], [[0, 0, 1], [0, 1, 0], [1, 0, 2 * H]])
        self.assertEqual(ricci(coordinate)[0, 2], 2)


class SemidirectTests(SimpleTestCase):
    def test_heisenberg_valido_y_nrw(self):
        F = build_semidirect(heisenberg_semidirect())
        self.assertEqual((F.n, F.p), (4, 1))
        checks = nrw_conditions(F)
        self.assertTrue(all_passed(checks), [str(c) for c in failed(checks)])
        Ric = frame_ricci(F)
        for (i, j), value in Ric.nonzero_items():
            self.assertEqual((i, j), (3, 3))

    def test_abeliano_con_phi_nula(self):
        S = SemidirectAlgebra(p=1, q=3, g_null_dual=((1,),), g_middle=((1, 0), (0, -1)))
        F = build_semidirect(S)
        self.assertTrue(frame_curvature(F).is_zero())

    def test_derivacion_rota(self):
        S = SemidirectAlgebra(
            p=1,
            q=3,
            k_brackets={(1, 2): {0: 1}},
            action={(3, 1): {1: 1}},
            g_null_dual=((1,),),
            g_middle=((1, 0), (0, 1)),
        )
        with self.assertRaises(AlgebraIdentityError) as ctx:
            build_semidirect(S)
        self.assertEqual(ctx.exception.relation, DERIVATION_IDENTITY)

    def test_k_no_nilpotente_de_dos_pasos(self):
        S = SemidirectAlgebra(
            p=1, q=3, k_brackets={(1, 2): {1: 1}}, g_null_dual=((1,),), g_middle=((1, 0), (0, 1))
        )
        with self.assertRaises(AlgebraIdentityError):
            build_semidirect(S)


class RealizationTests(SimpleTestCase):
    def test_heisenberg_en_coordenadas(self):
        F = FrameData.from_structure(lorentz_gframe(3), structure_from(3, {(1, 2): {0: 1}}), p=1)
        realized = realize_nilpotent(F)
        x1_, x2_, x3_ = realized.coords
        self.assertEqual(realized.vector_fields[0], (1, 0, 0))
        self.assertEqual(realized.vector_fields[1], (-x3_, 1, 0))
        self.assertEqual(realized.vector_fields[2], (0, 0, 1))

    def test_no_nilpotente(self):
        F = build_semidirect(heisenberg_semidirect())
        with self.assertRaises(PreconditionError):
            realize_nilpotent(F)

    def test_consistencia_marco_coordenadas(self):
        F = build_semidirect(filiform_semidirect())
        realized = realize_nilpotent(F)
        n = F.n
        E = sympy.Matrix(realized.vector_fields)
        theta = coframe(realized)
        gframe = sympy.Matrix(F.gframe)
        g_coord = (theta.T * gframe * theta).applyfunc(normal)
        metric = Metric.from_matrix(realized.coords, g_coord.tolist())

        coordinate_ricci = ricci(metric).matrix()
        in_frame = (E * coordinate_ricci * E.T).applyfunc(normal)
        self.assertEqual(in_frame, frame_ricci(F).matrix())

        gamma = christoffel(metric)
        abstract = frame_connection(F)
        coords = realized.coords
        for k, i, j in itertools.product(range(n), repeat=3):
            value = 0
            for mu in range(n):
                term = sum(E[i, nu] * sympy.diff(E[j, mu], coords[nu]) for nu in range(n))
                term += sum(
                    E[i, nu] * E[j, lam] * gamma[mu, nu, lam] for nu in range(n) for lam in range(n)
                )
                value += theta[k, mu] * term
            self.assertEqual(normal(value), abstract[k, i, j], (k, i, j))


class WalkerCoordinateTests(SimpleTestCase):
    def test_ppwave(self):
        H = function_atom("H", ["y", "u"])
        g = Metric.from_matrix([v, y, u], [[0, 0, 1], [0, 1, 0], [1, 0, H]])
        self.assertTrue(all_passed(walker_check_coordinates(g, 1)))
        self.assertTrue(all_passed(curvature_null_contraction(g, [0])))

    def test_plana(self):
        g = Metric.from_matrix([v, y, u], [[0, 0, 1], [0, 1, 0], [1, 0, 0]])
        self.assertTrue(all_passed(walker_check_coordinates(g, 1)))
        self.assertTrue(all_passed(curvature_null_contraction(g, [0])))

    def test_g_depende_de_v(self):
        g = Metric.from_matrix([v, y, u], [[0, 0, 1], [0, 1 + v, 0], [1, 0, 0]])
        checks = {check.name: check for check in walker_check_coordinates(g, 1)}
        self.assertFalse(checks["d_a F = d_a G = 0"].passed)
        self.assertFalse(checks["span(d_a) paralelo"].passed)
