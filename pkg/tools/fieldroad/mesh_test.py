# Copyright 2026 The fieldroad Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================

import math

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np

from fieldroad import mesh as mesh_lib

UNIT = mesh_lib.Geometry(0.0, 1.0, 1.0)
FIELD = mesh_lib.Geometry(-40.0, 40.0, 20.0)


class GeometryTest(parameterized.TestCase):

  def test_derived_quantities(self):
    self.assertEqual(FIELD.road_measure, 80.0)
    self.assertEqual(FIELD.field_measure, 1600.0)
    self.assertEqual(FIELD.road_diameter, 80.0)
    self.assertAlmostEqual(FIELD.field_diameter, math.sqrt(6800.0))

  @parameterized.parameters(
      (1.0, 1.0, 1.0),
      (1.0, 0.0, 1.0),
      (0.0, 1.0, 0.0),
      (0.0, 1.0, -2.0),
      (0.0, math.inf, 1.0),
  )
  def test_rejects_bad_geometry(self, omega_min, omega_max, height):
    with self.assertRaises(mesh_lib.MeshError):
      mesh_lib.Geometry(omega_min, omega_max, height)


class BuildCartesianTest(parameterized.TestCase):

  def test_default_grid(self):
    coupled = mesh_lib.build_cartesian(FIELD, 160, 40)
    self.assertEqual(coupled.num_field_cells, 6400)
    self.assertEqual(coupled.num_road_cells, 160)
    np.testing.assert_allclose(coupled.cell_measures, 0.25, rtol=1e-14)
    np.testing.assert_allclose(coupled.road_measures, 0.5, rtol=1e-14)
    _, _, tau = coupled.interface_edges()
    np.testing.assert_allclose(tau, 2.0, rtol=1e-12)
    _, _, tau = coupled.interior_edges()
    np.testing.assert_allclose(tau, 1.0, rtol=1e-12)
    _, _, tau = coupled.road_edge_pairs()
    self.assertLen(tau, 159)
    np.testing.assert_allclose(tau, 2.0, rtol=1e-12)

  def test_single_cell(self):
    coupled = mesh_lib.build_cartesian(UNIT, 1, 1)
    self.assertEqual(coupled.num_field_cells, 1)
    self.assertEqual(coupled.num_road_cells, 1)
    self.assertEqual(coupled.cell_measures[0], 1.0)
    self.assertEqual(coupled.road_measures[0], 1.0)
    k, r, tau = coupled.interface_edges()
    self.assertEqual((k[0], r[0]), (0, 0))
    self.assertEqual(tau[0], 2.0)
    self.assertLen(coupled.interior_edges()[0], 0)
    self.assertEqual(coupled.num_road_edges, 0)

  def test_anisotropic_transmissivities(self):
    geometry = mesh_lib.Geometry(0.0, 6.0, 2.0)
    coupled = mesh_lib.build_cartesian(geometry, 3, 4)
    hx, hy = 2.0, 0.5
    for edge in coupled.field_edges():
      if edge.kind == mesh_lib.EdgeKind.INTERIOR:
        vertical = abs(coupled.cell_centers[edge.left, 1] -
                       coupled.cell_centers[edge.right, 1]) < 1e-12
        expected = hy / hx if vertical else hx / hy
        self.assertAlmostEqual(edge.transmissivity, expected, places=12)
      elif edge.kind == mesh_lib.EdgeKind.ROAD:
        self.assertAlmostEqual(edge.distance, hy / 2, places=12)
        self.assertAlmostEqual(edge.transmissivity, 2 * hx / hy, places=12)
    for road_edge in coupled.road_edges():
      self.assertEqual(road_edge.measure, 1.0)
      self.assertAlmostEqual(road_edge.transmissivity, 1 / hx, places=12)

  @parameterized.parameters((0, 1), (1, 0), (-3, 2), (2.5, 2))
  def test_rejects_bad_counts(self, nx, ny):
    with self.assertRaises(mesh_lib.MeshError):
      mesh_lib.build_cartesian(UNIT, nx, ny)

  @parameterized.parameters((1, 1), (4, 2), (7, 3), (160, 40))
  def test_admissible(self, nx, ny):
    coupled = mesh_lib.build_cartesian(FIELD, nx, ny)
    report = mesh_lib.verify_admissibility(coupled)
    self.assertTrue(report.is_admissible, report.lines())

  def test_invariants(self):
    coupled = mesh_lib.build_cartesian(FIELD, 12, 5)
    np.testing.assert_allclose(
        coupled.edge_transmissivities * coupled.edge_distances,
        coupled.edge_measures,
        rtol=1e-15)
    np.testing.assert_allclose(
        coupled.road_edge_transmissivities * coupled.road_edge_distances,
        coupled.road_edge_measures,
        rtol=1e-15)
    self.assertAlmostEqual(
        math.fsum(coupled.cell_measures), FIELD.field_measure, delta=1e-9)
    self.assertAlmostEqual(
        math.fsum(coupled.road_measures), FIELD.road_measure, delta=1e-12)

    road_kind = np.flatnonzero(coupled.edge_kinds == mesh_lib.EdgeKind.ROAD)
    self.assertLen(road_kind, coupled.num_road_cells)
    for r in range(coupled.num_road_cells):
      edge = coupled.field_edge_of_road_cell(r)
      self.assertEqual(coupled.road_cell_of_field_edge(edge), r)
      self.assertEqual(coupled.edge_measures[edge], coupled.road_measures[r])

  def test_arrays_are_read_only(self):
    coupled = mesh_lib.build_cartesian(UNIT, 2, 2)
    with self.assertRaises(ValueError):
      coupled.cell_measures[0] = 3.0


class FromPolygonsTest(absltest.TestCase):

  def test_edge_shared_by_three_cells(self):
    nodes = [(0, 0), (1, 0), (1, 1), (0, 1), (2, 0)]
    cells = [(0, 1, 2), (0, 1, 3), (1, 0, 4)]
    centers = [(0.6, 0.3), (0.3, 0.3), (0.9, -0.1)]
    with self.assertRaises(mesh_lib.MeshError):
      mesh_lib.from_polygons(UNIT, nodes, cells, centers, [])

  def test_center_count_mismatch(self):
    with self.assertRaises(mesh_lib.MeshError):
      mesh_lib.from_polygons(UNIT, [(0, 0), (1, 0), (1, 1), (0, 1)],
                             [(0, 1, 2, 3)], [], [(0, 1, 0.5)])

  def test_unmatched_road_cell_stays_uncoupled(self):
    coupled = mesh_lib.from_polygons(UNIT, [(0, 0), (1, 0), (1, 1), (0, 1)],
                                     [(0, 1, 2, 3)], [(0.5, 0.5)],
                                     [(0.0, 0.5, 0.25)])
    self.assertIsNone(coupled.field_edge_of_road_cell(0))
    report = mesh_lib.verify_admissibility(coupled)
    self.assertIn(0, report.entities('road_cell'))
    checks = {v.check for v in report.violations}
    self.assertIn('coupling', checks)
    self.assertIn('uncoupled_bottom_edge', checks)
    self.assertIn('road_measure', checks)


def _with_centers(coupled, centers):
  road = np.column_stack([coupled.road_bounds, coupled.road_centers])
  return mesh_lib.from_polygons(coupled.geometry, coupled.nodes,
                                coupled.cell_nodes, centers, road)


class VerifyAdmissibilityTest(absltest.TestCase):

  def setUp(self):
    super().setUp()
    self.coupled = mesh_lib.build_cartesian(mesh_lib.Geometry(0, 4, 4), 4, 4)
    # Row 1, column 1: an interior cell with four interior edges.
    self.cell = 5

  def _adjacent_edges(self, coupled, horizontal_only=False):
    edges = set()
    for edge in coupled.field_edges():
      if self.cell not in (edge.left, edge.right):
        continue
      a, b = coupled.edge_nodes[edge.id]
      is_horizontal = coupled.nodes[a, 1] == coupled.nodes[b, 1]
      if horizontal_only and not is_horizontal:
        continue
      edges.add(edge.id)
    return edges

  def test_perturbed_center_flags_adjacent_edges(self):
    centers = np.array(self.coupled.cell_centers)
    centers[self.cell] += (0.1, 0.1)
    perturbed = _with_centers(self.coupled, centers)
    report = mesh_lib.verify_admissibility(perturbed)
    self.assertEqual(
        set(report.entities('field_edge')), self._adjacent_edges(perturbed))
    self.assertLen(report.entities('field_edge'), 4)
    self.assertEqual({v.check for v in report.violations}, {'orthogonality'})

  def test_tangential_offset_flags_horizontal_edges(self):
    centers = np.array(self.coupled.cell_centers)
    centers[self.cell, 0] += 0.1
    perturbed = _with_centers(self.coupled, centers)
    report = mesh_lib.verify_admissibility(perturbed)
    expected = self._adjacent_edges(perturbed, horizontal_only=True)
    self.assertLen(expected, 2)
    self.assertEqual(set(report.entities('field_edge')), expected)
    for violation in report.violations:
      self.assertAlmostEqual(violation.defect, math.atan2(0.1, 1.0), places=9)

  def test_missing_cell_breaks_global_measure(self):
    coupled = self.coupled
    keep = [k for k in range(coupled.num_field_cells) if k != 15]
    road = np.column_stack([coupled.road_bounds, coupled.road_centers])
    holed = mesh_lib.from_polygons(coupled.geometry, coupled.nodes,
                                   [coupled.cell_nodes[k] for k in keep],
                                   coupled.cell_centers[keep], road)
    report = mesh_lib.verify_admissibility(holed)
    self.assertEqual([(v.entity, v.check) for v in report.violations],
                     [('mesh', 'field_measure')])
    self.assertAlmostEqual(report.violations[0].defect, 1.0)

  def test_center_outside_cell(self):
    centers = np.array(self.coupled.cell_centers)
    centers[self.cell] += (0.0, 0.7)
    report = mesh_lib.verify_admissibility(
        _with_centers(self.coupled, centers))
    self.assertIn(self.cell, report.entities('field_cell'))

  def test_zero_length_road_edge(self):
    # Nodes 1 and 2 coincide, so edge 1 is a bottom edge of length zero.
    nodes = [(0, 0), (1, 0), (1, 0), (1, 1), (0, 1)]
    road = [(0.0, 1.0, 0.5), (1.0, 1.0, 1.0)]
    degenerate = mesh_lib.from_polygons(UNIT, nodes, [(0, 1, 2, 3, 4)],
                                        [(0.5, 0.5)], road)
    self.assertEqual(degenerate.road_cell_of_field_edge(1), 1)
    report = mesh_lib.verify_admissibility(degenerate)
    edge_checks = {
        v.check for v in report.violations
        if v.entity == 'field_edge' and v.entity_id == 1
    }
    self.assertIn('degenerate_edge', edge_checks)
    self.assertIn('edge_measure', edge_checks)
    self.assertIn('edge_distance', edge_checks)
    self.assertNotIn('road_center_on_edge', edge_checks)
    for violation in report.violations:
      if violation.check == 'road_center_on_edge':
        self.assertFalse(math.isnan(violation.defect))

  def test_segment_distance_of_zero_length_segment(self):
    start = np.array([[1.0, 0.0], [0.0, 0.0]])
    end = np.array([[1.0, 0.0], [2.0, 0.0]])
    points = np.array([[1.0, 0.5], [1.0, 0.25]])
    np.testing.assert_allclose(
        mesh_lib._segment_distance(points, start, end), [0.5, 0.25])

  def test_report_is_sorted(self):
    centers = np.array(self.coupled.cell_centers)
    centers[self.cell] += (0.1, 0.1)
    centers[0] += (0.1, 0.1)
    report = mesh_lib.verify_admissibility(
        _with_centers(self.coupled, centers))
    keys = [(v.entity, v.entity_id) for v in report.violations]
    order = [(mesh_lib._ENTITY_ORDER[e], i) for e, i in keys]
    self.assertEqual(order, sorted(order))


if __name__ == '__main__':
  absltest.main()
