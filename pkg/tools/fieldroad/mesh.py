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
r"""Coupled meshes of the field $\Omega = \omega \times (0, L)$ and the road.

A `CoupledMesh` holds a polygonal mesh of the field, an interval mesh of the
road $\omega$ and the coupling that identifies every road cell with one
bottom edge of the field mesh. Geometric quantities are stored as read-only
numpy arrays (structure of arrays) so the scheme can assemble its operator
with vectorized index arithmetic. Record views (`FieldCell`, `FieldEdge`,
`RoadCell`, `RoadEdge`) are available for code that prefers to walk the mesh
entity by entity.

Edges are never stored in the mesh file; they are derived here from the cell
polygons, and so are measures, distances and transmissivities.
"""

import dataclasses
import enum
import functools
import logging
import math

from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

_LOGGER = logging.getLogger(__name__)

# Angular tolerance (radians) of the orthogonality condition.
ORTHOGONALITY_TOL = 1e-10
# Length tolerance for point and extent coincidence.
COINCIDENCE_TOL = 1e-9
# Relative tolerance of the global measure checks.
MEASURE_RTOL = 1e-12

NO_NEIGHBOR = -1


class MeshError(ValueError):
  """Raised when a mesh cannot be constructed from the given data."""


class AdmissibilityError(MeshError):
  """Raised when a mesh is rejected by `verify_admissibility`.

  Attributes:
    report: The `AdmissibilityReport` listing every violation.
  """

  def __init__(self, report: 'AdmissibilityReport'):
    self.report = report
    super().__init__('Mesh is not admissible:\n' + '\n'.join(report.lines()))


@dataclasses.dataclass(frozen=True)
class Geometry:
  """The road interval `(omega_min, omega_max)` and the field height."""
  omega_min: float
  omega_max: float
  height: float

  def __post_init__(self):
    for name in ('omega_min', 'omega_max', 'height'):
      value = getattr(self, name)
      if not math.isfinite(value):
        raise MeshError(f'Geometry.{name} must be finite, got {value}.')
    if not self.omega_max > self.omega_min:
      raise MeshError('Geometry needs omega_max > omega_min, got '
                      f'({self.omega_min}, {self.omega_max}).')
    if not self.height > 0:
      raise MeshError(f'Geometry.height must be positive, got {self.height}.')

  @property
  def road_measure(self) -> float:
    return self.omega_max - self.omega_min

  @property
  def field_measure(self) -> float:
    return self.road_measure * self.height

  @property
  def road_diameter(self) -> float:
    return self.road_measure

  @property
  def field_diameter(self) -> float:
    return math.hypot(self.road_measure, self.height)


class EdgeKind(enum.IntEnum):
  """Partition of the field edges."""
  INTERIOR = 0
  ROAD = 1
  EXTERIOR = 2


class FieldCell(NamedTuple):
  id: int
  center: Tuple[float, float]
  measure: float


class FieldEdge(NamedTuple):
  """A field edge `K|L`, `K|K*` or an exterior edge of `K`.

  `right` is a field cell index for interior edges, a road cell index for
  road edges and `None` for exterior edges.
  """
  id: int
  kind: EdgeKind
  measure: float
  distance: float
  left: int
  right: Optional[int]

  @property
  def transmissivity(self) -> float:
    return self.measure / self.distance


class RoadCell(NamedTuple):
  id: int
  center: float
  measure: float
  bounds: Tuple[float, float]


class RoadEdge(NamedTuple):
  id: int
  left: int
  right: int
  measure: float
  distance: float

  @property
  def transmissivity(self) -> float:
    return self.measure / self.distance


def polygon_area(points: Sequence[Tuple[float, float]]) -> float:
  """Signed shoelace area, positive for counter-clockwise vertex order."""
  total = 0.0
  count = len(points)
  for i in range(count):
    x0, y0 = points[i]
    x1, y1 = points[(i + 1) % count]
    total += x0 * y1 - x1 * y0
  return 0.5 * total


def _readonly(array: np.ndarray) -> np.ndarray:
  array.setflags(write=False)
  return array


@dataclasses.dataclass(frozen=True, eq=False)
class CoupledMesh:
  """A field mesh, a road mesh and the coupling between them.

  Attributes:
    geometry: The `Geometry` the meshes discretize.
    nodes: `(n_nodes, 2)` node coordinates.
    cell_nodes: Vertex indices of every field cell polygon.
    cell_centers: `(n_cells, 2)` cell centers `x_K`.
    cell_measures: Cell areas `m_K`.
    edge_kinds: `EdgeKind` value of every field edge.
    edge_nodes: `(n_edges, 2)` end node indices of every field edge.
    edge_left: The cell `K` owning each edge.
    edge_right: The neighbor cell `L`, the road cell `K*`, or `NO_NEIGHBOR`.
    edge_measures: Edge lengths `m_sigma`.
    edge_distances: Distances `d_sigma`.
    road_centers: Abscissae of the road cell centers `x_{K*}`.
    road_bounds: `(n_road, 2)` end points of every road cell.
    road_measures: Road cell lengths `m_{K*}`.
    road_edge_cells: `(n_road_edges, 2)` road cells `K*|L*`.
    road_edge_measures: `m_{sigma*}`, equal to 1 for the one dimensional road.
    road_edge_distances: `d_{sigma*}`.
    road_coupling: For every road cell, the field edge it coincides with, or
      `NO_NEIGHBOR` when it was not matched.
  """
  geometry: Geometry
  nodes: np.ndarray
  cell_nodes: Tuple[Tuple[int, ...], ...]
  cell_centers: np.ndarray
  cell_measures: np.ndarray
  edge_kinds: np.ndarray
  edge_nodes: np.ndarray
  edge_left: np.ndarray
  edge_right: np.ndarray
  edge_measures: np.ndarray
  edge_distances: np.ndarray
  road_centers: np.ndarray
  road_bounds: np.ndarray
  road_measures: np.ndarray
  road_edge_cells: np.ndarray
  road_edge_measures: np.ndarray
  road_edge_distances: np.ndarray
  road_coupling: np.ndarray

  @property
  def num_field_cells(self) -> int:
    return len(self.cell_nodes)

  @property
  def num_road_cells(self) -> int:
    return len(self.road_centers)

  @property
  def num_field_edges(self) -> int:
    return len(self.edge_kinds)

  @property
  def num_road_edges(self) -> int:
    return len(self.road_edge_cells)

  @property
  def num_unknowns(self) -> int:
    return self.num_field_cells + 2 * self.num_road_cells

  @functools.cached_property
  def edge_transmissivities(self) -> np.ndarray:
    return _readonly(self.edge_measures / self.edge_distances)

  @functools.cached_property
  def road_edge_transmissivities(self) -> np.ndarray:
    return _readonly(self.road_edge_measures / self.road_edge_distances)

  @functools.cached_property
  def cell_bounds(self) -> np.ndarray:
    """`(n_cells, 4)` bounding boxes `(x_min, x_max, y_min, y_max)`."""
    bounds = np.empty((self.num_field_cells, 4))
    for k, polygon in enumerate(self.cell_nodes):
      xy = self.nodes[list(polygon)]
      bounds[k] = (xy[:, 0].min(), xy[:, 0].max(), xy[:, 1].min(),
                   xy[:, 1].max())
    return _readonly(bounds)

  def interior_edges(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns `(K, L, tau)` arrays over the interior edges `K|L`."""
    mask = self.edge_kinds == EdgeKind.INTERIOR
    return (self.edge_left[mask], self.edge_right[mask],
            self.edge_transmissivities[mask])

  def interface_edges(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns `(K, K*, tau)` arrays over road edges, in road cell order.

    Raises:
      MeshError: if some road cell is not coupled to a field edge.
    """
    if np.any(self.road_coupling == NO_NEIGHBOR):
      raise MeshError('Some road cells are not coupled to a field edge.')
    edges = self.road_coupling
    return (self.edge_left[edges], self.edge_right[edges],
            self.edge_transmissivities[edges])

  def road_edge_pairs(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns `(K*, L*, tau*)` arrays over the road edges."""
    return (self.road_edge_cells[:, 0], self.road_edge_cells[:, 1],
            self.road_edge_transmissivities)

  def field_cells(self) -> Iterator[FieldCell]:
    for k in range(self.num_field_cells):
      x, y = self.cell_centers[k]
      yield FieldCell(k, (float(x), float(y)), float(self.cell_measures[k]))

  def field_edges(self) -> Iterator[FieldEdge]:
    for e in range(self.num_field_edges):
      kind = EdgeKind(int(self.edge_kinds[e]))
      right = int(self.edge_right[e])
      yield FieldEdge(e, kind, float(self.edge_measures[e]),
                      float(self.edge_distances[e]), int(self.edge_left[e]),
                      None if right == NO_NEIGHBOR else right)

  def road_cells(self) -> Iterator[RoadCell]:
    for r in range(self.num_road_cells):
      left, right = self.road_bounds[r]
      yield RoadCell(r, float(self.road_centers[r]),
                     float(self.road_measures[r]), (float(left), float(right)))

  def road_edges(self) -> Iterator[RoadEdge]:
    for s in range(self.num_road_edges):
      left, right = self.road_edge_cells[s]
      yield RoadEdge(s, int(left), int(right),
                     float(self.road_edge_measures[s]),
                     float(self.road_edge_distances[s]))

  def field_edge_of_road_cell(self, road_cell: int) -> Optional[int]:
    edge = int(self.road_coupling[road_cell])
    return None if edge == NO_NEIGHBOR else edge

  def road_cell_of_field_edge(self, edge: int) -> Optional[int]:
    if self.edge_kinds[edge] != EdgeKind.ROAD:
      return None
    return int(self.edge_right[edge])

  def cell_polygon(self, cell: int) -> List[Tuple[float, float]]:
    return [(float(x), float(y)) for x, y in self.nodes[list(self.cell_nodes[cell])]]


def from_polygons(geometry: Geometry, nodes, cells: Sequence[Sequence[int]],
                  centers, road_cells) -> CoupledMesh:
  """Builds a `CoupledMesh` from polygons, centers and road intervals.

  No admissibility check is done here, see `verify_admissibility`. Road cells
  that do not coincide with a bottom field edge are left uncoupled.

  Args:
    geometry: The domain.
    nodes: `(n_nodes, 2)` node coordinates.
    cells: For each field cell, the indices of its polygon vertices.
    centers: `(n_cells, 2)` cell centers.
    road_cells: `(n_road, 3)` rows `(left, right, center)`.

  Returns:
    The coupled mesh.

  Raises:
    MeshError: on inconsistent array shapes, bad vertex indices or edges
      shared by more than two cells.
  """
  nodes = np.array(nodes, dtype=np.float64).reshape(-1, 2)
  centers = np.array(centers, dtype=np.float64).reshape(-1, 2)
  road = np.array(road_cells, dtype=np.float64).reshape(-1, 3)
  cells = tuple(tuple(int(i) for i in polygon) for polygon in cells)
  if len(centers) != len(cells):
    raise MeshError(f'Got {len(cells)} cells but {len(centers)} centers.')
  for k, polygon in enumerate(cells):
    if len(polygon) < 3:
      raise MeshError(f'Cell {k} has fewer than 3 vertices.')
    if min(polygon) < 0 or max(polygon) >= len(nodes):
      raise MeshError(f'Cell {k} refers to a node that does not exist.')

  measures = np.array([
      abs(polygon_area([tuple(nodes[i]) for i in polygon])) for polygon in cells
  ])

  edge_index = {}
  edge_nodes = []
  edge_left = []
  edge_right = []
  for k, polygon in enumerate(cells):
    count = len(polygon)
    for i in range(count):
      a, b = polygon[i], polygon[(i + 1) % count]
      key = (a, b) if a < b else (b, a)
      e = edge_index.get(key)
      if e is None:
        edge_index[key] = len(edge_nodes)
        edge_nodes.append((a, b))
        edge_left.append(k)
        edge_right.append(NO_NEIGHBOR)
      elif edge_right[e] == NO_NEIGHBOR and edge_left[e] != k:
        edge_right[e] = k
      else:
        raise MeshError(f'Edge {key} is shared by more than two cells.')

  edge_nodes = np.array(edge_nodes, dtype=np.int64).reshape(-1, 2)
  edge_left = np.array(edge_left, dtype=np.int64)
  edge_right = np.array(edge_right, dtype=np.int64)
  kinds = np.where(edge_right == NO_NEIGHBOR, EdgeKind.EXTERIOR,
                   EdgeKind.INTERIOR).astype(np.int8)

  start = nodes[edge_nodes[:, 0]]
  end = nodes[edge_nodes[:, 1]]
  tangent = end - start
  edge_measures = np.hypot(tangent[:, 0], tangent[:, 1])

  road_coupling = np.full(len(road), NO_NEIGHBOR, dtype=np.int64)
  road_mid = 0.5 * (road[:, 0] + road[:, 1])
  bottom = np.flatnonzero((kinds == EdgeKind.EXTERIOR) &
                          (np.abs(start[:, 1]) <= COINCIDENCE_TOL) &
                          (np.abs(end[:, 1]) <= COINCIDENCE_TOL))
  for e in bottom:
    if not len(road):
      break
    xa, xb = sorted((start[e, 0], end[e, 0]))
    mid = 0.5 * (xa + xb)
    r = int(np.argmin(np.abs(road_mid - mid)))
    if (abs(road_mid[r] - mid) <= COINCIDENCE_TOL and
        abs(road[r, 0] - xa) <= COINCIDENCE_TOL and
        abs(road[r, 1] - xb) <= COINCIDENCE_TOL and
        road_coupling[r] == NO_NEIGHBOR):
      road_coupling[r] = e
      kinds[e] = EdgeKind.ROAD
      edge_right[e] = r

  left_centers = centers[edge_left]
  interior = kinds == EdgeKind.INTERIOR
  distances = np.empty(len(kinds))
  offset = centers[edge_right[interior]] - left_centers[interior]
  distances[interior] = np.hypot(offset[:, 0], offset[:, 1])
  # Boundary edges: distance from x_K to the line carrying the edge.
  boundary = ~interior
  rel = left_centers[boundary] - start[boundary]
  cross = tangent[boundary, 0] * rel[:, 1] - tangent[boundary, 1] * rel[:, 0]
  distances[boundary] = np.abs(cross) / edge_measures[boundary]

  order = np.argsort(road[:, 0], kind='stable')
  road_pairs = [
      (order[i], order[i + 1])
      for i in range(len(order) - 1)
      if abs(road[order[i], 1] - road[order[i + 1], 0]) <= COINCIDENCE_TOL
  ]
  road_edge_cells = np.array(road_pairs, dtype=np.int64).reshape(-1, 2)
  road_edge_distances = np.abs(road[road_edge_cells[:, 1], 2] -
                               road[road_edge_cells[:, 0], 2])

  mesh = CoupledMesh(
      geometry=geometry,
      nodes=_readonly(nodes),
      cell_nodes=cells,
      cell_centers=_readonly(centers),
      cell_measures=_readonly(measures),
      edge_kinds=_readonly(kinds),
      edge_nodes=_readonly(edge_nodes),
      edge_left=_readonly(edge_left),
      edge_right=_readonly(edge_right),
      edge_measures=_readonly(edge_measures),
      edge_distances=_readonly(distances),
      road_centers=_readonly(road[:, 2].copy()),
      road_bounds=_readonly(road[:, :2].copy()),
      road_measures=_readonly(road[:, 1] - road[:, 0]),
      road_edge_cells=_readonly(road_edge_cells),
      road_edge_measures=_readonly(np.ones(len(road_edge_cells))),
      road_edge_distances=_readonly(road_edge_distances),
      road_coupling=_readonly(road_coupling),
  )
  _LOGGER.debug('Built mesh: %d field cells, %d field edges, %d road cells.',
                mesh.num_field_cells, mesh.num_field_edges,
                mesh.num_road_cells)
  return mesh


def build_cartesian(geometry: Geometry, nx: int, ny: int) -> CoupledMesh:
  """Builds the uniform `nx` by `ny` grid of the field and its road trace.

  Cells are numbered row by row from the road upwards, their vertices are
  listed counter-clockwise and their centers are the rectangle centroids.
  The road cells are the traces of the bottom row.

  Args:
    geometry: The domain.
    nx: Number of cells along the road.
    ny: Number of cells across the field.

  Returns:
    An admissible, compatible `CoupledMesh`.

  Raises:
    MeshError: if `nx` or `ny` is smaller than 1.
  """
  for name, count in (('nx', nx), ('ny', ny)):
    if int(count) != count or count < 1:
      raise MeshError(f'{name} must be a positive integer, got {count}.')
  nx, ny = int(nx), int(ny)
  xs = np.linspace(geometry.omega_min, geometry.omega_max, nx + 1)
  ys = np.linspace(0.0, geometry.height, ny + 1)
  gx, gy = np.meshgrid(xs, ys)
  nodes = np.column_stack([gx.ravel(), gy.ravel()])

  row = nx + 1
  i, j = np.meshgrid(np.arange(nx), np.arange(ny))
  i, j = i.ravel(), j.ravel()
  first = j * row + i
  cells = np.column_stack([first, first + 1, first + row + 1, first + row])

  x_mid = 0.5 * (xs[:-1] + xs[1:])
  y_mid = 0.5 * (ys[:-1] + ys[1:])
  centers = np.column_stack([x_mid[i], y_mid[j]])
  road_cells = np.column_stack([xs[:-1], xs[1:], x_mid])
  return from_polygons(geometry, nodes, cells.tolist(), centers, road_cells)


class Violation(NamedTuple):
  """One violated mesh invariant.

  Attributes:
    entity: One of 'mesh', 'field_cell', 'field_edge', 'road_cell',
      'road_edge'.
    entity_id: Index of the offending entity, -1 for global checks.
    check: Short name of the invariant.
    defect: The measured defect (an angle, a distance or a measure gap).
  """
  entity: str
  entity_id: int
  check: str
  defect: float

  def format(self) -> str:
    where = self.entity if self.entity_id < 0 else (
        f'{self.entity} {self.entity_id}')
    return f'{where}: {self.check} (defect {self.defect:.3e})'


_ENTITY_ORDER = {
    'mesh': 0,
    'field_cell': 1,
    'field_edge': 2,
    'road_cell': 3,
    'road_edge': 4
}


@dataclasses.dataclass(frozen=True)
class AdmissibilityReport:
  violations: Tuple[Violation, ...] = ()

  @property
  def is_admissible(self) -> bool:
    return not self.violations

  def entities(self, entity: str) -> List[int]:
    return sorted({v.entity_id for v in self.violations if v.entity == entity})

  def lines(self) -> List[str]:
    return [v.format() for v in self.violations]


def _orthogonality_defect(tangent: np.ndarray, offset: np.ndarray) -> np.ndarray:
  """Angle between `offset` and the normal of `tangent`, row-wise."""
  dot = np.abs(np.sum(tangent * offset, axis=1))
  cross = np.abs(tangent[:, 0] * offset[:, 1] - tangent[:, 1] * offset[:, 0])
  return np.arctan2(dot, cross)


def verify_admissibility(mesh: CoupledMesh) -> AdmissibilityReport:
  """Lists every admissibility or compatibility violation of `mesh`.

  Verification never raises; an empty report means the mesh is admissible
  and compatible with its road.
  """
  found = []

  field_total = math.fsum(mesh.cell_measures)
  field_gap = abs(field_total - mesh.geometry.field_measure)
  if field_gap > MEASURE_RTOL * mesh.geometry.field_measure:
    found.append(Violation('mesh', -1, 'field_measure', field_gap))
  road_total = math.fsum(mesh.road_measures)
  road_gap = abs(road_total - mesh.geometry.road_measure)
  if road_gap > MEASURE_RTOL * mesh.geometry.road_measure:
    found.append(Violation('mesh', -1, 'road_measure', road_gap))

  for k in np.flatnonzero(~(mesh.cell_measures > 0)):
    found.append(Violation('field_cell', int(k), 'cell_measure',
                           float(mesh.cell_measures[k])))
  for k in range(mesh.num_field_cells):
    depth = _center_depth(mesh, k)
    if not depth > 0:
      found.append(Violation('field_cell', k, 'center_inside', -depth))

  for e in np.flatnonzero(~(mesh.edge_measures > 0)):
    found.append(Violation('field_edge', int(e), 'edge_measure',
                           float(mesh.edge_measures[e])))
  for e in np.flatnonzero(~(mesh.edge_measures > COINCIDENCE_TOL)):
    found.append(Violation('field_edge', int(e), 'degenerate_edge',
                           float(mesh.edge_measures[e])))
  for e in np.flatnonzero(~(mesh.edge_distances > 0)):
    found.append(Violation('field_edge', int(e), 'edge_distance',
                           float(mesh.edge_distances[e])))

  start = mesh.nodes[mesh.edge_nodes[:, 0]]
  end = mesh.nodes[mesh.edge_nodes[:, 1]]
  tangent = end - start

  interior = np.flatnonzero(mesh.edge_kinds == EdgeKind.INTERIOR)
  offset = (mesh.cell_centers[mesh.edge_right[interior]] -
            mesh.cell_centers[mesh.edge_left[interior]])
  angles = _orthogonality_defect(tangent[interior], offset)
  for e, angle in zip(interior, angles):
    if angle > ORTHOGONALITY_TOL:
      found.append(Violation('field_edge', int(e), 'orthogonality',
                             float(angle)))

  road_edges = np.flatnonzero(mesh.edge_kinds == EdgeKind.ROAD)
  road_points = np.column_stack([
      mesh.road_centers[mesh.edge_right[road_edges]],
      np.zeros(len(road_edges))
  ])
  offset = road_points - mesh.cell_centers[mesh.edge_left[road_edges]]
  angles = _orthogonality_defect(tangent[road_edges], offset)
  gaps = _segment_distance(road_points, start[road_edges], end[road_edges])
  for e, angle, gap in zip(road_edges, angles, gaps):
    if not gap <= COINCIDENCE_TOL:
      found.append(Violation('field_edge', int(e), 'road_center_on_edge',
                             float(gap)))
    if angle > ORTHOGONALITY_TOL:
      found.append(Violation('field_edge', int(e), 'road_orthogonality',
                             float(angle)))

  # Bottom boundary edges must all carry a road cell.
  bottom = np.flatnonzero((mesh.edge_kinds == EdgeKind.EXTERIOR) &
                          (np.abs(start[:, 1]) <= COINCIDENCE_TOL) &
                          (np.abs(end[:, 1]) <= COINCIDENCE_TOL))
  for e in bottom:
    found.append(Violation('field_edge', int(e), 'uncoupled_bottom_edge',
                           float(mesh.edge_measures[e])))

  for r in range(mesh.num_road_cells):
    left, right = mesh.road_bounds[r]
    if not mesh.road_measures[r] > 0:
      found.append(Violation('road_cell', r, 'cell_measure',
                             float(mesh.road_measures[r])))
    center = mesh.road_centers[r]
    if not left < center < right:
      found.append(Violation('road_cell', r, 'center_inside',
                             float(max(left - center, center - right))))
    edge = mesh.field_edge_of_road_cell(r)
    if edge is None or mesh.road_cell_of_field_edge(edge) != r:
      found.append(Violation('road_cell', r, 'coupling',
                             float(mesh.road_measures[r])))

  taus = mesh.road_edge_transmissivities
  for s in np.flatnonzero(~(taus > 0)):
    found.append(Violation('road_edge', int(s), 'transmissivity',
                           float(taus[s])))

  found.sort(key=lambda v: (_ENTITY_ORDER[v.entity], v.entity_id, v.check))
  report = AdmissibilityReport(tuple(found))
  if found:
    _LOGGER.info('Mesh has %d admissibility violations.', len(found))
  return report


def _center_depth(mesh: CoupledMesh, cell: int) -> float:
  """Signed distance from the center of a convex cell to its boundary."""
  polygon = mesh.nodes[list(mesh.cell_nodes[cell])]
  orientation = 1.0 if polygon_area(polygon.tolist()) >= 0 else -1.0
  tangent = np.roll(polygon, -1, axis=0) - polygon
  rel = mesh.cell_centers[cell] - polygon
  cross = tangent[:, 0] * rel[:, 1] - tangent[:, 1] * rel[:, 0]
  return float(np.min(orientation * cross / np.hypot(tangent[:, 0],
                                                      tangent[:, 1])))


def _segment_distance(points: np.ndarray, start: np.ndarray,
                      end: np.ndarray) -> np.ndarray:
  """Distance from each point to its segment; zero-length segments are points."""
  tangent = end - start
  length2 = np.sum(tangent * tangent, axis=1)
  along = np.sum((points - start) * tangent, axis=1)
  t = np.divide(along, length2, out=np.zeros_like(along), where=length2 > 0)
  t = np.clip(t, 0.0, 1.0)
  nearest = start + t[:, None] * tangent
  gap = points - nearest
  return np.hypot(gap[:, 0], gap[:, 1])
