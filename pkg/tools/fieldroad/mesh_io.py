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
"""Reads and writes the plain-text `fieldroad-mesh` file format.

A mesh file looks like:

```
fieldroad-mesh 1
geometry <omega_min> <omega_max> <height>
nodes <n>
<index> <x> <y>
...
cells <n>
<index> <vertex count> <vertex indices...> <center x> <center y>
...
roadcells <n>
<index> <left x> <right x> <center x>
...
```

Blank lines and lines starting with `#` are ignored. Indices must be
consecutive from 0. Edges, measures and transmissivities are derived from the
nodes by `mesh.from_polygons`, never stored.
"""

import logging

from typing import Iterator, List, Tuple

from fieldroad import mesh as mesh_lib

_LOGGER = logging.getLogger(__name__)

MAGIC = 'fieldroad-mesh'
VERSION = 1


class MeshFormatError(ValueError):
  """Raised when a mesh file cannot be parsed.

  Attributes:
    line: 1-based line number of the offending line, or 0 at end of file.
  """

  def __init__(self, line: int, message: str):
    self.line = line
    where = f'line {line}' if line else 'end of file'
    super().__init__(f'{where}: {message}')


class CouplingError(mesh_lib.MeshError):
  """Raised when road cells do not coincide with bottom field edges.

  Attributes:
    road_cells: Indices of the unmatched road cells.
  """

  def __init__(self, road_cells: List[int]):
    self.road_cells = road_cells
    super().__init__(
        'Road cells not matching any bottom field edge: '
        f'{", ".join(str(r) for r in road_cells)}')


class _Lines:
  """Iterator over the significant lines of a mesh file."""

  def __init__(self, text: str):
    self._lines: Iterator[Tuple[int, List[str]]] = (
        (number, line.split())
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith('#'))
    self.number = 0

  def next(self, what: str) -> List[str]:
    try:
      self.number, tokens = next(self._lines)
    except StopIteration:
      raise MeshFormatError(0, f'expected {what}') from None
    return tokens

  def floats(self, tokens: List[str]) -> List[float]:
    try:
      return [float(token) for token in tokens]
    except ValueError as e:
      raise MeshFormatError(self.number, str(e)) from None

  def ints(self, tokens: List[str]) -> List[int]:
    try:
      return [int(token) for token in tokens]
    except ValueError as e:
      raise MeshFormatError(self.number, str(e)) from None

  def header(self, keyword: str) -> int:
    tokens = self.next(f'"{keyword} <n>"')
    if len(tokens) != 2 or tokens[0] != keyword:
      raise MeshFormatError(self.number, f'expected "{keyword} <n>"')
    (count,) = self.ints(tokens[1:])
    if count < 0:
      raise MeshFormatError(self.number, f'negative {keyword} count')
    return count

  def indexed(self, expected: int, what: str) -> List[str]:
    tokens = self.next(f'{what} {expected}')
    (index,) = self.ints(tokens[:1])
    if index != expected:
      raise MeshFormatError(
          self.number, f'expected {what} index {expected}, got {index}')
    return tokens[1:]


def read_mesh(text: str) -> mesh_lib.CoupledMesh:
  """Parses a mesh file without checking admissibility.

  Args:
    text: The mesh file content.

  Returns:
    The parsed `CoupledMesh`. Road cells that do not match a bottom edge are
    left uncoupled.

  Raises:
    MeshFormatError: if the text does not follow the format.
    MeshError: if the parsed data cannot form a mesh.
  """
  lines = _Lines(text)
  tokens = lines.next('the format header')
  if tokens != [MAGIC, str(VERSION)]:
    raise MeshFormatError(lines.number, f'expected "{MAGIC} {VERSION}"')

  tokens = lines.next('"geometry <omega_min> <omega_max> <height>"')
  if len(tokens) != 4 or tokens[0] != 'geometry':
    raise MeshFormatError(lines.number,
                          'expected "geometry <omega_min> <omega_max> <height>"')
  geometry = mesh_lib.Geometry(*lines.floats(tokens[1:]))

  nodes = []
  for i in range(lines.header('nodes')):
    row = lines.indexed(i, 'node')
    if len(row) != 2:
      raise MeshFormatError(lines.number, 'a node needs "<index> <x> <y>"')
    nodes.append(lines.floats(row))

  cells = []
  centers = []
  for k in range(lines.header('cells')):
    row = lines.indexed(k, 'cell')
    if not row:
      raise MeshFormatError(lines.number, 'missing vertex count')
    (count,) = lines.ints(row[:1])
    if count < 3 or len(row) != count + 3:
      raise MeshFormatError(
          lines.number,
          'a cell needs "<index> <count> <vertices...> <center x> <center y>"')
    cells.append(lines.ints(row[1:count + 1]))
    centers.append(lines.floats(row[count + 1:]))

  road = []
  for r in range(lines.header('roadcells')):
    row = lines.indexed(r, 'road cell')
    if len(row) != 3:
      raise MeshFormatError(
          lines.number, 'a road cell needs "<index> <left> <right> <center>"')
    road.append(lines.floats(row))

  try:
    tokens = lines.next('end of file')
  except MeshFormatError:
    pass
  else:
    raise MeshFormatError(lines.number, f'unexpected content {tokens[0]!r}')

  return mesh_lib.from_polygons(geometry, nodes, cells, centers, road)


def import_mesh(text: str) -> mesh_lib.CoupledMesh:
  """Parses a mesh file and rejects incompatible or non-admissible meshes.

  Args:
    text: The mesh file content.

  Returns:
    An admissible `CoupledMesh`.

  Raises:
    MeshFormatError: on parse failures.
    CouplingError: if some road cell coincides with no bottom field edge.
    mesh.AdmissibilityError: if `verify_admissibility` reports violations.
  """
  coupled = read_mesh(text)
  unmatched = [
      r for r in range(coupled.num_road_cells)
      if coupled.field_edge_of_road_cell(r) is None
  ]
  if unmatched:
    raise CouplingError(unmatched)
  report = mesh_lib.verify_admissibility(coupled)
  if not report.is_admissible:
    raise mesh_lib.AdmissibilityError(report)
  _LOGGER.info('Imported mesh with %d field cells and %d road cells.',
               coupled.num_field_cells, coupled.num_road_cells)
  return coupled


def _fmt(value: float) -> str:
  return format(float(value), '.17g')


def export_mesh(coupled: mesh_lib.CoupledMesh) -> str:
  """Writes `coupled` in the mesh file format read by `import_mesh`."""
  geometry = coupled.geometry
  lines = [
      f'{MAGIC} {VERSION}',
      'geometry ' + ' '.join(
          _fmt(x) for x in (geometry.omega_min, geometry.omega_max,
                            geometry.height)),
      f'nodes {len(coupled.nodes)}',
  ]
  lines.extend(f'{i} {_fmt(x)} {_fmt(y)}' for i, (x, y) in enumerate(coupled.nodes))
  lines.append(f'cells {coupled.num_field_cells}')
  for k, polygon in enumerate(coupled.cell_nodes):
    cx, cy = coupled.cell_centers[k]
    vertices = ' '.join(str(i) for i in polygon)
    lines.append(f'{k} {len(polygon)} {vertices} {_fmt(cx)} {_fmt(cy)}')
  lines.append(f'roadcells {coupled.num_road_cells}')
  for r in range(coupled.num_road_cells):
    left, right = coupled.road_bounds[r]
    lines.append(
        f'{r} {_fmt(left)} {_fmt(right)} {_fmt(coupled.road_centers[r])}')
  return '\n'.join(lines) + '\n'
