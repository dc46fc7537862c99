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
"""Piecewise-constant initial data described by axis-aligned boxes.

A painter is a list of boxes (field) or intervals (road) with a constant value
each; the data is the sum of the box indicators times their values. Cell
averages of painted data are computed exactly from overlap areas, so the
discrete mass of a painter whose boxes lie on grid lines equals its integral.
"""

import dataclasses
import math

from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from fieldroad import mesh as mesh_lib

Point = Tuple[float, float]

# Sub-sampling per cell direction when averaging general functions.
SUBSAMPLES = 4


class InitialDataError(ValueError):
  """Raised for initial data that cannot start a run."""


def _check_finite(owner: str, **values: float):
  for name, value in values.items():
    if not math.isfinite(value):
      raise InitialDataError(f'{owner}.{name} must be finite, got {value}.')


@dataclasses.dataclass(frozen=True)
class FieldBox:
  """The value `value` on `[x_min, x_max] x [y_min, y_max]`."""
  x_min: float
  x_max: float
  y_min: float
  y_max: float
  value: float

  def __post_init__(self):
    _check_finite('FieldBox', **dataclasses.asdict(self))
    if not (self.x_min < self.x_max and self.y_min < self.y_max):
      raise InitialDataError(f'Empty box: {self}.')

  @property
  def area(self) -> float:
    return (self.x_max - self.x_min) * (self.y_max - self.y_min)

  def clip(self, geometry: mesh_lib.Geometry) -> 'FieldBox':
    return dataclasses.replace(
        self,
        x_min=max(self.x_min, geometry.omega_min),
        x_max=min(self.x_max, geometry.omega_max),
        y_min=max(self.y_min, 0.0),
        y_max=min(self.y_max, geometry.height))


@dataclasses.dataclass(frozen=True)
class RoadInterval:
  """The value `value` on `[x_min, x_max]`."""
  x_min: float
  x_max: float
  value: float

  def __post_init__(self):
    _check_finite('RoadInterval', **dataclasses.asdict(self))
    if not self.x_min < self.x_max:
      raise InitialDataError(f'Empty interval: {self}.')

  @property
  def length(self) -> float:
    return self.x_max - self.x_min


def _clip_half_plane(polygon: List[Point], axis: int, bound: float,
                     keep_below: bool) -> List[Point]:
  """Clips a polygon against `p[axis] <= bound` (or `>=`)."""

  def inside(p):
    return p[axis] <= bound if keep_below else p[axis] >= bound

  def cross(p, q):
    t = (bound - p[axis]) / (q[axis] - p[axis])
    point = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
    point[axis] = bound
    return tuple(point)

  result = []
  for i, current in enumerate(polygon):
    previous = polygon[i - 1]
    if inside(current):
      if not inside(previous):
        result.append(cross(previous, current))
      result.append(current)
    elif inside(previous):
      result.append(cross(previous, current))
  return result


def clip_polygon(polygon: Sequence[Point], box: FieldBox) -> List[Point]:
  """Sutherland-Hodgman clipping of a convex polygon by `box`."""
  clipped = list(polygon)
  for axis, bound, keep_below in ((0, box.x_min, False), (0, box.x_max, True),
                                  (1, box.y_min, False), (1, box.y_max, True)):
    if not clipped:
      break
    clipped = _clip_half_plane(clipped, axis, bound, keep_below)
  return clipped


class FieldPainter:
  """Field data painted with `FieldBox`es. Overlapping boxes add up."""

  def __init__(self, boxes: Sequence[FieldBox] = ()):
    self.boxes = tuple(boxes)

  def __repr__(self):
    return f'FieldPainter({list(self.boxes)!r})'

  def __eq__(self, other):
    return isinstance(other, FieldPainter) and self.boxes == other.boxes

  def __call__(self, x, y) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    out = np.zeros(x.shape)
    for box in self.boxes:
      inside = ((x >= box.x_min) & (x <= box.x_max) & (y >= box.y_min) &
                (y <= box.y_max))
      out += np.where(inside, box.value, 0.0)
    return out

  def cell_averages(self, coupled: mesh_lib.CoupledMesh) -> np.ndarray:
    """Exact averages of the painted data over every field cell."""
    averages = np.zeros(coupled.num_field_cells)
    bounds = coupled.cell_bounds
    for box in self.boxes:
      candidates = np.flatnonzero((bounds[:, 0] < box.x_max) &
                                  (bounds[:, 1] > box.x_min) &
                                  (bounds[:, 2] < box.y_max) &
                                  (bounds[:, 3] > box.y_min))
      for k in candidates:
        x_min, x_max, y_min, y_max = bounds[k]
        if (box.x_min <= x_min and x_max <= box.x_max and
            box.y_min <= y_min and y_max <= box.y_max):
          averages[k] += box.value
          continue
        clipped = clip_polygon(coupled.cell_polygon(k), box)
        if len(clipped) >= 3:
          overlap = abs(mesh_lib.polygon_area(clipped))
          averages[k] += box.value * (overlap / coupled.cell_measures[k])
    return averages

  def integral(self, geometry: mesh_lib.Geometry) -> float:
    """Integral of the painted data over the field."""
    total = []
    for box in self.boxes:
      clipped = box.clip(geometry)
      if clipped.x_min < clipped.x_max and clipped.y_min < clipped.y_max:
        total.append(clipped.value * clipped.area)
    return math.fsum(total)

  def squared_deviation_integral(self, geometry: mesh_lib.Geometry,
                                 level: float) -> float:
    """Integral of `(v0 - level)**2` over the field.

    Requires pairwise disjoint boxes.

    Raises:
      InitialDataError: if two boxes overlap.
    """
    clipped = [box.clip(geometry) for box in self.boxes]
    clipped = [b for b in clipped if b.x_min < b.x_max and b.y_min < b.y_max]
    for i, a in enumerate(clipped):
      for b in clipped[i + 1:]:
        if (a.x_min < b.x_max and b.x_min < a.x_max and a.y_min < b.y_max and
            b.y_min < a.y_max):
          raise InitialDataError(f'Boxes {a} and {b} overlap.')
    covered = math.fsum(b.area for b in clipped)
    terms = [b.area * (b.value - level)**2 for b in clipped]
    terms.append((geometry.field_measure - covered) * level**2)
    return math.fsum(terms)


class RoadPainter:
  """Road data painted with `RoadInterval`s. Overlapping intervals add up."""

  def __init__(self, intervals: Sequence[RoadInterval] = ()):
    self.intervals = tuple(intervals)

  def __repr__(self):
    return f'RoadPainter({list(self.intervals)!r})'

  def __eq__(self, other):
    return isinstance(other, RoadPainter) and self.intervals == other.intervals

  def __call__(self, x) -> np.ndarray:
    x = np.asarray(x, float)
    out = np.zeros(x.shape)
    for interval in self.intervals:
      inside = (x >= interval.x_min) & (x <= interval.x_max)
      out += np.where(inside, interval.value, 0.0)
    return out

  def cell_averages(self, coupled: mesh_lib.CoupledMesh) -> np.ndarray:
    averages = np.zeros(coupled.num_road_cells)
    left = coupled.road_bounds[:, 0]
    right = coupled.road_bounds[:, 1]
    for interval in self.intervals:
      overlap = (np.minimum(right, interval.x_max) -
                 np.maximum(left, interval.x_min))
      full = (interval.x_min <= left) & (right <= interval.x_max)
      partial = ~full & (overlap > 0)
      averages[full] += interval.value
      averages[partial] += (
          interval.value * overlap[partial] / coupled.road_measures[partial])
    return averages

  def integral(self, geometry: mesh_lib.Geometry) -> float:
    total = []
    for interval in self.intervals:
      length = (min(interval.x_max, geometry.omega_max) -
                max(interval.x_min, geometry.omega_min))
      if length > 0:
        total.append(interval.value * length)
    return math.fsum(total)

  def squared_deviation_integral(self, geometry: mesh_lib.Geometry,
                                 level: float) -> float:
    """Integral of `(u0 - level)**2` over the road, for disjoint intervals."""
    pieces = []
    for interval in self.intervals:
      x_min = max(interval.x_min, geometry.omega_min)
      x_max = min(interval.x_max, geometry.omega_max)
      if x_min < x_max:
        pieces.append((x_min, x_max, interval.value))
    pieces.sort()
    for (_, a_max, _), (b_min, _, _) in zip(pieces, pieces[1:]):
      if b_min < a_max:
        raise InitialDataError('Road intervals overlap.')
    covered = math.fsum(x_max - x_min for x_min, x_max, _ in pieces)
    terms = [(x_max - x_min) * (value - level)**2
             for x_min, x_max, value in pieces]
    terms.append((geometry.road_measure - covered) * level**2)
    return math.fsum(terms)


FieldData = Union[FieldPainter, Callable, float]
RoadData = Union[RoadPainter, Callable, float]


def field_averages(data: FieldData,
                   coupled: mesh_lib.CoupledMesh) -> np.ndarray:
  """Cell averages of field data given as a painter, a function or a scalar.

  Functions are called with numpy arrays `(x, y)` and averaged with a
  `SUBSAMPLES` x `SUBSAMPLES` midpoint rule over each cell's bounding box,
  keeping the sample points that fall inside the cell.
  """
  if isinstance(data, FieldPainter):
    return data.cell_averages(coupled)
  if not callable(data):
    return np.full(coupled.num_field_cells, float(data))

  offsets = (np.arange(SUBSAMPLES) + 0.5) / SUBSAMPLES
  averages = np.empty(coupled.num_field_cells)
  for k in range(coupled.num_field_cells):
    x_min, x_max, y_min, y_max = coupled.cell_bounds[k]
    gx, gy = np.meshgrid(x_min + offsets * (x_max - x_min),
                         y_min + offsets * (y_max - y_min))
    gx, gy = gx.ravel(), gy.ravel()
    inside = _inside_convex(coupled.nodes[list(coupled.cell_nodes[k])], gx, gy)
    if not inside.any():
      gx, gy = coupled.cell_centers[k, :1], coupled.cell_centers[k, 1:]
    else:
      gx, gy = gx[inside], gy[inside]
    values = np.broadcast_to(np.asarray(data(gx, gy), float), gx.shape)
    averages[k] = values.mean()
  return averages


def road_averages(data: RoadData, coupled: mesh_lib.CoupledMesh) -> np.ndarray:
  """Cell averages of road data given as a painter, a function or a scalar."""
  if isinstance(data, RoadPainter):
    return data.cell_averages(coupled)
  if not callable(data):
    return np.full(coupled.num_road_cells, float(data))
  offsets = (np.arange(SUBSAMPLES) + 0.5) / SUBSAMPLES
  left = coupled.road_bounds[:, :1]
  samples = left + offsets[None, :] * coupled.road_measures[:, None]
  values = np.broadcast_to(np.asarray(data(samples), float), samples.shape)
  return values.mean(axis=1)


def _inside_convex(polygon: np.ndarray, x: np.ndarray,
                   y: np.ndarray) -> np.ndarray:
  orientation = 1.0 if mesh_lib.polygon_area(polygon.tolist()) >= 0 else -1.0
  inside = np.ones(x.shape, dtype=bool)
  for (x0, y0), (x1, y1) in zip(polygon, np.roll(polygon, -1, axis=0)):
    cross = (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0)
    inside &= orientation * cross >= 0
  return inside
