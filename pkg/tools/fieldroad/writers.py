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
"""Writers for entropy series, snapshots, rate curves and run reports.

Floats are printed with 17 significant digits, so every written value reads
back to the same double.
"""

import csv
import logging
import math
import pathlib

from typing import Any, Dict, NamedTuple, Sequence, Tuple, Union

import jinja2
import yaml

from fieldroad import decay
from fieldroad import entropy as entropy_lib
from fieldroad import mesh as mesh_lib
from fieldroad import scheme

_LOGGER = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]

VTK_LEGACY = 'vtk-legacy'
CSV = 'csv'
SNAPSHOT_FORMATS = (VTK_LEGACY, CSV)

SERIES_HEADER = ('step', 'time', 'entropy', 'dissipation', 'mass', 'min_entry',
                 'entropy_ratio')
RATE_CURVE_HEADER = ('param', 'lambda_num', 'fit_residual')

_VTK_TEMPLATE = 'templates/snapshot.vtk.jinja'
_VTK_TRIANGLE = 5
_VTK_POLYGON = 7
_VTK_QUAD = 9

_JINJA_ENV = jinja2.Environment(
    trim_blocks=True,
    lstrip_blocks=True,
    loader=jinja2.FileSystemLoader(str(pathlib.Path(__file__).parent)))


def format_float(value: float) -> str:
  return format(float(value), '.17g')


def _writer(stream):
  return csv.writer(stream, lineterminator='\n')


def write_series(series: decay.EntropySeries, path: PathLike):
  """Writes `series` as CSV, one row per record."""
  path = pathlib.Path(path)
  ratios = series.entropy_ratios()
  with path.open('w', newline='') as f:
    writer = _writer(f)
    writer.writerow(SERIES_HEADER)
    for record, ratio in zip(series, ratios):
      writer.writerow([str(record.step)] + [
          format_float(x) for x in (record.time, record.entropy,
                                    record.dissipation, record.mass,
                                    record.min_entry, ratio)
      ])
  _LOGGER.info('Wrote %d series records to %s.', len(series), path)


def read_series(path: PathLike) -> decay.EntropySeries:
  """Reads a series written by `write_series`.

  Raises:
    ValueError: if the header or a row is malformed.
  """
  path = pathlib.Path(path)
  with path.open(newline='') as f:
    rows = list(csv.reader(f))
  if not rows or tuple(rows[0]) != SERIES_HEADER:
    raise ValueError(f'{path}: expected the header {",".join(SERIES_HEADER)}.')
  series = decay.EntropySeries()
  for number, row in enumerate(rows[1:], start=2):
    if len(row) != len(SERIES_HEADER):
      raise ValueError(f'{path}:{number}: expected {len(SERIES_HEADER)} '
                       f'columns, got {len(row)}.')
    series.append(
        decay.EntropyRecord(int(row[0]), *(float(x) for x in row[1:6])))
  return series


class _VtkCell(NamedTuple):
  vertices: Tuple[int, ...]
  vtk_type: int
  value: str

  @property
  def size(self) -> int:
    return len(self.vertices) + 1


def _vtk_type(count: int) -> int:
  if count == 3:
    return _VTK_TRIANGLE
  if count == 4:
    return _VTK_QUAD
  return _VTK_POLYGON


def render_vtk(state: scheme.State, coupled: mesh_lib.CoupledMesh,
               title: str = 'fieldroad snapshot') -> str:
  """The legacy ASCII VTK unstructured grid with cell data `v`."""
  points = [(format_float(x), format_float(y)) for x, y in coupled.nodes]
  cells = [
      _VtkCell(polygon, _vtk_type(len(polygon)), format_float(value))
      for polygon, value in zip(coupled.cell_nodes, state.v)
  ]
  template = _JINJA_ENV.get_template(_VTK_TEMPLATE)
  return template.render(title=title, points=points, cells=cells)


def road_path(path: PathLike) -> pathlib.Path:
  """The companion road file of a csv snapshot."""
  path = pathlib.Path(path)
  return path.with_name(f'{path.stem}_road{path.suffix or ".csv"}')


def write_snapshot(state: scheme.State, coupled: mesh_lib.CoupledMesh,
                   path: PathLike, fmt: str = VTK_LEGACY):
  """Writes the field (and for csv, the road) values of `state`.

  Args:
    state: The state.
    coupled: Its mesh.
    path: Output file. For `csv` the road values go to `road_path(path)`.
    fmt: One of `SNAPSHOT_FORMATS`.

  Raises:
    ValueError: for an unknown format.
  """
  path = pathlib.Path(path)
  if fmt == VTK_LEGACY:
    title = f'fieldroad step {state.step} time {format_float(state.time)}'
    path.write_text(render_vtk(state, coupled, title))
  elif fmt == CSV:
    with path.open('w', newline='') as f:
      writer = _writer(f)
      writer.writerow(('x', 'y', 'v'))
      for (x, y), v in zip(coupled.cell_centers, state.v):
        writer.writerow([format_float(x), format_float(y), format_float(v)])
    with road_path(path).open('w', newline='') as f:
      writer = _writer(f)
      writer.writerow(('x', 'u', 'v_trace'))
      for x, u, trace in zip(coupled.road_centers, state.u, state.v_trace):
        writer.writerow([format_float(x), format_float(u), format_float(trace)])
  else:
    raise ValueError(f'Unknown snapshot format {fmt!r}, expected one of '
                     f'{SNAPSHOT_FORMATS}.')
  _LOGGER.info('Wrote the step %d snapshot to %s.', state.step, path)


def write_rate_curve(points: Sequence[Any], path: PathLike):
  """Writes `(value, rate, fit_residual)` rows; failed points stay blank."""
  path = pathlib.Path(path)
  with path.open('w', newline='') as f:
    writer = _writer(f)
    writer.writerow(RATE_CURVE_HEADER)
    for point in points:
      writer.writerow([
          format_float(point.value),
          '' if point.rate is None else format_float(point.rate),
          '' if point.fit_residual is None else format_float(
              point.fit_residual)
      ])
  _LOGGER.info('Wrote a rate curve of %d points to %s.', len(points), path)


def _clean(value: float):
  value = float(value)
  return value if math.isfinite(value) else None


def build_report(result) -> Dict[str, Any]:
  """The YAML-ready summary of an `experiments.RunResult`."""
  spec = result.spec
  params = spec.params
  terms = entropy_lib.rate_terms(params, spec.geometry)
  report = {
      'test_case': spec.name,
      'case_id': spec.case_id,
      'grid': {
          'nx': spec.nx,
          'ny': spec.ny
      },
      'params': {
          'd': params.d,
          'D': params.D,
          'mu': params.mu,
          'nu': params.nu,
          'dt': params.dt
      },
      'steady_state': {
          'v_inf': result.steady.v_inf,
          'u_inf': result.steady.u_inf,
          'mass': result.steady.mass
      },
      'theoretical_rate': {
          'lambda_2': result.theoretical_rate,
          'field_term': terms.field,
          'road_term': terms.road,
          'exchange_term': terms.exchange
      },
      'steps': result.final_state.step,
      'final_time': result.final_state.time,
      'hit_step_cap': result.hit_step_cap,
      'initial_entropy': result.series[0].entropy,
      'continuous_initial_entropy': result.continuous_entropy,
      'audit': {
          k: _clean(v) if isinstance(v, float) else v
          for k, v in result.audit._asdict().items()
      },
  }
  if result.rate is None:
    report['measured_rate'] = {'error': result.rate_error}
  else:
    rate = result.rate
    report['measured_rate'] = {
        'lambda_num': rate.rate,
        'slope': rate.slope,
        'discrete_rate': rate.discrete_rate,
        'fit_residual': rate.fit_residual,
        'window_start': rate.window_start,
        'window_end': rate.window_end,
        'num_points': rate.num_points,
        'reference_entropy': rate.reference_entropy,
        'above_lambda_2': rate.rate >= result.theoretical_rate,
    }
  report['under_lambda_2_envelope'] = decay.under_envelope(
      result.series, result.theoretical_rate, params.dt)
  return report


def write_report(report: Dict[str, Any], path: PathLike):
  path = pathlib.Path(path)
  with path.open('w') as f:
    yaml.safe_dump(report, f, default_flow_style=False, sort_keys=False)
  _LOGGER.info('Wrote the run report to %s.', path)
