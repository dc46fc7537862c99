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
r"""Command line of the field-road simulator.

Install the fieldroad package:
$ python3 -m pip install -U [--user] .

Usage:
$ python3 -m fieldroad run [--output_dir=DIR] [--snapshot_format=csv] run.cfg
$ python3 -m fieldroad sweep [--workers=4] sweep.cfg
$ python3 -m fieldroad verify-mesh mesh.txt
$ python3 -m fieldroad rate series.csv
$ python3 -m fieldroad steady run.cfg

`run` writes `series.csv`, one snapshot per reached snapshot time,
`report.yaml` and the mesh file `mesh.txt` into the output directory. `sweep`
writes `rate_curve.csv`. Library logs are enabled with
`--logger_levels=fieldroad:DEBUG --alsologtostderr`.

Exit codes: 0 on success, 1 when an audit, a solve or a validation fails, 2
on usage errors.
"""

import pathlib

from typing import Callable, Dict, List

from absl import app
from absl import flags

from fieldroad import config as config_lib
from fieldroad import decay
from fieldroad import entropy as entropy_lib
from fieldroad import experiments
from fieldroad import mesh as mesh_lib
from fieldroad import mesh_io
from fieldroad import scheme
from fieldroad import writers

flags.DEFINE_string(
    'output_dir', None,
    'Directory for run and sweep artifacts. Overrides the config.')
flags.DEFINE_enum('snapshot_format', None, list(writers.SNAPSHOT_FORMATS),
                  'Snapshot file format. Overrides the config.')
flags.DEFINE_integer(
    'workers', 1, 'Worker processes used by `sweep`.', lower_bound=1)
flags.DEFINE_integer(
    'record_every',
    None,
    'Record one step out of this many in the series. Overrides the config.',
    lower_bound=1)

FLAGS = flags.FLAGS

SERIES_FILE = 'series.csv'
REPORT_FILE = 'report.yaml'
MESH_FILE = 'mesh.txt'
RATE_CURVE_FILE = 'rate_curve.csv'

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _read(path: str) -> str:
  try:
    return pathlib.Path(path).read_text()
  except OSError as e:
    raise app.UsageError(f'Cannot read {path}: {e}', EXIT_USAGE) from e


def _load_config(path: str) -> config_lib.RunConfig:
  """Parses the config at `path` and applies the flag overrides."""
  config = config_lib.parse_config(_read(path))
  spec = config.spec
  if FLAGS.record_every is not None:
    spec = spec.replace(record_every=FLAGS.record_every)
  sweep = config.sweep
  if sweep is not None:
    sweep = experiments.SweepSpec(spec, sweep.parameter, sweep.values,
                                  sweep.nx, sweep.ny)
  return config_lib.RunConfig(
      spec=spec,
      sweep=sweep,
      output_dir=FLAGS.output_dir or config.output_dir,
      snapshot_format=FLAGS.snapshot_format or config.snapshot_format)


def _output_dir(config: config_lib.RunConfig) -> pathlib.Path:
  out = pathlib.Path(config.output_dir)
  out.mkdir(parents=True, exist_ok=True)
  return out


def _snapshot_name(time: float, fmt: str) -> str:
  suffix = 'vtk' if fmt == writers.VTK_LEGACY else 'csv'
  return f'snapshot_t{time:g}.{suffix}'


def run_command(path: str) -> int:
  config = _load_config(path)
  try:
    result = experiments.run(config.spec)
  except experiments.AuditError as e:
    print(f'Audit failure: {e}')
    return EXIT_FAILURE
  except scheme.SolverError as e:
    print(f'Solver failure: {e}')
    return EXIT_FAILURE
  out = _output_dir(config)
  writers.write_series(result.series, out / SERIES_FILE)
  for time, state in result.snapshots.items():
    writers.write_snapshot(state, result.mesh,
                           out / _snapshot_name(time, config.snapshot_format),
                           config.snapshot_format)
  writers.write_report(writers.build_report(result), out / REPORT_FILE)
  (out / MESH_FILE).write_text(mesh_io.export_mesh(result.mesh))

  print(f'{config.spec.name}: {result.final_state.step} steps, '
        f'v_inf={writers.format_float(result.steady.v_inf)} '
        f'u_inf={writers.format_float(result.steady.u_inf)}')
  if result.rate is None:
    print(f'lambda_num: not available ({result.rate_error})')
  else:
    print(f'lambda_num={writers.format_float(result.rate.rate)} '
          f'fit_residual={writers.format_float(result.rate.fit_residual)}')
  return EXIT_OK


def sweep_command(path: str) -> int:
  config = _load_config(path)
  if config.sweep is None:
    print(f'{path}: a sweep needs sweep_param and sweep_values.')
    return EXIT_FAILURE
  points = experiments.sweep(config.sweep, workers=FLAGS.workers)
  out = _output_dir(config)
  writers.write_rate_curve(points, out / RATE_CURVE_FILE)
  failed = [p for p in points if p.error is not None]
  for point in points:
    shown = (writers.format_float(point.rate)
             if point.rate is not None else f'failed ({point.error})')
    print(f'{config.sweep.parameter}={point.value:g}: {shown}')
  return EXIT_FAILURE if failed else EXIT_OK


def verify_mesh_command(path: str) -> int:
  coupled = mesh_io.read_mesh(_read(path))
  report = mesh_lib.verify_admissibility(coupled)
  if report.is_admissible:
    print(f'{path}: admissible ({coupled.num_field_cells} field cells, '
          f'{coupled.num_road_cells} road cells).')
    return EXIT_OK
  print(f'{path}: {len(report.violations)} violations')
  for line in report.lines():
    print(f'  {line}')
  return EXIT_FAILURE


def infer_dt(series: decay.EntropySeries) -> float:
  """The time step of a series, from any record past step 0."""
  for record in series:
    if record.step > 0:
      return record.time / record.step
  raise ValueError('The series has no record past step 0.')


def rate_command(path: str) -> int:
  series = writers.read_series(path)
  estimate = decay.estimate_decay_rate(series, infer_dt(series))
  print(f'lambda_num={writers.format_float(estimate.rate)} '
        f'discrete_rate={writers.format_float(estimate.discrete_rate)} '
        f'fit_residual={writers.format_float(estimate.fit_residual)} '
        f'window=[{writers.format_float(estimate.window_start)}, '
        f'{writers.format_float(estimate.window_end)}] '
        f'points={estimate.num_points}')
  return EXIT_OK


def steady_command(path: str) -> int:
  spec = _load_config(path).spec
  mass = spec.v0.integral(spec.geometry) + spec.u0.integral(spec.geometry)
  steady = entropy_lib.steady_state(mass, spec.geometry, spec.params.mu,
                                    spec.params.nu)
  rate = entropy_lib.theoretical_rate(spec.params, spec.geometry)
  print(f'v_inf={writers.format_float(steady.v_inf)} '
        f'u_inf={writers.format_float(steady.u_inf)} '
        f'lambda_2={writers.format_float(rate)}')
  return EXIT_OK


COMMANDS: Dict[str, Callable[[str], int]] = {
    'run': run_command,
    'sweep': sweep_command,
    'verify-mesh': verify_mesh_command,
    'rate': rate_command,
    'steady': steady_command,
}


def main(argv: List[str]) -> int:
  if len(argv) < 2:
    raise app.UsageError(
        f'Missing command, expected one of: {", ".join(COMMANDS)}.',
        EXIT_USAGE)
  command = COMMANDS.get(argv[1])
  if command is None:
    raise app.UsageError(
        f'Unknown command {argv[1]!r}, expected one of: '
        f'{", ".join(COMMANDS)}.', EXIT_USAGE)
  if len(argv) != 3:
    raise app.UsageError(f'`{argv[1]}` takes exactly one file argument.',
                         EXIT_USAGE)
  # Every library validation error is a ValueError.
  try:
    return command(argv[2])
  except ValueError as e:
    print(f'Error: {e}')
    return EXIT_FAILURE


def run_main():
  """Runs the program and exits with the command's exit code."""
  app.run(main)
