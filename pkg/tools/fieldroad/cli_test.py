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

import contextlib
import io
import os
import textwrap
from unittest import mock

from absl import app
from absl.testing import absltest
from absl.testing import flagsaver
from absl.testing import parameterized

from fieldroad import cli
from fieldroad import decay
from fieldroad import mesh as mesh_lib
from fieldroad import mesh_io
from fieldroad import scheme
from fieldroad import writers

# Case 1 on a small domain whose grid lines contain the box edges.
SMALL_RUN = textwrap.dedent("""\
    testcase = 1
    omega_min = -5
    omega_max = 5
    height = 10
    nx = 8
    ny = 8
    snapshot_times = 1, 2
    """)


def _main(*args):
  stdout = io.StringIO()
  with contextlib.redirect_stdout(stdout):
    code = cli.main(['fieldroad', *args])
  return code, stdout.getvalue()


class CliTest(parameterized.TestCase):

  def setUp(self):
    super().setUp()
    self.out_dir = self.create_tempdir('out').full_path

  def _config(self, text, name='run.cfg'):
    return self.create_tempfile(name, content=text).full_path

  def test_steady(self):
    code, output = _main('steady', self._config('testcase = 1\n'))
    self.assertEqual(code, cli.EXIT_OK)
    self.assertStartsWith(output, 'v_inf=1.25 u_inf=6.25 lambda_2=')

  @parameterized.parameters(2, 3, 4)
  def test_steady_shared_by_builtin_cases(self, case_id):
    _, output = _main('steady', self._config(f'testcase = {case_id}\n'))
    self.assertStartsWith(output, 'v_inf=1.25 u_inf=6.25 ')

  def test_run(self):
    with flagsaver.flagsaver(output_dir=self.out_dir):
      code, output = _main('run', self._config(SMALL_RUN))
    self.assertEqual(code, cli.EXIT_OK)
    self.assertIn('lambda_num=', output)
    self.assertCountEqual(
        os.listdir(self.out_dir), [
            cli.SERIES_FILE, cli.REPORT_FILE, cli.MESH_FILE,
            'snapshot_t1.vtk', 'snapshot_t2.vtk'
        ])
    series = writers.read_series(os.path.join(self.out_dir, cli.SERIES_FILE))
    self.assertLessEqual(series.entropy_ratios()[-1], 1e-5)

    code, output = _main('verify-mesh',
                         os.path.join(self.out_dir, cli.MESH_FILE))
    self.assertEqual(code, cli.EXIT_OK)
    self.assertIn('admissible (64 field cells, 8 road cells)', output)

    code, output = _main('rate', os.path.join(self.out_dir, cli.SERIES_FILE))
    self.assertEqual(code, cli.EXIT_OK)
    self.assertStartsWith(output, 'lambda_num=')

  def test_run_solver_failure(self):
    failure = scheme.SolverError('residual 1e-3 above contract')
    with flagsaver.flagsaver(output_dir=self.out_dir), mock.patch.object(
        scheme, 'step', side_effect=failure):
      code, output = _main('run', self._config(SMALL_RUN))
    self.assertEqual(code, cli.EXIT_FAILURE)
    self.assertStartsWith(output, 'Solver failure: residual 1e-3')
    self.assertEmpty(os.listdir(self.out_dir))

  def test_run_flag_overrides(self):
    with flagsaver.flagsaver(
        output_dir=self.out_dir, snapshot_format='csv', record_every=5):
      code, _ = _main('run', self._config(SMALL_RUN))
    self.assertEqual(code, cli.EXIT_OK)
    self.assertTrue(
        os.path.exists(os.path.join(self.out_dir, 'snapshot_t1_road.csv')))
    series = writers.read_series(os.path.join(self.out_dir, cli.SERIES_FILE))
    self.assertEqual(list(series.steps[:3]), [0, 1, 5])

  def test_rate(self):
    series = decay.EntropySeries(
        decay.EntropyRecord(n, 0.1 * n, 1.005**-n, 0.0, 1.0, 0.0)
        for n in range(3000))
    path = self.create_tempfile('series.csv').full_path
    writers.write_series(series, path)
    estimate = decay.estimate_decay_rate(
        writers.read_series(path), cli.infer_dt(series))
    code, output = _main('rate', path)
    self.assertEqual(code, cli.EXIT_OK)
    self.assertStartsWith(
        output, f'lambda_num={writers.format_float(estimate.rate)} ')
    self.assertIn(f'points={estimate.num_points}', output)

  def test_rate_too_short(self):
    series = decay.EntropySeries(
        decay.EntropyRecord(n, 0.1 * n, 2.0**-n, 0.0, 1.0, 0.0)
        for n in range(5))
    path = self.create_tempfile('series.csv').full_path
    writers.write_series(series, path)
    code, output = _main('rate', path)
    self.assertEqual(code, cli.EXIT_FAILURE)
    self.assertStartsWith(output, 'Error: ')

  def test_infer_dt(self):
    series = decay.EntropySeries(
        [decay.EntropyRecord(0, 0.0, 1, 0, 1, 0),
         decay.EntropyRecord(4, 2.0, 1, 0, 1, 0)])
    self.assertEqual(cli.infer_dt(series), 0.5)
    with self.assertRaises(ValueError):
      cli.infer_dt(decay.EntropySeries(series[:1]))

  def test_verify_mesh_reports_violations(self):
    coupled = mesh_lib.from_polygons(
        mesh_lib.Geometry(0.0, 2.0, 1.0),
        [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)],
        [[0, 1, 4, 3], [1, 2, 5, 4]], [(0.5, 0.5), (1.5, 0.6)],
        [(0.0, 1.0, 0.5), (1.0, 2.0, 1.5)])
    path = self.create_tempfile(
        'mesh.txt', content=mesh_io.export_mesh(coupled)).full_path
    code, output = _main('verify-mesh', path)
    self.assertEqual(code, cli.EXIT_FAILURE)
    self.assertIn('1 violations', output)
    self.assertIn('orthogonality', output)

  def test_verify_mesh_format_error(self):
    path = self.create_tempfile('mesh.txt', content='not a mesh\n').full_path
    code, output = _main('verify-mesh', path)
    self.assertEqual(code, cli.EXIT_FAILURE)
    self.assertIn('line 1', output)

  def test_sweep(self):
    text = SMALL_RUN + 'sweep_param = d\nsweep_values = 0.5, 1\n'
    with flagsaver.flagsaver(output_dir=self.out_dir):
      code, output = _main('sweep', self._config(text))
    self.assertEqual(code, cli.EXIT_OK)
    self.assertIn('d=0.5: ', output)
    with open(os.path.join(self.out_dir, cli.RATE_CURVE_FILE)) as f:
      lines = f.read().splitlines()
    self.assertEqual(lines[0], 'param,lambda_num,fit_residual')
    self.assertLen(lines, 3)

  def test_sweep_with_failed_point(self):
    text = SMALL_RUN + 'max_steps = 5\nsweep_param = D\nsweep_values = 1\n'
    with flagsaver.flagsaver(output_dir=self.out_dir):
      code, output = _main('sweep', self._config(text))
    self.assertEqual(code, cli.EXIT_FAILURE)
    self.assertIn('failed', output)

  def test_sweep_needs_sweep_keys(self):
    with flagsaver.flagsaver(output_dir=self.out_dir):
      code, _ = _main('sweep', self._config(SMALL_RUN))
    self.assertEqual(code, cli.EXIT_FAILURE)

  def test_invalid_config(self):
    code, output = _main('steady', self._config('d = -1\n'))
    self.assertEqual(code, cli.EXIT_FAILURE)
    self.assertIn('line 1', output)

  @parameterized.named_parameters(
      ('no_command', ()),
      ('unknown_command', ('simulate', 'run.cfg')),
      ('missing_file_argument', ('run',)),
      ('extra_argument', ('rate', 'a.csv', 'b.csv')),
      ('unreadable_file', ('steady', '/nonexistent/run.cfg')),
  )
  def test_usage_errors(self, args):
    with self.assertRaises(app.UsageError) as cm:
      _main(*args)
    self.assertEqual(cm.exception.exitcode, cli.EXIT_USAGE)


if __name__ == '__main__':
  absltest.main()
