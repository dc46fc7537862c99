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

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np

from fieldroad import decay
from fieldroad import experiments
from fieldroad import mesh as mesh_lib
from fieldroad import painters
from fieldroad import scheme

SMALL = mesh_lib.Geometry(0.0, 4.0, 2.0)


def _small_case(**changes):
  spec = experiments.TestCaseSpec(
      name='small',
      v0=painters.FieldPainter([painters.FieldBox(0.0, 1.0, 0.0, 1.0, 10.0)]),
      u0=painters.RoadPainter([painters.RoadInterval(3.0, 4.0, 2.0)]),
      geometry=SMALL,
      nx=8,
      ny=4,
      snapshot_times=(0.5, 1.0))
  return spec.replace(**changes)


class BuiltinTestCaseTest(parameterized.TestCase):

  @parameterized.parameters(1, 2, 3, 4)
  def test_mass_and_steady_state(self, case_id):
    spec = experiments.builtin_test_case(case_id)
    self.assertEqual(spec.name, f'testcase{case_id}')
    self.assertEqual(spec.case_id, case_id)
    mass = spec.v0.integral(spec.geometry) + spec.u0.integral(spec.geometry)
    self.assertAlmostEqual(mass, 2500.0, places=9)

  @parameterized.parameters(1, 2, 3, 4)
  def test_discrete_mass(self, case_id):
    spec = experiments.builtin_test_case(case_id)
    coupled = mesh_lib.build_cartesian(spec.geometry, spec.nx, spec.ny)
    state = scheme.discretize_initial(spec.v0, spec.u0, coupled, spec.params)
    self.assertAlmostEqual(
        scheme.total_mass(state, coupled), 2500.0, delta=1e-9)

  def test_grids(self):
    self.assertEqual((experiments.builtin_test_case(1).nx,
                      experiments.builtin_test_case(1).ny), (160, 40))
    self.assertEqual((experiments.builtin_test_case(4).nx,
                      experiments.builtin_test_case(4).ny), (320, 80))

  @parameterized.parameters(0, 5, 'one')
  def test_unknown_case(self, case_id):
    with self.assertRaises(ValueError):
      experiments.builtin_test_case(case_id)


class TestCaseSpecTest(parameterized.TestCase):

  def test_sorts_snapshot_times(self):
    spec = _small_case(snapshot_times=(10, 1.0, 10.0))
    self.assertEqual(spec.snapshot_times, (1.0, 10.0))

  @parameterized.named_parameters(
      ('zero_nx', dict(nx=0)),
      ('fractional_ny', dict(ny=2.5)),
      ('negative_steps', dict(max_steps=-1)),
      ('stop_ratio_one', dict(stop_ratio=1.0)),
      ('negative_snapshot', dict(snapshot_times=(-1.0,))),
      ('zero_record_every', dict(record_every=0)),
  )
  def test_rejects(self, changes):
    with self.assertRaises(ValueError):
      _small_case(**changes)

  def test_rejects_zero_mass(self):
    with self.assertRaises(painters.InitialDataError):
      _small_case(v0=painters.FieldPainter(), u0=painters.RoadPainter())


class RunTest(parameterized.TestCase):

  @classmethod
  def setUpClass(cls):
    super().setUpClass()
    cls.result = experiments.run(_small_case())

  def test_reaches_stop_ratio(self):
    series = self.result.series
    self.assertFalse(self.result.hit_step_cap)
    self.assertLessEqual(series[-1].entropy,
                         experiments.DEFAULT_STOP_RATIO * series[1].entropy)
    self.assertGreater(series[-2].entropy,
                       experiments.DEFAULT_STOP_RATIO * series[1].entropy)

  def test_records_every_step(self):
    series = self.result.series
    np.testing.assert_array_equal(series.steps, np.arange(len(series)))
    self.assertEqual(series[-1].step, self.result.final_state.step)

  def test_audit(self):
    audit = self.result.audit
    self.assertEqual(audit.steps, self.result.final_state.step)
    self.assertGreater(audit.min_entry, 0.0)
    self.assertLessEqual(audit.max_total_drift,
                         1e-12 * self.result.steady.mass * audit.steps)
    self.assertLessEqual(audit.max_quadratic_defect, audit.quadratic_tolerance)
    self.assertLessEqual(audit.max_log_defect, audit.log_tolerance)

  def test_entropy_decreases(self):
    entropies = self.result.series.entropies
    self.assertTrue(np.all(np.diff(entropies) <= 1e-10 * entropies[0]))
    log_entropies = self.result.log_series.entropies
    self.assertTrue(np.all(np.diff(log_entropies) <= 1e-10 * log_entropies[0]))

  def test_log_series_starts_when_positive(self):
    # The initial data vanish on most cells.
    self.assertEqual(self.result.log_series[0].step, 1)

  def test_rate(self):
    rate = self.result.rate
    self.assertIsNotNone(rate)
    self.assertIsNone(self.result.rate_error)
    self.assertGreater(rate.rate, 0.0)
    self.assertGreaterEqual(rate.num_points, decay.MIN_FIT_POINTS)
    self.assertLess(rate.fit_residual, decay.MAX_FIT_RESIDUAL)

  def test_converges_to_steady_state(self):
    final = self.result.final_state
    steady = self.result.steady
    np.testing.assert_allclose(final.v, steady.v_inf, rtol=0.2)
    np.testing.assert_allclose(final.u, steady.u_inf, rtol=0.2)

  def test_snapshots(self):
    snapshots = self.result.snapshots
    self.assertEqual(sorted(snapshots), [0.5, 1.0])
    self.assertEqual(snapshots[0.5].step, 5)
    self.assertEqual(snapshots[1.0].step, 10)

  def test_continuous_entropy(self):
    # Grid lines contain the box edges, so averaging is exact.
    self.assertAlmostEqual(self.result.continuous_entropy,
                           self.result.series[0].entropy, places=9)

  def test_record_every(self):
    result = experiments.run(_small_case(record_every=2))
    steps = result.series.steps
    self.assertEqual(list(steps[:3]), [0, 1, 2])
    self.assertTrue(np.all(steps[2:-1] % 2 == 0))
    self.assertEqual(steps[-1], result.final_state.step)
    np.testing.assert_allclose(result.rate.rate, self.result.rate.rate,
                               rtol=1e-2)

  def test_zero_steps(self):
    result = experiments.run(_small_case(max_steps=0))
    self.assertLen(result.series, 1)
    self.assertTrue(result.hit_step_cap)
    self.assertIsNone(result.rate)
    self.assertIn('need', result.rate_error)
    self.assertEqual(result.audit.steps, 0)
    self.assertEqual(result.final_state.step, 0)

  def test_step_cap(self):
    result = experiments.run(_small_case(max_steps=20))
    self.assertTrue(result.hit_step_cap)
    self.assertEqual(result.final_state.step, 20)
    self.assertIsNone(result.rate)

  def test_steady_initial_data(self):
    result = experiments.run(
        _small_case(v0=1.0, u0=5.0, snapshot_times=()))
    self.assertEqual(result.series[0].entropy, 0.0)
    self.assertEqual(result.final_state.step, 1)
    self.assertIsNone(result.continuous_entropy)

  def test_random_runs_pass_audit(self):
    rng = np.random.default_rng(2026)
    for trial in range(50):
      d, big_d, mu, nu = rng.uniform(0.1, 10.0, size=4)
      params = scheme.Params(d, big_d, mu, nu, rng.uniform(0.01, 1.0))
      x0 = rng.uniform(0.0, 3.0)
      y0 = rng.uniform(0.0, 1.5)
      a = rng.uniform(0.0, 3.5)
      spec = _small_case(
          name=f'random{trial}',
          v0=painters.FieldPainter([
              painters.FieldBox(x0, x0 + 1.0, y0, y0 + 0.5,
                                rng.uniform(1.0, 100.0))
          ]),
          u0=painters.RoadPainter(
              [painters.RoadInterval(a, a + 0.5, rng.uniform(0.0, 100.0))]),
          params=params,
          nx=int(rng.integers(2, 9)),
          ny=int(rng.integers(1, 5)),
          max_steps=20,
          snapshot_times=())
      result = experiments.run(spec)
      self.assertEqual(result.audit.steps, result.final_state.step)
      self.assertLessEqual(result.final_state.step, 20)
      self.assertGreater(result.audit.min_entry, 0.0)


class AuditorTest(parameterized.TestCase):

  def setUp(self):
    super().setUp()
    self.auditor = experiments._Auditor(mass=1.0, initial_entropy=1.0, dt=0.1)

  @parameterized.named_parameters(
      ('mass', (1, 1.0, 1.1, 1.0, 1.0, 0.5, 0.0), 'mass'),
      ('positivity', (1, 1.0, 1.0, 0.0, 1.0, 0.5, 0.0), 'positivity'),
      ('monotone', (1, 1.0, 1.0, 1.0, 0.5, 1.0, 0.0), 'monotone_entropy'),
      ('sign', (1, 1.0, 1.0, 1.0, 1.0, 0.5, -1.0), 'dissipation_sign'),
      ('inequality', (1, 1.0, 1.0, 1.0, 1.0, 0.5, 10.0),
       'quadratic_inequality'),
  )
  def test_failures(self, args, check):
    with self.assertRaises(experiments.AuditError) as cm:
      self.auditor.check(*args)
    self.assertEqual(cm.exception.failure.check, check)
    self.assertEqual(cm.exception.failure.step, 1)

  def test_passes(self):
    self.auditor.check(1, 1.0, 1.0, 0.1, 1.0, 0.5, 5.0)
    self.auditor.check_log(2, 1.0, 0.9, 1.0)
    report = self.auditor.report()
    self.assertEqual(report.steps, 1)
    self.assertEqual(report.max_quadratic_defect, 0.0)
    self.assertAlmostEqual(report.max_log_defect, 0.0, places=15)
    self.assertEqual(report.log_tolerance, 1e-10)

  def test_log_failure(self):
    with self.assertRaises(experiments.AuditError) as cm:
      self.auditor.check_log(2, 1.0, 1.0, 1.0)
    self.assertEqual(cm.exception.failure.check, 'log_inequality')


class SweepTest(parameterized.TestCase):

  def test_single_point_matches_run(self):
    base = _small_case()
    points = experiments.sweep(experiments.SweepSpec(base, 'd', (1.0,)))
    self.assertLen(points, 1)
    self.assertEqual(points[0].rate, experiments.run(base).rate.rate)
    self.assertIsNone(points[0].error)

  @parameterized.parameters('d', 'D')
  def test_rate_increases_with_diffusivity(self, parameter):
    spec = experiments.SweepSpec(_small_case(), parameter, (0.25, 1.0, 4.0))
    values, rates = experiments.rate_curve(experiments.sweep(spec))
    np.testing.assert_array_equal(values, [0.25, 1.0, 4.0])
    self.assertTrue(np.all(np.diff(rates) >= -1e-6 * rates[:-1]))

  def test_point(self):
    spec = experiments.SweepSpec(_small_case(), 'D', (2.0,), nx=4, ny=2)
    point = spec.point(2.0)
    self.assertEqual(point.params.D, 2.0)
    self.assertEqual(point.params.d, 1.0)
    self.assertEqual((point.nx, point.ny), (4, 2))
    self.assertEqual(point.snapshot_times, ())
    self.assertEqual(point.name, 'small[D=2]')

  def test_failed_point(self):
    spec = experiments.SweepSpec(_small_case(max_steps=5), 'd', (1.0, 2.0))
    points = experiments.sweep(spec)
    self.assertEqual([p.value for p in points], [1.0, 2.0])
    self.assertTrue(all(p.rate is None and p.error for p in points))
    values, rates = experiments.rate_curve(points)
    self.assertEqual((values.size, rates.size), (0, 0))

  @parameterized.named_parameters(
      ('parameter', 'mu', (1.0,)),
      ('empty', 'd', ()),
      ('negative', 'd', (-1.0, 1.0)),
      ('unsorted', 'D', (2.0, 1.0)),
      ('repeated', 'D', (1.0, 1.0)),
  )
  def test_rejects(self, parameter, values):
    with self.assertRaises(ValueError):
      experiments.SweepSpec(_small_case(), parameter, values)


if __name__ == '__main__':
  absltest.main()
