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
"""Test cases, audited runs and decay-rate sweeps.

`builtin_test_case` returns one of the four reference initial configurations,
all of total mass 2500 on the field `(-40, 40) x (0, 20)`. `run` advances a
`TestCaseSpec` until its quadratic entropy has dropped by `stop_ratio`
relative to the first step, auditing every step, and fits the decay rate of
the tail. `sweep` repeats `run` over a grid of diffusivities.
"""

import concurrent.futures
import dataclasses
import logging
import math

from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from fieldroad import decay
from fieldroad import entropy as entropy_lib
from fieldroad import mesh as mesh_lib
from fieldroad import painters
from fieldroad import scheme

_LOGGER = logging.getLogger(__name__)

DEFAULT_GEOMETRY = mesh_lib.Geometry(omega_min=-40.0, omega_max=40.0, height=20.0)
DEFAULT_PARAMS = scheme.Params(d=1.0, D=1.0, mu=1.0, nu=5.0, dt=0.1)
SNAPSHOT_TIMES = (1.0, 10.0, 50.0, 100.0)
# The four road bands of the fragmented cases.
BANDS = ((-10.0, -7.5), (-5.0, -2.5), (2.5, 5.0), (7.5, 10.0))

DEFAULT_STOP_RATIO = 1e-5
DEFAULT_MAX_STEPS = 10**6

# Audit tolerances.
MASS_RTOL = 1e-12
INEQUALITY_RTOL = 1e-10

SWEEP_PARAMETERS = ('d', 'D')


@dataclasses.dataclass(frozen=True)
class TestCaseSpec:
  """Everything `run` needs.

  Attributes:
    name: A label for logs and reports.
    v0: Field initial data (painter, function of `(x, y)` or scalar).
    u0: Road initial data (painter, function of `x` or scalar).
    geometry: The domain.
    params: Diffusivities, exchange rates and time step.
    nx: Cells along the road.
    ny: Cells across the field.
    case_id: The builtin case number, or `None` for custom data.
    snapshot_times: Times at which `run` keeps the state.
    stop_ratio: Stop once `H / H_1 <= stop_ratio`.
    max_steps: Step cap.
    record_every: Record one step out of `record_every` in the series.
  """
  name: str
  v0: painters.FieldData
  u0: painters.RoadData
  geometry: mesh_lib.Geometry = DEFAULT_GEOMETRY
  params: scheme.Params = DEFAULT_PARAMS
  nx: int = 160
  ny: int = 40
  case_id: Optional[int] = None
  snapshot_times: Tuple[float, ...] = SNAPSHOT_TIMES
  stop_ratio: float = DEFAULT_STOP_RATIO
  max_steps: int = DEFAULT_MAX_STEPS
  record_every: int = 1

  def __post_init__(self):
    for name in ('nx', 'ny', 'record_every'):
      value = getattr(self, name)
      if int(value) != value or value < 1:
        raise ValueError(f'{name} must be a positive integer, got {value}.')
    if int(self.max_steps) != self.max_steps or self.max_steps < 0:
      raise ValueError(
          f'max_steps must be a nonnegative integer, got {self.max_steps}.')
    if not 0 < self.stop_ratio < 1:
      raise ValueError(f'stop_ratio must be in (0, 1), got {self.stop_ratio}.')
    times = tuple(float(t) for t in self.snapshot_times)
    if any(not (math.isfinite(t) and t >= 0) for t in times):
      raise ValueError(f'Snapshot times must be nonnegative, got {times}.')
    object.__setattr__(self, 'snapshot_times', tuple(sorted(set(times))))
    if (isinstance(self.v0, painters.FieldPainter) and
        isinstance(self.u0, painters.RoadPainter)):
      mass = (self.v0.integral(self.geometry) + self.u0.integral(self.geometry))
      if not mass > 0:
        raise painters.InitialDataError(
            f'Test case {self.name!r} has total mass {mass}.')

  def replace(self, **changes) -> 'TestCaseSpec':
    return dataclasses.replace(self, **changes)


def _bands(y_min: float, y_max: float,
           value: float) -> List[painters.FieldBox]:
  return [painters.FieldBox(a, b, y_min, y_max, value) for a, b in BANDS]


def builtin_test_case(case_id: int) -> TestCaseSpec:
  """One of the four reference test cases.

  Args:
    case_id: 1 to 4.
      1. The population sits in one field block, the road is empty.
      2. A smaller, denser field block plus a road segment.
      3. Four field bands along the top of the field, the road is empty.
      4. Four thinner bands plus the four matching road segments.

  Returns:
    The `TestCaseSpec`, on a grid whose lines contain every box edge.

  Raises:
    ValueError: for any other `case_id`.
  """
  if case_id == 1:
    v0 = painters.FieldPainter(
        [painters.FieldBox(-2.5, 2.5, 2.5, 7.5, 100.0)])
    u0 = painters.RoadPainter()
  elif case_id == 2:
    v0 = painters.FieldPainter([painters.FieldBox(-2.5, 2.5, 2.5, 5.0, 150.0)])
    u0 = painters.RoadPainter([painters.RoadInterval(-2.5, 2.5, 125.0)])
  elif case_id == 3:
    v0 = painters.FieldPainter(_bands(7.5, 10.0, 100.0))
    u0 = painters.RoadPainter()
  elif case_id == 4:
    v0 = painters.FieldPainter(_bands(8.75, 10.0, 150.0))
    u0 = painters.RoadPainter(
        [painters.RoadInterval(a, b, 62.5) for a, b in BANDS])
  else:
    raise ValueError(f'Unknown test case {case_id!r}, expected 1 to 4.')
  # 8.75 needs a quarter-unit grid.
  nx, ny = (320, 80) if case_id == 4 else (160, 40)
  return TestCaseSpec(
      name=f'testcase{case_id}', v0=v0, u0=u0, nx=nx, ny=ny, case_id=case_id)


class AuditFailure(NamedTuple):
  """A step that broke one of the audited properties."""
  step: int
  check: str
  value: float
  tolerance: float


class AuditError(RuntimeError):
  """Raised when a run breaks mass, positivity or entropy dissipation.

  Attributes:
    failure: The `AuditFailure`.
  """

  def __init__(self, failure: AuditFailure):
    self.failure = failure
    super().__init__(
        f'Audit check {failure.check!r} failed at step {failure.step}: '
        f'{failure.value:.6e} (tolerance {failure.tolerance:.3e}).')


class AuditReport(NamedTuple):
  """Worst values seen by the audit of a run.

  Attributes:
    steps: Number of audited steps.
    max_mass_drift: Largest `|M_n - M_{n-1}|`.
    max_total_drift: Largest `|M_n - M_0|`.
    min_entry: Smallest entry of any state with step >= 1.
    max_quadratic_defect: Largest `H_n - H_{n-1} + dt D_n`, quadratic entropy.
    max_log_defect: The same for the Boltzmann entropy.
    quadratic_tolerance: The tolerance applied to the quadratic defects.
    log_tolerance: The tolerance applied to the Boltzmann defects.
  """
  steps: int
  max_mass_drift: float
  max_total_drift: float
  min_entry: float
  max_quadratic_defect: float
  max_log_defect: float
  quadratic_tolerance: float
  log_tolerance: float


class _Auditor:
  """Checks each new state against the previous one."""

  def __init__(self, mass: float, initial_entropy: float, dt: float):
    self.mass = mass
    self.dt = dt
    self.mass_tol = MASS_RTOL * mass
    floor = np.finfo(float).eps * mass
    self.quadratic_tol = INEQUALITY_RTOL * max(initial_entropy, floor)
    self.log_tol = None
    self.floor = floor
    self.steps = 0
    self.max_mass_drift = 0.0
    self.max_total_drift = 0.0
    self.min_entry = math.inf
    self.max_quadratic_defect = -math.inf
    self.max_log_defect = -math.inf

  def _fail(self, step, check, value, tolerance):
    raise AuditError(AuditFailure(step, check, float(value), float(tolerance)))

  def check(self, step: int, prev_mass: float, mass: float, min_entry: float,
            prev_h: float, h: float, diss: float):
    self.steps += 1
    drift = abs(mass - prev_mass)
    self.max_mass_drift = max(self.max_mass_drift, drift)
    self.max_total_drift = max(self.max_total_drift, abs(mass - self.mass))
    if drift > self.mass_tol:
      self._fail(step, 'mass', drift, self.mass_tol)
    self.min_entry = min(self.min_entry, min_entry)
    if not min_entry > 0:
      self._fail(step, 'positivity', min_entry, 0.0)
    if h > prev_h + self.quadratic_tol:
      self._fail(step, 'monotone_entropy', h - prev_h, self.quadratic_tol)
    if not diss >= -self.quadratic_tol:
      self._fail(step, 'dissipation_sign', diss, self.quadratic_tol)
    result = entropy_lib.check_step_inequality(prev_h, h, diss, self.dt,
                                               self.quadratic_tol)
    self.max_quadratic_defect = max(self.max_quadratic_defect, result.defect)
    if not result.passed:
      self._fail(step, 'quadratic_inequality', result.defect,
                 self.quadratic_tol)

  def check_log(self, step: int, prev_h: float, h: float, diss: float):
    if self.log_tol is None:
      self.log_tol = INEQUALITY_RTOL * max(prev_h, self.floor)
    result = entropy_lib.check_step_inequality(prev_h, h, diss, self.dt,
                                               self.log_tol)
    self.max_log_defect = max(self.max_log_defect, result.defect)
    if not result.passed:
      self._fail(step, 'log_inequality', result.defect, self.log_tol)

  def report(self) -> AuditReport:
    return AuditReport(
        steps=self.steps,
        max_mass_drift=self.max_mass_drift,
        max_total_drift=self.max_total_drift,
        min_entry=self.min_entry,
        max_quadratic_defect=self.max_quadratic_defect,
        max_log_defect=self.max_log_defect,
        quadratic_tolerance=self.quadratic_tol,
        log_tolerance=self.log_tol if self.log_tol is not None else math.nan)


@dataclasses.dataclass(frozen=True, eq=False)
class RunResult:
  """The outcome of `run`.

  Attributes:
    spec: The test case that was run.
    mesh: The mesh it was run on.
    steady: The steady state selected by the initial mass.
    series: Quadratic entropy series.
    log_series: Boltzmann entropy series, from the first positive state.
    rate: The fitted decay rate, or `None` if the tail was too short.
    rate_error: Why `rate` is `None`.
    final_state: The last state.
    snapshots: States kept at the requested snapshot times.
    audit: Worst audited values.
    theoretical_rate: The lower bound Lambda_2 for the run parameters.
    continuous_entropy: Quadratic entropy of the painted data before
      discretization, when the data are disjoint painters.
    hit_step_cap: Whether the run stopped on `max_steps`.
  """
  spec: TestCaseSpec
  mesh: mesh_lib.CoupledMesh
  steady: entropy_lib.SteadyState
  series: decay.EntropySeries
  log_series: decay.EntropySeries
  rate: Optional[decay.DecayEstimate]
  rate_error: Optional[str]
  final_state: scheme.State
  snapshots: Dict[float, scheme.State]
  audit: AuditReport
  theoretical_rate: float
  continuous_entropy: Optional[float]
  hit_step_cap: bool


def _continuous_entropy(spec: TestCaseSpec,
                        steady: entropy_lib.SteadyState) -> Optional[float]:
  if not (isinstance(spec.v0, painters.FieldPainter) and
          isinstance(spec.u0, painters.RoadPainter)):
    return None
  try:
    return entropy_lib.continuous_quadratic_entropy(spec.v0, spec.u0, steady,
                                                    spec.geometry)
  except painters.InitialDataError:
    return None


def run(spec: TestCaseSpec) -> RunResult:
  """Runs `spec` to its stop rule, auditing every step.

  Args:
    spec: The test case.

  Returns:
    The `RunResult`.

  Raises:
    AuditError: if a step breaks mass conservation, positivity, or the
      entropy dissipation inequality of either entropy.
    scheme.SolverError: if a solve misses its residual contract.
    painters.InitialDataError: for unusable initial data.
  """
  params = spec.params
  coupled = mesh_lib.build_cartesian(spec.geometry, spec.nx, spec.ny)
  state = scheme.discretize_initial(spec.v0, spec.u0, coupled, params)
  mass = scheme.total_mass(state, coupled)
  steady = entropy_lib.steady_state(mass, spec.geometry, params.mu, params.nu)
  op = scheme.assemble(coupled, params)
  _LOGGER.info('Running %s on a %dx%d grid: M0=%.17g, steady=(%.6g, %.6g).',
               spec.name, spec.nx, spec.ny, mass, steady.v_inf, steady.u_inf)

  def quadratic(s):
    return (entropy_lib.quadratic_entropy(s, steady, coupled),
            entropy_lib.quadratic_dissipation(s, steady, coupled, params))

  def boltzmann(s):
    try:
      return (entropy_lib.entropy(s, entropy_lib.BOLTZMANN, steady, coupled),
              entropy_lib.dissipation(s, entropy_lib.BOLTZMANN, steady,
                                      coupled, params))
    except entropy_lib.EntropyDomainError:
      return None

  series = decay.EntropySeries()
  log_series = decay.EntropySeries()
  snapshots = {}
  pending = list(spec.snapshot_times)

  def record(s, s_mass, h, diss, log_values):
    entry = s.min_entry()
    series.append(
        decay.EntropyRecord(s.step, s.time, h, diss, s_mass, entry))
    if log_values is not None:
      log_series.append(
          decay.EntropyRecord(s.step, s.time, log_values[0], log_values[1],
                              s_mass, entry))

  def take_snapshots(s):
    while pending and abs(s.time - pending[0]) <= 0.5 * params.dt:
      snapshots[pending.pop(0)] = s
    while pending and pending[0] < s.time - 0.5 * params.dt:
      pending.pop(0)

  h, diss = quadratic(state)
  log_values = boltzmann(state)
  record(state, mass, h, diss, log_values)
  take_snapshots(state)
  auditor = _Auditor(mass, h, params.dt)

  reference = None
  hit_cap = False
  prev_mass = mass
  while True:
    if state.step >= spec.max_steps:
      hit_cap = True
      break
    state = scheme.step(op, state)
    new_mass = scheme.total_mass(state, coupled)
    new_h, new_diss = quadratic(state)
    auditor.check(state.step, prev_mass, new_mass, state.min_entry(), h,
                  new_h, new_diss)
    new_log = boltzmann(state)
    if new_log is not None and log_values is not None:
      auditor.check_log(state.step, log_values[0], new_log[0], new_log[1])
    prev_mass, h, diss, log_values = new_mass, new_h, new_diss, new_log

    if reference is None:
      reference = h
    # Below the audit tolerance the entropy is rounding noise.
    done = h <= spec.stop_ratio * reference or h <= auditor.quadratic_tol
    if done or state.step == 1 or state.step % spec.record_every == 0:
      record(state, new_mass, h, diss, log_values)
    take_snapshots(state)
    if state.step % 1000 == 0:
      _LOGGER.debug('%s: step %d, entropy ratio %.3e.', spec.name, state.step,
                    h / reference if reference else 0.0)
    if done:
      break

  if series[-1].step != state.step:
    record(state, prev_mass, h, diss, log_values)
  if hit_cap and spec.max_steps > 0:
    _LOGGER.warning('%s hit the step cap of %d before reaching the stop ratio.',
                    spec.name, spec.max_steps)

  rate, rate_error = None, None
  try:
    rate = decay.estimate_decay_rate(series, params.dt)
  except decay.DecayWindowError as e:
    rate_error = str(e)
    if spec.max_steps > 0:
      _LOGGER.warning('%s: no decay rate estimate: %s', spec.name, e)

  result = RunResult(
      spec=spec,
      mesh=coupled,
      steady=steady,
      series=series,
      log_series=log_series,
      rate=rate,
      rate_error=rate_error,
      final_state=state,
      snapshots=snapshots,
      audit=auditor.report(),
      theoretical_rate=entropy_lib.theoretical_rate(params, spec.geometry),
      continuous_entropy=_continuous_entropy(spec, steady),
      hit_step_cap=hit_cap)
  _LOGGER.info('%s stopped after %d steps, rate %s.', spec.name, state.step,
               f'{rate.rate:.6g}' if rate else 'n/a')
  return result


@dataclasses.dataclass(frozen=True)
class SweepSpec:
  """A grid of values for one diffusivity, on top of a base test case.

  Attributes:
    base: The test case every point starts from.
    parameter: `'d'` or `'D'`.
    values: Strictly increasing positive grid.
    nx: Optional resolution override for every point.
    ny: Optional resolution override for every point.
  """
  base: TestCaseSpec
  parameter: str
  values: Tuple[float, ...]
  nx: Optional[int] = None
  ny: Optional[int] = None

  def __post_init__(self):
    if self.parameter not in SWEEP_PARAMETERS:
      raise ValueError(f'Can only sweep {SWEEP_PARAMETERS}, got '
                       f'{self.parameter!r}.')
    values = tuple(float(v) for v in self.values)
    if not values:
      raise ValueError('A sweep needs at least one value.')
    if any(not (math.isfinite(v) and v > 0) for v in values):
      raise ValueError(f'Sweep values must be positive, got {values}.')
    if any(b <= a for a, b in zip(values, values[1:])):
      raise ValueError(f'Sweep values must be strictly increasing, got '
                       f'{values}.')
    object.__setattr__(self, 'values', values)

  def point(self, value: float) -> TestCaseSpec:
    """The test case of one grid point."""
    params = dataclasses.replace(self.base.params, **{self.parameter: value})
    return self.base.replace(
        name=f'{self.base.name}[{self.parameter}={value:g}]',
        params=params,
        nx=self.nx or self.base.nx,
        ny=self.ny or self.base.ny,
        snapshot_times=())


class SweepPoint(NamedTuple):
  """The rate measured at one grid point, or why it is missing."""
  value: float
  rate: Optional[float]
  fit_residual: Optional[float]
  error: Optional[str] = None


def _run_point(args: Tuple[float, TestCaseSpec]) -> SweepPoint:
  value, spec = args
  try:
    result = run(spec)
  except Exception as e:  # pylint: disable=broad-except
    _LOGGER.error('Sweep point %s=%g failed: %s', spec.name, value, e)
    return SweepPoint(value, None, None, f'{type(e).__name__}: {e}')
  if result.rate is None:
    return SweepPoint(value, None, None, result.rate_error)
  return SweepPoint(value, result.rate.rate, result.rate.fit_residual)


def sweep(spec: SweepSpec, workers: int = 1) -> List[SweepPoint]:
  """Runs every grid point of `spec`, in grid order.

  Args:
    spec: The sweep.
    workers: Number of worker processes. 1 runs the points in this process.

  Returns:
    One `SweepPoint` per grid value. Failed points carry an error message
    instead of a rate.
  """
  jobs = [(value, spec.point(value)) for value in spec.values]
  if workers <= 1 or len(jobs) == 1:
    points = [_run_point(job) for job in jobs]
  else:
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
      points = list(pool.map(_run_point, jobs))
  for point in points:
    _LOGGER.info('Sweep %s=%g: rate %s.', spec.parameter, point.value,
                 point.rate if point.rate is not None else point.error)
  return points


def rate_curve(points: Sequence[SweepPoint]) -> Tuple[np.ndarray, np.ndarray]:
  """`(values, rates)` of the points that produced a rate."""
  kept = [p for p in points if p.rate is not None]
  return (np.array([p.value for p in kept]), np.array([p.rate for p in kept]))
