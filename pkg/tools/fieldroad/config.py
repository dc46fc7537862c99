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
"""The line-oriented `key = value` run configuration.

```
# Test case 1 on a coarser grid.
testcase = 1
nx = 80
ny = 20
dt = 0.2
```

Keys not given keep the defaults of the builtin test case named by
`testcase` (1 when absent). `sweep_param` and `sweep_values` together turn the
config into a sweep over `d` or `D`.
"""

import dataclasses
import math

from typing import Any, Callable, Dict, List, NamedTuple, Optional

from fieldroad import experiments
from fieldroad import mesh as mesh_lib
from fieldroad import scheme
from fieldroad import writers

DEFAULT_OUTPUT_DIR = 'fieldroad_output'
GEOMETRY_KEYS = ('omega_min', 'omega_max', 'height')
PARAM_KEYS = ('d', 'D', 'mu', 'nu', 'dt')


class ConfigIssue(NamedTuple):
  line: int
  message: str

  def __str__(self):
    return f'line {self.line}: {self.message}' if self.line else self.message


class ConfigError(ValueError):
  """Raised with every problem found in a config.

  Attributes:
    issues: The `ConfigIssue`s, in line order.
  """

  def __init__(self, issues: List[ConfigIssue]):
    self.issues = list(issues)
    super().__init__('Invalid config:\n' +
                     '\n'.join(f'  {issue}' for issue in self.issues))


def _float(text: str) -> float:
  value = float(text)
  if not math.isfinite(value):
    raise ValueError(f'{text!r} is not a finite number')
  return value


def _positive_float(text: str) -> float:
  value = _float(text)
  if not value > 0:
    raise ValueError(f'must be positive, got {value}')
  return value


def _int(text: str) -> int:
  return int(text)


def _positive_int(text: str) -> int:
  value = int(text)
  if value < 1:
    raise ValueError(f'must be a positive integer, got {value}')
  return value


def _nonnegative_int(text: str) -> int:
  value = int(text)
  if value < 0:
    raise ValueError(f'must be nonnegative, got {value}')
  return value


def _float_list(text: str) -> tuple:
  return tuple(_float(item) for item in text.split(',') if item.strip())


def _positive_float_list(text: str) -> tuple:
  values = _float_list(text)
  for value in values:
    if not value > 0:
      raise ValueError(f'must be positive, got {value}')
  return values


def _choice(*choices: str) -> Callable[[str], str]:

  def parse(text: str) -> str:
    if text not in choices:
      raise ValueError(f'expected one of {", ".join(choices)}, got {text!r}')
    return text

  return parse


def _text(text: str) -> str:
  return text


KEYS: Dict[str, Callable[[str], Any]] = {
    'testcase': _int,
    'omega_min': _float,
    'omega_max': _float,
    'height': _positive_float,
    'd': _positive_float,
    'D': _positive_float,
    'mu': _positive_float,
    'nu': _positive_float,
    'dt': _positive_float,
    'nx': _positive_int,
    'ny': _positive_int,
    'snapshot_times': _float_list,
    'stop_ratio': _positive_float,
    'max_steps': _nonnegative_int,
    'record_every': _positive_int,
    'sweep_param': _choice(*experiments.SWEEP_PARAMETERS),
    'sweep_values': _positive_float_list,
    'output_dir': _text,
    'snapshot_format': _choice(*writers.SNAPSHOT_FORMATS),
}

# Keys that may be given an empty value.
_MAY_BE_EMPTY = frozenset(['snapshot_times'])


@dataclasses.dataclass(frozen=True)
class RunConfig:
  """A parsed config.

  Attributes:
    spec: The test case.
    sweep: The sweep, when `sweep_param` is set.
    output_dir: Where the CLI writes its artifacts.
    snapshot_format: `vtk-legacy` or `csv`.
  """
  spec: experiments.TestCaseSpec
  sweep: Optional[experiments.SweepSpec] = None
  output_dir: str = DEFAULT_OUTPUT_DIR
  snapshot_format: str = writers.VTK_LEGACY


def parse_config(text: str) -> RunConfig:
  """Parses and validates a run config.

  Args:
    text: The config file content.

  Returns:
    The `RunConfig`.

  Raises:
    ConfigError: listing every malformed line, unknown or repeated key, and
      invalid value.
  """
  issues = []
  values = {}
  lines = {}
  for number, raw in enumerate(text.splitlines(), start=1):
    line = raw.split('#', 1)[0].strip()
    if not line:
      continue
    key, sep, value = line.partition('=')
    key, value = key.strip(), value.strip()
    if not sep or not key:
      issues.append(ConfigIssue(number, f'expected "key = value", got {raw!r}'))
      continue
    if key not in KEYS:
      issues.append(ConfigIssue(number, f'unknown key {key!r}'))
      continue
    if key in values:
      issues.append(
          ConfigIssue(number, f'{key!r} already set on line {lines[key]}'))
      continue
    if not value and key not in _MAY_BE_EMPTY:
      issues.append(ConfigIssue(number, f'{key!r} needs a value'))
      continue
    try:
      values[key] = KEYS[key](value)
    except ValueError as e:
      issues.append(ConfigIssue(number, f'{key}: {e}'))
      continue
    lines[key] = number

  if issues:
    raise ConfigError(issues)

  def fail(key: Optional[str], message: str):
    raise ConfigError([ConfigIssue(lines.get(key, 0), message)])

  case_id = values.get('testcase', 1)
  try:
    spec = experiments.builtin_test_case(case_id)
  except ValueError as e:
    fail('testcase', str(e))

  changes = {}
  if any(key in values for key in GEOMETRY_KEYS):
    geometry = dataclasses.asdict(spec.geometry)
    geometry.update((k, values[k]) for k in GEOMETRY_KEYS if k in values)
    try:
      changes['geometry'] = mesh_lib.Geometry(**geometry)
    except mesh_lib.MeshError as e:
      fail(next(k for k in GEOMETRY_KEYS if k in values), str(e))
  if any(key in values for key in PARAM_KEYS):
    params = dataclasses.asdict(spec.params)
    params.update((k, values[k]) for k in PARAM_KEYS if k in values)
    changes['params'] = scheme.Params(**params)
  for key in ('nx', 'ny', 'snapshot_times', 'stop_ratio', 'max_steps',
              'record_every'):
    if key in values:
      changes[key] = values[key]
  try:
    spec = spec.replace(**changes)
  except ValueError as e:
    fail(None, str(e))

  sweep = None
  has_param, has_values = 'sweep_param' in values, 'sweep_values' in values
  if has_param != has_values:
    fail('sweep_param' if has_param else 'sweep_values',
         'sweep_param and sweep_values must be given together')
  if has_param:
    try:
      sweep = experiments.SweepSpec(spec, values['sweep_param'],
                                    values['sweep_values'])
    except ValueError as e:
      fail('sweep_values', str(e))

  return RunConfig(
      spec=spec,
      sweep=sweep,
      output_dir=values.get('output_dir', DEFAULT_OUTPUT_DIR),
      snapshot_format=values.get('snapshot_format', writers.VTK_LEGACY))


def _number(value: float) -> str:
  return repr(float(value))


def format_config(config: RunConfig) -> str:
  """Writes `config` in the format read by `parse_config`.

  Raises:
    ValueError: if the test case is not a builtin one.
  """
  spec = config.spec
  if spec.case_id is None:
    raise ValueError('Only builtin test cases can be written as a config.')
  lines = [f'testcase = {spec.case_id}']
  lines.extend(f'{key} = {_number(getattr(spec.geometry, key))}'
               for key in GEOMETRY_KEYS)
  lines.extend(
      f'{key} = {_number(getattr(spec.params, key))}' for key in PARAM_KEYS)
  lines.append(f'nx = {spec.nx}')
  lines.append(f'ny = {spec.ny}')
  lines.append('snapshot_times = ' +
               ', '.join(_number(t) for t in spec.snapshot_times))
  lines.append(f'stop_ratio = {_number(spec.stop_ratio)}')
  lines.append(f'max_steps = {spec.max_steps}')
  lines.append(f'record_every = {spec.record_every}')
  if config.sweep is not None:
    lines.append(f'sweep_param = {config.sweep.parameter}')
    lines.append('sweep_values = ' +
                 ', '.join(_number(v) for v in config.sweep.values))
  lines.append(f'output_dir = {config.output_dir}')
  lines.append(f'snapshot_format = {config.snapshot_format}')
  return '\n'.join(lines) + '\n'
