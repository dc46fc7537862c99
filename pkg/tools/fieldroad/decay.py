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
"""Entropy time series and the measured exponential decay rate."""

import dataclasses
import logging

from typing import Iterable, List, NamedTuple, Tuple

import numpy as np

_LOGGER = logging.getLogger(__name__)

# Entropy ratio window of the log-linear fit, relative to the reference.
DEFAULT_WINDOW = (1e-5, 1e-2)
MIN_FIT_POINTS = 10
# RMS misfit of ln H above which the tail is not treated as exponential.
MAX_FIT_RESIDUAL = 0.05


class DecayWindowError(ValueError):
  """Raised when a series has too few points inside the fit window."""


class EntropyRecord(NamedTuple):
  step: int
  time: float
  entropy: float
  dissipation: float
  mass: float
  min_entry: float


class EntropySeries:
  """Entropy records ordered by strictly increasing step."""

  def __init__(self, records: Iterable[EntropyRecord] = ()):
    self._records: List[EntropyRecord] = []
    for record in records:
      self.append(record)

  def append(self, record: EntropyRecord):
    if self._records and record.step <= self._records[-1].step:
      raise ValueError(f'Step {record.step} does not follow step '
                       f'{self._records[-1].step}.')
    self._records.append(EntropyRecord(*record))

  def __len__(self):
    return len(self._records)

  def __iter__(self):
    return iter(self._records)

  def __getitem__(self, index):
    return self._records[index]

  @property
  def records(self) -> Tuple[EntropyRecord, ...]:
    return tuple(self._records)

  def _column(self, name: str, dtype=np.float64) -> np.ndarray:
    return np.array([getattr(r, name) for r in self._records], dtype=dtype)

  @property
  def steps(self) -> np.ndarray:
    return self._column('step', np.int64)

  @property
  def times(self) -> np.ndarray:
    return self._column('time')

  @property
  def entropies(self) -> np.ndarray:
    return self._column('entropy')

  @property
  def dissipations(self) -> np.ndarray:
    return self._column('dissipation')

  @property
  def masses(self) -> np.ndarray:
    return self._column('mass')

  def reference_entropy(self) -> float:
    """Entropy at the first recorded step `>= 1`, else at the first record."""
    if not self._records:
      raise ValueError('The series is empty.')
    for record in self._records:
      if record.step >= 1:
        return record.entropy
    return self._records[0].entropy

  def entropy_ratios(self) -> np.ndarray:
    """`H / H_ref`, zero everywhere when the reference entropy is zero."""
    entropies = self.entropies
    if not self._records:
      return entropies
    reference = self.reference_entropy()
    if reference == 0:
      return np.zeros_like(entropies)
    return entropies / reference


@dataclasses.dataclass(frozen=True)
class DecayEstimate:
  """A log-linear fit of the entropy tail.

  Attributes:
    rate: `-slope`, the exponential rate of `H` in `exp(-rate t)` form.
    slope: Least-squares slope of `ln H` against `t`.
    discrete_rate: The rate `L` of the `(1 + L dt)**-n` form.
    fit_residual: Root mean square residual of the fit, in `ln H` units.
    window_start: Time of the first fitted record.
    window_end: Time of the last fitted record.
    num_points: Number of fitted records.
    reference_entropy: The entropy the window is relative to.
  """
  rate: float
  slope: float
  discrete_rate: float
  fit_residual: float
  window_start: float
  window_end: float
  num_points: int
  reference_entropy: float


def estimate_decay_rate(series: EntropySeries,
                        dt: float,
                        window: Tuple[float, float] = DEFAULT_WINDOW,
                        min_points: int = MIN_FIT_POINTS) -> DecayEstimate:
  """Fits `ln H` against `t` where `H / H_ref` lies inside `window`.

  Args:
    series: The entropy series.
    dt: The time step, for `discrete_rate`.
    window: `(low, high)` bounds on the entropy ratio.
    min_points: Fewest records the fit accepts.

  Returns:
    The `DecayEstimate`.

  Raises:
    DecayWindowError: if fewer than `min_points` records fall in the window.
  """
  if not series:
    raise DecayWindowError('Cannot fit an empty series.')
  low, high = window
  entropies = series.entropies
  ratios = series.entropy_ratios()
  inside = (ratios >= low) & (ratios <= high) & (entropies > 0)
  count = int(np.count_nonzero(inside))
  if count < min_points:
    raise DecayWindowError(
        f'Only {count} records have an entropy ratio in [{low:g}, {high:g}], '
        f'need {min_points}.')
  times = series.times[inside]
  (slope, _), residuals, _, _, _ = np.polyfit(
      times, np.log(entropies[inside]), 1, full=True)
  rms = float(np.sqrt(residuals[0] / count)) if residuals.size else 0.0
  estimate = DecayEstimate(
      rate=float(-slope),
      slope=float(slope),
      discrete_rate=float(np.expm1(-slope * dt) / dt),
      fit_residual=rms,
      window_start=float(times[0]),
      window_end=float(times[-1]),
      num_points=count,
      reference_entropy=series.reference_entropy())
  _LOGGER.info('Fitted decay rate %.6g over t in [%g, %g] (%d points).',
               estimate.rate, estimate.window_start, estimate.window_end,
               count)
  if rms > MAX_FIT_RESIDUAL:
    _LOGGER.warning(
        'Decay fit residual %.3g exceeds %g, the entropy tail is not a clean '
        'exponential.', rms, MAX_FIT_RESIDUAL)
  return estimate


def envelope(series: EntropySeries, rate: float, dt: float) -> np.ndarray:
  """`H_0 (1 + rate dt)**-(n - n_0)` at every recorded step.

  `H_0` and `n_0` are the entropy and step of the first record.
  """
  if not series:
    return np.zeros(0)
  first = series[0]
  exponents = (series.steps - first.step).astype(np.float64)
  return first.entropy * (1.0 + rate * dt)**(-exponents)


def under_envelope(series: EntropySeries, rate: float, dt: float,
                   rtol: float = 1e-10) -> bool:
  """Whether every recorded entropy stays below `envelope(series, rate, dt)`."""
  bound = envelope(series, rate, dt)
  slack = rtol * (series[0].entropy if series else 0.0)
  return bool(np.all(series.entropies <= bound + slack))
