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
"""Steady states, relative entropies, dissipations and the bound Lambda_2."""

import dataclasses
import math

from typing import Callable, NamedTuple

import numpy as np

from fieldroad import mesh as mesh_lib
from fieldroad import painters
from fieldroad import scheme

# Smallest argument accepted by the Boltzmann generator.
LOG_DOMAIN_MIN = 1e-300


class EntropyDomainError(ValueError):
  """Raised when an entropy generator is evaluated outside its domain."""


class SteadyState(NamedTuple):
  """The constant pair `(v_inf, u_inf)` with `nu v_inf = mu u_inf`."""
  v_inf: float
  u_inf: float
  mass: float


def steady_state(mass: float, geometry: mesh_lib.Geometry, mu: float,
                 nu: float) -> SteadyState:
  """The unique constant steady state of total mass `mass`.

  Args:
    mass: The total mass `M0`.
    geometry: The domain.
    mu: Exchange rate from the road to the field.
    nu: Exchange rate from the field to the road.

  Returns:
    `v_inf = mu M0 / s` and `u_inf = nu M0 / s` with
    `s = m_omega nu + m_Omega mu`.

  Raises:
    ValueError: if `mass` is not positive.
  """
  if not mass > 0:
    raise ValueError(f'The steady state needs a positive mass, got {mass}.')
  scale = geometry.road_measure * nu + geometry.field_measure * mu
  return SteadyState(mu * mass / scale, nu * mass / scale, mass)


@dataclasses.dataclass(frozen=True)
class EntropyGenerator:
  """A convex `phi` with `phi(1) = phi'(1) = 0`, and its derivatives."""
  name: str
  phi: Callable[[np.ndarray], np.ndarray]
  dphi: Callable[[np.ndarray], np.ndarray]
  ddphi: Callable[[np.ndarray], np.ndarray]
  positive_only: bool = False

  def check_domain(self, values: np.ndarray):
    if self.positive_only and values.size and values.min() < LOG_DOMAIN_MIN:
      raise EntropyDomainError(
          f'The {self.name} entropy needs entries >= {LOG_DOMAIN_MIN}, got '
          f'{values.min()}.')


QUADRATIC = EntropyGenerator(
    name='quadratic',
    phi=lambda s: 0.5 * (s - 1.0)**2,
    dphi=lambda s: s - 1.0,
    ddphi=np.ones_like)

BOLTZMANN = EntropyGenerator(
    name='boltzmann',
    phi=lambda s: s * np.log(s) - s + 1.0,
    dphi=np.log,
    ddphi=lambda s: 1.0 / s,
    positive_only=True)

GENERATORS = {gen.name: gen for gen in (QUADRATIC, BOLTZMANN)}


def get_generator(name: str) -> EntropyGenerator:
  try:
    return GENERATORS[name]
  except KeyError:
    raise ValueError(f'Unknown entropy generator {name!r}, expected one of '
                     f'{sorted(GENERATORS)}.') from None


def _relative(state: scheme.State, steady: SteadyState, gen: EntropyGenerator,
              with_trace: bool):
  sv = np.asarray(state.v) / steady.v_inf
  su = np.asarray(state.u) / steady.u_inf
  gen.check_domain(sv)
  gen.check_domain(su)
  if not with_trace:
    return sv, su
  st = np.asarray(state.v_trace) / steady.v_inf
  gen.check_domain(st)
  return sv, st, su


def entropy(state: scheme.State, gen: EntropyGenerator, steady: SteadyState,
            coupled: mesh_lib.CoupledMesh) -> float:
  """`sum m_K v_inf phi(v_K/v_inf) + sum m_K* u_inf phi(u_K*/u_inf)`.

  Raises:
    EntropyDomainError: if `gen` is evaluated outside its domain.
  """
  sv, su = _relative(state, steady, gen, with_trace=False)
  return float(steady.v_inf * np.dot(coupled.cell_measures, gen.phi(sv)) +
               steady.u_inf * np.dot(coupled.road_measures, gen.phi(su)))


def dissipation(state: scheme.State, gen: EntropyGenerator,
                steady: SteadyState, coupled: mesh_lib.CoupledMesh,
                params: scheme.Params) -> float:
  """The dissipation of `entropy` at `state`.

  It is the sum of four nonnegative terms: the field-to-trace fluxes, the
  interior field fluxes, the road fluxes and the exchange between the road
  and the trace, each weighted by the matching difference of `gen.dphi`.

  Raises:
    EntropyDomainError: if `gen` is evaluated outside its domain.
  """
  sv, st, su = _relative(state, steady, gen, with_trace=True)
  dv, dt_, du = gen.dphi(sv), gen.dphi(st), gen.dphi(su)
  v, v_trace, u = state.v, state.v_trace, state.u

  k, r, tau = coupled.interface_edges()
  interface = params.d * np.dot(tau, (v[k] - v_trace[r]) * (dv[k] - dt_[r]))
  k, l, tau = coupled.interior_edges()
  interior = params.d * np.dot(tau, (v[k] - v[l]) * (dv[k] - dv[l]))
  a, b, tau = coupled.road_edge_pairs()
  road = params.D * np.dot(tau, (u[a] - u[b]) * (du[a] - du[b]))
  exchange = params.mu * steady.u_inf * np.dot(coupled.road_measures,
                                               (su - st) * (du - dt_))
  return float(interface + interior + road + exchange)


def quadratic_entropy(state: scheme.State, steady: SteadyState,
                      coupled: mesh_lib.CoupledMesh) -> float:
  """Closed form of the quadratic entropy, a weighted L2 distance."""
  return float(
      0.5 * np.dot(coupled.cell_measures, (state.v - steady.v_inf)**2) /
      steady.v_inf + 0.5 *
      np.dot(coupled.road_measures, (state.u - steady.u_inf)**2) /
      steady.u_inf)


def quadratic_dissipation(state: scheme.State, steady: SteadyState,
                          coupled: mesh_lib.CoupledMesh,
                          params: scheme.Params) -> float:
  """Closed form of the quadratic dissipation."""
  v, v_trace, u = state.v, state.v_trace, state.u
  k, r, tau = coupled.interface_edges()
  interface = params.d * np.dot(tau, (v[k] - v_trace[r])**2) / steady.v_inf
  k, l, tau = coupled.interior_edges()
  interior = params.d * np.dot(tau, (v[k] - v[l])**2) / steady.v_inf
  a, b, tau = coupled.road_edge_pairs()
  road = params.D * np.dot(tau, (u[a] - u[b])**2) / steady.u_inf
  exchange = params.mu * steady.u_inf * np.dot(
      coupled.road_measures, (u / steady.u_inf - v_trace / steady.v_inf)**2)
  return float(interface + interior + road + exchange)


def continuous_quadratic_entropy(v0: painters.FieldPainter,
                                 u0: painters.RoadPainter,
                                 steady: SteadyState,
                                 geometry: mesh_lib.Geometry) -> float:
  """Quadratic entropy of painted initial data, before discretization.

  The discrete initial quadratic entropy never exceeds this value.
  """
  return (v0.squared_deviation_integral(geometry, steady.v_inf) /
          (2 * steady.v_inf) +
          u0.squared_deviation_integral(geometry, steady.u_inf) /
          (2 * steady.u_inf))


class StepCheck(NamedTuple):
  passed: bool
  defect: float


def check_step_inequality(prev_h: float, next_h: float, next_d: float,
                          dt: float, tol: float) -> StepCheck:
  """Checks `next_h - prev_h <= -dt * next_d + tol`.

  Returns:
    A `StepCheck` whose defect is `next_h - prev_h + dt * next_d`.
  """
  defect = next_h - prev_h + dt * next_d
  return StepCheck(defect <= tol, defect)


def dimensional_constant(dim: int) -> float:
  """`ln 2` for `dim = 1`, else `(2**(dim - 1) - 1) / (dim - 1)`."""
  if int(dim) != dim or dim < 1:
    raise ValueError(f'dim must be an integer >= 1, got {dim}.')
  dim = int(dim)
  if dim == 1:
    return math.log(2.0)
  return (2.0**(dim - 1) - 1.0) / (dim - 1)


class RateTerms(NamedTuple):
  """The three terms whose minimum is Lambda_2."""
  field: float
  road: float
  exchange: float


# The field is two dimensional and the road one dimensional.
FIELD_DIM = 2


def rate_terms(params: scheme.Params,
               geometry: mesh_lib.Geometry) -> RateTerms:
  d, big_d, mu, nu = params.d, params.D, params.mu, params.nu
  m_road = geometry.road_measure
  m_field = geometry.field_measure
  height = geometry.height
  scale = m_road * nu + m_field * mu
  c_field = dimensional_constant(FIELD_DIM)
  c_road = dimensional_constant(FIELD_DIM - 1)
  field = (4.0 / (2.0 * mu * c_field * geometry.field_diameter**2 +
                  3.0 * nu * height) * scale / m_field * d)
  road = (2.0 / (c_road * geometry.road_diameter**2 *
                 (nu + 6.0 * mu * height)) * scale / m_road * big_d)
  exchange = 2.0 / 3.0 * scale / m_field
  return RateTerms(field, road, exchange)


def theoretical_rate(params: scheme.Params,
                     geometry: mesh_lib.Geometry) -> float:
  """The lower bound Lambda_2 on the decay rate of the quadratic entropy."""
  return min(rate_terms(params, geometry))
