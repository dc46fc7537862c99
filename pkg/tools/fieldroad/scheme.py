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
"""Backward-Euler two-point flux scheme of the field-road model.

The unknown vector at time level `n` stacks three blocks,

  [ v_K (field cells) | v_K* (road traces) | u_K* (road cells) ],

and each time step solves one square linear system whose matrix depends only
on the mesh and the parameters. The matrix is assembled in CSC form, factored
once by `assemble` and reused by `step`.

Rows, by block:

  field K:  m_K/dt v_K + d sum_{K|L} tau (v_K - v_L)
                       + d sum_{K|K*} tau (v_K - v_K*) = m_K/dt v_K^{n-1}
  trace K*: -d tau (v_K - v_K*) - m_K* (mu u_K* - nu v_K*) = 0
  road K*:  m_K*/dt u_K* + D sum_{K*|L*} tau* (u_K* - u_L*)
                         + m_K* (mu u_K* - nu v_K*) = m_K*/dt u_K*^{n-1}

Exterior edges and the road end points carry no flux.
"""

import dataclasses
import logging
import math

from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from fieldroad import mesh as mesh_lib
from fieldroad import painters

_LOGGER = logging.getLogger(__name__)

InitialDataError = painters.InitialDataError

# Relative max-norm residual accepted from a solve.
RESIDUAL_RTOL = 1e-12
# Largest system the dense reference solver accepts.
ORACLE_MAX_UNKNOWNS = 2000


class SolverError(RuntimeError):
  """Raised when a linear solve misses the residual contract."""


class OracleSizeError(ValueError):
  """Raised when the dense reference solver is given a too large system."""


@dataclasses.dataclass(frozen=True)
class Params:
  """Diffusivities `d`, `D`, exchange rates `mu`, `nu` and time step `dt`."""
  d: float
  D: float
  mu: float
  nu: float
  dt: float

  def __post_init__(self):
    for field in dataclasses.fields(self):
      value = getattr(self, field.name)
      if not (math.isfinite(value) and value > 0):
        raise ValueError(
            f'Params.{field.name} must be positive and finite, got {value}.')


@dataclasses.dataclass(frozen=True, eq=False)
class State:
  """Discrete unknowns at one time level.

  Attributes:
    v: Field values `v_K`.
    v_trace: Trace values `v_K*` on the road edges. At step 0 this is the
      diagnostic trace of `interface_trace`.
    u: Road values `u_K*`.
    time: `step * dt`.
    step: The time level.
  """
  v: np.ndarray
  v_trace: np.ndarray
  u: np.ndarray
  time: float = 0.0
  step: int = 0

  @classmethod
  def constant(cls, coupled: mesh_lib.CoupledMesh, v: float, u: float,
               time: float = 0.0, step: int = 0) -> 'State':
    """A spatially constant state, with the trace equal to `v`."""
    return cls(
        v=np.full(coupled.num_field_cells, float(v)),
        v_trace=np.full(coupled.num_road_cells, float(v)),
        u=np.full(coupled.num_road_cells, float(u)),
        time=time,
        step=step)

  def min_entry(self) -> float:
    return float(min(self.v.min(initial=np.inf),
                     self.v_trace.min(initial=np.inf),
                     self.u.min(initial=np.inf)))

  def check_shape(self, coupled: mesh_lib.CoupledMesh):
    expected = (coupled.num_field_cells, coupled.num_road_cells,
                coupled.num_road_cells)
    got = (len(self.v), len(self.v_trace), len(self.u))
    if got != expected:
      raise ValueError(f'State sizes {got} do not match the mesh {expected}.')


class IndexLayout(NamedTuple):
  """Offsets of the field, trace and road blocks in the unknown vector."""
  num_field: int
  num_road: int

  @property
  def size(self) -> int:
    return self.num_field + 2 * self.num_road

  @property
  def trace_offset(self) -> int:
    return self.num_field

  @property
  def road_offset(self) -> int:
    return self.num_field + self.num_road

  def pack(self, v, v_trace, u) -> np.ndarray:
    return np.concatenate([v, v_trace, u]).astype(np.float64)

  def unpack(self, x: np.ndarray):
    return (x[:self.trace_offset], x[self.trace_offset:self.road_offset],
            x[self.road_offset:])


@dataclasses.dataclass(frozen=True, eq=False)
class SystemOperator:
  """The factored time-step matrix of a mesh and a parameter set.

  Attributes:
    mesh: The mesh the operator was assembled on.
    params: The parameters.
    layout: The block layout of the unknowns.
    matrix: The CSC matrix `A`.
    mass: Diagonal of the right-hand side operator: `m_K/dt` on the field
      block, zero on the trace block and `m_K*/dt` on the road block.
    factor: The `scipy.sparse.linalg.SuperLU` factorization of `matrix`.
  """
  mesh: mesh_lib.CoupledMesh
  params: Params
  layout: IndexLayout
  matrix: sp.csc_matrix
  mass: np.ndarray
  factor: Optional[spla.SuperLU] = None

  def rhs(self, state: State) -> np.ndarray:
    """The right-hand side generated by the previous level `state`."""
    return self.mass * self.layout.pack(state.v, state.v_trace, state.u)

  def apply(self, state: State) -> np.ndarray:
    """`A` applied to the stacked unknowns of `state`."""
    return self.matrix @ self.layout.pack(state.v, state.v_trace, state.u)


def interface_trace(v: np.ndarray, u: np.ndarray, coupled: mesh_lib.CoupledMesh,
                    params: Params) -> np.ndarray:
  """Solves the interface relation for the traces given `v` and `u`."""
  cells, road, tau = coupled.interface_edges()
  flux = params.d * tau
  measures = coupled.road_measures[road]
  trace = np.empty(coupled.num_road_cells)
  trace[road] = ((flux * v[cells] + measures * params.mu * u[road]) /
                 (flux + measures * params.nu))
  return trace


def total_mass(state: State, coupled: mesh_lib.CoupledMesh) -> float:
  """`sum m_K v_K + sum m_K* u_K*`. Traces carry no mass."""
  return float(
      np.dot(coupled.cell_measures, state.v) +
      np.dot(coupled.road_measures, state.u))


def discretize_initial(v0: painters.FieldData, u0: painters.RoadData,
                       coupled: mesh_lib.CoupledMesh,
                       params: Params) -> State:
  """Cell averages of the initial data, at step 0.

  Args:
    v0: Field data: a `FieldPainter`, a function of `(x, y)` or a scalar.
    u0: Road data: a `RoadPainter`, a function of `x` or a scalar.
    coupled: The mesh.
    params: Parameters, used for the diagnostic trace.

  Returns:
    The initial `State`.

  Raises:
    InitialDataError: on negative or non-finite data, or zero total mass.
  """
  v = painters.field_averages(v0, coupled)
  u = painters.road_averages(u0, coupled)
  for name, values in (('v0', v), ('u0', u)):
    if not np.all(np.isfinite(values)):
      raise InitialDataError(f'{name} has non-finite cell averages.')
    if values.size and values.min() < 0:
      raise InitialDataError(
          f'{name} must be nonnegative, got a cell average of {values.min()}.')
  state = State(v=v, v_trace=interface_trace(v, u, coupled, params), u=u)
  mass = total_mass(state, coupled)
  if not mass > 0:
    raise InitialDataError(f'Initial total mass must be positive, got {mass}.')
  return state


def assemble(coupled: mesh_lib.CoupledMesh, params: Params,
             factor: bool = True) -> SystemOperator:
  """Assembles (and by default factors) the time-step operator.

  Args:
    coupled: An admissible, compatible mesh.
    params: The parameters.
    factor: Whether to compute the sparse LU factorization.

  Returns:
    The `SystemOperator`.
  """
  layout = IndexLayout(coupled.num_field_cells, coupled.num_road_cells)
  d, big_d, mu, nu, dt = (params.d, params.D, params.mu, params.nu, params.dt)
  field = np.arange(layout.num_field)
  road = np.arange(layout.num_road)
  trace_rows = layout.trace_offset + road
  road_rows = layout.road_offset + road
  m_road = coupled.road_measures

  rows, cols, vals = [], [], []

  def add(r, c, v):
    rows.append(np.asarray(r))
    cols.append(np.asarray(c))
    vals.append(np.broadcast_to(np.asarray(v, dtype=np.float64),
                                np.shape(r)))

  add(field, field, coupled.cell_measures / dt)

  k, l, tau = coupled.interior_edges()
  add(k, k, d * tau)
  add(k, l, -d * tau)
  add(l, l, d * tau)
  add(l, k, -d * tau)

  k, r, tau = coupled.interface_edges()
  t = layout.trace_offset + r
  add(k, k, d * tau)
  add(k, t, -d * tau)
  add(t, k, -d * tau)
  add(t, t, d * tau + m_road[r] * nu)
  add(t, layout.road_offset + r, -m_road[r] * mu)

  add(road_rows, road_rows, m_road / dt + m_road * mu)
  add(road_rows, trace_rows, -m_road * nu)
  a, b, tau = coupled.road_edge_pairs()
  ua, ub = layout.road_offset + a, layout.road_offset + b
  add(ua, ua, big_d * tau)
  add(ua, ub, -big_d * tau)
  add(ub, ub, big_d * tau)
  add(ub, ua, -big_d * tau)

  matrix = sp.coo_matrix(
      (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
      shape=(layout.size, layout.size)).tocsc()
  mass = np.concatenate([
      coupled.cell_measures / dt,
      np.zeros(layout.num_road), m_road / dt
  ])
  lu = None
  if factor:
    # The matrix is column diagonally dominant: factor without pivoting.
    lu = spla.splu(
        matrix,
        permc_spec='MMD_AT_PLUS_A',
        diag_pivot_thresh=0.0,
        options=dict(SymmetricMode=True))
  _LOGGER.info('Assembled a %d x %d operator with %d nonzeros.', layout.size,
               layout.size, matrix.nnz)
  return SystemOperator(coupled, params, layout, matrix, mass, lu)


def _residual(matrix, x: np.ndarray, b: np.ndarray) -> np.ndarray:
  return matrix @ x - b


def step(op: SystemOperator, state: State) -> State:
  """Advances `state` by one time step.

  Args:
    op: A factored operator.
    state: The previous level.

  Returns:
    The next level, with `step` incremented and `time` advanced by `dt`.

  Raises:
    SolverError: if the solution misses the residual contract after one
      refinement pass, or is not finite.
  """
  if op.factor is None:
    raise SolverError('The operator was assembled without a factorization.')
  b = op.rhs(state)
  x = op.factor.solve(b)
  scale = RESIDUAL_RTOL * np.max(np.abs(b), initial=0.0)
  residual = _residual(op.matrix, x, b)
  if np.max(np.abs(residual), initial=0.0) > scale:
    x = x - op.factor.solve(residual)
    residual = _residual(op.matrix, x, b)
  defect = np.max(np.abs(residual), initial=0.0)
  if not (np.all(np.isfinite(x)) and defect <= scale):
    raise SolverError(f'Step {state.step + 1}: residual {defect:.3e} exceeds '
                      f'{scale:.3e}.')
  _LOGGER.debug('Step %d solved, residual %.3e.', state.step + 1, defect)
  v, v_trace, u = op.layout.unpack(x)
  return State(
      v=v,
      v_trace=v_trace,
      u=u,
      time=(state.step + 1) * op.params.dt,
      step=state.step + 1)


def dense_matrix(coupled: mesh_lib.CoupledMesh, params: Params) -> np.ndarray:
  """Assembles the time-step matrix densely, one mesh record at a time."""
  n_field = coupled.num_field_cells
  n_road = coupled.num_road_cells
  size = n_field + 2 * n_road
  if size > ORACLE_MAX_UNKNOWNS:
    raise OracleSizeError(
        f'{size} unknowns exceed the dense solver cap of '
        f'{ORACLE_MAX_UNKNOWNS}.')
  matrix = np.zeros((size, size))
  for cell in coupled.field_cells():
    matrix[cell.id, cell.id] += cell.measure / params.dt
  for edge in coupled.field_edges():
    flux = params.d * edge.transmissivity
    k = edge.left
    if edge.kind == mesh_lib.EdgeKind.INTERIOR:
      l = edge.right
      matrix[k, k] += flux
      matrix[k, l] -= flux
      matrix[l, l] += flux
      matrix[l, k] -= flux
    elif edge.kind == mesh_lib.EdgeKind.ROAD:
      t = n_field + edge.right
      matrix[k, k] += flux
      matrix[k, t] -= flux
      matrix[t, k] -= flux
      matrix[t, t] += flux
  for cell in coupled.road_cells():
    t = n_field + cell.id
    u = n_field + n_road + cell.id
    matrix[t, t] += cell.measure * params.nu
    matrix[t, u] -= cell.measure * params.mu
    matrix[u, u] += cell.measure / params.dt + cell.measure * params.mu
    matrix[u, t] -= cell.measure * params.nu
  for edge in coupled.road_edges():
    flux = params.D * edge.transmissivity
    a = n_field + n_road + edge.left
    b = n_field + n_road + edge.right
    matrix[a, a] += flux
    matrix[a, b] -= flux
    matrix[b, b] += flux
    matrix[b, a] -= flux
  return matrix


def dense_oracle_step(coupled: mesh_lib.CoupledMesh, params: Params,
                      state: State) -> State:
  """Reference implementation of `step` with a dense LU solve.

  Raises:
    OracleSizeError: if the system has more than `ORACLE_MAX_UNKNOWNS`
      unknowns.
  """
  matrix = dense_matrix(coupled, params)
  n_field = coupled.num_field_cells
  b = np.concatenate([
      coupled.cell_measures * state.v / params.dt,
      np.zeros(coupled.num_road_cells),
      coupled.road_measures * state.u / params.dt
  ])
  x = scipy.linalg.lu_solve(scipy.linalg.lu_factor(matrix), b)
  n_trace = n_field + coupled.num_road_cells
  return State(
      v=x[:n_field],
      v_trace=x[n_field:n_trace],
      u=x[n_trace:],
      time=(state.step + 1) * params.dt,
      step=state.step + 1)
