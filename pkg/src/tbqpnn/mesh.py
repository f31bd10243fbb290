"""Mach-Zehnder interferometers and rectangular (Clements) mesh decompositions.

The MZI convention, two 50:50 couplers around an internal ``2 theta`` shifter with ``phi`` on the upper
input, is

    T(theta, phi) = i e^{i theta} [[e^{i phi} sin(theta),  cos(theta)],
                                   [e^{i phi} cos(theta), -sin(theta)]].

``theta = pi/2, phi = pi`` is the identity (bar state) and ``theta = 0`` fully swaps the two modes. A
:class:`MeshPlan` lists the MZIs in column-major order; its unitary is the product of the embedded blocks
in that order followed by ``diag(exp(i delta))``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .fock import check_unitary

TWO_PI = 2 * np.pi
BAR = (np.pi / 2, np.pi)


def wrap_angle(x):
    """Wrap angles into [0, 2 pi)."""
    y = np.mod(x, TWO_PI)
    return np.where(y >= TWO_PI, 0.0, y) if isinstance(y, np.ndarray) else (0.0 if y >= TWO_PI else float(y))


@dataclass(frozen=True)
class MZISetting:
    """Internal phase ``theta`` and input phase ``phi`` of one MZI, wrapped to [0, 2 pi)."""

    theta: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        object.__setattr__(self, "phi", wrap_angle(float(self.phi)))

    @classmethod
    def bar(cls) -> "MZISetting":
        return cls(*BAR)


def mzi_unitary(setting: MZISetting | tuple) -> np.ndarray:
    """2x2 transfer matrix of an MZI; accepts a setting or a ``(theta, phi)`` pair."""
    theta, phi = (setting.theta, setting.phi) if isinstance(setting, MZISetting) else setting
    return mzi_blocks(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))


def mzi_blocks(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """MZI matrices for arrays of angles; returns shape ``theta.shape + (2, 2)``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    s, c = np.sin(theta), np.cos(theta)
    g = 1j * np.exp(1j * theta)
    ep = np.exp(1j * phi)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = g * ep * s
    out[..., 0, 1] = g * c
    out[..., 1, 0] = g * ep * c
    out[..., 1, 1] = -g * s
    return out


@dataclass(frozen=True)
class Placement:
    """One MZI in the mesh, acting on modes ``(mode, mode + 1)`` in column ``column`` (0-based)."""

    column: int
    mode: int
    setting: MZISetting


@dataclass(frozen=True)
class MeshPlan:
    """Ordered MZI placements plus output phases for an ``num_modes`` interferometer.

    Attributes:
        num_modes: N
        placements: MZIs in column-major order (by column, then by mode)
        output_phases: delta, one phase per mode applied after the last column
    """

    num_modes: int
    placements: tuple[Placement, ...]
    output_phases: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = wrap_angle(np.asarray(self.output_phases, dtype=float).reshape(-1))
        if d.shape != (self.num_modes,):
            raise ValueError(f"expected {self.num_modes} output phases, got {d.shape[0]}")
        d.setflags(write=False)
        object.__setattr__(self, "output_phases", d)
        object.__setattr__(self, "placements", tuple(self.placements))

    def validate(self) -> None:
        """Check mode ranges and column-major ordering.

        Raises:
            ValueError: on an out-of-range pair, overlapping MZIs in one column, or out-of-order placements
        """
        prev = (-1, -1)
        used: dict[int, set] = {}
        for k, p in enumerate(self.placements):
            if not 0 <= p.mode < self.num_modes - 1:
                raise ValueError(f"placement {k}: mode pair ({p.mode}, {p.mode + 1}) outside N={self.num_modes}")
            if p.column < 0 or (p.column, p.mode) <= prev:
                raise ValueError(f"placement {k}: column/mode ({p.column}, {p.mode}) out of column-major order")
            busy = used.setdefault(p.column, set())
            if {p.mode, p.mode + 1} & busy:
                raise ValueError(f"placement {k}: overlaps another MZI in column {p.column}")
            busy |= {p.mode, p.mode + 1}
            prev = (p.column, p.mode)

    @property
    def num_columns(self) -> int:
        return 1 + max((p.column for p in self.placements), default=-1)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([p.setting.theta for p in self.placements])

    @property
    def phis(self) -> np.ndarray:
        return np.array([p.setting.phi for p in self.placements])

    @property
    def layout(self) -> tuple[tuple[int, int], ...]:
        return tuple((p.column, p.mode) for p in self.placements)

    def to_dict(self) -> dict:
        return {
            "N": self.num_modes,
            "placements": [
                {"column": p.column, "mode": p.mode, "theta": p.setting.theta, "phi": p.setting.phi}
                for p in self.placements
            ],
            "delta": [float(x) for x in self.output_phases],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "MeshPlan":
        placements = tuple(
            Placement(int(p["column"]), int(p["mode"]), MZISetting(p["theta"], p["phi"])) for p in d["placements"]
        )
        return cls(int(d["N"]), placements, np.asarray(d["delta"], dtype=float))

    @classmethod
    def from_json(cls, s: str) -> "MeshPlan":
        return cls.from_dict(json.loads(s))

    @classmethod
    def from_arrays(cls, num_modes: int, layout, thetas, phis, deltas) -> "MeshPlan":
        placements = tuple(Placement(c, m, MZISetting(t, f)) for (c, m), t, f in zip(layout, thetas, phis))
        return cls(num_modes, placements, np.asarray(deltas, dtype=float))


def rectangular_layout(num_modes: int) -> tuple[tuple[int, int], ...]:
    """(column, mode) positions of the N(N-1)/2 MZIs of the rectangular mesh, column-major.

    Even N starts with pairs (0,1), (2,3), ... in column 0. Odd N uses the mirrored layout whose first
    column starts at mode 1, so that the unpaired mode of every column alternates from the top.
    """
    N = int(num_modes)
    offset = 0 if N % 2 == 0 else 1
    return tuple((c, m) for c in range(N) for m in range((c + offset) % 2, N - 1, 2))


def mesh_unitaries(num_modes: int, layout, thetas, phis, deltas) -> np.ndarray:
    """Batched reconstruction: angle arrays carry a leading batch axis (or none).

    Args:
        num_modes: N
        layout: (column, mode) per MZI in application order
        thetas, phis: shape ``(..., num_mzis)``
        deltas: shape ``(..., N)``

    Returns:
        unitaries of shape ``(..., N, N)``
    """
    thetas, phis, deltas = (np.asarray(a, dtype=float) for a in (thetas, phis, deltas))
    batch = thetas.shape[:-1]
    blocks = mzi_blocks(thetas, phis)
    U = np.broadcast_to(np.eye(num_modes, dtype=complex), batch + (num_modes, num_modes)).copy()
    for k, (_, m) in enumerate(layout):
        U[..., m : m + 2, :] = blocks[..., k, :, :] @ U[..., m : m + 2, :]
    return np.exp(1j * deltas)[..., :, None] * U


def reconstruct(plan: MeshPlan) -> np.ndarray:
    """Unitary implemented by a mesh plan.

    Raises:
        ValueError: if the placement order is malformed
    """
    plan.validate()
    return mesh_unitaries(plan.num_modes, plan.layout, plan.thetas, plan.phis, plan.output_phases)


def _unit(z: complex) -> complex:
    a = abs(z)
    return z / a if a > 0 else 1.0 + 0j


def factor_left_diag(M: np.ndarray, tiny: float = 1e-150):
    """Write a 2x2 unitary as ``diag(d1, d2) @ T(theta, phi)``.

    Returns:
        (theta, phi, d1, d2) with ``theta`` in [0, pi/2] and unit-modulus ``d1``, ``d2``
    """
    s, c = abs(M[0, 0]), abs(M[0, 1])
    theta = float(np.arctan2(s, c))
    k = 1j * np.exp(1j * theta)
    s, c = np.sin(theta), np.cos(theta)
    if c >= s:
        d1 = _unit(M[0, 1] / k)
        x = _unit(M[1, 0] / k)  # d2 * e^{i phi}
        e = _unit(M[0, 0] / (k * d1)) if abs(M[0, 0]) > tiny else 1.0 + 0j
        d2 = x / e
    else:
        d2 = _unit(-M[1, 1] / k)
        y = _unit(M[0, 0] / k)  # d1 * e^{i phi}
        d1 = _unit(M[0, 1] / k) if abs(M[0, 1]) > tiny else d2
        e = y / d1
    return theta, float(np.angle(e)), d1, d2


def _null_right(U: np.ndarray, row: int, col: int) -> np.ndarray:
    # unitary G on columns (col, col+1) with (U @ G)[row, col] = 0
    x, y = U[row, col], U[row, col + 1]
    n = np.hypot(abs(x), abs(y))
    if abs(x) == 0 or n == 0:
        return np.eye(2, dtype=complex)
    return np.array([[y, np.conj(x)], [-x, np.conj(y)]]) / n


def _null_left(U: np.ndarray, row: int, col: int) -> np.ndarray:
    # unitary G on rows (row-1, row) with (G @ U)[row, col] = 0
    x, y = U[row - 1, col], U[row, col]
    n = np.hypot(abs(x), abs(y))
    if abs(y) == 0 or n == 0:
        return np.eye(2, dtype=complex)
    return np.array([[np.conj(x), np.conj(y)], [-y, x]]) / n


def _clements_elements(U: np.ndarray) -> list:
    """Generic factorization of U into 2x2 blocks and one diagonal, in application order.

    Elements are ``("block", a, G)`` acting on modes (a, a+1) or ``("diag", d)``.
    """
    U = U.copy()
    N = U.shape[0]
    right, left = [], []
    for i in range(N - 1):
        if i % 2 == 0:
            for j in range(i + 1):
                r, c = N - 1 - j, i - j
                G = _null_right(U, r, c)
                U[:, c : c + 2] = U[:, c : c + 2] @ G
                right.append(("block", c, G.conj().T))
        else:
            for j in range(i + 1):
                r, c = N - 1 - i + j, j
                G = _null_left(U, r, c)
                U[r - 1 : r + 1, :] = G @ U[r - 1 : r + 1, :]
                left.append(("block", r - 1, G))
    elements = list(right)
    elements.append(("diag", np.diag(U).copy()))
    elements.extend(("block", a, G.conj().T) for _, a, G in reversed(left))
    return elements


def _mirror_elements(elements: list, N: int) -> list:
    # U = R W^T R with R the mode reversal: reverse order, transpose and mirror each element
    X = np.array([[0, 1], [1, 0]])
    out = []
    for el in reversed(elements):
        if el[0] == "diag":
            out.append(("diag", el[1][::-1].copy()))
        else:
            _, a, G = el
            out.append(("block", N - 2 - a, X @ G.T @ X))
    return out


def _push_phases(elements: list, N: int):
    """Convert blocks and diagonals into MZIs followed by a single output diagonal."""
    p = np.ones(N, dtype=complex)
    last = np.full(N, -1)
    placed = []
    for el in elements:
        if el[0] == "diag":
            p = el[1] * p
            continue
        _, a, G = el
        theta, phi, d1, d2 = factor_left_diag(G @ np.diag(p[a : a + 2]))
        p[a], p[a + 1] = d1, d2
        col = int(max(last[a], last[a + 1]) + 1)
        last[a] = last[a + 1] = col
        placed.append(Placement(col, a, MZISetting(theta, phi)))
    placed.sort(key=lambda q: (q.column, q.mode))
    return tuple(placed), np.angle(p)


def clements_decompose(U: np.ndarray) -> MeshPlan:
    """Decompose an N x N unitary into a rectangular MZI mesh.

    Raises:
        NotUnitaryError: if ``U`` is not unitary to 1e-10
    """
    U = check_unitary(U)
    N = U.shape[0]
    if N == 1:
        return MeshPlan(1, (), np.angle(U[0]))
    if N % 2 == 0:
        elements = _clements_elements(U)
    else:
        R = np.eye(N)[::-1]
        elements = _mirror_elements(_clements_elements(R @ U.T @ R), N)
    placements, delta = _push_phases(elements, N)
    return MeshPlan(N, placements, delta)
