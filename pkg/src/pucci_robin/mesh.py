"""Uniform node lattices on intervals, rectangles and truncated half-lines."""
from dataclasses import dataclass, field
import csv
import io

import numpy as np

__all__ = [
    "INTERIOR",
    "FACE",
    "CORNER",
    "Domain",
    "Grid",
    "ScalarField",
    "build_grid",
    "sup_norm",
    "restrict_sup",
    "field_to_csv",
    "write_field_csv",
]

INTERIOR, FACE, CORNER = 0, 1, 2


@dataclass(frozen=True)
class Domain:
    """A box domain.

    ``kind`` is ``"interval"``, ``"rectangle"`` or ``"halfline"``; ``lengths``
    holds one length per axis (for ``"halfline"`` the truncation point ``T``).
    """

    kind: str
    lengths: tuple

    def __post_init__(self):
        lengths = tuple(float(v) for v in self.lengths)
        expected = {"interval": 1, "halfline": 1, "rectangle": 2}
        if self.kind not in expected:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if len(lengths) != expected[self.kind]:
            raise ValueError(f"{self.kind} takes {expected[self.kind]} length(s), got {len(lengths)}")
        if not all(np.isfinite(v) and v > 0 for v in lengths):
            raise ValueError(f"domain lengths must be positive, got {lengths}")
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def interval(cls, L):
        return cls("interval", (L,))

    @classmethod
    def rectangle(cls, Lx, Ly):
        return cls("rectangle", (Lx, Ly))

    @classmethod
    def halfline(cls, T):
        return cls("halfline", (T,))

    @property
    def dim(self):
        return len(self.lengths)

    @property
    def min_length(self):
        return min(self.lengths)


@dataclass(frozen=True, eq=False)
class Grid:
    """Classified uniform grid; build it with :func:`build_grid`.

    Node ``k`` sits at ``(ix, iy)`` with ``k = iy * nx + ix`` (x fastest).
    Arrays are indexed by node.  ``normal`` is zero at interior nodes;
    ``dirichlet`` flags the artificial far end of a half-line.
    """

    domain: Domain
    nx: int
    ny: int
    h: float
    coords: np.ndarray = field(repr=False)
    node_class: np.ndarray = field(repr=False)
    normal: np.ndarray = field(repr=False)
    dist: np.ndarray = field(repr=False)
    dirichlet: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.domain.dim

    @property
    def size(self):
        return self.nx * self.ny

    @property
    def shape(self):
        return (self.nx,) if self.dim == 1 else (self.ny, self.nx)

    @property
    def interior(self):
        return np.flatnonzero(self.node_class == INTERIOR)

    @property
    def boundary(self):
        return np.flatnonzero(self.node_class != INTERIOR)

    @property
    def robin_nodes(self):
        return np.flatnonzero((self.node_class != INTERIOR) & ~self.dirichlet)

    @property
    def x(self):
        return self.coords[:, 0]

    @property
    def y(self):
        return self.coords[:, 1] if self.dim == 2 else None

    def index(self, ix, iy=0):
        return iy * self.nx + ix

    def ij(self, k):
        return k % self.nx, k // self.nx

    def inward_neighbors(self, k):
        """Nodes one lattice step inside from boundary node ``k``.

        A face node has one, a corner has the two axis neighbours.
        """
        ix, iy = self.ij(k)
        out = []
        n = self.normal[k]
        if n[0] != 0:
            out.append(self.index(ix - int(np.sign(n[0])), iy))
        if self.dim == 2 and n[1] != 0:
            out.append(self.index(ix, iy - int(np.sign(n[1]))))
        return out


def build_grid(domain, nx, ny=1):
    """Build the uniform grid of ``domain`` with ``nx`` (and ``ny``) nodes per axis.

    Raises
    ------
    ValueError
        If an axis has fewer than 3 nodes, or if the rectangle spacing differs
        between axes.
    """
    nx, ny = int(nx), int(ny)
    if nx < 3:
        raise ValueError(f"need nx >= 3, got {nx}")
    if domain.dim == 1:
        if ny != 1:
            raise ValueError("one-dimensional domains take ny=1")
        (L,) = domain.lengths
        h = L / (nx - 1)
        x = np.arange(nx) * h
        x[-1] = L
        node_class = np.full(nx, INTERIOR, dtype=np.int8)
        node_class[[0, -1]] = FACE
        normal = np.zeros((nx, 1))
        normal[0, 0], normal[-1, 0] = -1.0, 1.0
        dist = np.minimum(x, L - x)
        dist[[0, -1]] = 0.0
        dirichlet = np.zeros(nx, dtype=bool)
        if domain.kind == "halfline":
            dirichlet[-1] = True
        return Grid(domain, nx, 1, h, x[:, None], node_class, normal, dist, dirichlet)

    if ny < 3:
        raise ValueError(f"need ny >= 3, got {ny}")
    Lx, Ly = domain.lengths
    hx, hy = Lx / (nx - 1), Ly / (ny - 1)
    if not np.isclose(hx, hy, rtol=1e-12, atol=0.0):
        raise ValueError(
            f"rectangle {Lx}x{Ly} needs equal spacing on both axes; "
            f"nx={nx}, ny={ny} give hx={hx}, hy={hy}"
        )
    h = hx
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny))
    ix, iy = ix.ravel(), iy.ravel()
    x, y = ix * h, iy * h
    x[ix == nx - 1] = Lx
    y[iy == ny - 1] = Ly
    on_x = (ix == 0) | (ix == nx - 1)
    on_y = (iy == 0) | (iy == ny - 1)
    node_class = np.full(nx * ny, INTERIOR, dtype=np.int8)
    node_class[on_x | on_y] = FACE
    node_class[on_x & on_y] = CORNER
    normal = np.zeros((nx * ny, 2))
    normal[ix == 0, 0] = -1.0
    normal[ix == nx - 1, 0] = 1.0
    normal[iy == 0, 1] = -1.0
    normal[iy == ny - 1, 1] = 1.0
    normal[on_x & on_y] /= np.sqrt(2.0)
    dist = np.minimum.reduce([x, Lx - x, y, Ly - y])
    dist[node_class != INTERIOR] = 0.0
    coords = np.column_stack([x, y])
    return Grid(domain, nx, ny, h, coords, node_class, normal, dist, np.zeros(nx * ny, dtype=bool))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Values attached to the nodes of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.size != self.grid.size:
            raise ValueError(f"field has {values.size} values for a grid of {self.grid.size} nodes")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func(x)`` (or ``func(x, y)``) at the nodes."""
        if grid.dim == 1:
            return cls(grid, func(grid.x))
        return cls(grid, func(grid.x, grid.y))

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def as_array(self):
        return self.values.reshape(self.grid.shape)


def sup_norm(f):
    """Maximum of ``|f|`` over all nodes."""
    values = f.values if isinstance(f, ScalarField) else np.asarray(f)
    return float(np.max(np.abs(values))) if values.size else 0.0


def restrict_sup(f, delta):
    """Maximum of ``|f|`` over nodes at distance at least ``delta`` from the boundary."""
    grid = f.grid
    # nodes that sit on the level set up to rounding count as inside
    mask = grid.dist >= delta - 1e-12 * max(grid.domain.lengths)
    if delta > 0 and not np.any(mask):
        raise ValueError(f"no node at distance >= {delta} from the boundary (max {grid.dist.max()})")
    if delta <= 0:
        mask = np.ones(grid.size, dtype=bool)
    return float(np.max(np.abs(f.values[mask])))


def field_to_csv(f, header_comments=()):
    """Serialise a field as CSV text: ``x,y,value`` (``x,value`` in 1D), 17 digits."""
    buf = io.StringIO()
    for line in header_comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    grid = f.grid
    if grid.dim == 1:
        writer.writerow(["x", "value"])
        for x, v in zip(grid.x, f.values):
            writer.writerow([f"{x:.17g}", f"{v:.17g}"])
    else:
        writer.writerow(["x", "y", "value"])
        for x, y, v in zip(grid.x, grid.y, f.values):
            writer.writerow([f"{x:.17g}", f"{y:.17g}", f"{v:.17g}"])
    return buf.getvalue()


def write_field_csv(f, path, header_comments=()):
    with open(path, "w", newline="") as fh:
        fh.write(field_to_csv(f, header_comments))
