"""
Text dump of a FieldState on its mesh.

    # pfenkf field dump
    step <n>
    u_D <value>
    du <value>
    du_prev <value>
    [nodes]
    # node x [y] u_x [u_y] d d_prev d_prev2
    ...
    [quadrature]
    # element qp x [y] phi phi_prev
    ...

Values are written with 17 significant digits, so a dump read back
reproduces the state bit for bit and writing the same state twice gives
identical files.
"""
import numpy as np

from pfenkf.exceptions import PfenkfError

from .state import FieldState

HEADER = '# pfenkf field dump'
_FMT = '%.17g'


def _block(ids, columns):
    table = np.column_stack(columns)
    return [' '.join([str(i)] + [_FMT % v for v in row]) for i, row in zip(ids, table)]


def write_field_dump(state: FieldState, disc, path, extra=None):
    mesh = disc.mesh
    dim = mesh.dimension
    lines = [HEADER, f"step {state.step}", f"u_D {_FMT % state.u_D}", f"du {_FMT % state.du}",
             f"du_prev {_FMT % state.du_prev}"]
    for key, value in (extra or {}).items():
        lines.append(f"# {key} {value}")

    axes = ['x', 'y'][:dim]
    lines.append('[nodes]')
    lines.append('# node ' + ' '.join(axes + [f'u_{a}' for a in axes]) + ' d d_prev d_prev2')
    u = state.a_u.reshape(-1, dim)
    lines.extend(_block(range(mesh.n_nodes), [mesh.nodes, u, state.a_d, state.a_d_prev, state.a_d_prev2]))

    lines.append('[quadrature]')
    lines.append('# element qp ' + ' '.join(axes) + ' phi phi_prev')
    n_el, n_qp = state.phi_q.shape
    coords = disc.quadrature_points.reshape(-1, dim)
    labels = [f"{e} {q}" for e in range(n_el) for q in range(n_qp)]
    lines.extend(_block(labels, [coords, state.phi_q.ravel(), state.phi_q_prev.ravel()]))

    with open(path, 'w') as handle:
        handle.write('\n'.join(lines) + '\n')


def read_field_dump(path, disc) -> FieldState:
    mesh = disc.mesh
    dim = mesh.dimension
    scalars, nodes, quadrature = {}, [], []
    section = None
    with open(path) as handle:
        first = handle.readline().strip()
        if first != HEADER:
            raise PfenkfError(f"{path} is not a field dump")
        for line in handle:
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if line in ('[nodes]', '[quadrature]'):
                section = line
            elif section is None:
                key, value = line.split(maxsplit=1)
                scalars[key] = value
            elif section == '[nodes]':
                nodes.append([float(v) for v in line.split()[1:]])
            else:
                quadrature.append([float(v) for v in line.split()[2:]])

    nodes = np.array(nodes).reshape(mesh.n_nodes, -1)
    quadrature = np.array(quadrature).reshape(disc.n_elements * disc.n_qp, -1)
    shape = (disc.n_elements, disc.n_qp)
    return FieldState(
        a_u=nodes[:, dim:2 * dim].ravel(),
        a_d=nodes[:, 2 * dim],
        a_d_prev=nodes[:, 2 * dim + 1],
        a_d_prev2=nodes[:, 2 * dim + 2],
        phi_q=quadrature[:, dim].reshape(shape),
        phi_q_prev=quadrature[:, dim + 1].reshape(shape),
        step=int(scalars['step']),
        u_D=float(scalars['u_D']),
        du=float(scalars['du']),
        du_prev=float(scalars['du_prev']),
    )
