"""
Plain-text mesh files.

    # pfenkf mesh
    name sens
    dimension 2
    nodes <n>
    <id> <x> [<y>]
    elements <n>
    <id> <node> <node> [<node>]
    boundary <name> <n>
    <id> <id> ...
    slit <n>
    <lower> <upper>

Coordinates are written with repr() so a read after a write gives
bit-identical arrays.
"""
import numpy as np

from pfenkf.exceptions import MeshError

from .mesh import Mesh

HEADER = '# pfenkf mesh'


def write_mesh(mesh: Mesh, path):
    lines = [HEADER, f"name {mesh.name}", f"dimension {mesh.dimension}", f"nodes {mesh.n_nodes}"]
    for i, coords in enumerate(mesh.nodes):
        lines.append(' '.join([str(i)] + [repr(float(c)) for c in coords]))
    lines.append(f"elements {mesh.n_elements}")
    for e, nodes in enumerate(mesh.elements):
        lines.append(' '.join(str(int(n)) for n in (e, *nodes)))
    for key in sorted(mesh.boundaries):
        ids = mesh.boundaries[key]
        lines.append(f"boundary {key} {len(ids)}")
        lines.append(' '.join(str(int(i)) for i in ids))
    lines.append(f"slit {len(mesh.slit_pairs)}")
    for lower, upper in mesh.slit_pairs:
        lines.append(f"{int(lower)} {int(upper)}")
    with open(path, 'w') as handle:
        handle.write('\n'.join(lines) + '\n')


def read_mesh(path) -> Mesh:
    with open(path) as handle:
        lines = [line.strip() for line in handle if line.strip()]
    if not lines or lines[0] != HEADER:
        raise MeshError(f"{path} is not a mesh file")

    cursor = iter(lines[1:])

    def keyword(expected):
        parts = next(cursor).split()
        if parts[0] != expected:
            raise MeshError(f"expected '{expected}' in {path}, found '{parts[0]}'")
        return parts[1:]

    try:
        name_parts = keyword('name')
        dimension = int(keyword('dimension')[0])
        n_nodes = int(keyword('nodes')[0])
        nodes = np.array([[float(v) for v in next(cursor).split()[1:]] for _ in range(n_nodes)])
        n_elements = int(keyword('elements')[0])
        elements = np.array([[int(v) for v in next(cursor).split()[1:]] for _ in range(n_elements)])
        boundaries = {}
        parts = next(cursor).split()
        while parts[0] == 'boundary':
            count = int(parts[2])
            boundaries[parts[1]] = np.array([int(v) for v in next(cursor).split()], dtype=np.int64) \
                if count else np.zeros(0, dtype=np.int64)
            parts = next(cursor).split()
        if parts[0] != 'slit':
            raise MeshError(f"expected 'slit' in {path}, found '{parts[0]}'")
        slit_pairs = np.array([[int(v) for v in next(cursor).split()] for _ in range(int(parts[1]))],
                              dtype=np.int64).reshape(-1, 2)
    except (StopIteration, ValueError, IndexError) as error:
        raise MeshError(f"malformed mesh file {path}: {error}") from error

    return Mesh(
        dimension=dimension,
        nodes=nodes.reshape(n_nodes, dimension),
        elements=elements.reshape(n_elements, dimension + 1),
        boundaries=boundaries,
        slit_pairs=slit_pairs,
        name=' '.join(name_parts),
    )
