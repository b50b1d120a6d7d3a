from .mesh import Mesh, RefineBand, build_mesh_1d, build_mesh_sens  # noqa
from .quadrature import QuadratureRule, quadrature_rule  # noqa
from .basis import eval_basis, basis_matrix, locate_points  # noqa
from .elasticity import MaterialParams, StrainSplit, strain_energy_split, elastic_energy_density  # noqa
from .discretization import Discretization  # noqa
