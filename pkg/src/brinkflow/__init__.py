"""brinkflow: 2D Stokes/Brinkman interface flows on Cartesian grids.

Piecewise-constant-coefficient interface problems are reduced to
second-kind boundary integral equations whose operator applications are
constant-coefficient interface solves: a corrected MAC scheme repaired by
locally collocated correction functions, solved with a distributive
Gauss-Seidel geometric multigrid, with traces interpolated back to the
interface.  Includes moving elastic-interface drivers.
"""

from ._kernels import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
