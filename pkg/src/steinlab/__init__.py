"""Higher-order Stein kernels, their discrepancies, and quantitative Gaussian
approximation on grids."""

from .tensors import SymTensor, gauss_hermite, hermite_eval, hermite_tensor
from .measures import GridDensity, SampleMeasure, moments, poincare_constant, standard_gaussian, uniform
from .kernels import KernelField, MomentMismatch, discrepancy, kernel_1d_iterative, stein_identity_residual
from .variational import HermiteExpansion, solve_next_kernel
from .flow import barbour_solve, evolve_density
from .metrics import entropy, fisher, wasserstein2_1d, zolotarev_1d
from .clt import convolve_ladder, kernel_of_sums

__version__ = "0.1.0"
