"""jacobigreen - Green's matrices of Jacobi-matrix Hamiltonians."""

__version__ = "1.0.0"
