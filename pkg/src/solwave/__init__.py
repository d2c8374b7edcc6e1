"""Numerical verification toolkit for solitary waves of the 1D cubic-quintic
nonlinear Schrodinger equation  i psi_t + psi_xx + |psi|^2 psi - |psi|^4 psi = 0."""

__version__ = "0.1.0"
