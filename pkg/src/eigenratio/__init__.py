"""Eigenvalue ratios of vibrating strings and Sturm-Liouville problems."""
