"""Partial group actions and Fell bundles at finite scale, with numerical
amenability certificates.

Subpackage map:

- ``groups``: finite groups, free groups, integer lattices, word balls
- ``algebra``: block C*-algebras, ideals, partial actions, globalization
- ``bundles``: Fell bundles (semidirect, twisted), sections, expectations
- ``kernels``: finitely supported operator kernels and window norms
- ``approx``: approximation-property witnesses, defects, convexification
- ``cantor``: boundary actions on word space and the associated groupoid
- ``cli``: batch command-line interface
"""

__version__ = "0.1.0"
