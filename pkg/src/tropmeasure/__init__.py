"""Exact convex-geometric computation of canonical measures on tropicalizations
of subvarieties of abelian varieties with totally degenerate part."""

__version__ = "0.1.0"
