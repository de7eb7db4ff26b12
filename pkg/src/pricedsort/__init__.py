"""Sorting with priced comparisons: InversionSort, BackboneSort, the {0,1,F,inf} pipeline and lower bounds."""

__version__ = "0.1.0"
