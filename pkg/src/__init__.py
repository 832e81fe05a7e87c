"""
Simplifying-assumption testing for D-vine copulas
This package implements the constant-conditional-correlation test with its
decision-tree partition search, the hierarchical procedure and a Monte Carlo harness.
"""

import logging

# Setup package logging
logging.getLogger("SVCT").setLevel(logging.INFO)

# Initialize module version
__version__ = "0.1.0"
